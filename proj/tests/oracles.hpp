#pragma once

// Test-only independent oracles: finite differences, power iteration,
// dense grid searches. These intentionally avoid the library's own
// evaluation paths.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

namespace testo {

inline double fd1(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double fd2(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

inline double power_iteration_lambda_max(const Eigen::MatrixXd& Q, int iters = 2000) {
  Eigen::VectorXd v = Eigen::VectorXd::Ones(Q.rows());
  v.normalize();
  double lam = 0.0;
  for (int i = 0; i < iters; ++i) {
    Eigen::VectorXd w = Q * v;
    lam = w.norm();
    v = w / lam;
  }
  return lam;
}

// Dense line-search oracle for min_{q in simplex ∩ {h.q = mu}} obj(q), m = 3.
// The feasible set is the segment between the (at most two) points where the
// hyperplane crosses the simplex edges; the oracle scans it at `step`.
inline double hyperplane_line_oracle(const Eigen::VectorXd& h, double mu,
                                     const std::function<double(const Eigen::VectorXd&)>& obj,
                                     double step = 1e-4) {
  std::vector<Eigen::VectorXd> ends;
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      if (h[i] == h[j]) continue;
      const double t = (mu - h[j]) / (h[i] - h[j]);
      if (t >= -1e-12 && t <= 1.0 + 1e-12) {
        Eigen::VectorXd q = Eigen::VectorXd::Zero(3);
        q[i] = std::min(std::max(t, 0.0), 1.0);
        q[j] = 1.0 - q[i];
        ends.push_back(q);
      }
    }
  }
  double best = std::numeric_limits<double>::infinity();
  if (ends.size() < 2) return best;
  const Eigen::VectorXd a = ends.front(), b = ends.back();
  for (double t = 0.0; t <= 1.0 + step / 2; t += step) {
    const Eigen::VectorXd q = a + std::min(t, 1.0) * (b - a);
    best = std::min(best, obj(q));
  }
  return best;
}

// Dense 2-simplex oracle for min obj(q) subject to constraint(q) >= eps.
inline double simplex_grid_oracle(const std::function<double(const Eigen::VectorXd&)>& obj,
                                  const std::function<double(const Eigen::VectorXd&)>& con,
                                  double eps, int N = 1000) {
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd q(3);
  for (int i = 0; i <= N; ++i) {
    for (int j = 0; j <= N - i; ++j) {
      q[0] = static_cast<double>(i) / N;
      q[1] = static_cast<double>(j) / N;
      q[2] = 1.0 - q[0] - q[1];
      if (q[2] < 0.0) q[2] = 0.0;
      if (con(q) >= eps) best = std::min(best, obj(q));
    }
  }
  return best;
}

}  // namespace testo
