#include "klb/sampling.hpp"

#include <cmath>
#include <stdexcept>

namespace klb {

namespace {

constexpr int kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19,
                           23, 29, 31, 37, 41, 43, 47, 53};
constexpr long kGridCap = 20000;

double halton(long index, int base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * (index % base);
    index /= base;
  }
  return r;
}

}  // namespace

std::vector<Eigen::VectorXd> sample_interior_points(int m, const SampleSpec& spec) {
  if (m < 1 || m > 16) throw std::invalid_argument("sample_interior_points: dim outside [1,16]");
  if (!(spec.grid_step > 0.0 && spec.grid_step < 1.0))
    throw std::invalid_argument("sample_interior_points: bad grid_step");
  std::vector<Eigen::VectorXd> pts;

  // Regular interior grid, replaced by a Halton set when |grid|^m blows up.
  std::vector<double> axis;
  for (double v = spec.grid_step; v < 1.0 - spec.grid_step / 2; v += spec.grid_step)
    axis.push_back(v);
  double total = std::pow(static_cast<double>(axis.size()), m);
  if (!axis.empty() && total <= static_cast<double>(kGridCap)) {
    Eigen::VectorXd p(m);
    std::vector<std::size_t> idx(m, 0);
    while (true) {
      for (int d = 0; d < m; ++d) p[d] = axis[idx[d]];
      pts.push_back(p);
      int d = 0;
      while (d < m && ++idx[d] == axis.size()) idx[d++] = 0;
      if (d == m) break;
    }
  } else {
    const double lo = spec.grid_step, hi = 1.0 - spec.grid_step;
    for (long i = 1; i <= kGridCap; ++i) {
      Eigen::VectorXd p(m);
      for (int d = 0; d < m; ++d) p[d] = lo + (hi - lo) * halton(i, kPrimes[d]);
      pts.push_back(p);
    }
  }

  Rng rng(spec.seed);
  for (long i = 0; i < spec.n_random; ++i) {
    Eigen::VectorXd p(m);
    for (int d = 0; d < m; ++d) p[d] = rng.uniform01();
    pts.push_back(p);
  }

  // Corner-biased points: every corner displaced inward by corner_margin,
  // then random points with coordinates snapped toward the faces.
  const double eps = spec.corner_margin;
  if (m <= 12) {
    for (long mask = 0; mask < (1L << m); ++mask) {
      Eigen::VectorXd p(m);
      for (int d = 0; d < m; ++d) p[d] = (mask >> d) & 1 ? 1.0 - eps : eps;
      pts.push_back(p);
    }
  }
  for (long i = 0; i < spec.n_random / 4 + 1; ++i) {
    Eigen::VectorXd p(m);
    for (int d = 0; d < m; ++d) {
      const double u = rng.uniform01();
      const double v = rng.uniform01();
      p[d] = u < 1.0 / 3 ? eps : (u < 2.0 / 3 ? 1.0 - eps : v);
    }
    pts.push_back(p);
  }
  return pts;
}

std::vector<Eigen::VectorXd> sample_simplex_points(int m, long n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Eigen::VectorXd> pts;
  pts.reserve(n);
  for (long i = 0; i < n; ++i) {
    Eigen::VectorXd p(m);
    double s = 0.0;
    for (int d = 0; d < m; ++d) {
      p[d] = -std::log(rng.uniform01());
      s += p[d];
    }
    pts.push_back(p / s);
  }
  return pts;
}

}  // namespace klb
