#include "klb/bregman.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "src/json_util.hpp"

namespace klb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_unit_cube(const Vec& p, const char* who) {
  for (int i = 0; i < p.size(); ++i)
    if (!(p[i] >= 0.0 && p[i] <= 1.0))
      throw std::domain_error(std::string(who) + ": coordinate outside [0,1]");
}

void check_dims(const Vec& p, const Vec& q, const char* who) {
  if (p.size() != q.size())
    throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}

void validate_spd(const Mat& Q) {
  if (Q.rows() != Q.cols()) throw std::invalid_argument("Q not square");
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("Q not symmetric within 1e-12");
  Eigen::SelfAdjointEigenSolver<Mat> es(Q, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw std::invalid_argument("Q not positive definite");
}

}  // namespace

Generator1D gen1d_xlogx() {
  Generator1D g;
  g.label = "xlogx";
  g.g = [](double p) { return p > 0.0 ? p * std::log(p) : 0.0; };
  g.g1 = [](double p) { return std::log(p) + 1.0; };
  g.g2 = [](double p) { return 1.0 / p; };
  g.g3 = [](double p) { return -1.0 / (p * p); };
  g.g1_at_0 = -kInf;
  g.g1_at_1 = 1.0;
  g.g2_at_1 = 1.0;
  return g;
}

Generator1D gen1d_square() {
  Generator1D g;
  g.label = "square";
  g.g = [](double p) { return p * p; };
  g.g1 = [](double p) { return 2.0 * p; };
  g.g2 = [](double) { return 2.0; };
  g.g3 = [](double) { return 0.0; };
  g.g1_at_0 = 0.0;
  g.g1_at_1 = 2.0;
  g.g2_at_1 = 2.0;
  return g;
}

Generator1D gen1d_mirror_xlogx() {
  Generator1D g;
  g.label = "mirror-xlogx";
  g.g = [](double p) { return p < 1.0 ? (1.0 - p) * std::log(1.0 - p) : 0.0; };
  g.g1 = [](double p) { return -std::log(1.0 - p) - 1.0; };
  g.g2 = [](double p) { return 1.0 / (1.0 - p); };
  g.g3 = [](double p) { return 1.0 / ((1.0 - p) * (1.0 - p)); };
  g.g1_at_0 = -1.0;
  g.g1_at_1 = kInf;
  g.g2_at_1 = kInf;
  return g;
}

Generator1D gen1d_neg_entropy(const EntropySpec& e) {
  Generator1D g;
  g.label = "neg-" + e.label;
  g.g = [G = e.G](double p) { return -G(p); };
  g.g1 = [G1 = e.G1](double p) { return -G1(p); };
  g.g2 = [G2 = e.G2](double p) { return -G2(p); };
  g.g3 = [G3 = e.G3](double p) { return -G3(p); };
  g.g1_at_0 = -e.dG_at_0;
  g.g1_at_1 = -e.dG_at_1;
  switch (e.family) {
    case LossFamily::Quadratic:
      g.g2_at_1 = 2.0;
      break;
    case LossFamily::Logarithmic:
    case LossFamily::Boosting:
      g.g2_at_1 = kInf;
      break;
    case LossFamily::Custom: {
      // Limit probed near the endpoint; custom entropies that need an exact
      // separable constant should build a Generator1D directly.
      const double a = -e.G2(1.0 - 1e-7);
      const double b = -e.G2(1.0 - 1e-8);
      g.g2_at_1 = (b > 1.01 * a && b > 1e6) ? kInf : b;
      break;
    }
  }
  return g;
}

GeneratorND gen_sum_separable(const Generator1D& g, int dim) {
  GeneratorND f;
  f.label = "sep-" + g.label;
  f.kind = GeneratorKind::SumSeparable;
  f.dim = dim;
  f.separable = g;
  f.f = [g](const Vec& p) {
    double s = 0.0;
    for (int i = 0; i < p.size(); ++i) s += g.g(p[i]);
    return s;
  };
  f.grad = [g](const Vec& p) {
    Vec out(p.size());
    for (int i = 0; i < p.size(); ++i) out[i] = g.g1(p[i]);
    return out;
  };
  f.hessian = [g](const Vec& p) {
    Mat h = Mat::Zero(p.size(), p.size());
    for (int i = 0; i < p.size(); ++i) h(i, i) = g.g2(p[i]);
    return h;
  };
  return f;
}

GeneratorND gen_mahalanobis(const Mat& Q) {
  validate_spd(Q);
  GeneratorND f;
  f.label = "mahalanobis";
  f.kind = GeneratorKind::Mahalanobis;
  f.dim = static_cast<int>(Q.rows());
  f.Q = Q;
  f.f = [Q](const Vec& p) { return 0.5 * p.dot(Q * p); };
  f.grad = [Q](const Vec& p) { return Vec(Q * p); };
  f.hessian = [Q](const Vec&) { return Q; };
  return f;
}

GeneratorND gen_custom(std::string label, int dim, std::function<double(const Vec&)> f,
                       std::function<Vec(const Vec&)> grad,
                       std::function<Mat(const Vec&)> hessian) {
  GeneratorND g;
  g.label = std::move(label);
  g.kind = GeneratorKind::Custom;
  g.dim = dim;
  g.f = std::move(f);
  g.grad = std::move(grad);
  g.hessian = std::move(hessian);
  return g;
}

GeneratorND gen_kl_generator(int dim) {
  GeneratorND f = gen_sum_separable(gen1d_xlogx(), dim);
  f.label = "gen-kl";
  return f;
}

GeneratorND gen_quadratic(int dim) {
  GeneratorND f = gen_sum_separable(gen1d_square(), dim);
  f.label = "quadratic";
  return f;
}

Mat mahalanobis_Qs() {
  Mat Q = Mat::Zero(3, 3);
  Q(0, 0) = 3.0;
  Q(1, 1) = 2.0;
  Q(2, 2) = 1.0;
  return Q;
}

Mat mahalanobis_Qns() {
  Mat Q(3, 3);
  Q << 3.0, 0.5, 0.5, 0.5, 2.0, 0.5, 0.5, 0.5, 1.0;
  return Q;
}

ExtendedReal breg1(const Generator1D& g, double s, double t) {
  if (!(s >= 0.0 && s <= 1.0 && t >= 0.0 && t <= 1.0))
    throw std::domain_error("breg1: arguments outside [0,1]");
  if (s == t) return ExtendedReal(0.0);
  if (t > 0.0 && t < 1.0) return ExtendedReal(g.g(s) - g.g(t) - (s - t) * g.g1(t));
  if (t == 0.0) {
    if (g.g1_at_0 == -kInf) return ExtendedReal::infinity();
    return ExtendedReal(g.g(s) - g.g(0.0) - s * g.g1_at_0);
  }
  if (g.g1_at_1 == kInf) return ExtendedReal::infinity();
  return ExtendedReal(g.g(s) - g.g(1.0) - (s - 1.0) * g.g1_at_1);
}

ExtendedReal gen_kl(const Vec& p, const Vec& q) {
  check_dims(p, q, "gen_kl");
  check_unit_cube(p, "gen_kl");
  check_unit_cube(q, "gen_kl");
  double sum = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) {
      sum += q[i];
    } else if (q[i] == 0.0) {
      return ExtendedReal::infinity();
    } else if (p[i] != q[i]) {
      sum += p[i] * std::log1p((p[i] - q[i]) / q[i]) - (p[i] - q[i]);
    }
  }
  return ExtendedReal(sum);
}

ExtendedReal bregN(const GeneratorND& f, const Vec& p, const Vec& q) {
  check_dims(p, q, "bregN");
  if (p.size() != f.dim) throw std::invalid_argument("bregN: generator dimension mismatch");
  check_unit_cube(p, "bregN");
  check_unit_cube(q, "bregN");
  if (f.kind == GeneratorKind::SumSeparable) {
    ExtendedReal sum(0.0);
    for (int i = 0; i < p.size(); ++i) {
      sum += breg1(*f.separable, p[i], q[i]);
      if (sum.is_infinite()) return sum;
    }
    return sum;
  }
  return ExtendedReal(f.f(p) - f.f(q) - (p - q).dot(f.grad(q)));
}

double tv(const Vec& p, const Vec& q) {
  check_dims(p, q, "tv");
  return (p - q).cwiseAbs().sum();
}

ExtendedReal chi2(const Vec& p, const Vec& q) {
  check_dims(p, q, "chi2");
  double sum = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    const double d = p[i] - q[i];
    if (d == 0.0) continue;
    if (q[i] == 0.0) return ExtendedReal::infinity();
    sum += d * d / q[i];
  }
  return ExtendedReal(sum);
}

std::string GapCertificate::to_json() const {
  nlohmann::json j;
  j["constant"] = constant;
  j["n_samples"] = n_samples;
  j["min_gap"] = detail::json_num(min_gap);
  j["worst_point"] = std::vector<double>(worst_point.data(),
                                         worst_point.data() + worst_point.size());
  j["pass"] = pass;
  j["sampling_note"] = sampling_note;
  return j.dump(2);
}

GapCertificate hessian_gap_certificate(const GeneratorND& f, double C,
                                       const SampleSpec& sampler) {
  if (!(C > 0.0)) throw std::invalid_argument("hessian_gap_certificate: C must be positive");
  const auto pts = sample_interior_points(f.dim, sampler);
  GapCertificate cert;
  cert.constant = C;
  cert.n_samples = static_cast<long>(pts.size());
  cert.min_gap = kInf;
  cert.sampling_note =
      "sample-based positive-definiteness check (grid + seeded uniform + "
      "corner-biased); sound but not exhaustive for custom generators";
  for (const auto& p : pts) {
    Mat M;
    try {
      M = -f.hessian(p);
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "hessian evaluation failed at [" << p.transpose() << "]: " << e.what();
      throw std::runtime_error(os.str());
    }
    for (int i = 0; i < f.dim; ++i) M(i, i) += C / p[i];
    Eigen::SelfAdjointEigenSolver<Mat> es(M, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin < cert.min_gap) {
      cert.min_gap = lmin;
      cert.worst_point = p;
    }
  }
  cert.pass = cert.min_gap > 0.0;
  return cert;
}

double mahalanobis_constant(const Mat& Q) {
  validate_spd(Q);
  Eigen::SelfAdjointEigenSolver<Mat> es(Q, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double separable_constant(const Generator1D& g) { return g.g2_at_1; }

}  // namespace klb
