#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>

#include "klb/extended_real.hpp"
#include "klb/proper_loss.hpp"
#include "klb/sampling.hpp"

namespace klb {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Scalar Bregman generator on [0,1]: continuous extension g on the closed
/// interval, derivatives on the interior, and the cached one-sided limits
/// of g' at the endpoints (signed infinities allowed). g2_at_1 caches the
/// limit of g'' at 1 for the separable-divergence constant.
struct Generator1D {
  std::string label;
  std::function<double(double)> g;   // [0,1]
  std::function<double(double)> g1;  // (0,1)
  std::function<double(double)> g2;  // (0,1)
  std::function<double(double)> g3;  // (0,1)
  double g1_at_0 = 0.0;  // may be -inf
  double g1_at_1 = 0.0;  // may be +inf
  double g2_at_1 = 0.0;  // may be +inf
};

/// g(p) = p log p, the generalized-KL generator (0 log 0 := 0).
Generator1D gen1d_xlogx();
/// g(p) = p^2.
Generator1D gen1d_square();
/// g = -G for a proper loss' generalized entropy (the regret generator).
Generator1D gen1d_neg_entropy(const EntropySpec& e);
/// g(p) = (1-p) log (1-p); g''(1) is unbounded.
Generator1D gen1d_mirror_xlogx();

enum class GeneratorKind { SumSeparable, Mahalanobis, Custom };

/// Multivariate Bregman generator on [0,1]^m. Custom generators must have
/// finite gradients on the closed cube; Hessians are user-supplied (no
/// numeric differentiation inside certificates).
struct GeneratorND {
  std::string label;
  GeneratorKind kind = GeneratorKind::Custom;
  int dim = 0;
  std::function<double(const Vec&)> f;
  std::function<Vec(const Vec&)> grad;
  std::function<Mat(const Vec&)> hessian;
  std::optional<Generator1D> separable;  // set when kind == SumSeparable
  std::optional<Mat> Q;                  // set when kind == Mahalanobis
};

GeneratorND gen_sum_separable(const Generator1D& g, int dim);
/// f(p) = 1/2 p^T Q p, so that H_f = Q and D_f is the Mahalanobis distance
/// 1/2 (p-q)^T Q (p-q). Q must be symmetric positive definite.
GeneratorND gen_mahalanobis(const Mat& Q);
GeneratorND gen_custom(std::string label, int dim, std::function<double(const Vec&)> f,
                       std::function<Vec(const Vec&)> grad,
                       std::function<Mat(const Vec&)> hessian);
/// f(p) = sum p_i log p_i (SumSeparable over gen1d_xlogx).
GeneratorND gen_kl_generator(int dim);
/// f(p) = sum p_i^2 (SumSeparable over gen1d_square).
GeneratorND gen_quadratic(int dim);

/// Paper's example parameter matrices (3x3).
Mat mahalanobis_Qs();
Mat mahalanobis_Qns();

/// Scalar Bregman divergence with full boundary semantics: interior formula,
/// one-sided derivative limits for t on the boundary (+infinity when the
/// limit is infinite), and zero at the matching corners.
ExtendedReal breg1(const Generator1D& g, double s, double t);

/// Generalized KL divergence on [0,1]^m: sum p_i log(p_i/q_i) - p_i + q_i,
/// with 0 log(0/x) := 0; +infinity iff some p_i > 0 has q_i = 0.
ExtendedReal gen_kl(const Vec& p, const Vec& q);

/// D_f(p||q); SumSeparable generators evaluate componentwise via breg1,
/// Mahalanobis/Custom use the closed-cube formula.
ExtendedReal bregN(const GeneratorND& f, const Vec& p, const Vec& q);

/// Total variation sum |p_i - q_i| (an f-divergence, not Bregman).
double tv(const Vec& p, const Vec& q);

/// Neyman chi-square sum (p_i-q_i)^2 / q_i; +infinity where q_i = 0 != p_i.
ExtendedReal chi2(const Vec& p, const Vec& q);

struct GapCertificate {
  double constant = 0.0;
  long n_samples = 0;
  double min_gap = 0.0;  // min over samples of lambda_min(C H_KL - H_f)
  Vec worst_point;
  bool pass = false;
  std::string sampling_note;
  std::string to_json() const;
};

/// Samples lambda_min(C H_KL(p) - H_f(p)) over interior points of [0,1]^m
/// (deterministic grid + seeded uniform + corner-biased); passes iff the
/// minimum sampled gap is positive. Sample-based, hence sound but not
/// exhaustive for Custom generators.
GapCertificate hessian_gap_certificate(const GeneratorND& f, double C,
                                       const SampleSpec& sampler);

/// lambda_max(Q) for symmetric positive-definite Q; callers add slack for
/// the strict Mahalanobis condition.
double mahalanobis_constant(const Mat& Q);

/// The separable-divergence constant g''(1); +infinity means the bound is
/// not useful.
double separable_constant(const Generator1D& g);

}  // namespace klb
