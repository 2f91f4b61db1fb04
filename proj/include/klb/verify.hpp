#pragma once

#include <string>
#include <vector>

#include "klb/bregman.hpp"
#include "klb/extended_real.hpp"
#include "klb/proper_loss.hpp"
#include "klb/sampling.hpp"

namespace klb {

/// Absolute tolerance on the divergence scale for all inequality checks.
constexpr double kViolationTol = 1e-9;

/// Binary KL divergence with exact boundary semantics.
ExtendedReal kl_binary(double p, double q);

struct BoundReport {
  std::string inequality_id;
  double constant_used = 0.0;
  long n_points = 0;
  // Positive means violated; -inf when every comparison was trivially
  // satisfied at infinity. Boundary comparisons never subtract infinities.
  double max_violation = -std::numeric_limits<double>::infinity();
  Vec worst_p;
  Vec worst_q;
  bool pass = false;
  bool precondition_pass = true;
  std::string note;
  std::string to_json() const;
};

/// Thm 1: C * D_KL(p||q) >= D_{-G}(p||q) on the closed [0,1]^2 grid
/// (step snapped to 1/round(1/step) so the endpoints are exact).
BoundReport verify_thm1(const EntropySpec& G, double C, double grid_step);

/// Thm 2: C * gen_kl(p||q) >= D_f(p||q) over sampled pairs in [0,1]^{2m};
/// the Hessian-gap certificate runs first and is reported as precondition.
BoundReport verify_thm2(const GeneratorND& f, double C, const SampleSpec& sampler);

/// Thm 3 (separable): componentwise check C * d_KL(p||q) >= d_g(p||q) on
/// [0,1]^2, which implies the sum form. Preconditions (C > g''(1) and
/// convexity of d_g(p||.) at the extreme p) are reported distinctly.
BoundReport verify_thm3(const Generator1D& g, double C, const SampleSpec& sampler);

struct LocalFisherResult {
  std::vector<double> dp;      // the exact perturbations used
  std::vector<double> ratios;  // r_k = [D_{-G}(p||p+dp_k)/C] / [dp_k^2 J(p)/2]
  bool limsup_ok = false;
  bool differences_decreasing = false;
  bool pass = false;
};

/// Cor. 1 as a limsup contract over dyadic dp: tail ratios stay <= 1+1e-3
/// and successive differences shrink. dp below 1e-8 truncates the sequence.
LocalFisherResult local_fisher_check(const EntropySpec& G, double C, double p,
                                     double dp0, int halvings);

/// Joint weighting p_{X,T} with rowwise predictive models p_{Y|X}, p_{Y|T}.
struct JointWeights {
  Mat w;                          // nx x nt, nonnegative, sums to 1
  std::vector<Vec> p_y_given_x;   // nx stochastic vectors over the Y alphabet
  std::vector<Vec> p_y_given_t;   // nt stochastic vectors
};

JointWeights make_random_joint(int nx, int nt, int m, std::uint64_t seed);

/// Expected-divergence (information-bottleneck) bound:
/// E[D_f] <= C * E[D_KL] under the joint weighting.
BoundReport expected_bound_check(const GeneratorND& f, double C, const JointWeights& jw,
                                 const SampleSpec& cert_sampler);

struct PinskerTriple {
  ExtendedReal kl;
  double half_tv_sq = 0.0;
  double half_l2_sq = 0.0;
};

/// (D_KL, TV^2/2, ||p-q||^2/2) for simplex members; the chain
/// kl >= tv-term >= l2-term is the Pinsker/quadratic comparison.
PinskerTriple pinsker_compare(const Vec& p, const Vec& q);

}  // namespace klb
