#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "klb/extended_real.hpp"
#include "klb/proper_loss.hpp"
#include "klb/verify.hpp"

namespace klb {

/// PAC bound for a single hypothesis with prior mass p0:
/// (2L/(2L-1)) (Lhat + (L Lmax/n) log(1/(delta p0))). Zero prior mass
/// yields +infinity.
double pac_bound(double Lhat_q, long n, double L_max, double lambda, double delta,
                 double prior_mass);

/// Discrete KL divergence between posterior and prior weights.
ExtendedReal kl_discrete(const std::vector<double>& post,
                         const std::vector<double>& prior);

struct BoundInputs {
  long n = 0;
  double delta = 0.0;
  double lambda = 0.0;  // must exceed 1/2 strictly
  double L_max = 0.0;
  double empirical_loss = 0.0;
  double kl_post_prior = 0.0;
};

double pac_bayes_bound(const BoundInputs& in);

struct UniversalBound {
  double bound = 0.0;
  double L_max = 0.0;  // -log Delta, reported alongside
  double C_G = 0.0;    // the (C_G, bound) pair is the meaningful output
};

/// Log-loss-based bound that controls any admissible target loss with
/// constant C_G > -G''(1/2)/2; predictors must live in [Delta, 1-Delta].
UniversalBound universal_pac_bayes_bound(double Lhat_log, long n, double Delta,
                                         double lambda, double delta, double kl,
                                         double C_G);

/// Entropy comparison G(p) <= C G_log(p) on a closed grid.
BoundReport lemma1_check(const EntropySpec& G, double C, double grid_step);

/// Minimize a bound over a log-spaced lambda grid (0.5+1e-3 .. 64).
struct LambdaSearch {
  double lambda = 0.0;
  double bound = 0.0;
};
LambdaSearch minimize_over_lambda(const std::function<double(double)>& bound_fn);

/// Synthetic finite world: X categorical, Y | X Bernoulli(theta_x), a finite
/// hypothesis class of probability predictors, and posterior/prior weights.
struct HarnessSpec {
  std::vector<double> px;
  std::vector<double> theta;              // P(Y=1 | X=x), within [Delta, 1-Delta]
  std::vector<std::vector<double>> preds; // preds[h][x] in [Delta, 1-Delta]
  std::vector<double> prior;
  std::vector<double> posterior;
  double Delta = 0.1;
  long n = 100;
  double delta = 0.05;
  double lambda = 1.0;
  long trials = 2000;
  std::uint64_t seed = 1;
  int theorem = 5;                 // 4, 5 or 6
  std::string target_loss = "quadratic";  // theorem 6 measures this loss
  double C_G = 0.0;                // 0 -> universality_constant + 1e-6

  static HarnessSpec from_json(const std::string& text);
  std::string to_json() const;
};

/// A small well-specified default world (used by the CLI and tests).
HarnessSpec default_harness();

struct CoverageReport {
  long trials = 0;
  long holds = 0;
  double coverage = 0.0;
  double required = 0.0;  // 1 - delta - 2 sqrt(delta(1-delta)/T)
  double min_margin = 0.0;  // min over trials of bound - true loss
  bool clamp_sound = true;  // all sampled log-losses within [0, -log Delta]
  bool dominance_ok = true; // C_G Lhat_log >= Lhat on every dataset (thm 6)
  bool pass = false;
  std::string to_json() const;
};

/// Seeded Monte Carlo check that the selected bound holds with frequency
/// >= 1 - delta - two-sigma binomial slack. True generalization losses are
/// computed exactly by enumeration over the finite (X, Y) world.
CoverageReport monte_carlo_validity(const HarnessSpec& spec);

}  // namespace klb
