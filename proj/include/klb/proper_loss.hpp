#pragma once

#include <functional>
#include <string>
#include <vector>

#include "klb/extended_real.hpp"

namespace klb {

enum class LossFamily { Quadratic, Logarithmic, Boosting, Custom };

/// Canonical representation of a binary proper loss by its generalized
/// entropy G (the Savage form). G must be concave and fair (G(0)=G(1)=0);
/// derivatives are supplied analytically, including the one-sided limits
/// of G' at the endpoints (+-infinity allowed). All logs are natural.
struct EntropySpec {
  LossFamily family = LossFamily::Custom;
  std::string label;
  std::function<double(double)> G;   // [0,1]
  std::function<double(double)> G1;  // (0,1)
  std::function<double(double)> G2;  // (0,1)
  std::function<double(double)> G3;  // (0,1)
  double dG_at_0 = 0.0;  // lim_{p->0+} G'(p), may be +inf
  double dG_at_1 = 0.0;  // lim_{p->1-} G'(p), may be -inf
  // Cancellation-free regret for the built-in families; empty for Custom,
  // in which case regret falls back to L(p,q) - G(p).
  std::function<double(double, double)> stable_regret;
};

EntropySpec quadratic_loss();
EntropySpec logarithmic_loss();
EntropySpec boosting_loss();
EntropySpec custom_loss(std::string label, std::function<double(double)> G,
                        std::function<double(double)> G1,
                        std::function<double(double)> G2,
                        std::function<double(double)> G3, double dG_at_0,
                        double dG_at_1);
/// Built-in lookup by name ("quadratic", "log"/"logarithmic", "boosting").
EntropySpec loss_by_name(const std::string& name);

struct PartialLosses {
  ExtendedReal l0;
  ExtendedReal l1;
};

/// l0(q) = G(q) - q G'(q), l1(q) = G(q) + (1-q) G'(q); endpoints use the
/// one-sided limits (boundary divergence yields +infinity).
PartialLosses partial_losses(const EntropySpec& g, double q);

/// L(p,q) = (1-p) l0(q) + p l1(q), with 0 * inf := 0.
ExtendedReal expected_loss(const EntropySpec& g, double p, double q);

/// Regret = L(p,q) - G(p) = D_{-G}(p||q). Zero iff p == q.
ExtendedReal regret(const EntropySpec& g, double p, double q);

/// w(p) = -G''(p) on (0,1); boundary arguments are out of domain.
double weight(const EntropySpec& g, double p);

/// The KL-domination constant w(1/2)/2; callers add slack for the strict
/// inequality.
double universality_constant(const EntropySpec& g);

struct AdmissibilityCheck {
  std::string name;
  bool pass = false;
  double worst_point = 0.0;
  double worst_value = 0.0;
};

struct AdmissibilityReport {
  std::string family;
  std::vector<AdmissibilityCheck> checks;
  bool all_pass() const;
  std::string to_json() const;
};

/// Grid certification of Definition-1 admissibility: properness (Shuford
/// relation against finite differences of the partial losses plus w > 0),
/// loss convexity at the extreme p in {0,1}, fairness, regularity limits,
/// and the weight envelope around w(1/2).
AdmissibilityReport check_admissible(const EntropySpec& g, double grid_step);

}  // namespace klb
