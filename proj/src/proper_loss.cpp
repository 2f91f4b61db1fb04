#include "klb/proper_loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "src/json_util.hpp"

namespace klb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double kl_binary(double p, double q) {
  if (p == q) return 0.0;
  double t0 = 0.0, t1 = 0.0;
  if (p > 0.0) {
    if (q == 0.0) return kInf;
    t1 = p * std::log1p((p - q) / q);
  }
  if (p < 1.0) {
    if (q == 1.0) return kInf;
    t0 = (1.0 - p) * std::log1p((q - p) / (1.0 - q));
  }
  return t0 + t1;
}

double boosting_divergence(double p, double q) {
  if (p == q) return 0.0;
  if (q == 0.0 || q == 1.0) return kInf;  // G'_BL unbounded at both ends
  // D_BL = 2 (p+q-2pq - 2rs) / r with r = sqrt(q(1-q)), s = sqrt(p(1-p));
  // the numerator equals (p-q)^2 / (p+q-2pq + 2rs), which avoids the
  // cancellation of the direct Table-I form near p == q.
  const double r = std::sqrt(q * (1.0 - q));
  const double s = std::sqrt(p * (1.0 - p));
  const double a = p + q - 2.0 * p * q;
  const double d = p - q;
  return 2.0 * d * d / (r * (a + 2.0 * r * s));
}

}  // namespace

EntropySpec quadratic_loss() {
  EntropySpec g;
  g.family = LossFamily::Quadratic;
  g.label = "quadratic";
  g.G = [](double p) { return p * (1.0 - p); };
  g.G1 = [](double p) { return 1.0 - 2.0 * p; };
  g.G2 = [](double) { return -2.0; };
  g.G3 = [](double) { return 0.0; };
  g.dG_at_0 = 1.0;
  g.dG_at_1 = -1.0;
  g.stable_regret = [](double p, double q) {
    const double d = p - q;
    return d * d;
  };
  return g;
}

EntropySpec logarithmic_loss() {
  EntropySpec g;
  g.family = LossFamily::Logarithmic;
  g.label = "logarithmic";
  g.G = [](double p) {
    double s = 0.0;
    if (p > 0.0) s -= p * std::log(p);
    if (p < 1.0) s -= (1.0 - p) * std::log(1.0 - p);
    return s;
  };
  g.G1 = [](double p) { return std::log((1.0 - p) / p); };
  g.G2 = [](double p) { return -1.0 / (p * (1.0 - p)); };
  g.G3 = [](double p) {
    const double a = 1.0 - p;
    return 1.0 / (p * p) - 1.0 / (a * a);
  };
  g.dG_at_0 = kInf;
  g.dG_at_1 = -kInf;
  g.stable_regret = kl_binary;
  return g;
}

EntropySpec boosting_loss() {
  EntropySpec g;
  g.family = LossFamily::Boosting;
  g.label = "boosting";
  g.G = [](double p) { return 4.0 * std::sqrt(p * (1.0 - p)); };
  g.G1 = [](double p) {
    return 2.0 * (1.0 - 2.0 * p) / std::sqrt(p * (1.0 - p));
  };
  g.G2 = [](double p) { return -std::pow(p * (1.0 - p), -1.5); };
  g.G3 = [](double p) {
    return 1.5 * (1.0 - 2.0 * p) * std::pow(p * (1.0 - p), -2.5);
  };
  g.dG_at_0 = kInf;
  g.dG_at_1 = -kInf;
  g.stable_regret = boosting_divergence;
  return g;
}

EntropySpec custom_loss(std::string label, std::function<double(double)> G,
                        std::function<double(double)> G1,
                        std::function<double(double)> G2,
                        std::function<double(double)> G3, double dG_at_0,
                        double dG_at_1) {
  EntropySpec g;
  g.family = LossFamily::Custom;
  g.label = std::move(label);
  g.G = std::move(G);
  g.G1 = std::move(G1);
  g.G2 = std::move(G2);
  g.G3 = std::move(G3);
  g.dG_at_0 = dG_at_0;
  g.dG_at_1 = dG_at_1;
  return g;
}

EntropySpec loss_by_name(const std::string& name) {
  if (name == "quadratic" || name == "quad") return quadratic_loss();
  if (name == "logarithmic" || name == "log") return logarithmic_loss();
  if (name == "boosting" || name == "boost") return boosting_loss();
  throw std::invalid_argument("unknown loss family: " + name);
}

PartialLosses partial_losses(const EntropySpec& g, double q) {
  if (q < 0.0 || q > 1.0) throw std::domain_error("partial_losses: q outside [0,1]");
  PartialLosses out;
  if (q == 0.0) {
    out.l0 = ExtendedReal(g.G(0.0));
    out.l1 = (g.dG_at_0 == kInf) ? ExtendedReal::infinity()
                                 : ExtendedReal(g.G(0.0) + g.dG_at_0);
    return out;
  }
  if (q == 1.0) {
    out.l1 = ExtendedReal(g.G(1.0));
    out.l0 = (g.dG_at_1 == -kInf) ? ExtendedReal::infinity()
                                  : ExtendedReal(g.G(1.0) - g.dG_at_1);
    return out;
  }
  const double gq = g.G(q);
  const double g1 = g.G1(q);
  out.l0 = ExtendedReal(gq - q * g1);
  out.l1 = ExtendedReal(gq + (1.0 - q) * g1);
  return out;
}

ExtendedReal expected_loss(const EntropySpec& g, double p, double q) {
  if (p < 0.0 || p > 1.0) throw std::domain_error("expected_loss: p outside [0,1]");
  const PartialLosses pl = partial_losses(g, q);
  return scale(1.0 - p, pl.l0) + scale(p, pl.l1);
}

ExtendedReal regret(const EntropySpec& g, double p, double q) {
  if (p == q) return ExtendedReal(0.0);
  if (g.stable_regret) {
    const double v = g.stable_regret(p, q);
    return std::isinf(v) ? ExtendedReal::infinity() : ExtendedReal(v);
  }
  const ExtendedReal L = expected_loss(g, p, q);
  if (L.is_infinite()) return ExtendedReal::infinity();
  return ExtendedReal(L.value() - g.G(p));
}

double weight(const EntropySpec& g, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("weight: p outside (0,1)");
  return -g.G2(p);
}

double universality_constant(const EntropySpec& g) {
  const double c = 0.5 * weight(g, 0.5);
  if (!(std::isfinite(c) && c > 0.0))
    throw std::domain_error("universality_constant: w(1/2)/2 not positive finite");
  return c;
}

bool AdmissibilityReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const AdmissibilityCheck& c) { return c.pass; });
}

std::string AdmissibilityReport::to_json() const {
  nlohmann::json j;
  j["family"] = family;
  j["checks"] = nlohmann::json::array();
  for (const auto& c : checks) {
    j["checks"].push_back({{"name", c.name},
                           {"pass", c.pass},
                           {"worst_point", detail::json_num(c.worst_point)},
                           {"worst_value", detail::json_num(c.worst_value)}});
  }
  return j.dump(2);
}

AdmissibilityReport check_admissible(const EntropySpec& g, double grid_step) {
  if (!(grid_step > 0.0 && grid_step <= 0.1))
    throw std::invalid_argument("check_admissible: grid_step outside (0, 0.1]");
  AdmissibilityReport rep;
  rep.family = g.label;

  std::vector<double> interior;
  for (double q = grid_step; q < 1.0 - grid_step / 2; q += grid_step)
    interior.push_back(q);

  // Properness: w > 0 and the Shuford relation -l1'/(1-p) = l0'/p = w(p),
  // with l0', l1' taken by central differences of the actual partial losses.
  {
    AdmissibilityCheck c{"properness_shuford", true, 0.0, 0.0};
    for (double q : interior) {
      const double w = -g.G2(q);
      if (!(w > 0.0)) {
        c.pass = false;
        c.worst_point = q;
        c.worst_value = w;
        break;
      }
      const double h = std::min(1e-5, 0.005 * std::min(q, 1.0 - q));
      const auto lo = partial_losses(g, q - h);
      const auto hi = partial_losses(g, q + h);
      const double d0 = (hi.l0.value() - lo.l0.value()) / (2.0 * h);
      const double d1 = (hi.l1.value() - lo.l1.value()) / (2.0 * h);
      const double dev = std::max(std::abs(-d1 / (1.0 - q) - w), std::abs(d0 / q - w)) /
                         std::max(1.0, w);
      if (dev > c.worst_value) {
        c.worst_value = dev;
        c.worst_point = q;
      }
    }
    if (c.pass) c.pass = c.worst_value <= 1e-3;
    rep.checks.push_back(c);
  }

  // Convexity of l(y,.) via the second derivative of L(p,.) at p in {0,1}:
  // w(q) + q w'(q) >= 0 and w(q) - (1-q) w'(q) >= 0.
  {
    AdmissibilityCheck c{"convexity_extremes", true, 0.0, 0.0};
    double worst = kInf;
    for (double q : interior) {
      const double w = -g.G2(q);
      const double w1 = -g.G3(q);
      const double m = std::min(w + q * w1, w - (1.0 - q) * w1);
      if (m < worst) {
        worst = m;
        c.worst_point = q;
      }
    }
    c.worst_value = worst;
    c.pass = worst >= -1e-9 * std::max(1.0, std::abs(worst));
    rep.checks.push_back(c);
  }

  // Fairness: G(0) = G(1) = 0.
  {
    AdmissibilityCheck c{"fairness", true, 0.0, 0.0};
    const double a = std::abs(g.G(0.0));
    const double b = std::abs(g.G(1.0));
    c.worst_value = std::max(a, b);
    c.worst_point = a >= b ? 0.0 : 1.0;
    c.pass = c.worst_value <= 1e-12;
    rep.checks.push_back(c);
  }

  // Regularity: q l1(q) -> 0 as q -> 0 and (1-q) l0(q) -> 0 as q -> 1,
  // checked as a decreasing tail over q = 1e-3, 1e-4, ..., 1e-8.
  {
    AdmissibilityCheck c{"regularity", true, 0.0, 0.0};
    for (int side = 0; side < 2; ++side) {
      double prev = kInf;
      for (int k = 3; k <= 8; ++k) {
        const double eps = std::pow(10.0, -k);
        const double q = side == 0 ? eps : 1.0 - eps;
        const auto pl = partial_losses(g, q);
        const double prod = side == 0 ? q * pl.l1.value() : (1.0 - q) * pl.l0.value();
        if (!(prod <= prev + 1e-12)) {
          c.pass = false;
          c.worst_point = q;
          c.worst_value = prod;
        }
        prev = prod;
        if (k == 8 && prod > 1e-3) {
          c.pass = false;
          c.worst_point = q;
          c.worst_value = prod;
        }
        c.worst_value = std::max(c.worst_value, prod);
      }
    }
    rep.checks.push_back(c);
  }

  // Weight envelope around w(1/2): w(1/2)/(2(1-q)) <= w(q) <= w(1/2)/(2q)
  // on (0,1/2), mirrored on [1/2,1).
  {
    AdmissibilityCheck c{"weight_envelope", true, 0.0, 0.0};
    const double wh = -g.G2(0.5);
    for (double q : interior) {
      const double w = -g.G2(q);
      const double lo = q < 0.5 ? wh / (2.0 * (1.0 - q)) : wh / (2.0 * q);
      const double hi = q < 0.5 ? wh / (2.0 * q) : wh / (2.0 * (1.0 - q));
      const double viol = std::max(lo - w, w - hi);
      if (viol > c.worst_value) {
        c.worst_value = viol;
        c.worst_point = q;
      }
    }
    c.pass = c.worst_value <= 1e-9 * std::max(1.0, std::abs(wh));
    rep.checks.push_back(c);
  }

  return rep;
}

}  // namespace klb
