#include "klb/pacbayes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "klb/sampling.hpp"
#include "src/json_util.hpp"

namespace klb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_lambda(double lambda) {
  if (!(lambda > 0.5)) throw std::invalid_argument("lambda must exceed 1/2 strictly");
}

void require_delta(double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("delta outside (0,1]");
}

// l(y, q) for the named loss via the partial-loss representation.
double loss_value(const EntropySpec& e, int y, double q) {
  const PartialLosses pl = partial_losses(e, q);
  return y == 1 ? pl.l1.value() : pl.l0.value();
}

double log_loss(int y, double q) {
  return y == 1 ? -std::log(q) : -std::log(1.0 - q);
}

}  // namespace

double pac_bound(double Lhat_q, long n, double L_max, double lambda, double delta,
                 double prior_mass) {
  require_lambda(lambda);
  require_delta(delta);
  if (prior_mass < 0.0 || prior_mass > 1.0)
    throw std::invalid_argument("prior_mass outside [0,1]");
  if (prior_mass == 0.0) return kInf;
  const double front = 2.0 * lambda / (2.0 * lambda - 1.0);
  return front * (Lhat_q + lambda * L_max / static_cast<double>(n) *
                               std::log(1.0 / (delta * prior_mass)));
}

ExtendedReal kl_discrete(const std::vector<double>& post,
                         const std::vector<double>& prior) {
  if (post.size() != prior.size()) throw std::invalid_argument("kl_discrete: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < post.size(); ++i) {
    if (post[i] == 0.0) continue;
    if (prior[i] == 0.0) return ExtendedReal::infinity();
    sum += post[i] * std::log(post[i] / prior[i]);
  }
  return ExtendedReal(sum);
}

double pac_bayes_bound(const BoundInputs& in) {
  require_lambda(in.lambda);
  require_delta(in.delta);
  const double front = 2.0 * in.lambda / (2.0 * in.lambda - 1.0);
  return front * (in.empirical_loss +
                  in.lambda * in.L_max / static_cast<double>(in.n) *
                      (in.kl_post_prior + std::log(1.0 / in.delta)));
}

UniversalBound universal_pac_bayes_bound(double Lhat_log, long n, double Delta,
                                         double lambda, double delta, double kl,
                                         double C_G) {
  require_lambda(lambda);
  require_delta(delta);
  if (!(Delta > 0.0 && Delta < 0.5))
    throw std::invalid_argument("Delta outside (0, 1/2): clamp range degenerate");
  if (!(C_G > 0.0)) throw std::invalid_argument("C_G must be positive");
  UniversalBound out;
  out.L_max = -std::log(Delta);
  out.C_G = C_G;
  out.bound = 2.0 * lambda * C_G / (2.0 * lambda - 1.0) *
              (Lhat_log + lambda * out.L_max / static_cast<double>(n) *
                              (kl + std::log(1.0 / delta)));
  return out;
}

BoundReport lemma1_check(const EntropySpec& G, double C, double grid_step) {
  BoundReport rep;
  rep.inequality_id = "lemma1:" + G.label;
  rep.constant_used = C;
  const EntropySpec glog = logarithmic_loss();
  const long n = std::lround(1.0 / grid_step);
  rep.worst_p = Vec::Zero(1);
  rep.worst_q = Vec::Zero(0);
  for (long i = 0; i <= n; ++i) {
    const double p = static_cast<double>(i) / static_cast<double>(n);
    const double r = G.G(p) - C * glog.G(p);
    ++rep.n_points;
    if (r > rep.max_violation) {
      rep.max_violation = r;
      rep.worst_p[0] = p;
    }
  }
  rep.pass = rep.max_violation <= kViolationTol;
  return rep;
}

LambdaSearch minimize_over_lambda(const std::function<double(double)>& bound_fn) {
  LambdaSearch best{0.0, kInf};
  for (double lg = std::log(0.5 + 1e-3); lg <= std::log(64.0) + 1e-12;
       lg += (std::log(64.0) - std::log(0.5 + 1e-3)) / 200.0) {
    const double lam = std::exp(lg);
    const double b = bound_fn(lam);
    if (b < best.bound) best = {lam, b};
  }
  return best;
}

HarnessSpec default_harness() {
  HarnessSpec h;
  h.px = {0.5, 0.3, 0.2};
  h.theta = {0.2, 0.5, 0.8};
  h.preds = {{0.2, 0.5, 0.8},   // the truth
             {0.5, 0.5, 0.5},   // constant
             {0.3, 0.6, 0.7},   // mildly off
             {0.8, 0.5, 0.2}};  // reversed
  h.prior = {0.25, 0.25, 0.25, 0.25};
  h.posterior = h.prior;
  return h;
}

HarnessSpec HarnessSpec::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  HarnessSpec h = default_harness();
  if (j.contains("px")) h.px = j["px"].get<std::vector<double>>();
  if (j.contains("theta")) h.theta = j["theta"].get<std::vector<double>>();
  if (j.contains("preds")) h.preds = j["preds"].get<std::vector<std::vector<double>>>();
  if (j.contains("prior")) h.prior = j["prior"].get<std::vector<double>>();
  if (j.contains("posterior")) h.posterior = j["posterior"].get<std::vector<double>>();
  if (j.contains("Delta")) h.Delta = j["Delta"];
  if (j.contains("n")) h.n = j["n"];
  if (j.contains("delta")) h.delta = j["delta"];
  if (j.contains("lambda")) h.lambda = j["lambda"];
  if (j.contains("trials")) h.trials = j["trials"];
  if (j.contains("seed")) h.seed = j["seed"];
  if (j.contains("theorem")) h.theorem = j["theorem"];
  if (j.contains("target_loss")) h.target_loss = j["target_loss"];
  if (j.contains("C_G")) h.C_G = j["C_G"];
  return h;
}

std::string HarnessSpec::to_json() const {
  nlohmann::json j;
  j["px"] = px;
  j["theta"] = theta;
  j["preds"] = preds;
  j["prior"] = prior;
  j["posterior"] = posterior;
  j["Delta"] = Delta;
  j["n"] = n;
  j["delta"] = delta;
  j["lambda"] = lambda;
  j["trials"] = trials;
  j["seed"] = seed;
  j["theorem"] = theorem;
  j["target_loss"] = target_loss;
  j["C_G"] = C_G;
  return j.dump(2);
}

std::string CoverageReport::to_json() const {
  nlohmann::json j;
  j["trials"] = trials;
  j["holds"] = holds;
  j["coverage"] = coverage;
  j["required"] = required;
  j["min_margin"] = detail::json_num(min_margin);
  j["clamp_sound"] = clamp_sound;
  j["dominance_ok"] = dominance_ok;
  j["pass"] = pass;
  return j.dump(2);
}

CoverageReport monte_carlo_validity(const HarnessSpec& spec) {
  const std::size_t nx = spec.px.size();
  const std::size_t nh = spec.preds.size();
  if (spec.theta.size() != nx) throw std::invalid_argument("harness: theta size mismatch");
  if (spec.prior.size() != nh || spec.posterior.size() != nh)
    throw std::invalid_argument("harness: prior/posterior size mismatch");
  for (double t : spec.theta)
    if (t < spec.Delta || t > 1.0 - spec.Delta)
      throw std::invalid_argument("harness: theta outside [Delta, 1-Delta]");
  for (const auto& row : spec.preds) {
    if (row.size() != nx) throw std::invalid_argument("harness: prediction row size mismatch");
    for (double q : row)
      if (q < spec.Delta || q > 1.0 - spec.Delta)
        throw std::invalid_argument("harness: hypothesis outside [Delta, 1-Delta]");
  }
  require_lambda(spec.lambda);
  require_delta(spec.delta);

  const EntropySpec target = loss_by_name(spec.target_loss);
  const double C_G =
      spec.C_G > 0.0 ? spec.C_G : universality_constant(target) * (1.0 + 1e-6);
  const double log_cap = -std::log(spec.Delta);

  // L_max of the target loss over the clamped prediction range.
  double L_max = 0.0;
  for (const auto& row : spec.preds)
    for (double q : row)
      L_max = std::max({L_max, loss_value(target, 0, q), loss_value(target, 1, q)});

  // Exact generalization losses by enumeration.
  std::vector<double> L_h(nh, 0.0);  // per hypothesis, target loss
  for (std::size_t h = 0; h < nh; ++h)
    for (std::size_t x = 0; x < nx; ++x)
      L_h[h] += spec.px[x] * ((1.0 - spec.theta[x]) * loss_value(target, 0, spec.preds[h][x]) +
                              spec.theta[x] * loss_value(target, 1, spec.preds[h][x]));
  double L_pQ = 0.0;
  for (std::size_t h = 0; h < nh; ++h) L_pQ += spec.posterior[h] * L_h[h];
  const double kl = kl_discrete(spec.posterior, spec.prior).value();

  CoverageReport rep;
  rep.trials = spec.trials;
  rep.min_margin = kInf;
  Rng master(spec.seed);
  for (long t = 0; t < spec.trials; ++t) {
    Rng rng(spec.seed ^ (0x9E3779B97F4A7C15ULL * (t + 1)));
    std::vector<double> Lhat_h(nh, 0.0);
    double Lhat_log = 0.0;
    for (long i = 0; i < spec.n; ++i) {
      double u = rng.uniform01();
      std::size_t x = 0;
      for (; x + 1 < nx; ++x) {
        u -= spec.px[x];
        if (u <= 0.0) break;
      }
      const int y = rng.uniform01() < spec.theta[x] ? 1 : 0;
      for (std::size_t h = 0; h < nh; ++h)
        Lhat_h[h] += loss_value(target, y, spec.preds[h][x]);
      for (std::size_t h = 0; h < nh; ++h) {
        const double ll = log_loss(y, spec.preds[h][x]);
        if (ll < -1e-12 || ll > log_cap + 1e-12) rep.clamp_sound = false;
        Lhat_log += spec.posterior[h] * ll;
      }
    }
    for (auto& v : Lhat_h) v /= static_cast<double>(spec.n);
    Lhat_log /= static_cast<double>(spec.n);
    double Lhat_pQ = 0.0;
    for (std::size_t h = 0; h < nh; ++h) Lhat_pQ += spec.posterior[h] * Lhat_h[h];

    bool holds = true;
    double margin = kInf;
    if (spec.theorem == 4) {
      for (std::size_t h = 0; h < nh; ++h) {
        const double b =
            pac_bound(Lhat_h[h], spec.n, L_max, spec.lambda, spec.delta, spec.prior[h]);
        margin = std::min(margin, b - L_h[h]);
        if (L_h[h] > b) holds = false;
      }
    } else if (spec.theorem == 5) {
      BoundInputs in;
      in.n = spec.n;
      in.delta = spec.delta;
      in.lambda = spec.lambda;
      in.L_max = L_max;
      in.empirical_loss = Lhat_pQ;
      in.kl_post_prior = kl;
      const double b = pac_bayes_bound(in);
      margin = b - L_pQ;
      holds = L_pQ <= b;
    } else if (spec.theorem == 6) {
      const UniversalBound ub = universal_pac_bayes_bound(
          Lhat_log, spec.n, spec.Delta, spec.lambda, spec.delta, kl, C_G);
      margin = ub.bound - L_pQ;
      holds = L_pQ <= ub.bound;
      if (C_G * Lhat_log < Lhat_pQ - 1e-9) rep.dominance_ok = false;
    } else {
      throw std::invalid_argument("harness: theorem must be 4, 5 or 6");
    }
    if (holds) ++rep.holds;
    rep.min_margin = std::min(rep.min_margin, margin);
  }
  rep.coverage = static_cast<double>(rep.holds) / static_cast<double>(rep.trials);
  rep.required = 1.0 - spec.delta -
                 2.0 * std::sqrt(spec.delta * (1.0 - spec.delta) /
                                 static_cast<double>(rep.trials));
  rep.pass = rep.coverage >= rep.required && rep.clamp_sound && rep.dominance_ok;
  return rep;
}

}  // namespace klb
