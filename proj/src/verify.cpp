#include "klb/verify.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"
#include "src/json_util.hpp"

namespace klb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> closed_grid(double step) {
  const long n = std::lround(1.0 / step);
  if (n < 2) throw std::invalid_argument("grid step too coarse");
  std::vector<double> g(n + 1);
  for (long i = 0; i <= n; ++i) g[i] = static_cast<double>(i) / static_cast<double>(n);
  return g;
}

// Records rhs - C*lhs with ExtendedReal ordering: infinite lhs satisfies
// trivially; infinite rhs against finite lhs is an infinite violation.
struct ViolationTracker {
  double max_violation = -kInf;
  bool seen = false;
  bool infinite_violation = false;
  Vec worst_p, worst_q;

  void offer(const ExtendedReal& lhs, const ExtendedReal& rhs, const Vec& p, const Vec& q) {
    if (!seen) {
      worst_p = p;
      worst_q = q;
      seen = true;
    }
    if (lhs.is_infinite()) return;
    double v;
    if (rhs.is_infinite()) {
      v = kInf;
      infinite_violation = true;
    } else {
      v = rhs.value() - lhs.value();
    }
    if (v > max_violation) {
      max_violation = v;
      worst_p = p;
      worst_q = q;
    }
  }
};

Vec vec1(double x) {
  Vec v(1);
  v[0] = x;
  return v;
}

}  // namespace

ExtendedReal kl_binary(double p, double q) {
  if (!(p >= 0.0 && p <= 1.0 && q >= 0.0 && q <= 1.0))
    throw std::domain_error("kl_binary: arguments outside [0,1]");
  if (p == q) return ExtendedReal(0.0);
  double sum = 0.0;
  if (p > 0.0) {
    if (q == 0.0) return ExtendedReal::infinity();
    sum += p * std::log1p((p - q) / q);
  }
  if (p < 1.0) {
    if (q == 1.0) return ExtendedReal::infinity();
    sum += (1.0 - p) * std::log1p((q - p) / (1.0 - q));
  }
  return ExtendedReal(sum);
}

std::string BoundReport::to_json() const {
  nlohmann::json j;
  j["inequality_id"] = inequality_id;
  j["constant_used"] = constant_used;
  j["n_points"] = n_points;
  j["max_violation"] = detail::json_num(max_violation);
  j["worst_pair"] = {
      {"p", std::vector<double>(worst_p.data(), worst_p.data() + worst_p.size())},
      {"q", std::vector<double>(worst_q.data(), worst_q.data() + worst_q.size())}};
  j["pass"] = pass;
  j["precondition_pass"] = precondition_pass;
  j["note"] = note;
  return j.dump(2);
}

BoundReport verify_thm1(const EntropySpec& G, double C, double grid_step) {
  BoundReport rep;
  rep.inequality_id = "thm1:" + G.label;
  rep.constant_used = C;
  const auto grid = closed_grid(grid_step);
  ViolationTracker tr;
  for (double p : grid) {
    for (double q : grid) {
      tr.offer(scale(C, kl_binary(p, q)), regret(G, p, q), vec1(p), vec1(q));
      ++rep.n_points;
    }
  }
  rep.max_violation = tr.max_violation;
  rep.worst_p = tr.worst_p;
  rep.worst_q = tr.worst_q;
  rep.pass = !tr.infinite_violation && rep.max_violation <= kViolationTol;
  return rep;
}

BoundReport verify_thm2(const GeneratorND& f, double C, const SampleSpec& sampler) {
  BoundReport rep;
  rep.inequality_id = "thm2:" + f.label;
  rep.constant_used = C;

  const GapCertificate cert = hessian_gap_certificate(f, C, sampler);
  rep.precondition_pass = cert.pass;
  {
    std::ostringstream os;
    os << "hessian_gap: min_gap=" << cert.min_gap << " over " << cert.n_samples
       << " samples; " << cert.sampling_note;
    rep.note = os.str();
  }

  const int m = f.dim;
  ViolationTracker tr;
  // Coarse pair grid with exact boundary values, then seeded random pairs
  // with occasional coordinates snapped to {0,1}.
  const std::vector<double> axis = {0.0, 0.5, 1.0};
  const long cells = static_cast<long>(std::pow(3.0, 2 * m));
  if (cells <= 1L << 20) {
    for (long code = 0; code < cells; ++code) {
      long c = code;
      Vec p(m), q(m);
      for (int d = 0; d < m; ++d) {
        p[d] = axis[c % 3];
        c /= 3;
      }
      for (int d = 0; d < m; ++d) {
        q[d] = axis[c % 3];
        c /= 3;
      }
      tr.offer(scale(C, gen_kl(p, q)), bregN(f, p, q), p, q);
      ++rep.n_points;
    }
  }
  Rng rng(sampler.seed);
  for (long i = 0; i < sampler.n_random; ++i) {
    Vec p(m), q(m);
    for (int d = 0; d < m; ++d) {
      double u = rng.uniform01();
      p[d] = u < 0.05 ? 0.0 : (u > 0.95 ? 1.0 : rng.uniform01());
      u = rng.uniform01();
      q[d] = u < 0.05 ? 0.0 : (u > 0.95 ? 1.0 : rng.uniform01());
    }
    tr.offer(scale(C, gen_kl(p, q)), bregN(f, p, q), p, q);
    ++rep.n_points;
  }
  rep.max_violation = tr.max_violation;
  rep.worst_p = tr.worst_p;
  rep.worst_q = tr.worst_q;
  rep.pass = rep.precondition_pass && !tr.infinite_violation &&
             rep.max_violation <= kViolationTol;
  return rep;
}

BoundReport verify_thm3(const Generator1D& g, double C, const SampleSpec& sampler) {
  BoundReport rep;
  rep.inequality_id = "thm3:" + g.label;
  rep.constant_used = C;

  std::ostringstream note;
  const double cg = separable_constant(g);
  if (!(C > cg)) {
    rep.precondition_pass = false;
    note << "constant precondition failed: C <= g''(1)=" << cg << "; ";
  }
  // Convexity of d_g(p||.) via its second derivative at the extreme p:
  // q g'''(q) + g''(q) >= 0 and (q-1) g'''(q) + g''(q) >= 0.
  {
    double worst = kInf;
    double worst_q = 0.0;
    for (double q : closed_grid(0.001)) {
      if (q <= 0.0 || q >= 1.0) continue;
      const double a = g.g2(q);
      const double b = g.g3(q);
      const double v = std::min(q * b + a, (q - 1.0) * b + a);
      if (v < worst) {
        worst = v;
        worst_q = q;
      }
    }
    if (worst < -kViolationTol) {
      rep.precondition_pass = false;
      note << "d_g(p||.) convexity failed at q=" << worst_q << " (value " << worst
           << "); ";
    }
  }
  rep.note = note.str();

  const Generator1D klgen = gen1d_xlogx();
  ViolationTracker tr;
  const auto grid = closed_grid(sampler.grid_step);
  for (double p : grid) {
    for (double q : grid) {
      tr.offer(scale(C, breg1(klgen, p, q)), breg1(g, p, q), vec1(p), vec1(q));
      ++rep.n_points;
    }
  }
  Rng rng(sampler.seed);
  for (long i = 0; i < sampler.n_random; ++i) {
    const double p = rng.uniform01();
    const double q = rng.uniform01();
    tr.offer(scale(C, breg1(klgen, p, q)), breg1(g, p, q), vec1(p), vec1(q));
    ++rep.n_points;
  }
  rep.max_violation = tr.max_violation;
  rep.worst_p = tr.worst_p;
  rep.worst_q = tr.worst_q;
  rep.pass = rep.precondition_pass && !tr.infinite_violation &&
             rep.max_violation <= kViolationTol;
  return rep;
}

LocalFisherResult local_fisher_check(const EntropySpec& G, double C, double p,
                                     double dp0, int halvings) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("local_fisher_check: p not interior");
  if (!(p + dp0 > 0.0 && p + dp0 < 1.0))
    throw std::domain_error("local_fisher_check: p+dp0 not interior");
  LocalFisherResult res;
  const double J = 1.0 / (p * (1.0 - p));
  double dp = dp0;
  for (int k = 0; k <= halvings; ++k, dp *= 0.5) {
    if (std::abs(dp) < 1e-8) break;  // degenerate perturbation
    const double q = p + dp;
    const double dpa = q - p;  // exact by Sterbenz; keeps the ratio consistent
    const double d = regret(G, p, q).value();
    res.dp.push_back(dpa);
    res.ratios.push_back((d / C) / (dpa * dpa * J / 2.0));
  }
  const std::size_t n = res.ratios.size();
  if (n >= 1) {
    double tail_max = -kInf;
    for (std::size_t i = n >= 3 ? n - 3 : 0; i < n; ++i)
      tail_max = std::max(tail_max, res.ratios[i]);
    res.limsup_ok = tail_max <= 1.0 + 1e-3;
  }
  if (n >= 4) {
    const double d2 = std::abs(res.ratios[n - 4] - res.ratios[n - 3]);
    const double d1 = std::abs(res.ratios[n - 3] - res.ratios[n - 2]);
    const double d0 = std::abs(res.ratios[n - 2] - res.ratios[n - 1]);
    res.differences_decreasing = d1 <= d2 + 1e-9 && d0 <= d1 + 1e-9;
  }
  res.pass = res.limsup_ok && res.differences_decreasing;
  return res;
}

JointWeights make_random_joint(int nx, int nt, int m, std::uint64_t seed) {
  Rng rng(seed);
  JointWeights jw;
  jw.w = Mat(nx, nt);
  for (int x = 0; x < nx; ++x)
    for (int t = 0; t < nt; ++t) jw.w(x, t) = rng.uniform01();
  jw.w /= jw.w.sum();
  auto simplex_row = [&](int mm) {
    Vec v(mm);
    double s = 0.0;
    for (int i = 0; i < mm; ++i) {
      v[i] = -std::log(rng.uniform01());
      s += v[i];
    }
    return Vec(v / s);
  };
  for (int x = 0; x < nx; ++x) jw.p_y_given_x.push_back(simplex_row(m));
  for (int t = 0; t < nt; ++t) jw.p_y_given_t.push_back(simplex_row(m));
  return jw;
}

BoundReport expected_bound_check(const GeneratorND& f, double C, const JointWeights& jw,
                                 const SampleSpec& cert_sampler) {
  const int nx = static_cast<int>(jw.w.rows());
  const int nt = static_cast<int>(jw.w.cols());
  if (static_cast<int>(jw.p_y_given_x.size()) != nx ||
      static_cast<int>(jw.p_y_given_t.size()) != nt)
    throw std::invalid_argument("expected_bound_check: row count mismatch");
  if (jw.w.minCoeff() < 0.0 || std::abs(jw.w.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("expected_bound_check: weights not a distribution");
  for (const auto& r : jw.p_y_given_x)
    if (r.minCoeff() < 0.0 || std::abs(r.sum() - 1.0) > 1e-12)
      throw std::invalid_argument("expected_bound_check: p_{Y|X} row not stochastic");
  for (const auto& r : jw.p_y_given_t)
    if (r.minCoeff() < 0.0 || std::abs(r.sum() - 1.0) > 1e-12)
      throw std::invalid_argument("expected_bound_check: p_{Y|T} row not stochastic");

  BoundReport rep;
  rep.inequality_id = "ib-bound:" + f.label;
  rep.constant_used = C;

  const GapCertificate cert = hessian_gap_certificate(f, C, cert_sampler);
  rep.precondition_pass = cert.pass;
  rep.note = "hessian_gap min_gap=" + std::to_string(cert.min_gap) + "; " +
             cert.sampling_note;

  ExtendedReal lhs(0.0), rhs(0.0);
  ViolationTracker cellwise;
  for (int x = 0; x < nx; ++x) {
    for (int t = 0; t < nt; ++t) {
      const double w = jw.w(x, t);
      const ExtendedReal df = bregN(f, jw.p_y_given_x[x], jw.p_y_given_t[t]);
      const ExtendedReal dkl = gen_kl(jw.p_y_given_x[x], jw.p_y_given_t[t]);
      lhs += scale(w, df);
      rhs += scale(w * C, dkl);
      cellwise.offer(scale(w * C, dkl), scale(w, df), jw.p_y_given_x[x],
                     jw.p_y_given_t[t]);
      ++rep.n_points;
    }
  }
  if (rhs.is_infinite()) {
    rep.max_violation = -kInf;
    rep.pass = rep.precondition_pass;
  } else if (lhs.is_infinite()) {
    rep.max_violation = kInf;
    rep.pass = false;
  } else {
    rep.max_violation = lhs.value() - rhs.value();
    rep.pass = rep.precondition_pass && rep.max_violation <= kViolationTol;
  }
  rep.worst_p = cellwise.worst_p;
  rep.worst_q = cellwise.worst_q;
  return rep;
}

PinskerTriple pinsker_compare(const Vec& p, const Vec& q) {
  if (p.size() != q.size()) throw std::invalid_argument("pinsker_compare: dimension mismatch");
  auto check_simplex = [](const Vec& v) {
    if (v.minCoeff() < 0.0 || std::abs(v.sum() - 1.0) > 1e-9)
      throw std::domain_error("pinsker_compare: not a simplex member");
  };
  check_simplex(p);
  check_simplex(q);
  PinskerTriple t;
  t.kl = gen_kl(p, q);
  const double d = tv(p, q);
  t.half_tv_sq = 0.5 * d * d;
  t.half_l2_sq = 0.5 * (p - q).squaredNorm();
  return t;
}

}  // namespace klb
