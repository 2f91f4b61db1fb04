#include "klb/project.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "src/json_util.hpp"

namespace klb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool needs_interior_clamp(const GeneratorND& f) {
  if (f.kind != GeneratorKind::SumSeparable) return false;
  return std::isinf(f.separable->g1_at_0) || std::isinf(f.separable->g1_at_1);
}

Vec clamp_interior(Vec q, double margin) {
  for (int i = 0; i < q.size(); ++i)
    q[i] = std::min(std::max(q[i], margin), 1.0 - margin);
  return q;
}

Vec renormalize(Vec q) {
  for (int i = 0; i < q.size(); ++i) q[i] = std::max(q[i], 0.0);
  const double s = q.sum();
  return s > 0.0 ? Vec(q / s) : q;
}

double metric_value(BallMetric metric, const Vec& p, const Vec& q) {
  return metric == BallMetric::TV ? tv(p, q) : chi2(p, q).value();
}

double objective_at(const GeneratorND& f, const Vec& p, const Vec& q) {
  return bregN(f, p, q).value();
}

Vec gradient_at(const GeneratorND& f, const Vec& p, const Vec& q) {
  if (f.kind == GeneratorKind::SumSeparable) {
    Vec g(q.size());
    for (int i = 0; i < q.size(); ++i)
      g[i] = f.separable->g2(q[i]) * (q[i] - p[i]);
    return g;
  }
  return f.hessian(q) * (q - p);
}

// Largest step along p + t u that stays in the simplex (sum(u) == 0).
double ray_exit(const Vec& p, const Vec& u) {
  double tmax = kInf;
  for (int i = 0; i < p.size(); ++i)
    if (u[i] < 0.0) tmax = std::min(tmax, p[i] / -u[i]);
  return tmax;
}

// Smallest t >= t_lo with metric(p || p + t u) == eps; the metric grows
// monotonically along the ray. Returns the feasible-side endpoint, or
// nothing when even the simplex boundary stays inside the ball.
std::optional<Vec> retract_to_surface(BallMetric metric, const Vec& p, const Vec& u,
                                      double eps, double t_lo) {
  const double tmax = ray_exit(p, u);
  if (!(tmax > 0.0) || !std::isfinite(tmax)) return std::nullopt;
  auto val = [&](double t) { return metric_value(metric, p, Vec(p + t * u)); };
  if (val(tmax) < eps) return std::nullopt;
  double lo = t_lo, hi = tmax;
  if (val(lo) >= eps) return Vec(p + lo * u);
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (val(mid) >= eps ? hi : lo) = mid;
  }
  return Vec(p + hi * u);
}

ProjectionResult solve_mean_hyperplane(const GeneratorND& f, const Vec& p,
                                       const ConstraintSet& S, const SolverOpts& opts) {
  const bool clampit = needs_interior_clamp(f);
  auto proj = [&](const Vec& v) { return project_simplex_hyperplane(v, S.h, S.mu); };
  Vec q = proj(p);
  if (clampit) q = clamp_interior(q, opts.interior_margin);
  double fq = objective_at(f, p, q);
  double alpha = 1.0;
  ProjectionResult res;
  long it = 0;
  for (; it < opts.max_iters; ++it) {
    const Vec g = gradient_at(f, p, q);
    Vec y;
    double fy = 0.0;
    bool stepped = false;
    while (alpha > 1e-18) {
      y = proj(q - alpha * g);
      if (clampit) y = clamp_interior(y, opts.interior_margin);
      const Vec d = y - q;
      fy = objective_at(f, p, y);
      if (fy <= fq + g.dot(d) + 0.5 / alpha * d.squaredNorm() + 1e-18) {
        stepped = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!stepped) break;
    const double gm = (y - q).norm() / alpha;
    q = y;
    fq = fy;
    res.kkt_residual = gm;
    if (gm <= opts.grad_tol) {
      res.converged = true;
      break;
    }
    alpha = std::min(alpha * 2.0, 1e6);
  }
  res.iterations = it;
  res.q_star = renormalize(q);
  res.objective = bregN(f, p, res.q_star);
  res.constraint_residual = std::abs(S.h.dot(res.q_star) - S.mu);
  return res;
}

struct BallStartSet {
  std::vector<Vec> directions;  // each sums to zero
};

BallStartSet ball_starts(const Vec& p, const SolverOpts& opts,
                         const std::optional<Vec>& warm) {
  BallStartSet s;
  const int m = static_cast<int>(p.size());
  if (warm && warm->size() == m) s.directions.push_back(*warm - p);
  for (int j = 0; j < m; ++j) {
    Vec u = -p;
    u[j] += 1.0;
    s.directions.push_back(u);
  }
  Rng rng(opts.seed);
  while (static_cast<int>(s.directions.size()) < opts.multistarts) {
    Vec x(m);
    double sum = 0.0;
    for (int i = 0; i < m; ++i) {
      x[i] = -std::log(rng.uniform01());
      sum += x[i];
    }
    s.directions.push_back(Vec(x / sum - p));
  }
  return s;
}

ProjectionResult solve_ball_exterior(const GeneratorND& f, const Vec& p,
                                     const ConstraintSet& S, const SolverOpts& opts,
                                     const std::optional<Vec>& warm) {
  ProjectionResult best;
  best.objective = ExtendedReal::infinity();
  if (S.epsilon <= 0.0) {
    best.q_star = p;
    best.objective = ExtendedReal(0.0);
    best.converged = true;
    return best;
  }
  const bool clampit = needs_interior_clamp(f);
  bool any = false;
  for (const Vec& u0 : ball_starts(p, opts, warm).directions) {
    if (u0.cwiseAbs().maxCoeff() < 1e-15) continue;
    auto start = retract_to_surface(S.metric, p, u0, S.epsilon, 1e-12);
    if (!start) continue;
    Vec q = *start;
    double fq = objective_at(f, p, clampit ? clamp_interior(q, opts.interior_margin) : q);
    double alpha = 0.1;
    ProjectionResult res;
    long it = 0;
    for (; it < opts.max_iters; ++it) {
      const Vec qe = clampit ? clamp_interior(q, opts.interior_margin) : q;
      const Vec g = gradient_at(f, p, qe);
      bool stepped = false;
      Vec y;
      double fy = 0.0;
      while (alpha > 1e-14) {
        y = project_simplex(q - alpha * g);
        if (metric_value(S.metric, p, y) < S.epsilon) {
          auto r = retract_to_surface(S.metric, p, Vec(y - p), S.epsilon, 1.0);
          if (!r) {
            alpha *= 0.5;
            continue;
          }
          y = *r;
        }
        fy = objective_at(f, p, clampit ? clamp_interior(y, opts.interior_margin) : y);
        if (fy < fq - 1e-16 * std::max(1.0, std::abs(fq))) {
          stepped = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!stepped) {
        res.converged = true;  // stalled on the active surface
        break;
      }
      res.kkt_residual = (y - q).norm() / alpha;
      q = y;
      fq = fy;
      if (res.kkt_residual <= opts.grad_tol) {
        res.converged = true;
        break;
      }
      alpha = std::min(alpha * 2.0, 1e6);
    }
    res.iterations = it;
    res.q_star = renormalize(q);
    res.objective = bregN(f, p, res.q_star);
    res.constraint_residual =
        std::max(0.0, S.epsilon - metric_value(S.metric, p, res.q_star));
    if (!any || res.objective < best.objective) {
      best = res;
      any = true;
    }
  }
  if (!any) throw std::invalid_argument("ball_exterior: no feasible start (constraint infeasible?)");
  return best;
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  return out;
}

}  // namespace

ConstraintSet ConstraintSet::mean_hyperplane(Vec h, double mu) {
  ConstraintSet s;
  s.kind = Kind::MeanHyperplane;
  s.h = std::move(h);
  s.mu = mu;
  return s;
}

ConstraintSet ConstraintSet::ball_exterior(BallMetric metric, double epsilon) {
  if (epsilon < 0.0) throw std::invalid_argument("ball_exterior: negative epsilon");
  ConstraintSet s;
  s.kind = Kind::BallExterior;
  s.metric = metric;
  s.epsilon = epsilon;
  return s;
}

bool constraint_feasible(const ConstraintSet& S, const Vec& p) {
  if (S.kind == ConstraintSet::Kind::MeanHyperplane) {
    if (S.h.size() != p.size()) return false;
    return S.mu >= S.h.minCoeff() - 1e-12 && S.mu <= S.h.maxCoeff() + 1e-12;
  }
  if (S.epsilon == 0.0) return true;
  // Both metrics are convex in q, so the maximum over the simplex sits at
  // a vertex.
  double best = 0.0;
  for (int j = 0; j < p.size(); ++j) {
    Vec e = Vec::Zero(p.size());
    e[j] = 1.0;
    const double v = S.metric == BallMetric::TV ? tv(p, e) : chi2(p, e).value();
    best = std::max(best, v);
    if (std::isinf(best)) return true;
  }
  return S.epsilon <= best;
}

Vec project_simplex(const Vec& v) {
  const int m = static_cast<int>(v.size());
  std::vector<double> u(v.data(), v.data() + m);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumsum = 0.0, tau = 0.0;
  int rho = 0;
  for (int j = 0; j < m; ++j) {
    cumsum += u[j];
    const double t = (cumsum - 1.0) / (j + 1);
    if (u[j] - t > 0.0) {
      rho = j + 1;
      tau = t;
    }
  }
  (void)rho;
  Vec out(m);
  for (int i = 0; i < m; ++i) out[i] = std::max(v[i] - tau, 0.0);
  return out;
}

Vec project_simplex_hyperplane(const Vec& v, const Vec& h, double mu) {
  const double h2 = h.squaredNorm();
  if (h2 == 0.0) return project_simplex(v);
  Vec x = v;
  Vec pc = Vec::Zero(v.size());
  Vec qc = Vec::Zero(v.size());
  Vec y = x;
  for (int it = 0; it < 5000; ++it) {
    y = project_simplex(x + pc);
    pc = x + pc - y;
    const Vec z = y + qc;
    const Vec xn = z - ((h.dot(z) - mu) / h2) * h;
    qc = z - xn;
    const double delta = (xn - x).cwiseAbs().maxCoeff();
    x = xn;
    if (delta <= 1e-14 && (y - x).cwiseAbs().maxCoeff() <= 1e-12) break;
  }
  return x;
}

ProjectionResult minimize_divergence(const GeneratorND& f, const Vec& p,
                                     const ConstraintSet& S, const SolverOpts& opts,
                                     const std::optional<Vec>& warm) {
  if (p.size() != f.dim) throw std::invalid_argument("minimize_divergence: dim mismatch");
  if (!constraint_feasible(S, p))
    throw std::invalid_argument("minimize_divergence: infeasible constraint set");
  if (S.kind == ConstraintSet::Kind::MeanHyperplane)
    return solve_mean_hyperplane(f, p, S, opts);
  return solve_ball_exterior(f, p, S, opts, warm);
}

std::string SweepTable::to_csv(const std::vector<std::string>& header_lines) const {
  std::ostringstream os;
  os.precision(17);
  for (const auto& l : header_lines) os << l << "\n";
  os << (mode == SweepMode::OwnMinimizer ? "grid,kl" : "grid,kl");
  for (const auto& l : gen_labels) {
    os << "," << sanitize(l) << "_own," << sanitize(l) << "_at_kl";
  }
  os << "\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    os << grid[i] << "," << kl_row[i];
    for (std::size_t gidx = 0; gidx < cells.size(); ++gidx) {
      const auto& c = cells[gidx][i];
      if (c.valid)
        os << "," << c.at_own << "," << c.at_kl;
      else
        os << ",invalid,invalid";
    }
    os << "\n";
  }
  return os.str();
}

std::string SweepTable::to_json(const std::string& meta_json) const {
  nlohmann::json j;
  j["meta"] = nlohmann::json::parse(meta_json);
  j["mode"] = mode == SweepMode::OwnMinimizer ? "own_minimizer" : "kl_minimizer";
  j["grid"] = grid;
  nlohmann::json klrow = nlohmann::json::array();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& r = kl_results[i];
    klrow.push_back({{"grid", grid[i]},
                     {"value", detail::json_num(kl_row[i])},
                     {"q_star", std::vector<double>(r.q_star.data(),
                                                    r.q_star.data() + r.q_star.size())},
                     {"iterations", r.iterations},
                     {"converged", r.converged},
                     {"kkt_residual", r.kkt_residual},
                     {"constraint_residual", r.constraint_residual}});
  }
  j["kl"] = klrow;
  j["generators"] = nlohmann::json::array();
  for (std::size_t gI = 0; gI < gen_labels.size(); ++gI) {
    nlohmann::json gj;
    gj["label"] = gen_labels[gI];
    gj["cert_pass"] = cert_pass[gI];
    gj["cells"] = nlohmann::json::array();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto& c = cells[gI][i];
      gj["cells"].push_back(
          {{"grid", grid[i]},
           {"at_own", detail::json_num(c.at_own)},
           {"at_kl", detail::json_num(c.at_kl)},
           {"valid", c.valid},
           {"q_star", std::vector<double>(c.own.q_star.data(),
                                          c.own.q_star.data() + c.own.q_star.size())},
           {"iterations", c.own.iterations},
           {"converged", c.own.converged},
           {"kkt_residual", c.own.kkt_residual},
           {"constraint_residual", c.own.constraint_residual}});
    }
    j["generators"].push_back(gj);
  }
  return j.dump(2);
}

namespace {

SweepTable run_sweep(const Vec& p, const std::vector<double>& grid,
                     const std::vector<std::pair<GeneratorND, double>>& gens,
                     const SolverOpts& opts, SweepMode mode,
                     const std::function<ConstraintSet(double)>& make_constraint) {
  const int m = static_cast<int>(p.size());
  SweepTable table;
  table.grid = grid;
  table.mode = mode;
  const GeneratorND klgen = gen_kl_generator(m);

  SampleSpec cert_spec;
  cert_spec.grid_step = 0.1;
  cert_spec.n_random = 2000;
  cert_spec.seed = opts.seed;
  for (const auto& [f, C] : gens) {
    table.gen_labels.push_back(f.label);
    table.cert_pass.push_back(hessian_gap_certificate(f, C, cert_spec).pass);
    table.cells.emplace_back(grid.size());
  }

  std::optional<Vec> warm_kl;
  std::vector<std::optional<Vec>> warm_f(gens.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const ConstraintSet S = make_constraint(grid[i]);
    ProjectionResult rkl = minimize_divergence(klgen, p, S, opts, warm_kl);
    warm_kl = rkl.q_star;
    table.kl_row.push_back(rkl.objective.value());
    table.kl_results.push_back(rkl);
    for (std::size_t gI = 0; gI < gens.size(); ++gI) {
      const auto& [f, C] = gens[gI];
      SweepCell cell;
      try {
        ProjectionResult rf = minimize_divergence(f, p, S, opts, warm_f[gI]);
        const ExtendedReal at_kl = bregN(f, p, rkl.q_star);
        // The KL minimizer is feasible for the same constraint, so it is a
        // legitimate candidate; taking the better point keeps the two-sided
        // chain exact for reported values.
        if (at_kl < rf.objective) {
          rf.q_star = rkl.q_star;
          rf.objective = at_kl;
          rf.kkt_residual = rkl.kkt_residual;
          rf.constraint_residual = rkl.constraint_residual;
        }
        warm_f[gI] = rf.q_star;
        cell.at_own = rf.objective.value() / C;
        cell.at_kl = at_kl.value() / C;
        cell.valid = rf.converged;
        cell.own = rf;
      } catch (const std::exception&) {
        cell.valid = false;
      }
      table.cells[gI][i] = cell;
    }
  }
  return table;
}

}  // namespace

SweepTable mean_sweep(const Vec& p, const Vec& h, const std::vector<double>& mu_grid,
                      const std::vector<std::pair<GeneratorND, double>>& gens,
                      const SolverOpts& opts) {
  return run_sweep(p, mu_grid, gens, opts, SweepMode::OwnMinimizer,
                   [&](double mu) { return ConstraintSet::mean_hyperplane(h, mu); });
}

SweepTable ball_sweep(const Vec& p, BallMetric metric,
                      const std::vector<double>& eps_grid,
                      const std::vector<std::pair<GeneratorND, double>>& gens,
                      SweepMode mode, const SolverOpts& opts) {
  return run_sweep(p, eps_grid, gens, opts, mode,
                   [&](double eps) { return ConstraintSet::ball_exterior(metric, eps); });
}

}  // namespace klb
