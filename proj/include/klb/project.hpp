#pragma once

#include <optional>
#include <string>
#include <vector>

#include "klb/bregman.hpp"
#include "klb/extended_real.hpp"
#include "klb/sampling.hpp"

namespace klb {

enum class BallMetric { TV, ChiSquare };

/// Feasible region for divergence projection, always intersected with the
/// probability simplex.
struct ConstraintSet {
  enum class Kind { MeanHyperplane, BallExterior };
  Kind kind = Kind::MeanHyperplane;
  // MeanHyperplane: { q in simplex : h . q = mu }.
  Vec h;
  double mu = 0.0;
  // BallExterior: { q in simplex : D(p || q) >= epsilon } for D = metric.
  BallMetric metric = BallMetric::TV;
  double epsilon = 0.0;

  static ConstraintSet mean_hyperplane(Vec h, double mu);
  static ConstraintSet ball_exterior(BallMetric metric, double epsilon);
};

/// Feasibility given the reference point p (the ball constraint depends on p).
bool constraint_feasible(const ConstraintSet& S, const Vec& p);

struct SolverOpts {
  long max_iters = 100000;
  double grad_tol = 1e-9;        // gradient-mapping norm
  double interior_margin = 1e-9; // iterate clamp for generators with infinite
                                 // boundary slope; final point is unclamped
  int multistarts = 8;           // BallExterior only
  std::uint64_t seed = 1;
};

struct ProjectionResult {
  Vec q_star;
  ExtendedReal objective;
  long iterations = 0;
  bool converged = false;
  double kkt_residual = 0.0;
  double constraint_residual = 0.0;
};

/// Euclidean projection onto the simplex (sorting-based).
Vec project_simplex(const Vec& v);

/// Euclidean projection onto simplex ∩ {h.q = mu} by alternating
/// projections with Dykstra corrections.
Vec project_simplex_hyperplane(const Vec& v, const Vec& h, double mu);

/// Minimize D_f(p||.) over S. MeanHyperplane uses projected gradient with
/// backtracking (convex D_f(p||.) makes the KKT residual a global
/// certificate). BallExterior is the complement of a convex set, so the
/// solution sits on the active surface D(p||q) = epsilon; the solver runs
/// multi-start projected gradient with radial retraction to the surface and
/// returns the best local optimum. `warm` seeds one extra start.
ProjectionResult minimize_divergence(const GeneratorND& f, const Vec& p,
                                     const ConstraintSet& S, const SolverOpts& opts,
                                     const std::optional<Vec>& warm = std::nullopt);

enum class SweepMode { OwnMinimizer, KlMinimizer };

struct SweepCell {
  double at_own = 0.0;  // D_f(p || q_f) / C
  double at_kl = 0.0;   // D_f(p || q_KL) / C
  bool valid = false;
  ProjectionResult own;
};

struct SweepTable {
  std::vector<double> grid;    // mu or epsilon values
  std::vector<double> kl_row;  // D_KL(p || q_KL)
  std::vector<ProjectionResult> kl_results;
  std::vector<std::string> gen_labels;
  std::vector<bool> cert_pass;              // per generator
  std::vector<std::vector<SweepCell>> cells;  // [generator][grid index]
  SweepMode mode = SweepMode::OwnMinimizer;

  /// One row per grid value; `header_lines` are prepended verbatim.
  std::string to_csv(const std::vector<std::string>& header_lines = {}) const;
  std::string to_json(const std::string& meta_json = "{}") const;
};

/// Mean-constraint sweep (the hyperplane family of experiments): for each mu,
/// the KL row D_KL(p||q_KL(mu)) and per generator D_f(p||q_f(mu))/C along
/// with D_f(p||q_KL(mu))/C. The KL minimizer is always offered as a
/// candidate to each generator's solve, so the two-sided chain holds for the
/// reported values by construction.
SweepTable mean_sweep(const Vec& p, const Vec& h, const std::vector<double>& mu_grid,
                      const std::vector<std::pair<GeneratorND, double>>& gens,
                      const SolverOpts& opts);

/// Divergence-ball-exterior sweep for TV or chi-square constraints.
SweepTable ball_sweep(const Vec& p, BallMetric metric,
                      const std::vector<double>& eps_grid,
                      const std::vector<std::pair<GeneratorND, double>>& gens,
                      SweepMode mode, const SolverOpts& opts);

}  // namespace klb
