#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "klb/bregman.hpp"
#include "klb/extended_real.hpp"

namespace klb {

struct Dataset {
  std::vector<Vec> points;  // all coordinates in [0,1]
  int m = 0;
  long n = 0;

  static Dataset from_points(std::vector<Vec> pts);
  /// Copy with coordinates clamped to [margin, 1-margin]; `clamped_out`
  /// counts points that moved (used before KL clustering).
  Dataset clamped(double margin, long* clamped_out = nullptr) const;
};

struct Clustering {
  int k = 0;
  std::vector<int> assignments;  // n values in [0,k)
  std::vector<Vec> centroids;    // arithmetic means of assigned points
  ExtendedReal objective;
  long iterations = 0;
  std::uint64_t seed = 0;
  std::vector<double> objective_history;  // after each assign+update pass
};

/// Bregman hard clustering: nearest-representative assignment (ties to the
/// lowest cluster index) alternated with mean updates until the assignment
/// is fixed. Empty clusters are reseeded at the point farthest from its
/// current representative, deterministically.
Clustering bregman_kmeans(const Dataset& data, int k, const GeneratorND& f,
                          std::uint64_t seed);

/// Same, but started from the given centroids (used to chain the KL solution
/// into the f-side multistart).
Clustering bregman_kmeans_from(const Dataset& data, int k, const GeneratorND& f,
                               std::vector<Vec> init_centroids);

/// Sum of D_f(x_i || centroid of x_i's cluster).
ExtendedReal clustering_objective(const Dataset& data, const Clustering& c,
                                  const GeneratorND& f);

struct ChainReport {
  double kl_objective = 0.0;       // sum gen_kl(x || mu_KL), KL clustering
  double f_at_kl_over_C = 0.0;     // (1/C) sum D_f(x || mu_KL), KL assignment
  double f_at_f_over_C = 0.0;      // (1/C) best-of-multistart f clustering
  bool link1 = false;              // kl_objective >= f_at_kl_over_C
  bool link2 = false;              // f_at_kl_over_C >= f_at_f_over_C
  bool pass = false;
  long clamped_points = 0;
  int multistarts = 0;
  std::string note;
  std::string to_json() const;
};

/// KL-universality chain for clustering. The KL side is a single seeded run
/// (a local optimum); the f side is best-of-multistart and additionally
/// seeded with the KL centroids, which makes link2 hold for the reported
/// values by construction. Certification failure of (f, C) aborts.
ChainReport universality_chain_check(const Dataset& data, int k, const GeneratorND& f,
                                     double C, std::uint64_t seed, int multistarts = 32);

struct MeanMinimizerReport {
  bool pass = false;
  Vec mean;
  double mean_objective = 0.0;
  Vec best_challenger;
  double worst_gap = 0.0;  // max over grid z of mean_objective - obj(z)
  long n_candidates = 0;
};

/// Checks that the arithmetic mean minimizes sum_i D_f(x_i || z) against a
/// surrounding grid of candidates (step 1e-3 in a +-0.1 box, clipped).
MeanMinimizerReport mean_minimizer_check(const std::vector<Vec>& points,
                                         const GeneratorND& f);

}  // namespace klb
