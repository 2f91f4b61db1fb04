#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

namespace klb {

/// Deterministic sampling plan for certificates and inequality checks.
struct SampleSpec {
  double grid_step = 0.1;
  long n_random = 1000;
  std::uint64_t seed = 1;
  double corner_margin = 1e-6;
};

/// Seeded uniform generator with platform-stable output (no distribution
/// objects, so streams are identical across standard libraries).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  /// Uniform in the open interval (0,1).
  double uniform01() {
    return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  std::uint64_t next() { return eng_(); }
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(eng_() % n); }

 private:
  std::mt19937_64 eng_;
};

/// Interior points of [0,1]^m: a regular grid (or Halton set when the grid
/// would explode), seeded uniform draws, and corner-biased points at
/// distance corner_margin from the faces — the binding region for the
/// Hessian-gap condition.
std::vector<Eigen::VectorXd> sample_interior_points(int m, const SampleSpec& spec);

/// Seeded uniform points of the (m-1)-simplex (Dirichlet(1,..,1)).
std::vector<Eigen::VectorXd> sample_simplex_points(int m, long n, std::uint64_t seed);

}  // namespace klb
