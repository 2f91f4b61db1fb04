#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "klb/extended_real.hpp"

namespace klb {

struct ForecastRecord {
  double x = 0.0;  // forecast probability
  int y = 0;       // outcome
  std::string timestamp;  // opaque pass-through
  std::string station;    // opaque pass-through
};

struct RowError {
  long line = 0;
  std::string message;
};

struct LoadResult {
  std::vector<ForecastRecord> records;
  std::vector<RowError> errors;
};

/// CSV with header `x,y[,timestamp[,station]]`. Malformed rows are rejected
/// with their line numbers; an unreadable file throws.
LoadResult load_forecasts(const std::string& path);
LoadResult parse_forecasts(std::istream& in);
void write_forecasts(const std::vector<ForecastRecord>& records, std::ostream& out,
                     const std::vector<std::string>& header_lines = {});

struct LossTable {
  long n = 0;
  double threshold = 0.0;
  double zero_one = 0.0;
  double quadratic = 0.0;
  ExtendedReal log_loss;  // +infinity when a hard 0/1 forecast meets the
                          // opposite outcome; natural log
  double base_rate = 0.0;
  std::string to_json() const;
};

/// Average 0-1 loss at threshold t, quadratic loss y(1-x)^2+(1-y)x^2, and
/// log-loss, plus the empirical positive rate.
LossTable evaluate(const std::vector<ForecastRecord>& records, double t);

struct LogisticModel {
  double beta0 = 0.0;
  double beta1 = 0.0;
  std::string to_json() const;
  static LogisticModel from_json(const std::string& text);
};

double sigmoid(double z);

struct FitOptions {
  double grad_tol = 1e-8;
  long max_iters = 500;
  double beta_cap = 50.0;       // separability detector
  double ridge = 1e-6;          // fallback penalty weight
  double cond_limit = 1e12;     // Hessian condition limit for Newton
};

struct FitResult {
  LogisticModel model;
  bool ridge_fallback = false;
  bool converged = false;
  long iterations = 0;
  double grad_norm = 0.0;
  double objective = 0.0;  // mean log-loss (plus ridge when enabled)
};

/// Minimize average log-loss of q(x) = sigmoid(b0 + b1 x) by damped Newton;
/// the objective is convex, so the optimum is global. Degenerate designs
/// (separable data, constant x) trigger a ridge-stabilized refit, flagged.
FitResult fit_logistic(const std::vector<ForecastRecord>& train,
                       const FitOptions& opts = {});

/// Replace each forecast by sigmoid(b0 + b1 x); outputs are strictly inside
/// (0,1), so the recalibrated log-loss is finite.
std::vector<ForecastRecord> recalibrate(const std::vector<ForecastRecord>& records,
                                        const LogisticModel& model);

/// Synthetic generator replacing the unavailable Bureau data. Two modes:
/// a planted logistic world (x uniform, y ~ Bernoulli(sigmoid(b0+b1 x))), or
/// a piecewise table of forecast bins with a configurable fraction of
/// hard-zero forecasts paired with occasionally-positive outcomes.
struct SynthSpec {
  long n = 0;
  std::uint64_t seed = 1;
  bool planted_mode = false;
  LogisticModel planted{-2.0, 3.0};
  struct Bin {
    double lo = 0.0;
    double hi = 0.0;
    double mass = 0.0;
    double rain_prob = -1.0;  // negative: calibrated, P(y=1|x) = x
  };
  std::vector<Bin> bins;
  double hard_zero_fraction = 0.0;
  double hard_zero_rain_prob = 0.05;
};

std::vector<ForecastRecord> synth_generate(const SynthSpec& spec);

/// Calibrated rain-like table with overall positive rate approximately 0.09.
SynthSpec default_table_spec(long n, std::uint64_t seed, double hard_zero_fraction);

}  // namespace klb
