#include "klb/forecast.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "klb/sampling.hpp"
#include "src/json_util.hpp"

namespace klb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

}  // namespace

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

LoadResult parse_forecasts(std::istream& in) {
  LoadResult res;
  std::string line;
  long lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = split_csv(line);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() < 2 || fields[0] != "x" || fields[1] != "y") {
        res.errors.push_back({lineno, "expected header x,y[,timestamp[,station]]"});
      }
      continue;
    }
    if (fields.size() < 2) {
      res.errors.push_back({lineno, "fewer than 2 fields"});
      continue;
    }
    ForecastRecord r;
    try {
      std::size_t pos = 0;
      r.x = std::stod(fields[0], &pos);
      if (pos != fields[0].size()) throw std::invalid_argument("trailing chars");
    } catch (const std::exception&) {
      res.errors.push_back({lineno, "x not a number: " + fields[0]});
      continue;
    }
    if (!(r.x >= 0.0 && r.x <= 1.0)) {
      res.errors.push_back({lineno, "x outside [0,1]: " + fields[0]});
      continue;
    }
    if (fields[1] == "0") {
      r.y = 0;
    } else if (fields[1] == "1") {
      r.y = 1;
    } else {
      res.errors.push_back({lineno, "y outside {0,1}: " + fields[1]});
      continue;
    }
    if (fields.size() > 2) r.timestamp = fields[2];
    if (fields.size() > 3) r.station = fields[3];
    res.records.push_back(std::move(r));
  }
  return res;
}

LoadResult load_forecasts(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_forecasts(in);
}

void write_forecasts(const std::vector<ForecastRecord>& records, std::ostream& out,
                     const std::vector<std::string>& header_lines) {
  out.precision(17);
  for (const auto& l : header_lines) out << l << "\n";
  out << "x,y,timestamp,station\n";
  for (const auto& r : records)
    out << r.x << "," << r.y << "," << r.timestamp << "," << r.station << "\n";
}

std::string LossTable::to_json() const {
  nlohmann::json j;
  j["n"] = n;
  j["threshold"] = threshold;
  j["zero_one"] = zero_one;
  j["quadratic"] = quadratic;
  j["log_loss_nats"] = detail::json_num(log_loss.value());
  j["base_rate"] = base_rate;
  return j.dump(2);
}

LossTable evaluate(const std::vector<ForecastRecord>& records, double t) {
  if (records.empty()) throw std::invalid_argument("evaluate: no records");
  LossTable lt;
  lt.n = static_cast<long>(records.size());
  lt.threshold = t;
  double log_sum = 0.0;
  bool log_inf = false;
  for (const auto& r : records) {
    lt.zero_one += r.y == 1 ? (r.x < t ? 1.0 : 0.0) : (r.x >= t ? 1.0 : 0.0);
    const double e = r.y == 1 ? 1.0 - r.x : r.x;
    lt.quadratic += e * e;
    if (!log_inf) {
      if (r.y == 1) {
        if (r.x == 0.0)
          log_inf = true;
        else
          log_sum -= std::log(r.x);
      } else {
        if (r.x == 1.0)
          log_inf = true;
        else
          log_sum -= std::log1p(-r.x);
      }
    }
    lt.base_rate += r.y;
  }
  const double n = static_cast<double>(lt.n);
  lt.zero_one /= n;
  lt.quadratic /= n;
  lt.base_rate /= n;
  lt.log_loss = log_inf ? ExtendedReal::infinity() : ExtendedReal(log_sum / n);
  return lt;
}

std::string LogisticModel::to_json() const {
  nlohmann::json j;
  j["beta0"] = beta0;
  j["beta1"] = beta1;
  return j.dump(2);
}

LogisticModel LogisticModel::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  LogisticModel m;
  m.beta0 = j.at("beta0");
  m.beta1 = j.at("beta1");
  return m;
}

namespace {

struct NllEval {
  double value = 0.0;
  double g0 = 0.0, g1 = 0.0;
  double h00 = 0.0, h01 = 0.0, h11 = 0.0;
};

NllEval eval_nll(const std::vector<ForecastRecord>& train, double b0, double b1,
                 double ridge) {
  NllEval e;
  const double n = static_cast<double>(train.size());
  for (const auto& r : train) {
    const double z = b0 + b1 * r.x;
    const double s = sigmoid(z);
    e.value += softplus(z) - r.y * z;
    const double d = s - r.y;
    e.g0 += d;
    e.g1 += d * r.x;
    const double wgt = s * (1.0 - s);
    e.h00 += wgt;
    e.h01 += wgt * r.x;
    e.h11 += wgt * r.x * r.x;
  }
  e.value /= n;
  e.g0 /= n;
  e.g1 /= n;
  e.h00 /= n;
  e.h01 /= n;
  e.h11 /= n;
  if (ridge > 0.0) {
    e.value += ridge * (b0 * b0 + b1 * b1);
    e.g0 += 2.0 * ridge * b0;
    e.g1 += 2.0 * ridge * b1;
    e.h00 += 2.0 * ridge;
    e.h11 += 2.0 * ridge;
  }
  return e;
}

FitResult newton_fit(const std::vector<ForecastRecord>& train, const FitOptions& opts,
                     double ridge) {
  FitResult res;
  res.ridge_fallback = ridge > 0.0;
  double b0 = 0.0, b1 = 0.0;
  NllEval e = eval_nll(train, b0, b1, ridge);
  for (long it = 0; it < opts.max_iters; ++it) {
    res.iterations = it;
    res.grad_norm = std::hypot(e.g0, e.g1);
    if (res.grad_norm <= opts.grad_tol) {
      res.converged = true;
      break;
    }
    // Newton direction; near-singular Hessian falls back to plain gradient.
    const double det = e.h00 * e.h11 - e.h01 * e.h01;
    const double trace = e.h00 + e.h11;
    double d0, d1;
    if (det > 0.0 && trace * trace / det < opts.cond_limit) {
      d0 = -(e.h11 * e.g0 - e.h01 * e.g1) / det;
      d1 = -(-e.h01 * e.g0 + e.h00 * e.g1) / det;
    } else {
      d0 = -e.g0;
      d1 = -e.g1;
    }
    double step = 1.0;
    NllEval trial;
    while (step > 1e-14) {
      trial = eval_nll(train, b0 + step * d0, b1 + step * d1, ridge);
      if (trial.value <= e.value + 1e-15) break;
      step *= 0.5;
    }
    b0 += step * d0;
    b1 += step * d1;
    e = trial;
    if (!res.ridge_fallback && std::hypot(b0, b1) > opts.beta_cap) {
      res.grad_norm = std::hypot(e.g0, e.g1);
      res.converged = false;
      res.model = {b0, b1};
      res.objective = e.value;
      return res;  // caller restarts with ridge
    }
  }
  res.model = {b0, b1};
  res.objective = e.value;
  res.grad_norm = std::hypot(e.g0, e.g1);
  if (res.grad_norm <= opts.grad_tol) res.converged = true;
  return res;
}

}  // namespace

FitResult fit_logistic(const std::vector<ForecastRecord>& train, const FitOptions& opts) {
  if (train.empty()) throw std::invalid_argument("fit_logistic: no training data");
  bool has0 = false, has1 = false;
  for (const auto& r : train) (r.y == 1 ? has1 : has0) = true;
  if (!has0 || !has1)
    throw std::invalid_argument("fit_logistic: training data contains a single class");
  FitResult res = newton_fit(train, opts, 0.0);
  if (!res.converged) {
    FitResult stabilized = newton_fit(train, opts, opts.ridge);
    stabilized.ridge_fallback = true;
    return stabilized;
  }
  return res;
}

std::vector<ForecastRecord> recalibrate(const std::vector<ForecastRecord>& records,
                                        const LogisticModel& model) {
  std::vector<ForecastRecord> out = records;
  for (auto& r : out) r.x = sigmoid(model.beta0 + model.beta1 * r.x);
  return out;
}

std::vector<ForecastRecord> synth_generate(const SynthSpec& spec) {
  if (spec.n < 1) throw std::invalid_argument("synth_generate: n must be >= 1");
  Rng rng(spec.seed);
  std::vector<ForecastRecord> out;
  out.reserve(spec.n);
  if (spec.planted_mode) {
    for (long i = 0; i < spec.n; ++i) {
      ForecastRecord r;
      r.x = rng.uniform01();
      r.y = rng.uniform01() < sigmoid(spec.planted.beta0 + spec.planted.beta1 * r.x) ? 1 : 0;
      out.push_back(r);
    }
    return out;
  }
  if (spec.bins.empty()) throw std::invalid_argument("synth_generate: no bins");
  double total = 0.0;
  for (const auto& b : spec.bins) total += b.mass;
  for (long i = 0; i < spec.n; ++i) {
    ForecastRecord r;
    if (rng.uniform01() < spec.hard_zero_fraction) {
      r.x = 0.0;
      r.y = rng.uniform01() < spec.hard_zero_rain_prob ? 1 : 0;
    } else {
      double u = rng.uniform01() * total;
      const SynthSpec::Bin* bin = &spec.bins.back();
      for (const auto& b : spec.bins) {
        u -= b.mass;
        if (u <= 0.0) {
          bin = &b;
          break;
        }
      }
      r.x = rng.uniform(bin->lo, bin->hi);
      const double p = bin->rain_prob < 0.0 ? r.x : bin->rain_prob;
      r.y = rng.uniform01() < p ? 1 : 0;
    }
    out.push_back(r);
  }
  return out;
}

SynthSpec default_table_spec(long n, std::uint64_t seed, double hard_zero_fraction) {
  SynthSpec s;
  s.n = n;
  s.seed = seed;
  s.hard_zero_fraction = hard_zero_fraction;
  s.hard_zero_rain_prob = 0.05;
  // Calibrated bins concentrated at low rain probabilities; with a 2%
  // hard-zero fraction the overall positive rate lands near 0.09.
  s.bins = {{0.005, 0.03, 0.365, -1.0}, {0.03, 0.07, 0.25, -1.0},
            {0.07, 0.12, 0.16, -1.0},   {0.12, 0.20, 0.12, -1.0},
            {0.20, 0.35, 0.07, -1.0},   {0.35, 0.60, 0.03, -1.0},
            {0.60, 0.90, 0.005, -1.0}};
  return s;
}

}  // namespace klb
