#include "klb/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "klb/sampling.hpp"
#include "src/json_util.hpp"

namespace klb {

namespace {

constexpr long kMaxPasses = 1000;

Vec cluster_mean(const Dataset& data, const std::vector<int>& assign, int j, int m) {
  Vec mu = Vec::Zero(m);
  long cnt = 0;
  for (std::size_t i = 0; i < assign.size(); ++i) {
    if (assign[i] == j) {
      mu += data.points[i];
      ++cnt;
    }
  }
  return cnt > 0 ? Vec(mu / static_cast<double>(cnt)) : mu;
}

double div_value(const GeneratorND& f, const Vec& x, const Vec& mu) {
  return bregN(f, x, mu).value();
}

Clustering lloyd(const Dataset& data, int k, const GeneratorND& f,
                 std::vector<Vec> centroids, std::uint64_t seed) {
  Clustering c;
  c.k = k;
  c.seed = seed;
  c.centroids = std::move(centroids);
  c.assignments.assign(data.n, -1);

  for (long pass = 0; pass < kMaxPasses; ++pass) {
    std::vector<int> next(data.n, 0);
    for (long i = 0; i < data.n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int bj = 0;
      for (int j = 0; j < k; ++j) {
        const double d = div_value(f, data.points[i], c.centroids[j]);
        if (d < best) {  // ties keep the lowest index
          best = d;
          bj = j;
        }
      }
      next[i] = bj;
    }
    // Reseed empty clusters at the farthest point from its representative
    // and force-assign it, so returned clusterings have no empty cluster.
    std::vector<long> count(k, 0);
    for (long i = 0; i < data.n; ++i) ++count[next[i]];
    for (int j = 0; j < k; ++j) {
      if (count[j] > 0) continue;
      double far = -1.0;
      long far_i = 0;
      for (long i = 0; i < data.n; ++i) {
        if (count[next[i]] <= 1) continue;
        const double d = div_value(f, data.points[i], c.centroids[next[i]]);
        if (d > far) {
          far = d;
          far_i = i;
        }
      }
      --count[next[far_i]];
      next[far_i] = j;
      ++count[j];
      c.centroids[j] = data.points[far_i];
    }
    const bool fixed = next == c.assignments;
    c.assignments = std::move(next);
    for (int j = 0; j < k; ++j) c.centroids[j] = cluster_mean(data, c.assignments, j, data.m);
    c.objective_history.push_back(clustering_objective(data, c, f).value());
    ++c.iterations;
    if (fixed) break;
  }
  c.objective = clustering_objective(data, c, f);
  return c;
}

}  // namespace

Dataset Dataset::from_points(std::vector<Vec> pts) {
  if (pts.empty()) throw std::invalid_argument("Dataset: empty point set");
  Dataset d;
  d.m = static_cast<int>(pts.front().size());
  d.n = static_cast<long>(pts.size());
  for (const auto& p : pts) {
    if (p.size() != d.m) throw std::invalid_argument("Dataset: ragged dimensions");
    for (int i = 0; i < d.m; ++i)
      if (!(p[i] >= 0.0 && p[i] <= 1.0))
        throw std::domain_error("Dataset: coordinate outside [0,1]");
  }
  d.points = std::move(pts);
  return d;
}

Dataset Dataset::clamped(double margin, long* clamped_out) const {
  Dataset d = *this;
  long moved = 0;
  for (auto& p : d.points) {
    bool touched = false;
    for (int i = 0; i < m; ++i) {
      const double v = std::min(std::max(p[i], margin), 1.0 - margin);
      if (v != p[i]) {
        p[i] = v;
        touched = true;
      }
    }
    if (touched) ++moved;
  }
  if (clamped_out) *clamped_out = moved;
  return d;
}

Clustering bregman_kmeans(const Dataset& data, int k, const GeneratorND& f,
                          std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("bregman_kmeans: k < 1");
  if (data.n < k) throw std::invalid_argument("bregman_kmeans: fewer points than clusters");
  if (f.dim != data.m) throw std::invalid_argument("bregman_kmeans: dimension mismatch");

  // Seeded farthest-point initialization; the first centroid is the point
  // closest to the dataset mean, later ones are drawn with probability
  // proportional to their divergence from the chosen set.
  Vec mean = Vec::Zero(data.m);
  for (const auto& p : data.points) mean += p;
  mean /= static_cast<double>(data.n);

  std::vector<long> chosen;
  {
    double best = std::numeric_limits<double>::infinity();
    long bi = 0;
    for (long i = 0; i < data.n; ++i) {
      const double d = div_value(f, data.points[i], mean);
      if (d < best) {
        best = d;
        bi = i;
      }
    }
    chosen.push_back(bi);
  }
  Rng rng(seed);
  while (static_cast<int>(chosen.size()) < k) {
    std::vector<double> dist(data.n);
    double total = 0.0;
    for (long i = 0; i < data.n; ++i) {
      double d = std::numeric_limits<double>::infinity();
      for (long c : chosen) d = std::min(d, div_value(f, data.points[i], data.points[c]));
      dist[i] = std::isfinite(d) ? d : 1e30;
      total += dist[i];
    }
    long pick = -1;
    if (total > 0.0) {
      double u = rng.uniform01() * total;
      for (long i = 0; i < data.n; ++i) {
        u -= dist[i];
        if (u <= 0.0) {
          pick = i;
          break;
        }
      }
    }
    if (pick < 0) {  // all points coincide with chosen ones
      for (long i = 0; i < data.n; ++i) {
        if (std::find(chosen.begin(), chosen.end(), i) == chosen.end()) {
          pick = i;
          break;
        }
      }
    }
    chosen.push_back(pick);
  }
  std::vector<Vec> init;
  init.reserve(k);
  for (long c : chosen) init.push_back(data.points[c]);
  return lloyd(data, k, f, std::move(init), seed);
}

Clustering bregman_kmeans_from(const Dataset& data, int k, const GeneratorND& f,
                               std::vector<Vec> init_centroids) {
  if (static_cast<int>(init_centroids.size()) != k)
    throw std::invalid_argument("bregman_kmeans_from: centroid count != k");
  return lloyd(data, k, f, std::move(init_centroids), 0);
}

ExtendedReal clustering_objective(const Dataset& data, const Clustering& c,
                                  const GeneratorND& f) {
  ExtendedReal sum(0.0);
  for (long i = 0; i < data.n; ++i)
    sum += bregN(f, data.points[i], c.centroids[c.assignments[i]]);
  return sum;
}

std::string ChainReport::to_json() const {
  nlohmann::json j;
  j["kl_objective"] = detail::json_num(kl_objective);
  j["f_at_kl_over_C"] = detail::json_num(f_at_kl_over_C);
  j["f_at_f_over_C"] = detail::json_num(f_at_f_over_C);
  j["link1"] = link1;
  j["link2"] = link2;
  j["pass"] = pass;
  j["clamped_points"] = clamped_points;
  j["multistarts"] = multistarts;
  j["note"] = note;
  return j.dump(2);
}

ChainReport universality_chain_check(const Dataset& data, int k, const GeneratorND& f,
                                     double C, std::uint64_t seed, int multistarts) {
  SampleSpec cert_spec;
  cert_spec.grid_step = 0.1;
  cert_spec.n_random = 2000;
  cert_spec.seed = seed;
  const GapCertificate cert = hessian_gap_certificate(f, C, cert_spec);
  if (!cert.pass)
    throw std::runtime_error("universality_chain_check: (f, C) failed the Hessian-gap certificate");

  ChainReport rep;
  rep.multistarts = multistarts;
  const Dataset clamped = data.clamped(1e-6, &rep.clamped_points);
  const GeneratorND klgen = gen_kl_generator(clamped.m);

  const Clustering kl_run = bregman_kmeans(clamped, k, klgen, seed);
  rep.kl_objective = kl_run.objective.value();

  ExtendedReal f_at_kl(0.0);
  for (long i = 0; i < clamped.n; ++i)
    f_at_kl += bregN(f, clamped.points[i], kl_run.centroids[kl_run.assignments[i]]);
  rep.f_at_kl_over_C = f_at_kl.value() / C;

  Clustering best = bregman_kmeans_from(clamped, k, f, kl_run.centroids);
  for (int s = 0; s < multistarts; ++s) {
    const std::uint64_t s_seed = seed ^ (0x9E3779B97F4A7C15ULL * (s + 1));
    Clustering c = bregman_kmeans(clamped, k, f, s_seed);
    if (c.objective < best.objective) best = std::move(c);
  }
  rep.f_at_f_over_C = best.objective.value() / C;

  rep.link1 = rep.kl_objective >= rep.f_at_kl_over_C - 1e-9;
  rep.link2 = rep.f_at_kl_over_C >= rep.f_at_f_over_C - 1e-9;
  rep.pass = rep.link1 && rep.link2;
  rep.note =
      "KL side is a single seeded local optimum; f side is best-of-multistart "
      "including a start from the KL centroids";
  return rep;
}

MeanMinimizerReport mean_minimizer_check(const std::vector<Vec>& points,
                                         const GeneratorND& f) {
  if (points.empty()) throw std::invalid_argument("mean_minimizer_check: no points");
  const int m = static_cast<int>(points.front().size());
  MeanMinimizerReport rep;
  rep.mean = Vec::Zero(m);
  for (const auto& p : points) rep.mean += p;
  rep.mean /= static_cast<double>(points.size());

  auto obj = [&](const Vec& z) {
    ExtendedReal s(0.0);
    for (const auto& p : points) {
      s += bregN(f, p, z);
      if (s.is_infinite()) break;
    }
    return s.value();
  };
  rep.mean_objective = obj(rep.mean);

  // Candidate grid: +-0.1 box around the mean, step 1e-3, clipped to [0,1].
  const double step = 1e-3;
  std::vector<std::vector<double>> axes(m);
  for (int d = 0; d < m; ++d) {
    const double lo = std::max(0.0, rep.mean[d] - 0.1);
    const double hi = std::min(1.0, rep.mean[d] + 0.1);
    for (double v = lo; v <= hi + step / 2; v += step) axes[d].push_back(std::min(v, hi));
  }
  std::vector<std::size_t> idx(m, 0);
  Vec z(m);
  rep.worst_gap = -std::numeric_limits<double>::infinity();
  while (true) {
    for (int d = 0; d < m; ++d) z[d] = axes[d][idx[d]];
    const double gap = rep.mean_objective - obj(z);
    ++rep.n_candidates;
    if (gap > rep.worst_gap) {
      rep.worst_gap = gap;
      rep.best_challenger = z;
    }
    int d = 0;
    while (d < m && ++idx[d] == axes[d].size()) idx[d++] = 0;
    if (d == m) break;
  }
  rep.pass = rep.worst_gap <= 1e-10;
  return rep;
}

}  // namespace klb
