#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "klb/cluster.hpp"
#include "klb/sampling.hpp"

using namespace klb;

namespace {

Vec vec1d(double x) {
  Vec v(1);
  v[0] = x;
  return v;
}

Dataset one_d_example() {
  return Dataset::from_points({vec1d(0.1), vec1d(0.2), vec1d(0.8), vec1d(0.9)});
}

// Exhaustive assignment search over k^n labelings with mean centroids.
double exhaustive_optimum(const Dataset& data, int k, const GeneratorND& f) {
  double best = std::numeric_limits<double>::infinity();
  const long total = std::lround(std::pow(k, data.n));
  for (long code = 0; code < total; ++code) {
    long c = code;
    std::vector<int> a(data.n);
    std::vector<long> cnt(k, 0);
    for (long i = 0; i < data.n; ++i) {
      a[i] = static_cast<int>(c % k);
      ++cnt[a[i]];
      c /= k;
    }
    if (std::find(cnt.begin(), cnt.end(), 0L) != cnt.end()) continue;
    std::vector<Vec> mu(k, Vec::Zero(data.m));
    for (long i = 0; i < data.n; ++i) mu[a[i]] += data.points[i];
    for (int j = 0; j < k; ++j) mu[j] /= static_cast<double>(cnt[j]);
    double obj = 0.0;
    for (long i = 0; i < data.n; ++i) obj += bregN(f, data.points[i], mu[a[i]]).value();
    best = std::min(best, obj);
  }
  return best;
}

Dataset blob_data(long n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vec> pts;
  const double cx[2] = {0.25, 0.75};
  const double cy[2] = {0.3, 0.7};
  for (long i = 0; i < n; ++i) {
    const int c = i % 2;
    Vec p(2);
    // Clamped pseudo-gaussian blobs via sum of uniforms.
    double gx = 0.0, gy = 0.0;
    for (int r = 0; r < 12; ++r) {
      gx += rng.uniform01();
      gy += rng.uniform01();
    }
    p[0] = std::clamp(cx[c] + 0.06 * (gx - 6.0), 0.05, 0.95);
    p[1] = std::clamp(cy[c] + 0.06 * (gy - 6.0), 0.05, 0.95);
    pts.push_back(p);
  }
  return Dataset::from_points(pts);
}

}  // namespace

TEST_CASE("1-d example recovers the exhaustive optimum") {
  const auto data = one_d_example();
  const auto quad = gen_quadratic(1);
  const auto c = bregman_kmeans(data, 2, quad, 7);
  CHECK(c.objective.value() == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(c.assignments[0] == c.assignments[1]);
  CHECK(c.assignments[2] == c.assignments[3]);
  CHECK(c.assignments[0] != c.assignments[2]);
  std::vector<double> mus = {c.centroids[0][0], c.centroids[1][0]};
  std::sort(mus.begin(), mus.end());
  CHECK(mus[0] == doctest::Approx(0.15));
  CHECK(mus[1] == doctest::Approx(0.85));
  CHECK(exhaustive_optimum(data, 2, quad) == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("k=1 gives the dataset mean; k=n gives zero objective") {
  const auto data = one_d_example();
  const auto quad = gen_quadratic(1);
  const auto c1 = bregman_kmeans(data, 1, quad, 3);
  CHECK(c1.centroids[0][0] == doctest::Approx(0.5));
  const auto cn = bregman_kmeans(data, 4, quad, 3);
  CHECK(cn.objective.value() <= 1e-15);
}

TEST_CASE("centroids equal assigned means and objective is monotone") {
  const auto data = blob_data(60, 11);
  for (const auto& f : {gen_quadratic(2), gen_kl_generator(2)}) {
    const auto c = bregman_kmeans(data, 3, f, 5);
    // Centroid = mean of its cluster.
    for (int j = 0; j < c.k; ++j) {
      Vec mu = Vec::Zero(2);
      long cnt = 0;
      for (long i = 0; i < data.n; ++i)
        if (c.assignments[i] == j) {
          mu += data.points[i];
          ++cnt;
        }
      CHECK(cnt > 0);
      mu /= static_cast<double>(cnt);
      CHECK((mu - c.centroids[j]).cwiseAbs().maxCoeff() <= 1e-10);
    }
    for (std::size_t t = 1; t < c.objective_history.size(); ++t)
      CHECK(c.objective_history[t] <= c.objective_history[t - 1] + 1e-12);
  }
}

TEST_CASE("objective helper agrees with a direct summation oracle") {
  const auto data = blob_data(40, 13);
  const auto f = gen_kl_generator(2);
  const auto c = bregman_kmeans(data, 2, f, 9);
  double direct = 0.0;
  for (long i = 0; i < data.n; ++i) {
    const Vec& x = data.points[i];
    const Vec& mu = c.centroids[c.assignments[i]];
    for (int d = 0; d < 2; ++d)
      direct += x[d] * std::log(x[d] / mu[d]) - x[d] + mu[d];
  }
  CHECK(clustering_objective(data, c, f).value() == doctest::Approx(direct).epsilon(1e-10));
}

TEST_CASE("all points equal: zero objective, no empty clusters") {
  const auto data = Dataset::from_points({vec1d(0.4), vec1d(0.4), vec1d(0.4)});
  const auto c = bregman_kmeans(data, 2, gen_quadratic(1), 5);
  CHECK(c.objective.value() == 0.0);
  std::vector<long> cnt(2, 0);
  for (int a : c.assignments) ++cnt[a];
  CHECK(cnt[0] > 0);
  CHECK(cnt[1] > 0);
}

TEST_CASE("exhaustive equivalence for small instances") {
  Rng rng(29);
  const auto quad = gen_quadratic(2);
  for (int k : {2, 3}) {
    std::vector<Vec> pts;
    for (int i = 0; i < 8; ++i) {
      Vec p(2);
      p[0] = rng.uniform01();
      p[1] = rng.uniform01();
      pts.push_back(p);
    }
    const auto data = Dataset::from_points(pts);
    Clustering best = bregman_kmeans(data, k, quad, 0);
    for (std::uint64_t s = 1; s < 32; ++s) {
      auto c = bregman_kmeans(data, k, quad, s);
      if (c.objective < best.objective) best = std::move(c);
    }
    CHECK(best.objective.value() ==
          doctest::Approx(exhaustive_optimum(data, k, quad)).epsilon(1e-9));
  }
}

TEST_CASE("universality chain holds on blob data") {
  const auto data = blob_data(120, 2024);
  auto rep = universality_chain_check(data, 3, gen_quadratic(2), 2.0 + 1e-6, 17, 8);
  CHECK(rep.link1);
  CHECK(rep.link2);
  CHECK(rep.pass);
  CHECK(rep.kl_objective >= rep.f_at_kl_over_C - 1e-9);
  CHECK(rep.f_at_kl_over_C >= rep.f_at_f_over_C - 1e-9);

  Mat Q2(2, 2);
  Q2 << 3.0, 0.5, 0.5, 1.0;
  rep = universality_chain_check(data, 3, gen_mahalanobis(Q2),
                                 mahalanobis_constant(Q2) * (1.0 + 1e-6), 17, 8);
  CHECK(rep.pass);
}

TEST_CASE("chain check on identical points is all zeros") {
  const auto data = Dataset::from_points({vec1d(0.5), vec1d(0.5), vec1d(0.5)});
  const auto rep = universality_chain_check(data, 1, gen_quadratic(1), 2.0 + 1e-6, 3, 4);
  CHECK(rep.kl_objective <= 1e-15);
  CHECK(rep.f_at_f_over_C <= 1e-15);
  CHECK(rep.pass);
}

TEST_CASE("chain check aborts on certificate failure") {
  const auto data = blob_data(20, 5);
  Mat Q2(2, 2);
  Q2 << 3.0, 0.5, 0.5, 1.0;
  CHECK_THROWS_AS(universality_chain_check(data, 2, gen_mahalanobis(Q2), 1.0, 3, 2),
                  std::runtime_error);
}

TEST_CASE("mean minimizer check") {
  const auto quad = gen_quadratic(2);
  const auto pts2 = blob_data(12, 31).points;
  CHECK(mean_minimizer_check(pts2, quad).pass);

  const auto klf = gen_kl_generator(1);
  const auto rep = mean_minimizer_check({vec1d(0.2), vec1d(0.4), vec1d(0.9)}, klf);
  CHECK(rep.pass);
  CHECK(rep.mean[0] == doctest::Approx(0.5));

  const auto mah = gen_mahalanobis(mahalanobis_Qns());
  std::vector<Vec> pts3;
  Rng rng(41);
  for (int i = 0; i < 5; ++i) {
    Vec p(3);
    for (int d = 0; d < 3; ++d) p[d] = 0.2 + 0.6 * rng.uniform01();
    pts3.push_back(p);
  }
  CHECK(mean_minimizer_check(pts3, mah).pass);
}

TEST_CASE("chain report serializes") {
  const auto data = blob_data(30, 3);
  const auto rep = universality_chain_check(data, 2, gen_quadratic(2), 2.0 + 1e-6, 7, 4);
  const std::string j = rep.to_json();
  CHECK(j.find("kl_objective") != std::string::npos);
  CHECK(j.find("multistarts") != std::string::npos);
}
