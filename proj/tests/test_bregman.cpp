#include "doctest.h"

#include <cmath>

#include "klb/bregman.hpp"
#include "klb/sampling.hpp"
#include "tests/oracles.hpp"

using namespace klb;

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_CASE("breg1 boundary branches") {
  const auto xlx = gen1d_xlogx();
  CHECK(breg1(xlx, 0.5, 0.0).is_infinite());  // g'(0) = -inf
  const auto sq = gen1d_square();
  CHECK(breg1(sq, 0.3, 0.8).value() == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(breg1(sq, 1.0, 1.0).value() == 0.0);
  CHECK(breg1(xlx, 1.0, 1.0).value() == 0.0);
  CHECK(breg1(xlx, 0.0, 0.0).value() == 0.0);
  // t = 1 has the finite limit g'(1) = 1 for x log x: d(s||1) = s log s - s + 1.
  CHECK(breg1(xlx, 0.5, 1.0).value() ==
        doctest::Approx(0.5 * std::log(0.5) - 0.5 + 1.0).epsilon(1e-14));
  // corner (0,1): the same formula taken at s = 0.
  CHECK(breg1(xlx, 0.0, 1.0).value() == doctest::Approx(1.0).epsilon(1e-14));
  // mirror generator has g'(1) = +inf, so t = 1 diverges.
  CHECK(breg1(gen1d_mirror_xlogx(), 0.5, 1.0).is_infinite());
}

TEST_CASE("breg1 lower semicontinuity toward t = 0 when the limit is finite") {
  const auto sq = gen1d_square();
  const double s = 0.37;
  const double at0 = breg1(sq, s, 0.0).value();
  double prev_gap = 1e9;
  for (double t = 1e-2; t >= 1e-7; t /= 10.0) {
    const double gap = std::abs(breg1(sq, s, t).value() - at0);
    CHECK(gap < prev_gap + 1e-15);
    prev_gap = gap;
  }
  CHECK(prev_gap <= 1e-6);
}

TEST_CASE("gen_kl examples") {
  CHECK(gen_kl(vec({0.3, 0.4}), vec({0.3, 0.4})).value() == 0.0);
  CHECK(gen_kl(vec({0.5, 0.5}), vec({0.25, 0.25})).value() ==
        doctest::Approx(0.19314718055994531).epsilon(1e-14));
  CHECK(gen_kl(vec({1.0, 0.0}), vec({0.0, 1.0})).is_infinite());
  CHECK_THROWS_AS(gen_kl(vec({0.5}), vec({0.5, 0.5})), std::invalid_argument);
}

TEST_CASE("gen_kl equals the separable xlogx Bregman divergence") {
  const auto f = gen_kl_generator(3);
  Rng rng(11);
  for (int it = 0; it < 2000; ++it) {
    Vec p(3), q(3);
    for (int i = 0; i < 3; ++i) {
      p[i] = rng.uniform01();
      q[i] = rng.uniform01();
    }
    CHECK(std::abs(gen_kl(p, q).value() - bregN(f, p, q).value()) <= 1e-10);
  }
  // Boundary branches agree too.
  for (const auto& [p, q] : {std::pair{vec({0.0, 0.5, 1.0}), vec({0.2, 0.0, 1.0})},
                             std::pair{vec({0.0, 0.0, 1.0}), vec({0.0, 1.0, 1.0})},
                             std::pair{vec({1.0, 0.2, 0.0}), vec({1.0, 0.2, 0.0})}}) {
    const auto a = gen_kl(p, q);
    const auto b = bregN(f, p, q);
    CHECK(a.is_infinite() == b.is_infinite());
    if (a.is_finite()) CHECK(std::abs(a.value() - b.value()) <= 1e-10);
  }
}

TEST_CASE("mahalanobis divergence is the half quadratic form") {
  const auto f = gen_mahalanobis(Mat::Identity(4, 4));
  Rng rng(3);
  for (int it = 0; it < 100; ++it) {
    Vec p(4), q(4);
    for (int i = 0; i < 4; ++i) {
      p[i] = rng.uniform01();
      q[i] = rng.uniform01();
    }
    CHECK(bregN(f, p, q).value() ==
          doctest::Approx(0.5 * (p - q).squaredNorm()).epsilon(1e-12));
  }
  CHECK(bregN(f, vec({0.2, 0.8, 0.1, 0.5}), vec({0.2, 0.8, 0.1, 0.5})).value() == 0.0);
}

TEST_CASE("tv and chi2") {
  CHECK(tv(vec({1.0, 0.0}), vec({0.0, 1.0})) == doctest::Approx(2.0));
  CHECK(tv(vec({0.3, 0.7}), vec({0.3, 0.7})) == 0.0);
  CHECK(tv(vec({0.25, 0.5, 0.25}), vec({0.5, 0.25, 0.25})) == doctest::Approx(0.5));
  CHECK(chi2(vec({0.1, 0.9}), vec({0.1, 0.9})).value() == 0.0);
  CHECK(chi2(vec({0.5, 0.5}), vec({0.25, 0.75})).value() ==
        doctest::Approx(0.33333333333333333).epsilon(1e-14));
  CHECK(chi2(vec({1.0, 0.0}), vec({0.0, 1.0})).is_infinite());
  CHECK_THROWS_AS(tv(vec({0.5}), vec({0.5, 0.5})), std::invalid_argument);
}

TEST_CASE("nonnegativity and identity of indiscernibles on random pairs") {
  const auto gens = {gen_quadratic(3), gen_kl_generator(3),
                     gen_mahalanobis(mahalanobis_Qns())};
  Rng rng(17);
  for (const auto& f : gens) {
    for (int it = 0; it < 10000; ++it) {
      Vec p(3), q(3);
      for (int i = 0; i < 3; ++i) {
        p[i] = rng.uniform01();
        q[i] = rng.uniform01();
      }
      const double d = bregN(f, p, q).value();
      CHECK(d >= 0.0);
      if ((p - q).cwiseAbs().maxCoeff() > 1e-6) CHECK(d > 0.0);
      CHECK(bregN(f, p, p).value() == 0.0);
    }
  }
}

TEST_CASE("gradient and Hessian evaluators agree with finite differences") {
  const auto gens = {gen_quadratic(3), gen_kl_generator(3),
                     gen_mahalanobis(mahalanobis_Qns())};
  Rng rng(19);
  for (const auto& f : gens) {
    for (int it = 0; it < 1000; ++it) {
      Vec p(3);
      for (int i = 0; i < 3; ++i) p[i] = 0.05 + 0.9 * rng.uniform01();
      const Vec g = f.grad(p);
      const Mat H = f.hessian(p);
      CHECK((H - H.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
      for (int i = 0; i < 3; ++i) {
        const double h = 1e-6;
        Vec e = Vec::Zero(3);
        e[i] = h;
        const double fd = (f.f(p + e) - f.f(p - e)) / (2.0 * h);
        CHECK(std::abs(fd - g[i]) <= 1e-5 * std::max(1.0, std::abs(g[i])));
        const Vec fdh = (f.grad(p + e) - f.grad(p - e)) / (2.0 * h);
        for (int j = 0; j < 3; ++j)
          CHECK(std::abs(fdh[j] - H(i, j)) <= 1e-5 * std::max(1.0, std::abs(H(i, j))));
      }
    }
  }
}

TEST_CASE("hessian gap certificate") {
  SampleSpec spec;
  spec.grid_step = 0.1;
  spec.n_random = 2000;
  spec.seed = 5;

  const auto quad = gen_quadratic(3);
  CHECK(hessian_gap_certificate(quad, 2.0 + 1e-6, spec).pass);

  const auto mah = gen_mahalanobis(mahalanobis_Qs());
  CHECK(hessian_gap_certificate(mah, 3.0 + 1e-6, spec).pass);

  const auto fail = hessian_gap_certificate(mah, 2.5, spec);
  CHECK_FALSE(fail.pass);
  // Binding region is the all-ones corner: 2.5/1 - 3 = -0.5.
  CHECK(fail.min_gap == doctest::Approx(-0.5).epsilon(1e-3));
  CHECK(fail.worst_point.minCoeff() > 0.99);
}

TEST_CASE("certificate determinism given seed") {
  SampleSpec spec;
  spec.n_random = 500;
  spec.seed = 42;
  const auto mah = gen_mahalanobis(mahalanobis_Qs());
  const auto a = hessian_gap_certificate(mah, 2.5, spec);
  const auto b = hessian_gap_certificate(mah, 2.5, spec);
  CHECK(a.min_gap == b.min_gap);
  CHECK((a.worst_point - b.worst_point).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mahalanobis constants") {
  Mat d = Mat::Zero(3, 3);
  d.diagonal() << 3.0, 2.0, 1.0;
  CHECK(mahalanobis_constant(d) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(mahalanobis_constant(Mat::Identity(4, 4)) == doctest::Approx(1.0));
  // Power-iteration oracle for Q_ns, cross-checked against the
  // characteristic polynomial sign change (frozen: 3.3892285591291944).
  const Mat Qns = mahalanobis_Qns();
  const double oracle = testo::power_iteration_lambda_max(Qns);
  CHECK(oracle == doctest::Approx(3.3892285591291944).epsilon(1e-10));
  CHECK(mahalanobis_constant(Qns) == doctest::Approx(oracle).epsilon(1e-10));
  auto charpoly = [](double l) { return -l * l * l + 6.0 * l * l - 10.25 * l + 4.75; };
  CHECK(charpoly(oracle + 0.01) < 0.0);
  CHECK(charpoly(oracle - 0.01) > 0.0);

  Mat bad(2, 2);
  bad << 1.0, 0.5, 0.2, 1.0;
  CHECK_THROWS_AS(mahalanobis_constant(bad), std::invalid_argument);
  Mat npd(2, 2);
  npd << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(mahalanobis_constant(npd), std::invalid_argument);
}

TEST_CASE("separable constants") {
  CHECK(separable_constant(gen1d_square()) == doctest::Approx(2.0));
  CHECK(separable_constant(gen1d_xlogx()) == doctest::Approx(1.0));
  CHECK(std::isinf(separable_constant(gen1d_mirror_xlogx())));
}

TEST_CASE("L1 dominates L2 on the simplex") {
  for (const auto& p : sample_simplex_points(4, 2000, 23)) {
    for (const auto& q : sample_simplex_points(4, 1, 24)) {
      const double t = tv(p, q);
      CHECK(0.5 * t * t >= 0.5 * (p - q).squaredNorm() - 1e-15);
    }
  }
}
