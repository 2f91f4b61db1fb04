#include "doctest.h"

#include <cmath>

#include "klb/proper_loss.hpp"
#include "tests/oracles.hpp"

using namespace klb;

namespace {
const double kLog2 = std::log(2.0);
}

TEST_CASE("partial losses match the table closed forms") {
  const auto lg = logarithmic_loss();
  auto pl = partial_losses(lg, 0.5);
  CHECK(pl.l0.value() == doctest::Approx(kLog2).epsilon(1e-12));
  CHECK(pl.l1.value() == doctest::Approx(kLog2).epsilon(1e-12));

  const auto qd = quadratic_loss();
  pl = partial_losses(qd, 0.25);
  CHECK(pl.l0.value() == doctest::Approx(0.0625).epsilon(1e-12));
  CHECK(pl.l1.value() == doctest::Approx(0.5625).epsilon(1e-12));

  const auto bs = boosting_loss();
  pl = partial_losses(bs, 0.25);
  CHECK(pl.l0.value() == doctest::Approx(1.1547005383792515).epsilon(1e-12));
  CHECK(pl.l1.value() == doctest::Approx(3.4641016151377546).epsilon(1e-12));
}

TEST_CASE("partial losses at the boundary") {
  for (const auto& g : {quadratic_loss(), logarithmic_loss(), boosting_loss()}) {
    CHECK(partial_losses(g, 0.0).l0.value() == doctest::Approx(0.0));
    CHECK(partial_losses(g, 1.0).l1.value() == doctest::Approx(0.0));
  }
  CHECK(partial_losses(logarithmic_loss(), 0.0).l1.is_infinite());
  CHECK(partial_losses(logarithmic_loss(), 1.0).l0.is_infinite());
  CHECK(partial_losses(boosting_loss(), 0.0).l1.is_infinite());
  CHECK(partial_losses(quadratic_loss(), 0.0).l1.value() == doctest::Approx(1.0));
}

TEST_CASE("expected loss") {
  CHECK(expected_loss(quadratic_loss(), 0.5, 0.5).value() == doctest::Approx(0.25));
  CHECK(expected_loss(logarithmic_loss(), 1.0, 0.0).is_infinite());
  CHECK(expected_loss(quadratic_loss(), 0.3, 0.7).value() == doctest::Approx(0.37));
  // 0 * infinity = 0: impossible outcome never charged.
  CHECK(expected_loss(logarithmic_loss(), 0.0, 0.0).value() == doctest::Approx(0.0));
}

TEST_CASE("regret examples") {
  const auto qd = quadratic_loss();
  for (double p : {0.0, 0.2, 0.55, 1.0})
    for (double q : {0.0, 0.35, 0.8, 1.0})
      CHECK(regret(qd, p, q).value() == doctest::Approx((p - q) * (p - q)).epsilon(1e-12));
  CHECK(regret(logarithmic_loss(), 0.5, 0.25).value() ==
        doctest::Approx(0.14384103622589046).epsilon(1e-13));
  CHECK(regret(boosting_loss(), 0.42, 0.42).value() == 0.0);
}

TEST_CASE("weight function") {
  CHECK(weight(logarithmic_loss(), 0.5) == doctest::Approx(4.0));
  CHECK(weight(quadratic_loss(), 0.123) == doctest::Approx(2.0));
  CHECK(weight(boosting_loss(), 0.5) == doctest::Approx(8.0));
  CHECK_THROWS_AS(weight(quadratic_loss(), 0.0), std::domain_error);
  CHECK_THROWS_AS(weight(quadratic_loss(), 1.0), std::domain_error);
}

TEST_CASE("universality constants") {
  CHECK(universality_constant(quadratic_loss()) == doctest::Approx(1.0));
  CHECK(universality_constant(logarithmic_loss()) == doctest::Approx(2.0));
  CHECK(universality_constant(boosting_loss()) == doctest::Approx(4.0));
  const auto bad = custom_loss(
      "convex-G", [](double p) { return p * p; }, [](double p) { return 2.0 * p; },
      [](double) { return 2.0; }, [](double) { return 0.0; }, 0.0, 2.0);
  CHECK_THROWS_AS(universality_constant(bad), std::domain_error);
}

TEST_CASE("derivative consistency against finite differences") {
  for (const auto& g : {quadratic_loss(), logarithmic_loss(), boosting_loss()}) {
    int checked = 0;
    for (int i = 1; i < 1000; ++i) {
      const double p = 1e-6 + (1.0 - 2e-6) * i / 1000.0;
      const double h = std::min(1e-6, 0.01 * std::min(p, 1.0 - p));
      const double d1 = testo::fd1(g.G, p, h);
      const double d2 = testo::fd1(g.G1, p, h);
      const double d3 = testo::fd1(g.G2, p, h);
      CHECK(std::abs(d1 - g.G1(p)) <= 1e-5 * std::max(1.0, std::abs(g.G1(p))));
      CHECK(std::abs(d2 - g.G2(p)) <= 1e-5 * std::max(1.0, std::abs(g.G2(p))));
      CHECK(std::abs(d3 - g.G3(p)) <= 1e-4 * std::max(1.0, std::abs(g.G3(p))));
      ++checked;
    }
    CHECK(checked == 999);
  }
}

TEST_CASE("regret gradient matches (q-p) w(q)") {
  for (const auto& g : {quadratic_loss(), logarithmic_loss(), boosting_loss()}) {
    for (double p : {0.2, 0.5, 0.77}) {
      for (double q : {0.15, 0.4, 0.85}) {
        const double h = 1e-6;
        const double fd =
            (regret(g, p, q + h).value() - regret(g, p, q - h).value()) / (2.0 * h);
        const double expect = (q - p) * weight(g, q);
        CHECK(std::abs(fd - expect) <= 1e-5 * std::max(1.0, std::abs(expect)));
      }
    }
  }
}

TEST_CASE("savage consistency and strictness on a grid") {
  for (const auto& g : {quadratic_loss(), logarithmic_loss(), boosting_loss()}) {
    for (int i = 0; i <= 100; ++i) {
      for (int j = 0; j <= 100; ++j) {
        const double p = i / 100.0, q = j / 100.0;
        const auto r = regret(g, p, q);
        if (i == j) {
          CHECK(r.value() <= 1e-12);
        } else {
          CHECK(r.value() > 1e-12);
        }
        const auto L = expected_loss(g, p, q);
        if (L.is_finite()) {
          const auto pl = partial_losses(g, q);
          const double savage = (1.0 - p) * pl.l0.value() + p * pl.l1.value();
          CHECK(std::abs(L.value() - savage) <= 1e-10);
        }
      }
    }
  }
}

TEST_CASE("admissibility: logarithmic passes everything") {
  const auto rep = check_admissible(logarithmic_loss(), 1e-3);
  for (const auto& c : rep.checks) {
    INFO(c.name, " worst at ", c.worst_point, " value ", c.worst_value);
    CHECK(c.pass);
  }
  CHECK(rep.all_pass());
}

TEST_CASE("admissibility: quadratic passes everything") {
  CHECK(check_admissible(quadratic_loss(), 1e-3).all_pass());
}

TEST_CASE("admissibility: boosting fails convexity and envelope") {
  // The boosting loss is proper, fair and regular, but l(y,.) loses
  // convexity outside [1/4, 3/4] and its weight escapes the w(1/2)
  // envelope near the endpoints (w(0.05) = 96.6 > 80 = w(1/2)/(2*0.05)).
  const auto rep = check_admissible(boosting_loss(), 1e-3);
  for (const auto& c : rep.checks) {
    INFO(c.name, " worst at ", c.worst_point, " value ", c.worst_value);
    if (c.name == "convexity_extremes" || c.name == "weight_envelope") {
      CHECK_FALSE(c.pass);
    } else {
      CHECK(c.pass);
    }
  }
}

TEST_CASE("admissibility: convex G fails properness") {
  const auto bad = custom_loss(
      "convex-G", [](double p) { return p * p; }, [](double p) { return 2.0 * p; },
      [](double) { return 2.0; }, [](double) { return 0.0; }, 0.0, 2.0);
  const auto rep = check_admissible(bad, 1e-3);
  bool properness_failed = false;
  for (const auto& c : rep.checks)
    if (c.name == "properness_shuford" && !c.pass) properness_failed = true;
  CHECK(properness_failed);
}

TEST_CASE("weight envelope holds for quadratic and logarithmic at every grid point") {
  for (const auto& g : {quadratic_loss(), logarithmic_loss()}) {
    const double wh = weight(g, 0.5);
    for (int i = 1; i < 1000; ++i) {
      const double q = i / 1000.0;
      const double w = weight(g, q);
      const double lo = q < 0.5 ? wh / (2.0 * (1.0 - q)) : wh / (2.0 * q);
      const double hi = q < 0.5 ? wh / (2.0 * q) : wh / (2.0 * (1.0 - q));
      CHECK(w >= lo - 1e-12);
      CHECK(w <= hi + 1e-12);
    }
  }
}

TEST_CASE("admissibility report serializes") {
  const auto rep = check_admissible(quadratic_loss(), 1e-2);
  const std::string j = rep.to_json();
  CHECK(j.find("\"family\"") != std::string::npos);
  CHECK(j.find("properness_shuford") != std::string::npos);
}
