#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "rgtlps/compound.hpp"
#include "rgtlps/errors.hpp"
#include "rgtlps/gof.hpp"
#include "rgtlps/oracles.hpp"

using namespace rgtlps;

namespace {

CompoundModel geo(double theta, double a, double nu) { return {RgtlParams(a, nu), PsFamily::geometric(), theta}; }

std::vector<CompoundModel> model_grid() {
  std::vector<CompoundModel> out;
  for (double a : {0.3, 1.0, 1.7})
    for (double nu : {0.5, 1.0, 3.0}) {
      out.emplace_back(RgtlParams(a, nu), PsFamily::logarithmic(), 0.8);
      out.emplace_back(RgtlParams(a, nu), PsFamily::geometric(), 0.5);
      out.emplace_back(RgtlParams(a, nu), PsFamily::poisson(), 2.5);
      out.emplace_back(RgtlParams(a, nu), PsFamily::binomial(3), 1.5);
    }
  return out;
}

}  // namespace

TEST_CASE("closed-form examples") {
  CHECK(compound_pdf(geo(0.5, 1, 1), 0.5) == doctest::Approx(0.88888888888888889).epsilon(1e-14));
  CHECK(compound_cdf(geo(0.5, 1, 1), 0.5) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(compound_survival(geo(0.5, 1, 1), 0.5) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(compound_hazard(geo(0.5, 1, 1), 0.5) == doctest::Approx(8.0 / 3.0).epsilon(1e-14));
  const CompoundModel poi(RgtlParams(1, 1), PsFamily::poisson(), 1.0);
  CHECK(compound_pdf(poi, 0.0) == doctest::Approx(1.5819767068693264).epsilon(1e-14));
  CHECK(compound_hazard(poi, 0.0) == doctest::Approx(1.5819767068693264).epsilon(1e-14));
  const CompoundModel lg(RgtlParams(1, 1), PsFamily::logarithmic(), 0.5);
  CHECK(compound_cdf(lg, 0.5) == doctest::Approx(0.58496250072115618).epsilon(1e-14));
  CHECK(compound_quantile(lg, 0.58496250072115618) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(compound_quantile(geo(0.5, 1, 1), 2.0 / 3.0) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(compound_quantile(geo(0.5, 1, 1), 0.0) == 0.0);
  CHECK(compound_quantile(geo(0.5, 1, 1), 1.0) == 1.0);
  CHECK(compound_cdf(geo(0.3, 0.4, 2), 0.0) == 0.0);
  CHECK(compound_survival(geo(0.3, 0.4, 2), 0.0) == 1.0);

  // Independent 40-digit evaluations.
  const CompoundModel bin(RgtlParams(1.3, 0.8), PsFamily::binomial(3), 2.0);
  CHECK(compound_pdf(bin, 0.3) == doctest::Approx(1.168968315575143).epsilon(1e-13));
  CHECK(compound_cdf(bin, 0.3) == doctest::Approx(0.35397914581545279).epsilon(1e-13));
  const CompoundModel lg2(RgtlParams(0.5, 1.7), PsFamily::logarithmic(), 0.95);
  CHECK(compound_pdf(lg2, 0.8) == doctest::Approx(0.087814288712216830).epsilon(1e-12));
  CHECK(compound_cdf(lg2, 0.8) == doctest::Approx(0.99126019597438088).epsilon(1e-13));
  const CompoundModel poi2(RgtlParams(2.0, 0.6), PsFamily::poisson(), 3.5);
  CHECK(compound_pdf(poi2, 0.25) == doctest::Approx(0.97270730213914768).epsilon(1e-13));
  CHECK(compound_cdf(poi2, 0.25) == doctest::Approx(0.12835878510671847).epsilon(1e-13));
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(CompoundModel(RgtlParams(1, 1), PsFamily::geometric(), 1.0), DomainError);
  CHECK_THROWS_AS(CompoundModel(RgtlParams(1, 1), PsFamily::poisson(), 0.0), DomainError);
  CHECK_THROWS_AS(compound_pdf(geo(0.5, 1, 1), 1.1), DomainError);
  CHECK_THROWS_AS(compound_cdf(geo(0.5, 1, 1), -0.1), DomainError);
  CHECK_THROWS_AS(compound_hazard(geo(0.5, 1, 1), 1.0), DomainError);
  CHECK_THROWS_AS(compound_quantile(geo(0.5, 1, 1), 1.5), DomainError);
}

TEST_CASE("degenerates to the base law as theta -> 0") {
  for (double a : {0.4, 1.0, 1.8})
    for (double nu : {0.5, 2.0})
      for (double y : {0.1, 0.5, 0.9}) {
        const RgtlParams p(a, nu);
        CHECK(std::fabs(compound_pdf(CompoundModel(p, PsFamily::geometric(), 1e-12), y) - rgtl_pdf(p, y)) < 1e-9);
      }
}

TEST_CASE("survival, cdf and hazard identities") {
  for (const CompoundModel& m : model_grid())
    for (int i = 0; i <= 100; ++i) {
      const double y = i / 100.0;
      CHECK(std::fabs(compound_cdf(m, y) + compound_survival(m, y) - 1.0) < 1e-14);
      if (y < 1.0) {
        const double h = compound_hazard(m, y);
        CHECK(h * compound_survival(m, y) == doctest::Approx(compound_pdf(m, y)).epsilon(1e-12));
      }
    }
}

TEST_CASE("hazard limits") {
  for (const CompoundModel& m : model_grid()) {
    const PsFamily& f = m.family();
    const double expect = m.nu() * m.theta() * (2.0 - m.alpha()) * f.d1(m.theta()) / f.value(m.theta());
    CHECK(std::fabs(compound_hazard(m, 0.0) - expect) < 1e-12 * std::max(1.0, expect));
    CHECK(std::fabs(compound_hazard_at_zero(m) - expect) < 1e-12 * std::max(1.0, expect));
  }
  CHECK(compound_hazard(geo(0.5, 1, 1), 1.0 - 1e-6) > 1e5);
  CHECK(compound_hazard(geo(0.5, 1, 1), 1.0 - 1e-6) == doctest::Approx(1000000.5).epsilon(1e-8));
}

TEST_CASE("pdf matches the derivative of the cdf") {
  for (const CompoundModel& m : model_grid())
    for (double y : {0.05, 0.3, 0.6, 0.9}) {
      const double h = 1e-5;
      const double fd = (compound_cdf(m, y + h) - compound_cdf(m, y - h)) / (2.0 * h);
      CHECK(fd == doctest::Approx(compound_pdf(m, y)).epsilon(1e-6));
    }
}

TEST_CASE("quantile round trip") {
  for (const CompoundModel& m : model_grid())
    for (double q : {1e-6, 0.01, 0.25, 0.5, 0.75, 0.99, 1.0 - 1e-6}) {
      const double y = compound_quantile(m, q);
      CHECK(std::fabs(compound_cdf(m, y) - q) < 1e-9);
    }
}

TEST_CASE("upper-tail quantile picks the double with the closest probability") {
  // Here the exact quantile is within half a spacing of 1, yet 1 - 2^-53 has the closer cdf.
  const CompoundModel m(RgtlParams(1.0, 0.25), PsFamily::geometric(), 0.884);
  const double q = 1.0 - 1e-5;
  const double y = compound_quantile(m, q);
  REQUIRE(y < 1.0);
  const double err = std::fabs(compound_cdf(m, y) - q);
  CHECK(err <= std::fabs(compound_cdf(m, std::nextafter(y, 0.0)) - q));
  CHECK(err <= std::fabs(compound_cdf(m, std::nextafter(y, 2.0)) - q));
  CHECK(err < 3e-6);
}

TEST_CASE("mixture components") {
  CHECK(mixture_components(CompoundModel(RgtlParams(1, 1), PsFamily::binomial(3), 0.7)).size() == 3);
  const auto comps = mixture_components(CompoundModel(RgtlParams(1, 1), PsFamily::logarithmic(), 0.99));
  double s = 0.0;
  for (const auto& c : comps) s += c.weight;
  CHECK(std::fabs(s - 1.0) < 1e-13);
}

TEST_CASE("moments") {
  CHECK(compound_moment(geo(0.5, 1, 1), 1) == doctest::Approx(0.38629436111989062).epsilon(1e-12));
  CHECK(compound_moment(geo(0.37, 1.4, 0.3), 0) == doctest::Approx(1.0).epsilon(1e-12));
  const CompoundModel poi(RgtlParams(1.5, 2.0), PsFamily::poisson(), 1.0);
  CHECK(std::fabs(compound_moment(poi, 2) - 0.18298640458032923) < 1e-10);
  const CompoundModel lg(RgtlParams(0.7, 3.0), PsFamily::logarithmic(), 0.9);
  CHECK(std::fabs(compound_moment(lg, 1) - 0.12297480996267733) < 1e-10);
  for (double t : {0.2, 0.5, 0.8}) {
    const double closed = (1.0 - t) / (t * t) * (-std::log1p(-t) - t);
    CHECK(std::fabs(compound_moment(geo(t, 1, 1), 1) - closed) < 1e-10);
  }
}

TEST_CASE("samplers") {
  const CompoundModel m = geo(0.5, 1, 1);
  Rng r1(17);
  const auto a = compound_sample_inverse(m, 100000, r1);
  double s = 0.0;
  for (double y : a) {
    s += y;
    REQUIRE(y > 0.0);
    REQUIRE(y < 1.0);
  }
  CHECK(std::fabs(s / a.size() - 0.386294) < 0.003);
  CHECK(ks_test(a, [&](double y) { return compound_cdf(m, y); }).statistic < 0.006);

  Rng r2(17);
  CHECK(compound_sample_inverse(m, 1000, r2) == std::vector<double>(a.begin(), a.begin() + 1000));

  Rng r3(18);
  const auto b = compound_sample_min(m, 100000, r3);
  CHECK(ks_two_sample(a, b).pvalue > 0.01);
  double sb = 0.0;
  for (double y : b) sb += y;
  const double var = compound_moment(m, 2) - std::pow(compound_moment(m, 1), 2);
  CHECK(std::fabs(sb / b.size() - compound_moment(m, 1)) < 3.0 * std::sqrt(var / b.size()));

  // Z is always 1 for the binomial family with m = 1.
  const RgtlParams p(1.2, 0.7);
  Rng r4(5), r5(5);
  const auto c = compound_sample_min(CompoundModel(p, PsFamily::binomial(1), 2.0), 20000, r4);
  const auto d = rgtl_sample(p, 20000, r5);
  CHECK(ks_two_sample(c, d).pvalue > 0.01);
}

TEST_CASE("hazard shapes") {
  auto diffs_sign_changes = [](const CompoundModel& m) {
    std::vector<int> signs;
    double prev = compound_hazard(m, 0.0);
    for (int i = 1; i < 10000; ++i) {
      const double h = compound_hazard(m, i / 10000.0);
      const int s = h > prev ? 1 : (h < prev ? -1 : 0);
      if (s != 0 && (signs.empty() || signs.back() != s)) signs.push_back(s);
      prev = h;
    }
    return signs;
  };
  // Increasing hazard for one member of each family.
  for (const CompoundModel& m :
       {CompoundModel(RgtlParams(1.5, 2.0), PsFamily::logarithmic(), 0.5), geo(0.5, 1.5, 2.0),
        CompoundModel(RgtlParams(1.5, 2.0), PsFamily::poisson(), 1.0),
        CompoundModel(RgtlParams(1.5, 2.0), PsFamily::binomial(2), 1.0)})
    CHECK(diffs_sign_changes(m) == std::vector<int>{1});

  // Search a coarse grid for a bathtub (decrease then increase) in the Poisson family.
  bool found = false;
  for (double a : {0.1, 0.5, 1.0, 1.5, 1.9})
    for (double nu : {0.2, 0.5, 1.0})
      for (double t : {2.0, 5.0, 10.0})
        if (!found && diffs_sign_changes(CompoundModel(RgtlParams(a, nu), PsFamily::poisson(), t)) ==
                          std::vector<int>{-1, 1})
          found = true;
  CHECK(found);
}
