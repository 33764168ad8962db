#include <doctest.h>

#include <boost/math/special_functions/beta.hpp>
#include <cmath>

#include "rgtlps/baselines.hpp"
#include "rgtlps/errors.hpp"
#include "rgtlps/gof.hpp"
#include "rgtlps/oracles.hpp"
#include "rgtlps/special.hpp"

using namespace rgtlps;

namespace {

// Regularized incomplete beta by quadrature, with the power substitutions
// x = u^(1/a) near 0 and 1 - x = v^(1/b) near 1 to remove endpoint singularities.
double ibeta_quadrature(double a, double b, double x) {
  oracle::QuadratureSpec spec;
  spec.abs_tol = 1e-300;
  spec.rel_tol = 1e-13;
  const double lb = log_beta(a, b);
  auto left = [&](double hi) {
    // integral_0^hi x^(a-1) (1-x)^(b-1) dx = (1/a) integral_0^(hi^a) (1 - u^(1/a))^(b-1) du
    return oracle::integrate([&](double u) { return std::pow(1.0 - std::pow(u, 1.0 / a), b - 1.0); }, 0.0,
                             std::pow(hi, a), spec)
               .value / a;
  };
  auto right = [&](double lo) {
    return oracle::integrate([&](double v) { return std::pow(1.0 - std::pow(v, 1.0 / b), a - 1.0); }, 0.0,
                             std::pow(1.0 - lo, b), spec)
               .value / b;
  };
  const double total = std::exp(lb);
  const double i = x <= 0.5 ? left(x) : total - right(x);
  return i / total;
}

const ModelSpec kLog{ModelKind::RgtlLog, 0};
const ModelSpec kBeta{ModelKind::Beta, 0};
const ModelSpec kKw{ModelKind::Kumaraswamy, 0};
const ModelSpec kTl{ModelKind::TL, 0};

}  // namespace

TEST_CASE("Kolmogorov series") {
  CHECK(kolmogorov_pvalue(0.0) == 1.0);
  CHECK(kolmogorov_pvalue(0.05) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(kolmogorov_pvalue(10.0) < 1e-80);
  // Q(1) and Q(0.5) from an independent 40-digit evaluation of the alternating series.
  CHECK(kolmogorov_pvalue(1.0) == doctest::Approx(0.26999967167735456).epsilon(1e-13));
  CHECK(kolmogorov_pvalue(0.5) == doctest::Approx(0.96394524366487509).epsilon(1e-12));
  // The two evaluation forms meet continuously.
  CHECK(kolmogorov_pvalue(1.0 - 1e-12) == doctest::Approx(kolmogorov_pvalue(1.0)).epsilon(1e-10));
  double prev = 1.0;
  for (int i = 1; i < 400; ++i) {
    const double p = kolmogorov_pvalue(i / 100.0);
    CHECK(p <= prev);
    CHECK(p >= 0.0);
    prev = p;
  }
}

TEST_CASE("one-sample KS") {
  CHECK_THROWS_AS(ks_test(std::vector<double>{}, [](double y) { return y; }), DomainError);
  const CompoundModel m(RgtlParams(1.2, 0.7), PsFamily::poisson(), 2.0);
  std::vector<double> ideal;
  for (int i = 1; i <= 200; ++i) ideal.push_back(compound_quantile(m, i / 201.0));
  const KsResult r = ks_test(ideal, [&](double y) { return compound_cdf(m, y); });
  CHECK(r.statistic < 0.006);
  CHECK(r.pvalue > 0.999);

  // Sorting is internal and the statistic is invariant under increasing maps.
  std::vector<double> y{0.9, 0.1, 0.5, 0.3, 0.7};
  const KsResult a = ks_test(y, [](double v) { return v; });
  CHECK(a.statistic == doctest::Approx(0.1).epsilon(1e-14));
  std::vector<double> sq;
  for (double v : y) sq.push_back(v * v);
  const KsResult b = ks_test(sq, [](double v) { return std::sqrt(v); });
  CHECK(b.statistic == doctest::Approx(a.statistic).epsilon(1e-14));
}

TEST_CASE("KS calibration on uniform data") {
  Rng rng(2025);
  int rejections = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<double> u(100);
    for (double& v : u) v = rng.uniform();
    if (ks_test(u, [](double v) { return v; }).pvalue < 0.05) ++rejections;
  }
  CHECK(std::fabs(rejections / 1000.0 - 0.05) <= 0.02);
}

TEST_CASE("two-sample KS") {
  const std::vector<double> x{0.1, 0.2, 0.3}, y{0.4, 0.5, 0.6};
  CHECK(ks_two_sample(x, y).statistic == doctest::Approx(1.0));
  CHECK(ks_two_sample(x, x).statistic == 0.0);
}

TEST_CASE("incomplete beta") {
  CHECK(incomplete_beta(1.0, 1.0, 0.37) == doctest::Approx(0.37).epsilon(1e-15));
  CHECK(incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(incomplete_beta(2.0, 3.0, 1.0) == 1.0);
  CHECK_THROWS_AS(incomplete_beta(0.0, 1.0, 0.5), DomainError);
  CHECK_THROWS_AS(incomplete_beta(1.0, 1.0, 1.5), DomainError);
  for (double a : {0.2, 0.5, 1.0, 2.7, 6.0, 10.0})
    for (double b : {0.2, 0.9, 1.0, 3.3, 10.0})
      for (double x : {0.01, 0.2, 0.5, 0.77, 0.99}) {
        const double v = incomplete_beta(a, b, x);
        CAPTURE(a);
        CAPTURE(b);
        CAPTURE(x);
        CHECK(std::fabs(v - ibeta_quadrature(a, b, x)) < 1e-10);
        CHECK(std::fabs(v - boost::math::ibeta(a, b, x)) < 1e-13);
      }
}

TEST_CASE("baseline laws") {
  for (double y : {0.1, 0.5, 0.8}) {
    CHECK(beta_cdf({1.0, 1.0}, y) == doctest::Approx(y).epsilon(1e-14));
    CHECK(kumaraswamy_cdf({1.0, 1.0}, y) == doctest::Approx(y).epsilon(1e-14));
    CHECK(kumaraswamy_pdf({1.0, 1.0}, y) == doctest::Approx(1.0).epsilon(1e-14));
  }
  for (double q : {1e-6, 0.2, 0.5, 0.9, 1.0 - 1e-6}) {
    const KumaraswamyParams k{2.5, 0.7};
    CHECK(std::fabs(kumaraswamy_cdf(k, kumaraswamy_quantile(k, q)) - q) < 1e-12);
    CHECK(std::fabs(beta_cdf({0.4, 3.0}, beta_quantile({0.4, 3.0}, q)) - q) < 1e-12);
    CHECK(std::fabs(topp_leone_cdf(0.6, topp_leone_quantile(0.6, q)) - q) < 1e-12);
  }
  CHECK(topp_leone_pdf(0.6, 0.3) ==
        doctest::Approx(2 * 0.6 * 0.7 * std::pow(0.3 * 1.7, -0.4)).epsilon(1e-14));
  // Densities integrate to one.
  for (const auto& pdf : {std::function<double(double)>([](double y) { return beta_pdf({2.5, 4.0}, y); }),
                          std::function<double(double)>([](double y) { return kumaraswamy_pdf({1.5, 3.0}, y); }),
                          std::function<double(double)>([](double y) { return topp_leone_pdf(1.7, y); })})
    CHECK(oracle::integrate(pdf, 0.0, 1.0).value == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("baseline fitters") {
  Rng rng(77);
  const UnitDistribution tl({ModelKind::TL, 0}, {0.6});
  const auto y = tl.sample(5000, rng);
  const FitResult t = fit_topp_leone(y);
  CHECK(std::fabs(t.estimates[0] - 0.6) < 3.0 * t.std_errors[0]);
  CHECK(t.std_errors[0] == doctest::Approx(t.estimates[0] / std::sqrt(5000.0)));

  const auto yb = UnitDistribution(kBeta, {0.5, 1.2}).sample(3000, rng);
  const FitResult b = fit_beta(yb);
  REQUIRE(b.converged);
  CHECK(std::fabs(b.estimates[0] - 0.5) < 3.0 * b.std_errors[0]);
  CHECK(std::fabs(b.estimates[1] - 1.2) < 3.0 * b.std_errors[1]);

  const auto yk = UnitDistribution(kKw, {0.27, 0.59}).sample(3000, rng);
  const FitResult k = fit_kumaraswamy(yk);
  REQUIRE(k.converged);
  CHECK(std::fabs(k.estimates[0] - 0.27) < 3.0 * k.std_errors[0]);
  CHECK(std::fabs(k.estimates[1] - 0.59) < 3.0 * k.std_errors[1]);
  CHECK(k.aic == doctest::Approx(2 * 2 - 2 * kumaraswamy_loglik({k.estimates[0], k.estimates[1]}, yk)));
}

TEST_CASE("model catalog") {
  CHECK(parse_model("rgtl-bin") == ModelKind::RgtlBin);
  CHECK(model_name(ModelKind::Kumaraswamy) == "kumaraswamy");
  CHECK_THROWS_AS(parse_model("weibull"), DomainError);
  CHECK_THROWS_AS(UnitDistribution(kLog, {1.0, 1.0}), DomainError);
  CHECK_THROWS_AS(UnitDistribution(kLog, {1.0, 1.0, 1.5}), DomainError);
  const UnitDistribution d({ModelKind::RgtlBin, 3}, {1.3, 0.8, 2.0});
  CHECK(d.pdf(0.3) == doctest::Approx(1.168968315575143).epsilon(1e-13));
}

TEST_CASE("compare_models") {
  const UnitDistribution truth(kLog, {1.398, 0.8665, 0.992});
  Rng rng(8);
  const auto y = truth.sample(2000, rng);
  const auto one = compare_models(y, {kTl});
  REQUIRE(one.size() == 1);
  CHECK(one[0].aic == doctest::Approx(2 - 2 * one[0].loglik));

  const std::vector<ModelSpec> list{kBeta, kKw, kLog};
  const auto a = compare_models(y, list);
  const auto b = compare_models(y, list);
  REQUIRE(a.size() == 3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].model_name == b[i].model_name);
    CHECK(a[i].aic == b[i].aic);
    CHECK(a[i].ks_statistic == b[i].ks_statistic);
    if (i > 0) CHECK(a[i - 1].aic <= a[i].aic);
  }
  CHECK_THROWS_AS(compare_models(y, {}), DomainError);
}

TEST_CASE("rGTL-Log truth wins on AIC against Beta and Kumaraswamy") {
  const UnitDistribution truth(kLog, {1.398, 0.8665, 0.992});
  Rng rng(1234);
  int wins = 0;
  for (int rep = 0; rep < 100; ++rep) {
    Rng r = rng.split();
    const auto y = truth.sample(2000, r);
    GofOptions o;
    o.fit.seed = rep;
    if (compare_models(y, {kLog, kBeta, kKw}, o).front().model_name == "rgtl-log") ++wins;
  }
  CHECK(wins >= 90);
}

TEST_CASE("parametric bootstrap p-value") {
  Rng rng(3);
  const auto y = UnitDistribution(kTl, {0.8}).sample(300, rng);
  GofOptions o;
  o.ks_bootstrap = 49;
  const GofReport r = assess(kTl, y, o);
  REQUIRE(r.ks_bootstrap_pvalue.has_value());
  CHECK(*r.ks_bootstrap_pvalue > 0.0);
  CHECK(*r.ks_bootstrap_pvalue <= 1.0);
  CHECK(*r.ks_bootstrap_pvalue > 0.01);
  CHECK(assess(kTl, y, o).ks_bootstrap_pvalue == r.ks_bootstrap_pvalue);
}
