#include "rgtlps/gof.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rgtlps/baselines.hpp"
#include "rgtlps/errors.hpp"

namespace rgtlps {

namespace {

constexpr double kSeriesCutoff = 1e-12;

double ks_lambda(double n_eff, double d) {
  const double r = std::sqrt(n_eff);
  return (r + 0.12 + 0.11 / r) * d;
}

PsFamily family_of(const ModelSpec& spec) {
  switch (spec.kind) {
    case ModelKind::RgtlLog: return PsFamily::logarithmic();
    case ModelKind::RgtlGeo: return PsFamily::geometric();
    case ModelKind::RgtlPoi: return PsFamily::poisson();
    case ModelKind::RgtlBin: return PsFamily::binomial(spec.m);
    default: break;
  }
  throw DomainError("not a compound model");
}

std::size_t parameter_count(ModelKind kind) {
  if (is_compound(kind)) return 3;
  return kind == ModelKind::TL ? 1 : 2;
}

}  // namespace

double kolmogorov_pvalue(double lambda) {
  if (std::isnan(lambda)) throw DomainError("kolmogorov_pvalue: lambda is NaN");
  if (lambda <= 0.0) return 1.0;
  double p = 0.0;
  if (lambda < 1.0) {
    // Jacobi theta form of the same function; the alternating series
    // converges slowly here.
    constexpr double pi2 = std::numbers::pi * std::numbers::pi;
    double s = 0.0;
    for (int k = 1;; k += 2) {
      const double term = std::exp(-k * k * pi2 / (8.0 * lambda * lambda));
      s += term;
      if (term < kSeriesCutoff * s || term == 0.0) break;
    }
    p = 1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * s;
  } else {
    double sign = 1.0;
    for (int k = 1; k < 1000; ++k, sign = -sign) {
      const double term = std::exp(-2.0 * k * k * lambda * lambda);
      p += sign * term;
      if (term < kSeriesCutoff) break;
    }
    p *= 2.0;
  }
  return std::clamp(p, 0.0, 1.0);
}

KsResult ks_test(std::span<const double> data, const std::function<double(double)>& cdf) {
  if (data.empty()) throw DomainError("ks_test: empty data");
  std::vector<double> y(data.begin(), data.end());
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(y.size());
  double d = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double f = cdf(y[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  KsResult r;
  r.statistic = std::clamp(d, 0.0, 1.0);
  r.pvalue = kolmogorov_pvalue(ks_lambda(n, r.statistic));
  return r;
}

KsResult ks_two_sample(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw DomainError("ks_two_sample: empty sample");
  std::vector<double> a(x.begin(), x.end()), b(y.begin(), y.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::fabs(i / na - j / nb));
  }
  KsResult r;
  r.statistic = d;
  r.pvalue = kolmogorov_pvalue(ks_lambda(na * nb / (na + nb), d));
  return r;
}

std::string_view model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::RgtlLog: return "rgtl-log";
    case ModelKind::RgtlGeo: return "rgtl-geo";
    case ModelKind::RgtlPoi: return "rgtl-poi";
    case ModelKind::RgtlBin: return "rgtl-bin";
    case ModelKind::Rgtl: return "rgtl";
    case ModelKind::TL: return "tl";
    case ModelKind::Beta: return "beta";
    case ModelKind::Kumaraswamy: return "kumaraswamy";
  }
  return "?";
}

ModelKind parse_model(std::string_view name) {
  for (ModelKind k : {ModelKind::RgtlLog, ModelKind::RgtlGeo, ModelKind::RgtlPoi, ModelKind::RgtlBin,
                      ModelKind::Rgtl, ModelKind::TL, ModelKind::Beta, ModelKind::Kumaraswamy})
    if (model_name(k) == name) return k;
  throw DomainError("unknown model '" + std::string(name) + "'");
}

bool is_compound(ModelKind kind) {
  return kind == ModelKind::RgtlLog || kind == ModelKind::RgtlGeo || kind == ModelKind::RgtlPoi ||
         kind == ModelKind::RgtlBin;
}

UnitDistribution::UnitDistribution(ModelSpec spec, std::vector<double> params)
    : spec_(spec), params_(std::move(params)) {
  if (params_.size() != parameter_count(spec_.kind))
    throw DomainError(std::string(model_name(spec_.kind)) + ": wrong number of parameters");
  // Construct once so invalid parameters fail here rather than at first use.
  if (is_compound(spec_.kind))
    CompoundModel(RgtlParams(params_[0], params_[1]), family_of(spec_), params_[2]);
  else if (spec_.kind == ModelKind::Rgtl)
    RgtlParams(params_[0], params_[1]);
  else
    for (double v : params_)
      if (!(v > 0.0 && std::isfinite(v)))
        throw DomainError(std::string(model_name(spec_.kind)) + ": parameters must be positive");
}

#define RGTLPS_DISPATCH(fn_compound, fn_rgtl, fn_tl, fn_beta, fn_kw)                          \
  switch (spec_.kind) {                                                                      \
    case ModelKind::Rgtl: return fn_rgtl(RgtlParams(params_[0], params_[1]), arg);           \
    case ModelKind::TL: return fn_tl(params_[0], arg);                                       \
    case ModelKind::Beta: return fn_beta(BetaParams{params_[0], params_[1]}, arg);           \
    case ModelKind::Kumaraswamy: return fn_kw(KumaraswamyParams{params_[0], params_[1]}, arg); \
    default:                                                                                 \
      return fn_compound(                                                                    \
          CompoundModel(RgtlParams(params_[0], params_[1]), family_of(spec_), params_[2]), arg); \
  }

double UnitDistribution::pdf(double arg) const {
  RGTLPS_DISPATCH(compound_pdf, rgtl_pdf, topp_leone_pdf, beta_pdf, kumaraswamy_pdf)
}

double UnitDistribution::cdf(double arg) const {
  RGTLPS_DISPATCH(compound_cdf, rgtl_cdf, topp_leone_cdf, beta_cdf, kumaraswamy_cdf)
}

double UnitDistribution::quantile(double arg) const {
  RGTLPS_DISPATCH(compound_quantile, rgtl_quantile, topp_leone_quantile, beta_quantile,
                  kumaraswamy_quantile)
}

#undef RGTLPS_DISPATCH

double UnitDistribution::hazard(double y) const {
  if (is_compound(spec_.kind))
    return compound_hazard(
        CompoundModel(RgtlParams(params_[0], params_[1]), family_of(spec_), params_[2]), y);
  if (spec_.kind == ModelKind::Rgtl) return rgtl_hazard(RgtlParams(params_[0], params_[1]), y);
  if (!(y >= 0.0 && y < 1.0)) throw DomainError("hazard: y must lie in [0, 1)");
  return pdf(y) / (1.0 - cdf(y));
}

std::vector<double> UnitDistribution::sample(std::size_t n, Rng& rng) const {
  if (is_compound(spec_.kind))
    return compound_sample_inverse(
        CompoundModel(RgtlParams(params_[0], params_[1]), family_of(spec_), params_[2]), n, rng);
  if (spec_.kind == ModelKind::Rgtl) return rgtl_sample(RgtlParams(params_[0], params_[1]), n, rng);
  std::vector<double> out(n);
  for (double& v : out) v = quantile(rng.uniform());
  return out;
}

FitResult fit_model(const ModelSpec& spec, std::span<const double> data, const GofOptions& opts) {
  switch (spec.kind) {
    case ModelKind::Rgtl: return fit_rgtl(data, opts.fit);
    case ModelKind::TL: return fit_topp_leone(data);
    case ModelKind::Beta: return fit_beta(data, opts.fit);
    case ModelKind::Kumaraswamy: return fit_kumaraswamy(data, opts.fit);
    default: break;
  }
  const PsFamily fam = family_of(spec);
  return opts.method == FitMethod::EM ? fit_em(fam, data, opts.fit) : fit_ml(fam, data, opts.fit);
}

GofReport assess(const ModelSpec& spec, std::span<const double> data, const GofOptions& opts) {
  GofReport rep;
  rep.model_name = std::string(model_name(spec.kind));
  if (spec.kind == ModelKind::RgtlBin) rep.model_name += "(m=" + std::to_string(spec.m) + ")";
  rep.k = static_cast<int>(parameter_count(spec.kind));
  try {
    rep.fit = fit_model(spec, data, opts);
  } catch (const ConvergenceError& e) {
    rep.note = std::string("fit failed: ") + e.what();
    rep.loglik = -std::numeric_limits<double>::infinity();
    rep.aic = std::numeric_limits<double>::infinity();
    rep.ks_statistic = 1.0;
    rep.ks_pvalue = 0.0;
    return rep;
  }
  rep.loglik = rep.fit.loglik;
  rep.aic = rep.fit.aic;
  if (rep.fit.estimates.empty() || !std::isfinite(rep.loglik)) {
    rep.note = "fit failed: " + rep.fit.stop_reason;
    rep.aic = std::numeric_limits<double>::infinity();
    rep.ks_statistic = 1.0;
    rep.ks_pvalue = 0.0;
    return rep;
  }
  if (!rep.fit.converged) rep.note = "not converged: " + rep.fit.stop_reason;
  const UnitDistribution dist(spec, rep.fit.estimates);
  const KsResult ks = ks_test(data, [&dist](double y) { return dist.cdf(y); });
  rep.ks_statistic = ks.statistic;
  rep.ks_pvalue = ks.pvalue;

  if (opts.ks_bootstrap > 0) {
    // Parametric bootstrap: refit on samples from the fitted law and compare
    // the refitted statistics with the observed one.
    Rng base(opts.fit.seed ^ 0x6b73626f6f74ULL);
    GofOptions inner = opts;
    inner.ks_bootstrap = 0;
    int exceed = 0;
    for (int b = 0; b < opts.ks_bootstrap; ++b) {
      Rng rng = base.split();
      const std::vector<double> sim = dist.sample(data.size(), rng);
      try {
        const FitResult f = fit_model(spec, sim, inner);
        const UnitDistribution d2(spec, f.estimates);
        if (ks_test(sim, [&d2](double y) { return d2.cdf(y); }).statistic >= ks.statistic) ++exceed;
      } catch (const std::exception&) {
        ++exceed;  // a failed refit counts against the model
      }
    }
    rep.ks_bootstrap_pvalue = (1.0 + exceed) / (1.0 + opts.ks_bootstrap);
  }
  return rep;
}

std::vector<GofReport> compare_models(std::span<const double> data, const std::vector<ModelSpec>& models,
                                      const GofOptions& opts) {
  if (models.empty()) throw DomainError("compare_models: empty model list");
  validate_data(data);
  std::vector<GofReport> reports(models.size());
  const long count = static_cast<long>(models.size());
  const bool parallel = opts.fit.execution == Execution::Parallel;
  std::vector<std::string> errors(models.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (long i = 0; i < count; ++i) {
    try {
      reports[i] = assess(models[i], data, opts);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw DomainError(e);
  std::stable_sort(reports.begin(), reports.end(), [](const GofReport& a, const GofReport& b) {
    if (a.aic != b.aic) return a.aic < b.aic;
    return a.ks_statistic < b.ks_statistic;
  });
  return reports;
}

}  // namespace rgtlps
