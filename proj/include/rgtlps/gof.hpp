#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rgtlps/estimation.hpp"
#include "rgtlps/random.hpp"

namespace rgtlps {

struct KsResult {
  double statistic = 0.0;
  double pvalue = 1.0;
};

// Kolmogorov limiting survival Q(lambda) = P(sup|B| > lambda).
double kolmogorov_pvalue(double lambda);

// One-sample two-sided test against a continuous cdf.
KsResult ks_test(std::span<const double> data, const std::function<double(double)>& cdf);

// Two-sample two-sided test, asymptotic p-value with the effective size n m / (n + m).
KsResult ks_two_sample(std::span<const double> x, std::span<const double> y);

enum class ModelKind { RgtlLog, RgtlGeo, RgtlPoi, RgtlBin, Rgtl, TL, Beta, Kumaraswamy };

std::string_view model_name(ModelKind kind);
// Throws DomainError for unknown names.
ModelKind parse_model(std::string_view name);
bool is_compound(ModelKind kind);

struct ModelSpec {
  ModelKind kind;
  int m = 0;  // binomial size, rgtl-bin only
};

// A fully specified member of one of the catalogued laws.
class UnitDistribution {
 public:
  UnitDistribution(ModelSpec spec, std::vector<double> params);

  const ModelSpec& spec() const noexcept { return spec_; }
  const std::vector<double>& params() const noexcept { return params_; }

  double pdf(double y) const;
  double cdf(double y) const;
  double quantile(double q) const;
  double hazard(double y) const;
  std::vector<double> sample(std::size_t n, Rng& rng) const;

 private:
  ModelSpec spec_;
  std::vector<double> params_;
};

struct GofOptions {
  FitOptions fit;
  FitMethod method = FitMethod::DirectML;
  // Parametric bootstrap replicates for the KS p-value; 0 disables.
  int ks_bootstrap = 0;
};

FitResult fit_model(const ModelSpec& spec, std::span<const double> data, const GofOptions& opts);

struct GofReport {
  std::string model_name;
  int k = 0;
  double loglik = 0.0;
  double aic = 0.0;
  double ks_statistic = 0.0;
  double ks_pvalue = 0.0;
  std::optional<double> ks_bootstrap_pvalue;
  FitResult fit;
  // Set when fitting failed or did not converge; the report is still ranked.
  std::string note;
};

GofReport assess(const ModelSpec& spec, std::span<const double> data, const GofOptions& opts);

// Fits every model and ranks by ascending AIC, ties broken by the KS statistic.
std::vector<GofReport> compare_models(std::span<const double> data, const std::vector<ModelSpec>& models,
                                      const GofOptions& opts = {});

}  // namespace rgtlps
