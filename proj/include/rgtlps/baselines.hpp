#pragma once

#include <span>

#include "rgtlps/estimation.hpp"

namespace rgtlps {

// Baseline laws on (0, 1) used in model comparisons.

struct BetaParams {
  double a, b;
};
double beta_pdf(BetaParams p, double y);
double beta_cdf(BetaParams p, double y);
double beta_quantile(BetaParams p, double q);
double beta_loglik(BetaParams p, std::span<const double> data);
FitResult fit_beta(std::span<const double> data, const FitOptions& opts = {});

// F(y) = 1 - (1 - y^a)^b.
struct KumaraswamyParams {
  double a, b;
};
double kumaraswamy_pdf(KumaraswamyParams p, double y);
double kumaraswamy_cdf(KumaraswamyParams p, double y);
double kumaraswamy_quantile(KumaraswamyParams p, double q);
double kumaraswamy_loglik(KumaraswamyParams p, std::span<const double> data);
FitResult fit_kumaraswamy(std::span<const double> data, const FitOptions& opts = {});

// One-parameter Topp-Leone: F(y) = [y (2 - y)]^nu.
double topp_leone_pdf(double nu, double y);
double topp_leone_cdf(double nu, double y);
double topp_leone_quantile(double nu, double q);
double topp_leone_loglik(double nu, std::span<const double> data);
// Closed form: nu = -n / sum log[y (2 - y)], standard error nu / sqrt(n).
FitResult fit_topp_leone(std::span<const double> data);

}  // namespace rgtlps
