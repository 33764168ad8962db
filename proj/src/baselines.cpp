#include "rgtlps/baselines.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <numeric>

#include "rgtlps/errors.hpp"
#include "rgtlps/optimize.hpp"
#include "rgtlps/special.hpp"

namespace rgtlps {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_unit(double y, const char* who) {
  if (!(y >= 0.0 && y <= 1.0)) throw DomainError(std::string(who) + ": y must lie in [0, 1]");
}

void check_prob(double q, const char* who) {
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError(std::string(who) + ": q must lie in [0, 1]");
}

void check_positive(double v, const char* who) {
  if (!(v > 0.0 && std::isfinite(v))) throw DomainError(std::string(who) + ": parameters must be positive");
}

// log(1 - y^a) without cancellation for y^a near 1.
double log1m_pow(double y, double a) { return std::log(-std::expm1(a * std::log(y))); }

FitResult base_result(const char* model, std::vector<std::string> names, std::size_t n) {
  FitResult r;
  r.model = model;
  r.names = std::move(names);
  r.k = static_cast<int>(r.names.size());
  r.n = n;
  r.method = FitMethod::DirectML;
  r.starts_tried = 1;
  r.best_start = 0;
  return r;
}

void attach_errors(FitResult& r, const std::function<double(std::span<const double>)>& ll) {
  const std::vector<double> h = optim::numeric_hessian(ll, r.estimates);
  const Eigen::Index d = static_cast<Eigen::Index>(r.estimates.size());
  Eigen::MatrixXd info(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) info(i, j) = -h[i * d + j];
  const Eigen::LLT<Eigen::MatrixXd> llt(info);
  if (!info.allFinite() || llt.info() != Eigen::Success) {
    r.std_error_note = "observed information is not positive definite";
    return;
  }
  const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(d, d));
  for (Eigen::Index j = 0; j < d; ++j) r.std_errors.push_back(std::sqrt(cov(j, j)));
}

void flag_small(FitResult& r) {
  for (std::size_t j = 0; j < r.estimates.size(); ++j)
    if (r.estimates[j] < kBoundaryTolerance) r.boundary.push_back(r.names[j]);
}

// Two positive shapes fitted on the log scale with numeric gradients.
FitResult fit_two_positive(const char* model, std::span<const double> data, double a0, double b0,
                           const FitOptions& opts,
                           const std::function<double(double, double)>& loglik) {
  FitResult r = base_result(model, {"a", "b"}, data.size());
  optim::Objective objective = [&](std::span<const double> u, std::span<double> grad) {
    auto value = [&](std::span<const double> v) {
      const double ll = loglik(std::exp(v[0]), std::exp(v[1]));
      return std::isfinite(ll) ? ll : kNegInf;
    };
    const double f = value(u);
    if (!grad.empty() && std::isfinite(f)) {
      const std::vector<double> g = optim::numeric_gradient(value, u);
      std::copy(g.begin(), g.end(), grad.begin());
    }
    return f;
  };
  optim::BfgsOptions bo;
  bo.max_iter = opts.max_iter > 0 ? opts.max_iter : 500;
  bo.grad_tol = opts.tol > 0.0 ? opts.tol : 1e-7;
  const optim::BfgsResult res = optim::bfgs_maximize(objective, {std::log(a0), std::log(b0)}, bo);
  r.estimates = {std::exp(res.x[0]), std::exp(res.x[1])};
  r.loglik = loglik(r.estimates[0], r.estimates[1]);
  r.aic = aic(r.loglik, r.k);
  r.converged = res.converged && std::isfinite(r.loglik);
  r.starts_converged = r.converged ? 1 : 0;
  r.iterations = res.iterations;
  r.stop_reason = res.stop_reason;
  r.gradient_norm = 0.0;
  for (double g : res.gradient) r.gradient_norm = std::max(r.gradient_norm, std::fabs(g));
  flag_small(r);
  attach_errors(r, [&](std::span<const double> v) { return loglik(v[0], v[1]); });
  return r;
}

void check_sample(std::span<const double> data) {
  validate_data(data);
  if (data.size() < 2) throw DomainError("fitting needs at least 2 observations");
}

}  // namespace

// Beta

double beta_pdf(BetaParams p, double y) {
  check_positive(p.a, "beta_pdf");
  check_positive(p.b, "beta_pdf");
  check_unit(y, "beta_pdf");
  if (y == 0.0) return p.a < 1.0 ? std::numeric_limits<double>::infinity() : (p.a == 1.0 ? p.b : 0.0);
  if (y == 1.0) return p.b < 1.0 ? std::numeric_limits<double>::infinity() : (p.b == 1.0 ? p.a : 0.0);
  return std::exp((p.a - 1.0) * std::log(y) + (p.b - 1.0) * std::log1p(-y) - log_beta(p.a, p.b));
}

double beta_cdf(BetaParams p, double y) {
  check_positive(p.a, "beta_cdf");
  check_positive(p.b, "beta_cdf");
  check_unit(y, "beta_cdf");
  return incomplete_beta(p.a, p.b, y);
}

double beta_quantile(BetaParams p, double q) {
  check_positive(p.a, "beta_quantile");
  check_positive(p.b, "beta_quantile");
  check_prob(q, "beta_quantile");
  if (q == 0.0) return 0.0;
  if (q == 1.0) return 1.0;
  return optim::bracketed_root([&](double y) { return incomplete_beta(p.a, p.b, y) - q; }, 0.0, 1.0);
}

double beta_loglik(BetaParams p, std::span<const double> data) {
  double s = 0.0;
  for (double y : data) s += (p.a - 1.0) * std::log(y) + (p.b - 1.0) * std::log1p(-y);
  return s - static_cast<double>(data.size()) * log_beta(p.a, p.b);
}

FitResult fit_beta(std::span<const double> data, const FitOptions& opts) {
  check_sample(data);
  const double n = static_cast<double>(data.size());
  const double mean = std::accumulate(data.begin(), data.end(), 0.0) / n;
  double var = 0.0;
  for (double y : data) var += (y - mean) * (y - mean);
  var /= n;
  // Method of moments start, falling back to the uniform.
  double a0 = 1.0, b0 = 1.0;
  const double common = mean * (1.0 - mean) / var - 1.0;
  if (var > 0.0 && common > 0.0) {
    a0 = mean * common;
    b0 = (1.0 - mean) * common;
  }
  return fit_two_positive("beta", data, a0, b0, opts, [data](double a, double b) {
    if (!(a > 0.0 && b > 0.0)) return kNegInf;
    return beta_loglik({a, b}, data);
  });
}

// Kumaraswamy

double kumaraswamy_pdf(KumaraswamyParams p, double y) {
  check_positive(p.a, "kumaraswamy_pdf");
  check_positive(p.b, "kumaraswamy_pdf");
  check_unit(y, "kumaraswamy_pdf");
  if (y == 0.0) return p.a < 1.0 ? std::numeric_limits<double>::infinity() : (p.a == 1.0 ? p.b : 0.0);
  if (y == 1.0) return p.b < 1.0 ? std::numeric_limits<double>::infinity() : (p.b == 1.0 ? p.a : 0.0);
  return std::exp(std::log(p.a * p.b) + (p.a - 1.0) * std::log(y) + (p.b - 1.0) * log1m_pow(y, p.a));
}

double kumaraswamy_cdf(KumaraswamyParams p, double y) {
  check_positive(p.a, "kumaraswamy_cdf");
  check_positive(p.b, "kumaraswamy_cdf");
  check_unit(y, "kumaraswamy_cdf");
  if (y == 0.0) return 0.0;
  if (y == 1.0) return 1.0;
  return -std::expm1(p.b * log1m_pow(y, p.a));
}

double kumaraswamy_quantile(KumaraswamyParams p, double q) {
  check_positive(p.a, "kumaraswamy_quantile");
  check_positive(p.b, "kumaraswamy_quantile");
  check_prob(q, "kumaraswamy_quantile");
  if (q == 0.0) return 0.0;
  if (q == 1.0) return 1.0;
  // y^a = 1 - (1-q)^(1/b)
  return std::exp(std::log(-std::expm1(std::log1p(-q) / p.b)) / p.a);
}

double kumaraswamy_loglik(KumaraswamyParams p, std::span<const double> data) {
  double s = 0.0;
  for (double y : data) s += (p.a - 1.0) * std::log(y) + (p.b - 1.0) * log1m_pow(y, p.a);
  return s + static_cast<double>(data.size()) * std::log(p.a * p.b);
}

FitResult fit_kumaraswamy(std::span<const double> data, const FitOptions& opts) {
  check_sample(data);
  const double n = static_cast<double>(data.size());
  // For fixed a the likelihood is maximized by b = -n / sum log(1 - y^a);
  // a start comes from maximizing this profile on a log grid.
  auto profile = [&](double log_a) {
    const double a = std::exp(log_a);
    double s = 0.0;
    for (double y : data) s += log1m_pow(y, a);
    return kumaraswamy_loglik({a, -n / s}, data);
  };
  const double log_a = optim::maximize_scalar(profile, std::log(1e-3), std::log(1e3));
  const double a0 = std::exp(log_a);
  double s = 0.0;
  for (double y : data) s += log1m_pow(y, a0);
  return fit_two_positive("kumaraswamy", data, a0, -n / s, opts, [data](double a, double b) {
    if (!(a > 0.0 && b > 0.0)) return kNegInf;
    return kumaraswamy_loglik({a, b}, data);
  });
}

// Topp-Leone

double topp_leone_pdf(double nu, double y) {
  check_positive(nu, "topp_leone_pdf");
  check_unit(y, "topp_leone_pdf");
  if (y == 0.0) return nu < 1.0 ? std::numeric_limits<double>::infinity() : (nu == 1.0 ? 2.0 : 0.0);
  return 2.0 * nu * (1.0 - y) * std::pow(y * (2.0 - y), nu - 1.0);
}

double topp_leone_cdf(double nu, double y) {
  check_positive(nu, "topp_leone_cdf");
  check_unit(y, "topp_leone_cdf");
  return std::pow(y * (2.0 - y), nu);
}

double topp_leone_quantile(double nu, double q) {
  check_positive(nu, "topp_leone_quantile");
  check_prob(q, "topp_leone_quantile");
  // y (2 - y) = c  =>  y = c / (1 + sqrt(1 - c))
  const double c = std::pow(q, 1.0 / nu);
  return c / (1.0 + std::sqrt(1.0 - c));
}

double topp_leone_loglik(double nu, std::span<const double> data) {
  double s = 0.0;
  for (double y : data) s += std::log(2.0 * (1.0 - y)) + (nu - 1.0) * std::log(y * (2.0 - y));
  return s + static_cast<double>(data.size()) * std::log(nu);
}

FitResult fit_topp_leone(std::span<const double> data) {
  check_sample(data);
  const double n = static_cast<double>(data.size());
  double s = 0.0;
  for (double y : data) s += std::log(y * (2.0 - y));
  FitResult r = base_result("tl", {"nu"}, data.size());
  const double nu = -n / s;
  r.estimates = {nu};
  r.std_errors = {nu / std::sqrt(n)};
  r.loglik = topp_leone_loglik(nu, data);
  r.aic = aic(r.loglik, r.k);
  r.converged = std::isfinite(nu);
  r.starts_converged = r.converged ? 1 : 0;
  r.stop_reason = "closed form";
  flag_small(r);
  return r;
}

}  // namespace rgtlps
