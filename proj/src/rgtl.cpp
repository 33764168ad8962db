#include "rgtlps/rgtl.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <string>

#include "rgtlps/errors.hpp"

namespace rgtlps {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr long kSeriesCap = 100000;
// Largest tolerated amplification of rounding error by alternating terms.
constexpr double kSeriesCancellationLimit = 1e4;
// Beyond this the binomial coefficients overflow before alpha^(nu-1) underflows.
constexpr double kSeriesMaxNu = 500.0;

void check_unit(const char* what, double y) {
  if (!(y >= 0.0 && y <= 1.0))
    throw DomainError(std::string(what) + ": argument " + std::to_string(y) +
                      " outside [0, 1]");
}

// Root in [0, 1] of y((2-alpha) + (alpha-1) y) = 1 - exp(log_c), i.e. the
// point whose base survival is exp(nu * log_c). Uses whichever of the two
// rationalized forms avoids cancellation.
double invert_base(double alpha, double log_c) {
  if (log_c == 0.0) return 0.0;
  if (log_c == -kInf) return 1.0;
  const double c = std::exp(log_c);
  const double w = -std::expm1(log_c);
  if (w <= 0.5) {
    const double disc = std::max(0.0, (2.0 - alpha) * (2.0 - alpha) + 4.0 * (alpha - 1.0) * w);
    return 2.0 * w / ((2.0 - alpha) + std::sqrt(disc));
  }
  const double disc = std::max(0.0, alpha * alpha - 4.0 * (alpha - 1.0) * c);
  const double u = 2.0 * c / (alpha + std::sqrt(disc));
  return 1.0 - u;
}

double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double incomplete_beta_quadrature(double a, double b, double x) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  auto f = [a, b](double w) {
    return std::exp((a - 1.0) * std::log(w) + (b - 1.0) * std::log1p(-w));
  };
  return integrator.integrate(f, 0.0, x, 1e-14);
}

double moment_by_quadrature(const RgtlParams& p, int r, double y_star) {
  // Integrate in t = 1 - w so the possible singularity at w = 1 sits on an
  // exactly representable endpoint.
  const double t_lo = 1.0 - y_star;
  auto f = [&p, r](double t) {
    const double g = rgtl_pdf_reflected(p, t);
    return r == 0 ? g : std::pow(1.0 - t, r) * g;
  };
  boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate(f, t_lo, 1.0, 1e-14);
}

double moment_by_series(const RgtlParams& p, int r, double y_star) {
  const double alpha = p.alpha();
  const double nu = p.nu();
  const double neg_k = -p.k();
  const bool complete = y_star >= 1.0;

  // Complete beta B(r+1, nu+h) advanced by recursion in h.
  double beta_h = complete ? std::exp(log_beta(r + 1.0, nu)) : 0.0;
  double coef = 1.0;   // binom(nu-1, h)
  double power = 1.0;  // (-k)^h
  double sum = 0.0;
  for (long h = 0; h < kSeriesCap; ++h) {
    const double b = nu + static_cast<double>(h);
    double bracket;
    if (complete) {
      bracket = ((2.0 - alpha) + 2.0 * (alpha - 1.0) * (r + 1.0) / (b + r + 1.0)) * beta_h;
      beta_h *= b / (b + r + 1.0);
    } else {
      bracket = (2.0 - alpha) * incomplete_beta_quadrature(r + 1.0, b, y_star) +
                2.0 * (alpha - 1.0) * incomplete_beta_quadrature(r + 2.0, b, y_star);
    }
    const double term = coef * power * bracket;
    sum += term;
    if (coef == 0.0 || power == 0.0) break;
    if (static_cast<double>(h) > nu + 1.0 &&
        std::fabs(term) < 1e-17 * std::fabs(sum))
      break;
    coef *= (nu - 1.0 - static_cast<double>(h)) / (static_cast<double>(h) + 1.0);
    power *= neg_k;
    if (h + 1 == kSeriesCap)
      throw ConvergenceError("incomplete moment series did not converge");
  }
  const double value = nu * std::pow(alpha, nu - 1.0) * sum;
  if (!std::isfinite(value)) throw ConvergenceError("moment series overflowed");
  return value;
}

}  // namespace

RgtlParams::RgtlParams(double alpha, double nu) : alpha_(alpha), nu_(nu) {
  if (!(alpha > 0.0 && alpha <= 2.0))
    throw DomainError("rGTL shape alpha must lie in (0, 2], got " + std::to_string(alpha));
  if (!(nu > 0.0 && std::isfinite(nu)))
    throw DomainError("rGTL shape nu must be positive, got " + std::to_string(nu));
}

namespace rgtl_detail {

double log_base(double alpha, double y) {
  const double w = y * ((2.0 - alpha) + (alpha - 1.0) * y);
  if (w <= 0.5) return std::log1p(-w);
  const double t = 1.0 - y;
  if (t == 0.0) return -kInf;
  return std::log(t) + std::log(alpha - (alpha - 1.0) * t);
}

double log_base_reflected(double alpha, double t) {
  if (t >= 0.5) return log_base(alpha, 1.0 - t);
  if (t == 0.0) return -kInf;
  return std::log(t) + std::log(alpha - (alpha - 1.0) * t);
}

double slope(double alpha, double y) {
  if (y <= 0.5) return (2.0 - alpha) + 2.0 * (alpha - 1.0) * y;
  return alpha - 2.0 * (alpha - 1.0) * (1.0 - y);
}

}  // namespace rgtl_detail

double rgtl_log_survival(const RgtlParams& p, double y) {
  check_unit("rgtl_log_survival", y);
  return p.nu() * rgtl_detail::log_base(p.alpha(), y);
}

double rgtl_survival(const RgtlParams& p, double y) {
  return std::exp(rgtl_log_survival(p, y));
}

double rgtl_cdf(const RgtlParams& p, double y) {
  return -std::expm1(rgtl_log_survival(p, y));
}

double rgtl_pdf(const RgtlParams& p, double y) {
  check_unit("rgtl_pdf", y);
  const double nu = p.nu();
  if (y == 1.0) {
    if (nu < 1.0) return kInf;
    return nu == 1.0 ? p.alpha() : 0.0;
  }
  const double lb = rgtl_detail::log_base(p.alpha(), y);
  return nu * std::exp((nu - 1.0) * lb) * rgtl_detail::slope(p.alpha(), y);
}

double rgtl_pdf_reflected(const RgtlParams& p, double t) {
  check_unit("rgtl_pdf_reflected", t);
  const double nu = p.nu();
  const double alpha = p.alpha();
  if (t == 0.0) {
    if (nu < 1.0) return kInf;
    return nu == 1.0 ? alpha : 0.0;
  }
  const double lb = rgtl_detail::log_base_reflected(alpha, t);
  const double e = t >= 0.5 ? rgtl_detail::slope(alpha, 1.0 - t)
                            : alpha - 2.0 * (alpha - 1.0) * t;
  return nu * std::exp((nu - 1.0) * lb) * e;
}

double rgtl_log_pdf(const RgtlParams& p, double y) {
  check_unit("rgtl_log_pdf", y);
  return std::log(p.nu()) + (p.nu() - 1.0) * rgtl_detail::log_base(p.alpha(), y) +
         std::log(rgtl_detail::slope(p.alpha(), y));
}

double rgtl_quantile(const RgtlParams& p, double prob) {
  check_unit("rgtl_quantile", prob);
  if (prob == 1.0) return 1.0;
  return rgtl_detail::nearest_in_probability(invert_base(p.alpha(), std::log1p(-prob) / p.nu()), prob,
                                             [&](double y) { return rgtl_cdf(p, y); });
}

double rgtl_quantile_from_survival(const RgtlParams& p, double s) {
  check_unit("rgtl_quantile_from_survival", s);
  if (s == 0.0) return 1.0;
  return invert_base(p.alpha(), std::log(s) / p.nu());
}

double rgtl_hazard(const RgtlParams& p, double y) {
  if (!(y >= 0.0 && y < 1.0))
    throw DomainError("rgtl_hazard: argument must lie in [0, 1), got " + std::to_string(y));
  const double lb = rgtl_detail::log_base(p.alpha(), y);
  return p.nu() * rgtl_detail::slope(p.alpha(), y) * std::exp(-lb);
}

bool rgtl_series_applicable(const RgtlParams& p) {
  const double alpha = p.alpha();
  if (alpha < 0.6 || p.nu() > kSeriesMaxNu) return false;
  if (alpha <= 1.0) return true;
  const double excess = std::max(p.nu() - 1.0, 0.0);
  return excess * std::log(2.0 * alpha - 1.0) <= std::log(kSeriesCancellationLimit);
}

double rgtl_incomplete_moment(const RgtlParams& p, int r, double y_star, MomentMethod method) {
  if (r < 0) throw DomainError("moment order must be non-negative");
  if (!(y_star > 0.0 && y_star <= 1.0))
    throw DomainError("incomplete moment upper limit must lie in (0, 1]");
  switch (method) {
    case MomentMethod::Quadrature: return moment_by_quadrature(p, r, y_star);
    case MomentMethod::Series:
      if (p.alpha() <= 0.5)
        throw DomainError("moment series diverges for alpha <= 1/2");
      return moment_by_series(p, r, y_star);
    case MomentMethod::Automatic:
      // Incomplete beta terms cost one quadrature each, so the series only
      // pays off for complete moments.
      return y_star >= 1.0 && rgtl_series_applicable(p) ? moment_by_series(p, r, y_star)
                                                        : moment_by_quadrature(p, r, y_star);
  }
  return 0.0;
}

double rgtl_moment(const RgtlParams& p, int r, MomentMethod method) {
  return rgtl_incomplete_moment(p, r, 1.0, method);
}

}  // namespace rgtlps
