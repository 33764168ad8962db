#include "rgtlps/power_series.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "rgtlps/errors.hpp"

namespace rgtlps {

namespace {

constexpr long kSampleCap = 1000000;

[[noreturn]] void domain_fail(const char* what, double x) {
  throw DomainError(std::string(what) + ": argument " + std::to_string(x) +
                    " outside the admissible domain");
}

}  // namespace

PsFamily PsFamily::binomial(int m) {
  if (m < 1) throw DomainError("binomial size m must be a positive integer");
  return PsFamily(PsKind::Binomial, m);
}

std::string_view PsFamily::name() const noexcept {
  switch (kind_) {
    case PsKind::Logarithmic: return "logarithmic";
    case PsKind::Geometric: return "geometric";
    case PsKind::Poisson: return "poisson";
    case PsKind::Binomial: return "binomial";
  }
  return "unknown";
}

double PsFamily::upper() const noexcept {
  switch (kind_) {
    case PsKind::Logarithmic:
    case PsKind::Geometric: return 1.0;
    default: return std::numeric_limits<double>::infinity();
  }
}

bool PsFamily::contains(double theta) const noexcept {
  return std::isfinite(theta) && theta > 0.0 && theta < upper();
}

long PsFamily::max_support() const noexcept {
  return kind_ == PsKind::Binomial ? m_ : std::numeric_limits<long>::max();
}

void PsFamily::check_argument(double x) const {
  if (!(x >= 0.0 && x < upper() && std::isfinite(x)))
    domain_fail("power-series generating function", x);
}

double PsFamily::log_coefficient(long z) const {
  if (z < 1) throw DomainError("power-series coefficient index must be >= 1");
  const double zd = static_cast<double>(z);
  switch (kind_) {
    case PsKind::Logarithmic: return -std::log(zd);
    case PsKind::Geometric: return 0.0;
    case PsKind::Poisson: return -std::lgamma(zd + 1.0);
    case PsKind::Binomial:
      if (z > m_) return -std::numeric_limits<double>::infinity();
      return std::lgamma(m_ + 1.0) - std::lgamma(zd + 1.0) -
             std::lgamma(m_ - zd + 1.0);
  }
  return 0.0;
}

double PsFamily::value(double x) const {
  check_argument(x);
  switch (kind_) {
    case PsKind::Logarithmic: return -std::log1p(-x);
    case PsKind::Geometric: return x / (1.0 - x);
    case PsKind::Poisson: return std::expm1(x);
    case PsKind::Binomial: return std::expm1(m_ * std::log1p(x));
  }
  return 0.0;
}

double PsFamily::log_value(double x) const {
  check_argument(x);
  if (x == 0.0) return -std::numeric_limits<double>::infinity();
  switch (kind_) {
    case PsKind::Logarithmic: return std::log(-std::log1p(-x));
    case PsKind::Geometric: return std::log(x) - std::log1p(-x);
    case PsKind::Poisson:
      // log(e^x - 1) = x + log(1 - e^-x)
      return x > 1.0 ? x + std::log1p(-std::exp(-x)) : std::log(std::expm1(x));
    case PsKind::Binomial: {
      const double lg = m_ * std::log1p(x);
      return lg > 1.0 ? lg + std::log1p(-std::exp(-lg)) : std::log(std::expm1(lg));
    }
  }
  return 0.0;
}

double PsFamily::d1(double x) const {
  check_argument(x);
  switch (kind_) {
    case PsKind::Logarithmic: return 1.0 / (1.0 - x);
    case PsKind::Geometric: return 1.0 / ((1.0 - x) * (1.0 - x));
    case PsKind::Poisson: return std::exp(x);
    case PsKind::Binomial: return m_ * std::pow(1.0 + x, m_ - 1);
  }
  return 0.0;
}

double PsFamily::log_d1(double x) const {
  check_argument(x);
  switch (kind_) {
    case PsKind::Logarithmic: return -std::log1p(-x);
    case PsKind::Geometric: return -2.0 * std::log1p(-x);
    case PsKind::Poisson: return x;
    case PsKind::Binomial: return std::log(static_cast<double>(m_)) + (m_ - 1) * std::log1p(x);
  }
  return 0.0;
}

double PsFamily::d2(double x) const {
  check_argument(x);
  const double c = 1.0 - x;
  switch (kind_) {
    case PsKind::Logarithmic: return 1.0 / (c * c);
    case PsKind::Geometric: return 2.0 / (c * c * c);
    case PsKind::Poisson: return std::exp(x);
    case PsKind::Binomial:
      return m_ < 2 ? 0.0 : m_ * (m_ - 1.0) * std::pow(1.0 + x, m_ - 2);
  }
  return 0.0;
}

double PsFamily::d3(double x) const {
  check_argument(x);
  const double c = 1.0 - x;
  switch (kind_) {
    case PsKind::Logarithmic: return 2.0 / (c * c * c);
    case PsKind::Geometric: return 6.0 / (c * c * c * c);
    case PsKind::Poisson: return std::exp(x);
    case PsKind::Binomial:
      return m_ < 3 ? 0.0 : m_ * (m_ - 1.0) * (m_ - 2.0) * std::pow(1.0 + x, m_ - 3);
  }
  return 0.0;
}

double PsFamily::d2_over_d1(double x) const {
  check_argument(x);
  switch (kind_) {
    case PsKind::Logarithmic: return 1.0 / (1.0 - x);
    case PsKind::Geometric: return 2.0 / (1.0 - x);
    case PsKind::Poisson: return 1.0;
    case PsKind::Binomial: return (m_ - 1.0) / (1.0 + x);
  }
  return 0.0;
}

double PsFamily::d2_over_d1_slope(double x) const {
  check_argument(x);
  switch (kind_) {
    case PsKind::Logarithmic: return 1.0 / ((1.0 - x) * (1.0 - x));
    case PsKind::Geometric: return 2.0 / ((1.0 - x) * (1.0 - x));
    case PsKind::Poisson: return 0.0;
    case PsKind::Binomial: return -(m_ - 1.0) / ((1.0 + x) * (1.0 + x));
  }
  return 0.0;
}

double PsFamily::log_value_curvature(double x) const {
  const double a = value(x);
  const double ratio = d1(x) / a;
  return d2(x) / a - ratio * ratio;
}

double PsFamily::mean(double x) const {
  check_argument(x);
  if (x == 0.0) return 1.0;
  switch (kind_) {
    case PsKind::Logarithmic: return x / ((1.0 - x) * -std::log1p(-x));
    case PsKind::Geometric: return 1.0 / (1.0 - x);
    case PsKind::Poisson: return x / -std::expm1(-x);
    case PsKind::Binomial:
      return m_ * x * std::pow(1.0 + x, m_ - 1) / std::expm1(m_ * std::log1p(x));
  }
  return 0.0;
}

double PsFamily::inverse(double u) const {
  if (!(u > 0.0 && std::isfinite(u))) domain_fail("power-series inverse", u);
  switch (kind_) {
    case PsKind::Logarithmic: return -std::expm1(-u);
    case PsKind::Geometric: return u / (1.0 + u);
    case PsKind::Poisson: return std::log1p(u);
    case PsKind::Binomial: return std::expm1(std::log1p(u) / m_);
  }
  return 0.0;
}

namespace {

void check_theta(const PsFamily& family, double theta) {
  if (!family.contains(theta)) domain_fail("power-series parameter theta", theta);
}

}  // namespace

double coefficient(const PsFamily& family, long z) {
  return std::exp(family.log_coefficient(z));
}

double generating(const PsFamily& family, double theta) {
  check_theta(family, theta);
  return family.value(theta);
}

double generating_d1(const PsFamily& family, double theta) {
  check_theta(family, theta);
  return family.d1(theta);
}

double generating_d2(const PsFamily& family, double theta) {
  check_theta(family, theta);
  return family.d2(theta);
}

double generating_d3(const PsFamily& family, double theta) {
  check_theta(family, theta);
  return family.d3(theta);
}

double generating_inverse(const PsFamily& family, double u) {
  return family.inverse(u);
}

double ps_pmf(const PsFamily& family, double theta, long z) {
  check_theta(family, theta);
  if (z < 1) throw DomainError("power-series support starts at z = 1");
  if (z > family.max_support()) return 0.0;
  return std::exp(family.log_coefficient(z) + static_cast<double>(z) * std::log(theta) -
                  family.log_value(theta));
}

double ps_mean(const PsFamily& family, double theta) {
  check_theta(family, theta);
  return family.mean(theta);
}

long ps_sample(const PsFamily& family, double theta, Rng& rng) {
  check_theta(family, theta);
  const double u = rng.uniform();
  const long zmax = family.max_support();
  double p = ps_pmf(family, theta, 1);
  double cumulative = p;
  long z = 1;
  while (cumulative < u && z < zmax && z < kSampleCap) {
    const double zd = static_cast<double>(z);
    switch (family.kind()) {
      case PsKind::Logarithmic: p *= theta * zd / (zd + 1.0); break;
      case PsKind::Geometric: p *= theta; break;
      case PsKind::Poisson: p *= theta / (zd + 1.0); break;
      case PsKind::Binomial: p *= theta * (family.m() - zd) / (zd + 1.0); break;
    }
    ++z;
    cumulative += p;
    if (p == 0.0) break;
  }
  return z;
}

}  // namespace rgtlps
