#pragma once

#include <string_view>

#include "rgtlps/random.hpp"

namespace rgtlps {

enum class PsKind { Logarithmic, Geometric, Poisson, Binomial };

// A zero-truncated power-series distribution P(Z=z) = a_z θ^z / A(θ), z >= 1.
//
// Member functions evaluate the generating function A and its derivatives at
// an arbitrary argument x in [0, upper()), which is what the compound model
// needs (A'(θ·S) with S in [0,1]). The free functions below check that θ lies
// in the open parameter domain.
class PsFamily {
 public:
  static PsFamily logarithmic() { return PsFamily(PsKind::Logarithmic, 0); }
  static PsFamily geometric() { return PsFamily(PsKind::Geometric, 0); }
  static PsFamily poisson() { return PsFamily(PsKind::Poisson, 0); }
  static PsFamily binomial(int m);

  PsKind kind() const noexcept { return kind_; }
  // Binomial size; 0 for the other families.
  int m() const noexcept { return m_; }
  std::string_view name() const noexcept;

  // Supremum of the θ domain: 1 for Logarithmic/Geometric, +inf otherwise.
  double upper() const noexcept;
  bool contains(double theta) const noexcept;
  // Largest z with a_z > 0 (m for Binomial, effectively unbounded otherwise).
  long max_support() const noexcept;

  double log_coefficient(long z) const;

  double value(double x) const;       // A(x)
  double log_value(double x) const;   // log A(x), x > 0
  double d1(double x) const;          // A'(x)
  double log_d1(double x) const;      // log A'(x)
  double d2(double x) const;          // A''(x)
  double d3(double x) const;          // A'''(x)
  double d2_over_d1(double x) const;  // A''/A'
  // d/dx (A''/A') = (A''' A' - A''^2) / A'^2
  double d2_over_d1_slope(double x) const;
  // (A''(x) A(x) - A'(x)^2) / A(x)^2, x > 0
  double log_value_curvature(double x) const;
  // Mean of Z: x A'(x) / A(x), x > 0
  double mean(double x) const;
  // Unique x with A(x) = u, u > 0.
  double inverse(double u) const;

  friend bool operator==(const PsFamily&, const PsFamily&) = default;

 private:
  PsFamily(PsKind kind, int m) : kind_(kind), m_(m) {}
  void check_argument(double x) const;

  PsKind kind_;
  int m_;
};

double coefficient(const PsFamily& family, long z);
double generating(const PsFamily& family, double theta);
double generating_d1(const PsFamily& family, double theta);
double generating_d2(const PsFamily& family, double theta);
double generating_d3(const PsFamily& family, double theta);
double generating_inverse(const PsFamily& family, double u);

double ps_pmf(const PsFamily& family, double theta, long z);
double ps_mean(const PsFamily& family, double theta);
// Inverse transform on the cumulative pmf.
long ps_sample(const PsFamily& family, double theta, Rng& rng);

}  // namespace rgtlps
