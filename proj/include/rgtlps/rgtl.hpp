#pragma once

#include <cmath>

namespace rgtlps {

// Shape parameters of the standard reflected generalized Topp-Leone law on
// [0, 1]: G(y) = 1 - [(1-y)(alpha - (alpha-1)(1-y))]^nu.
class RgtlParams {
 public:
  // Throws DomainError unless 0 < alpha <= 2 and nu > 0.
  RgtlParams(double alpha, double nu);

  double alpha() const noexcept { return alpha_; }
  double nu() const noexcept { return nu_; }
  // (alpha - 1) / alpha, the expansion ratio of the moment series.
  double k() const noexcept { return (alpha_ - 1.0) / alpha_; }

  RgtlParams with_nu(double nu) const { return RgtlParams(alpha_, nu); }

  friend bool operator==(const RgtlParams&, const RgtlParams&) = default;

 private:
  double alpha_;
  double nu_;
};

// Pieces shared by the density, distribution and likelihood kernels. For
// y in [0, 1] with t = 1 - y:
//   base  B = t (alpha - (alpha-1) t),   1 - G = B^nu
//   slope E = alpha - 2 (alpha-1) t,      g = nu B^(nu-1) E
namespace rgtl_detail {

// log B, accurate for y near 0 and near 1.
double log_base(double alpha, double y);
// log B from the reflected coordinate t = 1 - y, accurate for tiny t.
double log_base_reflected(double alpha, double t);
double slope(double alpha, double y);

// Within 1e-12 of 1 the doubles resolve t only coarsely, so the nearest
// double to the exact quantile need not have the nearest probability; walk
// to the neighbour whose cdf is closest to q.
template <class Cdf>
double nearest_in_probability(double y, double q, const Cdf& cdf) {
  if (1.0 - y > 1e-12) return y;
  double err = std::fabs(cdf(y) - q);
  for (const double dir : {0.0, 2.0}) {
    for (int step = 0; step < 64; ++step) {
      const double next = std::nextafter(y, dir);
      if (next > 1.0) break;
      const double e = std::fabs(cdf(next) - q);
      if (!(e < err)) break;
      y = next;
      err = e;
    }
  }
  return y;
}

}  // namespace rgtl_detail

double rgtl_cdf(const RgtlParams& p, double y);
double rgtl_survival(const RgtlParams& p, double y);
double rgtl_log_survival(const RgtlParams& p, double y);
// At y = 1 the density is +inf for nu < 1, alpha for nu = 1, and 0 for nu > 1.
double rgtl_pdf(const RgtlParams& p, double y);
double rgtl_log_pdf(const RgtlParams& p, double y);
// Density as a function of t = 1 - y; keeps full precision close to y = 1.
double rgtl_pdf_reflected(const RgtlParams& p, double t);

double rgtl_quantile(const RgtlParams& p, double prob);
// Quantile addressed by its survival probability s = 1 - prob.
double rgtl_quantile_from_survival(const RgtlParams& p, double s);

// Defined on [0, 1); diverges at y = 1.
double rgtl_hazard(const RgtlParams& p, double y);

enum class MomentMethod {
  Automatic,   // series when it is well conditioned, quadrature otherwise
  Series,      // expansion in powers of k with incomplete beta terms
  Quadrature,  // direct integration of w^r g(w)
};

// Unnormalized incomplete moment: integral over [0, y_star] of w^r g(w) dw.
double rgtl_incomplete_moment(const RgtlParams& p, int r, double y_star,
                              MomentMethod method = MomentMethod::Automatic);
double rgtl_moment(const RgtlParams& p, int r,
                   MomentMethod method = MomentMethod::Automatic);

// True when the series path is admissible and numerically safe for (p, r).
bool rgtl_series_applicable(const RgtlParams& p);

}  // namespace rgtlps
