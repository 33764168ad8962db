#pragma once

#include <cstddef>
#include <vector>

#include "rgtlps/power_series.hpp"
#include "rgtlps/random.hpp"
#include "rgtlps/rgtl.hpp"

namespace rgtlps {

// Distribution of Y = min(Y_1, ..., Y_Z) with Y_i i.i.d. rGTL(alpha, nu) and
// Z zero-truncated power series with parameter theta:
//   f(y) = theta g(y) A'(theta S(y)) / A(theta),   1 - F(y) = A(theta S(y)) / A(theta)
// where S = 1 - G is the base survival.
class CompoundModel {
 public:
  // Throws DomainError when theta is outside the family's domain.
  CompoundModel(RgtlParams base, PsFamily family, double theta);

  const RgtlParams& base() const noexcept { return base_; }
  const PsFamily& family() const noexcept { return family_; }
  double theta() const noexcept { return theta_; }
  double alpha() const noexcept { return base_.alpha(); }
  double nu() const noexcept { return base_.nu(); }

 private:
  RgtlParams base_;
  PsFamily family_;
  double theta_;
};

double compound_pdf(const CompoundModel& model, double y);
double compound_log_pdf(const CompoundModel& model, double y);
double compound_cdf(const CompoundModel& model, double y);
double compound_survival(const CompoundModel& model, double y);
// Defined on [0, 1); diverges at y = 1.
double compound_hazard(const CompoundModel& model, double y);
// Limit of the hazard at y = 0: nu theta (2 - alpha) A'(theta) / A(theta).
double compound_hazard_at_zero(const CompoundModel& model);
double compound_quantile(const CompoundModel& model, double q);

// Mixture weight P(Z = z) paired with the base shape nu*z of that component.
struct MixtureComponent {
  long z;
  double weight;
};

// Leading mixture components, truncated once the remaining weight is
// negligible (exactly m components for the binomial family).
std::vector<MixtureComponent> mixture_components(const CompoundModel& model);

// E[Y^r] as the weighted sum of base moments with shape nu*z.
double compound_moment(const CompoundModel& model, int r);

// Inverse-transform sampler: y_i = Q(u_i). Values that would round onto an
// endpoint are mapped to the nearest interior double.
std::vector<double> compound_sample_inverse(const CompoundModel& model, std::size_t n, Rng& rng);
// Series-system sampler: draw Z, return the minimum of Z base draws.
std::vector<double> compound_sample_min(const CompoundModel& model, std::size_t n, Rng& rng);

// Base rGTL draws (the Z = 1 special case of the samplers above).
std::vector<double> rgtl_sample(const RgtlParams& params, std::size_t n, Rng& rng);

}  // namespace rgtlps
