#include "rgtlps/compound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rgtlps/errors.hpp"
#include "rgtlps/kernels.hpp"

namespace rgtlps {

namespace {

constexpr long kMixtureCap = 1000000;

void check_unit(const char* what, double y) {
  if (!(y >= 0.0 && y <= 1.0))
    throw DomainError(std::string(what) + ": argument " + std::to_string(y) +
                      " outside [0, 1]");
}

double interior(double y) {
  constexpr double lo = std::numeric_limits<double>::min();
  const double hi = std::nextafter(1.0, 0.0);
  return std::clamp(y, lo, hi);
}

}  // namespace

CompoundModel::CompoundModel(RgtlParams base, PsFamily family, double theta)
    : base_(base), family_(family), theta_(theta) {
  if (!family_.contains(theta))
    throw DomainError("theta = " + std::to_string(theta) + " outside the " +
                      std::string(family_.name()) + " parameter domain");
}

double compound_pdf(const CompoundModel& model, double y) {
  check_unit("compound_pdf", y);
  const double g = rgtl_pdf(model.base(), y);
  if (g == 0.0 || std::isinf(g)) return g;
  const double s = rgtl_survival(model.base(), y);
  const double theta = model.theta();
  const PsFamily& fam = model.family();
  return theta * g * fam.d1(theta * s) / fam.value(theta);
}

double compound_log_pdf(const CompoundModel& model, double y) {
  check_unit("compound_log_pdf", y);
  const double s = rgtl_survival(model.base(), y);
  const double theta = model.theta();
  const PsFamily& fam = model.family();
  return std::log(theta) + rgtl_log_pdf(model.base(), y) + fam.log_d1(theta * s) -
         fam.log_value(theta);
}

double compound_survival(const CompoundModel& model, double y) {
  check_unit("compound_survival", y);
  const double s = rgtl_survival(model.base(), y);
  if (s == 0.0) return 0.0;
  const PsFamily& fam = model.family();
  return fam.value(model.theta() * s) / fam.value(model.theta());
}

double compound_cdf(const CompoundModel& model, double y) {
  return 1.0 - compound_survival(model, y);
}

double compound_hazard(const CompoundModel& model, double y) {
  if (!(y >= 0.0 && y < 1.0))
    throw DomainError("compound_hazard: argument must lie in [0, 1), got " + std::to_string(y));
  const double s = rgtl_survival(model.base(), y);
  // A(x) ~ a_1 x as x -> 0, so the hazard tends to the base hazard.
  if (s == 0.0) return rgtl_hazard(model.base(), y);
  const double x = model.theta() * s;
  const PsFamily& fam = model.family();
  return model.theta() * rgtl_pdf(model.base(), y) * fam.d1(x) / fam.value(x);
}

double compound_hazard_at_zero(const CompoundModel& model) {
  const PsFamily& fam = model.family();
  const double theta = model.theta();
  return model.nu() * theta * (2.0 - model.alpha()) * fam.d1(theta) / fam.value(theta);
}

double compound_quantile(const CompoundModel& model, double q) {
  check_unit("compound_quantile", q);
  if (q == 0.0) return 0.0;
  if (q == 1.0) return 1.0;
  const PsFamily& fam = model.family();
  const double theta = model.theta();
  const double s = std::min(1.0, fam.inverse((1.0 - q) * fam.value(theta)) / theta);
  return rgtl_detail::nearest_in_probability(rgtl_quantile_from_survival(model.base(), s), q,
                                             [&](double y) { return compound_cdf(model, y); });
}

std::vector<MixtureComponent> mixture_components(const CompoundModel& model) {
  const PsFamily& fam = model.family();
  const double log_theta = std::log(model.theta());
  const double log_norm = fam.log_value(model.theta());
  const long zmax = std::min(fam.max_support(), kMixtureCap);
  std::vector<MixtureComponent> out;
  double cumulative = 0.0;
  double previous = 0.0;
  for (long z = 1; z <= zmax; ++z) {
    const double w = std::exp(fam.log_coefficient(z) + static_cast<double>(z) * log_theta - log_norm);
    out.push_back({z, w});
    cumulative += w;
    const bool decreasing = w <= previous;
    previous = w;
    if (fam.kind() != PsKind::Binomial && decreasing &&
        w * static_cast<double>(z) < 1e-17 * cumulative)
      return out;
  }
  if (fam.kind() != PsKind::Binomial)
    throw ConvergenceError("mixture truncation exceeded its term cap");
  return out;
}

double compound_moment(const CompoundModel& model, int r) {
  if (r < 0) throw DomainError("moment order must be non-negative");
  double sum = 0.0;
  for (const auto& c : mixture_components(model)) {
    if (c.weight == 0.0) continue;
    const RgtlParams shape = model.base().with_nu(model.nu() * static_cast<double>(c.z));
    sum += c.weight * rgtl_moment(shape, r);
  }
  return sum;
}

std::vector<double> compound_sample_inverse(const CompoundModel& model, std::size_t n, Rng& rng) {
  std::vector<double> u(n);
  for (auto& v : u) v = rng.uniform();
  std::vector<double> out(n);
  map_quantiles(model, u, out);
  for (auto& v : out) v = interior(v);
  return out;
}

std::vector<double> compound_sample_min(const CompoundModel& model, std::size_t n, Rng& rng) {
  std::vector<double> out(n);
  for (auto& v : out) {
    const long z = ps_sample(model.family(), model.theta(), rng);
    double m = 1.0;
    for (long j = 0; j < z; ++j) m = std::min(m, rgtl_quantile(model.base(), rng.uniform()));
    v = interior(m);
  }
  return out;
}

std::vector<double> rgtl_sample(const RgtlParams& params, std::size_t n, Rng& rng) {
  std::vector<double> out(n);
  for (auto& v : out) v = interior(rgtl_quantile(params, rng.uniform()));
  return out;
}

}  // namespace rgtlps
