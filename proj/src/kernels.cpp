#include "rgtlps/kernels.hpp"

#include <cmath>
#include <vector>

#include "rgtlps/errors.hpp"

namespace rgtlps {

namespace {

struct Terms {
  double value;
  double grad[3];
  double hess[6];
};

// Per-observation log-likelihood contribution and derivatives. With
// D = 1 + (alpha-1) y, E the slope term, B the base and S = B^nu:
//   dS/dalpha = nu y S / D,  dS/dnu = S log B.
inline Terms observation_terms(const PsFamily& fam, double alpha, double nu, double theta,
                               double y, Order order, bool with_series) {
  Terms t{};
  const double lb = rgtl_detail::log_base(alpha, y);
  const double e = rgtl_detail::slope(alpha, y);
  const double lg = std::log(nu) + (nu - 1.0) * lb + std::log(e);
  double s = 0.0;
  double x = 0.0;
  if (with_series) {
    s = std::exp(nu * lb);
    x = theta * s;
    t.value = lg + fam.log_d1(x);
  } else {
    t.value = lg;
  }
  if (order == Order::Value) return t;

  const double d = 1.0 + (alpha - 1.0) * y;
  const double y_d = y / d;
  const double q = (2.0 * y - 1.0) / e;
  const double lg_a = (nu - 1.0) * y_d + q;
  const double lg_n = 1.0 / nu + lb;
  t.grad[0] = lg_a;
  t.grad[1] = lg_n;

  double s_a = 0.0, s_n = 0.0, r2 = 0.0;
  if (with_series) {
    s_a = nu * y_d * s;
    s_n = s * lb;
    r2 = fam.d2_over_d1(x);
    t.grad[0] += r2 * theta * s_a;
    t.grad[1] += r2 * theta * s_n;
    t.grad[2] = r2 * s;
  }
  if (order == Order::Gradient) return t;

  const double lg_aa = -(nu - 1.0) * y_d * y_d - q * q;
  const double lg_an = y_d;
  const double lg_nn = -1.0 / (nu * nu);
  t.hess[0] = lg_aa;
  t.hess[1] = lg_an;
  t.hess[3] = lg_nn;
  if (with_series) {
    const double r1 = fam.d2_over_d1_slope(x);
    const double s_aa = s * nu * (nu - 1.0) * y_d * y_d;
    const double s_an = s_a * (1.0 / nu + lb);
    const double s_nn = s * lb * lb;
    const double th2 = theta * theta;
    t.hess[0] += r1 * th2 * s_a * s_a + r2 * theta * s_aa;
    t.hess[1] += r1 * th2 * s_a * s_n + r2 * theta * s_an;
    t.hess[2] = (r1 * theta * s + r2) * s_a;
    t.hess[3] += r1 * th2 * s_n * s_n + r2 * theta * s_nn;
    t.hess[4] = (r1 * theta * s + r2) * s_n;
    t.hess[5] = r1 * s * s;
  }
  return t;
}

inline void accumulate(LikelihoodSums& acc, const Terms& t) {
  acc.value += t.value;
  for (int j = 0; j < 3; ++j) acc.gradient[j] += t.grad[j];
  for (int j = 0; j < 6; ++j) acc.hessian[j] += t.hess[j];
}

LikelihoodSums sums_impl(const PsFamily& fam, double alpha, double nu, double theta,
                         std::span<const double> data, Order order, Execution exec,
                         bool with_series) {
  LikelihoodSums acc;
  const std::size_t n = data.size();
  if (exec == Execution::Serial) {
    for (std::size_t i = 0; i < n; ++i)
      accumulate(acc, observation_terms(fam, alpha, nu, theta, data[i], order, with_series));
    return acc;
  }
  std::vector<Terms> buf(n);
  const long nl = static_cast<long>(n);
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (long i = 0; i < nl; ++i)
    buf[i] = observation_terms(fam, alpha, nu, theta, data[i], order, with_series);
  for (const auto& t : buf) accumulate(acc, t);
  return acc;
}

inline double latent_mean(const PsFamily& fam, double alpha, double nu, double theta, double y) {
  const double x = theta * std::exp(nu * rgtl_detail::log_base(alpha, y));
  return 1.0 + x * fam.d2_over_d1(x);
}

}  // namespace

LikelihoodSums likelihood_sums(const CompoundModel& model, std::span<const double> data,
                               Order order, Execution exec) {
  return sums_impl(model.family(), model.alpha(), model.nu(), model.theta(), data, order, exec,
                   true);
}

LikelihoodSums base_likelihood_sums(const RgtlParams& params, std::span<const double> data,
                                    Order order, Execution exec) {
  return sums_impl(PsFamily::geometric(), params.alpha(), params.nu(), 0.0, data, order, exec,
                   false);
}

void expected_latent(const CompoundModel& model, std::span<const double> data,
                     std::span<double> out, Execution exec) {
  if (out.size() != data.size()) throw DomainError("expected_latent: output size differs from data size");
  const PsFamily& fam = model.family();
  const double alpha = model.alpha(), nu = model.nu(), theta = model.theta();
  const long n = static_cast<long>(data.size());
  if (exec == Execution::Serial) {
    for (long i = 0; i < n; ++i) out[i] = latent_mean(fam, alpha, nu, theta, data[i]);
    return;
  }
#pragma omp parallel for schedule(static) if (data.size() >= kParallelThreshold)
  for (long i = 0; i < n; ++i) out[i] = latent_mean(fam, alpha, nu, theta, data[i]);
}

namespace {

// log B, log E and their alpha-derivatives at one observation:
//   d log B / d alpha = y / D,  d log E / d alpha = (2y - 1) / E.
struct CompleteTerms {
  double lb, lb1, lb2, le, le1, le2;
};

inline CompleteTerms complete_terms(double alpha, double y) {
  const double lb = rgtl_detail::log_base(alpha, y);
  const double e = rgtl_detail::slope(alpha, y);
  const double y_d = y / (1.0 + (alpha - 1.0) * y);
  const double q = (2.0 * y - 1.0) / e;
  return {lb, y_d, -y_d * y_d, std::log(e), q, -q * q};
}

inline void accumulate(CompleteDataSums& acc, const CompleteTerms& t, double w) {
  acc.weighted_log_base[0] += w * t.lb;
  acc.weighted_log_base[1] += w * t.lb1;
  acc.weighted_log_base[2] += w * t.lb2;
  acc.log_base[0] += t.lb;
  acc.log_base[1] += t.lb1;
  acc.log_base[2] += t.lb2;
  acc.log_slope[0] += t.le;
  acc.log_slope[1] += t.le1;
  acc.log_slope[2] += t.le2;
}

}  // namespace

CompleteDataSums complete_data_sums(double alpha, std::span<const double> data,
                                    std::span<const double> weights, Execution exec) {
  if (weights.size() != data.size())
    throw DomainError("complete_data_sums: weight count differs from data size");
  CompleteDataSums acc;
  const std::size_t n = data.size();
  if (exec == Execution::Serial) {
    for (std::size_t i = 0; i < n; ++i) accumulate(acc, complete_terms(alpha, data[i]), weights[i]);
    return acc;
  }
  std::vector<CompleteTerms> buf(n);
  const long nl = static_cast<long>(n);
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (long i = 0; i < nl; ++i) buf[i] = complete_terms(alpha, data[i]);
  for (std::size_t i = 0; i < n; ++i) accumulate(acc, buf[i], weights[i]);
  return acc;
}

void map_quantiles(const CompoundModel& model, std::span<const double> u, std::span<double> out,
                   Execution exec) {
  if (out.size() != u.size()) throw DomainError("map_quantiles: output size differs from input size");
  for (double v : u)
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("map_quantiles: probability outside [0, 1]");
  const long n = static_cast<long>(u.size());
  if (exec == Execution::Serial) {
    for (long i = 0; i < n; ++i) out[i] = compound_quantile(model, u[i]);
    return;
  }
#pragma omp parallel for schedule(static) if (u.size() >= kParallelThreshold)
  for (long i = 0; i < n; ++i) out[i] = compound_quantile(model, u[i]);
}

}  // namespace rgtlps
