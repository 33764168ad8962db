#pragma once

#include <array>
#include <span>

#include "rgtlps/compound.hpp"

namespace rgtlps {

// Data-parallel kernels over observations. Every kernel has a plain serial
// reference loop and an OpenMP version; the OpenMP version fills a buffer of
// per-observation terms and reduces it in index order, so both produce
// bit-identical results for any thread count.
enum class Execution { Serial, Parallel };

// How many derivatives of the log-likelihood to accumulate.
enum class Order { Value, Gradient, Hessian };

// Parameter vector in the order (alpha, nu, theta).
using ParamVec = std::array<double, 3>;
// Upper triangle of a symmetric 3x3 matrix: aa, an, at, nn, nt, tt.
using SymMat3 = std::array<double, 6>;

// Sums over observations of the data-dependent part of the log-likelihood,
//   sum_i log g(y_i) + log A'(theta S(y_i)),
// and of its first and second partial derivatives in (alpha, nu, theta).
struct LikelihoodSums {
  double value = 0.0;
  ParamVec gradient{};
  SymMat3 hessian{};
};

LikelihoodSums likelihood_sums(const CompoundModel& model, std::span<const double> data,
                               Order order, Execution exec = Execution::Parallel);

// Same for the base rGTL law alone (sum_i log g(y_i)) in (alpha, nu); the
// theta slots are left zero.
LikelihoodSums base_likelihood_sums(const RgtlParams& params, std::span<const double> data,
                                    Order order, Execution exec = Execution::Parallel);

// E-step: out_i = E[Z | Y = y_i].
void expected_latent(const CompoundModel& model, std::span<const double> data,
                     std::span<double> out, Execution exec = Execution::Parallel);

// Sums behind the expected complete-data log-likelihood in (alpha, nu),
//   Q(alpha, nu) = nu W(alpha) + n log nu - L(alpha) + Lambda(alpha),
// with W = sum_i w_i log B(y_i), L = sum_i log B(y_i), Lambda = sum_i log E(y_i)
// for E-step weights w_i, plus first and second alpha-derivatives of each.
struct CompleteDataSums {
  std::array<double, 3> weighted_log_base{};  // W, W', W''
  std::array<double, 3> log_base{};           // L, L', L''
  std::array<double, 3> log_slope{};          // Lambda, Lambda', Lambda''
};
CompleteDataSums complete_data_sums(double alpha, std::span<const double> data,
                                    std::span<const double> weights,
                                    Execution exec = Execution::Parallel);

// out_i = Q(u_i) for the compound quantile function.
void map_quantiles(const CompoundModel& model, std::span<const double> u,
                   std::span<double> out, Execution exec = Execution::Parallel);

// Observation counts below this run serially even under Execution::Parallel.
inline constexpr std::size_t kParallelThreshold = 4096;

}  // namespace rgtlps
