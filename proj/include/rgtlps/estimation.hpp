#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rgtlps/compound.hpp"
#include "rgtlps/kernels.hpp"

namespace rgtlps {

enum class FitMethod { DirectML, EM };

struct FitOptions {
  // Low-discrepancy starting points; one moment-matched start is added.
  int starts = 8;
  // 0 selects the method default: 500 quasi-Newton iterations, 2000 EM cycles.
  int max_iter = 0;
  // 0 selects the method default: gradient scale 1e-7 (ML), parameter change 1e-9 (EM).
  // EM also stops once the gradient rule of the direct fitter holds.
  double tol = 0.0;
  std::uint64_t seed = 0;
  Execution execution = Execution::Parallel;
  // EM only: squared extrapolation between cycles; false gives plain EM.
  bool em_acceleration = true;
};

struct FitResult {
  std::string model;
  std::vector<std::string> names;
  std::vector<double> estimates;
  // Empty when the observed information is not positive definite; the
  // reason is then in std_error_note.
  std::vector<double> std_errors;
  std::string std_error_note;
  double loglik = 0.0;
  double aic = 0.0;
  int k = 0;
  std::size_t n = 0;
  int m = 0;  // binomial size, 0 otherwise
  FitMethod method = FitMethod::DirectML;
  bool converged = false;
  int iterations = 0;
  // Names of estimates lying within tolerance of the parameter-space boundary.
  std::vector<std::string> boundary;

  // Optimizer summary.
  int starts_tried = 0;
  int starts_converged = 0;
  int best_start = -1;
  double gradient_norm = 0.0;
  std::string stop_reason;
  // Observed-data log-likelihood after every EM cycle (EM only).
  std::vector<double> loglik_trace;
};

// Distance from the parameter-space boundary below which an estimate is flagged.
inline constexpr double kBoundaryTolerance = 1e-4;

// Throws DataError naming the first observation outside the open unit interval.
void validate_data(std::span<const double> data);

// n log theta - n log A(theta) + sum log g(y_i) + sum log A'(theta S(y_i)).
double loglik(const CompoundModel& model, std::span<const double> data,
              Execution exec = Execution::Parallel);

// Analytic gradient in (alpha, nu, theta).
ParamVec score(const CompoundModel& model, std::span<const double> data,
               Execution exec = Execution::Parallel);

// The uncorrected entries (wrong theta-theta power, missing slope factors in
// the cross terms, alpha terms in nu-nu) are kept for comparison.
enum class InformationForm { Corrected, Uncorrected };

// Negative Hessian of the log-likelihood in (alpha, nu, theta).
Eigen::Matrix3d observed_information(const CompoundModel& model, std::span<const double> data,
                                     InformationForm form = InformationForm::Corrected);

// E[Z | Y = y] = 1 + x A''(x) / A'(x) at x = theta S(y), for y in (0, 1).
double conditional_expected_z(const CompoundModel& model, double y);

// Direct maximization: quasi-Newton ascent in unconstrained coordinates from
// each start, Newton refinement in the original coordinates, best log-likelihood wins.
FitResult fit_ml(const PsFamily& family, std::span<const double> data, const FitOptions& opts = {});

// EM from every starting point; the best converged run wins.
FitResult fit_em(const PsFamily& family, std::span<const double> data, const FitOptions& opts = {});

// One EM cycle (E-step then exact M-step) from `current`.
CompoundModel em_step(const CompoundModel& current, std::span<const double> data,
                      Execution exec = Execution::Parallel);

// Two-parameter fit of the base rGTL law.
FitResult fit_rgtl(std::span<const double> data, const FitOptions& opts = {});
double rgtl_loglik(const RgtlParams& params, std::span<const double> data);

// Deterministic starting design used by both fitters, in (alpha, nu, theta).
std::vector<ParamVec> starting_points(const PsFamily& family, std::span<const double> data,
                                      const FitOptions& opts);

double aic(double loglik, int k);

}  // namespace rgtlps
