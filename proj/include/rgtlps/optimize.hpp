#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace rgtlps::optim {

// Objective to maximize. Returns f(x); when `grad` is non-empty it must be
// filled with the gradient. Non-finite values are treated as infeasible.
using Objective = std::function<double(std::span<const double> x, std::span<double> grad)>;

struct BfgsOptions {
  int max_iter = 500;
  // Converged when sup|grad| < grad_tol * (1 + |f|) ...
  double grad_tol = 1e-7;
  // ... or the accepted step has sup-norm below step_tol.
  double step_tol = 1e-9;
  // Cap on the sup-norm of a single trial step.
  double max_step = 4.0;
};

struct BfgsResult {
  std::vector<double> x;
  double value = 0.0;
  std::vector<double> gradient;
  int iterations = 0;
  bool converged = false;
  std::string stop_reason;
};

// Quasi-Newton ascent with backtracking (Armijo) line search.
BfgsResult bfgs_maximize(const Objective& f, std::vector<double> x0, const BfgsOptions& opts = {});

// Central-difference gradient for objectives without an analytic one.
std::vector<double> numeric_gradient(const std::function<double(std::span<const double>)>& f,
                                     std::span<const double> x);

// Central-difference Hessian, symmetrized, row-major.
std::vector<double> numeric_hessian(const std::function<double(std::span<const double>)>& f,
                                    std::span<const double> x);

// Root of a monotone scalar function on [lo, hi] with f(lo), f(hi) of opposite sign.
double bracketed_root(const std::function<double(double)>& f, double lo, double hi);

// Maximizer of a scalar function on [lo, hi] (Brent).
double maximize_scalar(const std::function<double(double)>& f, double lo, double hi);

}  // namespace rgtlps::optim
