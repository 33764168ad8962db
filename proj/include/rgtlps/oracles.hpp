#pragma once

#include <functional>
#include <vector>

#include "rgtlps/compound.hpp"

// Reference numerics for the test suites. Nothing here shares code paths
// with the closed-form evaluators it is used to check.
namespace rgtlps::oracle {

using RealFn = std::function<double(double)>;

enum class Rule { GaussKronrod, Simpson };

struct QuadratureSpec {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_depth = 60;
  Rule rule = Rule::GaussKronrod;
};

struct Integral {
  double value = 0.0;
  double error = 0.0;
  long evaluations = 0;
};

// Globally adaptive integration on [a, b]; throws ConvergenceError when the
// tolerance cannot be met before an interval reaches max_depth bisections.
Integral integrate(const RealFn& f, double a, double b, const QuadratureSpec& spec = {});

// Integral over (0, 1) of a density that may be unbounded at y = 1: the
// quadrature stops at 1 - eps and the remaining mass is taken from the
// survival function, for eps in {1e-4, 1e-6, 1e-8}. The error estimate
// includes the spread across the three cut points.
Integral integrate_unit_density(const RealFn& pdf, const RealFn& survival,
                                const QuadratureSpec& spec = {});

// Central differences: h_j = 1e-5 max(1, |x_j|).
std::vector<double> finite_diff_gradient(const std::function<double(const std::vector<double>&)>& f,
                                         const std::vector<double>& x);
// Central differences with h_j = 1e-4 max(1, |x_j|); symmetrized, row-major.
std::vector<double> finite_diff_hessian(const std::function<double(const std::vector<double>&)>& f,
                                        const std::vector<double>& x);

// Bisection on [0, 1] to interval width 1e-14; throws InternalError if the
// cdf is seen to decrease.
double invert_cdf_bisection(const RealFn& cdf, double q);

enum class MixtureQuantity { Pdf, Cdf, Moment };

// Direct sum over z of P(Z = z) times the rGTL(alpha, nu z) quantity.
// Throws ConvergenceError when the term cap is reached. For MixtureQuantity::Moment
// `y` is ignored and `r` is the order.
double brute_force_mixture(const CompoundModel& model, double y, MixtureQuantity what, int r = 1);

// Number of terms the last brute_force_mixture call on this thread summed.
long last_mixture_terms();

// E[Z | Y = y] from the posterior pmf of Z, summed term by term.
double brute_force_expected_z(const CompoundModel& model, double y);

}  // namespace rgtlps::oracle
