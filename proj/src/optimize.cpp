#include "rgtlps/optimize.hpp"

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdint>
#include <limits>

#include "rgtlps/errors.hpp"

namespace rgtlps::optim {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 60;

double evaluate(const Objective& f, const VectorXd& x, VectorXd& g) {
  g.resize(x.size());
  const double v = f(std::span<const double>(x.data(), x.size()),
                     std::span<double>(g.data(), g.size()));
  if (!std::isfinite(v) || !g.allFinite()) return -std::numeric_limits<double>::infinity();
  return v;
}

}  // namespace

BfgsResult bfgs_maximize(const Objective& f, std::vector<double> x0, const BfgsOptions& opts) {
  const Eigen::Index dim = static_cast<Eigen::Index>(x0.size());
  VectorXd x = Eigen::Map<VectorXd>(x0.data(), dim);
  VectorXd g;
  double fx = evaluate(f, x, g);
  BfgsResult res;
  if (!std::isfinite(fx)) {
    res.x = x0;
    res.value = fx;
    res.stop_reason = "objective not finite at the starting point";
    return res;
  }

  MatrixXd h = MatrixXd::Identity(dim, dim);
  bool identity = true;
  VectorXd g_new, x_new;
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    if (g.lpNorm<Eigen::Infinity>() < opts.grad_tol * (1.0 + std::fabs(fx))) {
      res.converged = true;
      res.stop_reason = "gradient";
      break;
    }
    VectorXd p = h * g;
    if (g.dot(p) <= 0.0) {
      h.setIdentity();
      identity = true;
      p = g;
    }
    const double pmax = p.lpNorm<Eigen::Infinity>();
    if (pmax > opts.max_step) p *= opts.max_step / pmax;

    const double slope = g.dot(p);
    double step = 1.0;
    double f_new = -std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int b = 0; b < kMaxBacktracks; ++b) {
      x_new = x + step * p;
      f_new = evaluate(f, x_new, g_new);
      if (f_new >= fx + kArmijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!identity) {
        h.setIdentity();
        identity = true;
        continue;
      }
      res.stop_reason = "line search failed";
      break;
    }

    const VectorXd s = x_new - x;
    const VectorXd yv = g - g_new;  // gradient change of the minimized function -f
    x = x_new;
    fx = f_new;
    g = g_new;
    if (s.lpNorm<Eigen::Infinity>() < opts.step_tol) {
      res.converged = true;
      res.stop_reason = "step";
      ++it;
      break;
    }
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      if (identity) h *= sy / yv.squaredNorm();
      const double rho = 1.0 / sy;
      const MatrixXd left = MatrixXd::Identity(dim, dim) - rho * s * yv.transpose();
      h = left * h * left.transpose() + rho * s * s.transpose();
      identity = false;
    }
  }
  if (it >= opts.max_iter && res.stop_reason.empty()) res.stop_reason = "iteration limit";
  res.x.assign(x.data(), x.data() + dim);
  res.value = fx;
  res.gradient.assign(g.data(), g.data() + dim);
  res.iterations = it;
  return res;
}

std::vector<double> numeric_gradient(const std::function<double(std::span<const double>)>& f,
                                     std::span<const double> x) {
  std::vector<double> xs(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double h = 1e-5 * std::max(1.0, std::fabs(x[j]));
    xs[j] = x[j] + h;
    const double fp = f(xs);
    xs[j] = x[j] - h;
    const double fm = f(xs);
    xs[j] = x[j];
    grad[j] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

std::vector<double> numeric_hessian(const std::function<double(std::span<const double>)>& f,
                                    std::span<const double> x) {
  const std::size_t d = x.size();
  std::vector<double> xs(x.begin(), x.end());
  std::vector<double> hess(d * d);
  std::vector<double> h(d);
  for (std::size_t j = 0; j < d; ++j) h[j] = 1e-4 * std::max(1.0, std::fabs(x[j]));
  const double f0 = f(xs);
  for (std::size_t j = 0; j < d; ++j) {
    xs[j] = x[j] + h[j];
    const double fp = f(xs);
    xs[j] = x[j] - h[j];
    const double fm = f(xs);
    xs[j] = x[j];
    hess[j * d + j] = (fp - 2.0 * f0 + fm) / (h[j] * h[j]);
    for (std::size_t k = j + 1; k < d; ++k) {
      double acc = 0.0;
      for (int sj : {1, -1})
        for (int sk : {1, -1}) {
          xs[j] = x[j] + sj * h[j];
          xs[k] = x[k] + sk * h[k];
          acc += sj * sk * f(xs);
        }
      xs[j] = x[j];
      xs[k] = x[k];
      hess[j * d + k] = hess[k * d + j] = acc / (4.0 * h[j] * h[k]);
    }
  }
  return hess;
}

double bracketed_root(const std::function<double(double)>& f, double lo, double hi) {
  const double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) throw ConvergenceError("root is not bracketed");
  std::uintmax_t max_iter = 200;
  const auto r = boost::math::tools::toms748_solve(
      f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(50), max_iter);
  return 0.5 * (r.first + r.second);
}

double maximize_scalar(const std::function<double(double)>& f, double lo, double hi) {
  auto neg = [&f](double x) {
    const double v = f(x);
    return std::isfinite(v) ? -v : std::numeric_limits<double>::infinity();
  };
  return boost::math::tools::brent_find_minima(neg, lo, hi, 26).first;
}

}  // namespace rgtlps::optim
