#include "rgtlps/estimation.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "rgtlps/errors.hpp"
#include "rgtlps/optimize.hpp"

namespace rgtlps {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kDefaultQuasiNewtonIter = 500;
constexpr int kDefaultEmCycles = 2000;
constexpr double kDefaultGradTol = 1e-7;
constexpr double kDefaultEmTol = 1e-9;
constexpr double kEmMonotoneSlack = 1e-8;

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p / (1.0 - p)); }

// Unconstrained coordinates: alpha = 2 logistic(a), nu = exp(b), theta =
// logistic(c) on (0, 1) or exp(c) on (0, inf).
struct Coordinates {
  bool bounded_theta;

  ParamVec to_params(std::span<const double> u) const {
    return {2.0 * logistic(u[0]), std::exp(u[1]),
            bounded_theta ? logistic(u[2]) : std::exp(u[2])};
  }
  std::vector<double> to_coords(const ParamVec& p) const {
    return {logit(p[0] / 2.0), std::log(p[1]),
            bounded_theta ? logit(p[2]) : std::log(p[2])};
  }
  // d params / d coords, elementwise.
  ParamVec jacobian(const ParamVec& p) const {
    return {p[0] * (1.0 - p[0] / 2.0), p[1], bounded_theta ? p[2] * (1.0 - p[2]) : p[2]};
  }
};

bool valid(const PsFamily& fam, const ParamVec& p) {
  return p[0] > 0.0 && p[0] <= 2.0 && p[1] > 0.0 && std::isfinite(p[1]) && fam.contains(p[2]);
}

CompoundModel make_model(const PsFamily& fam, const ParamVec& p) {
  return CompoundModel(RgtlParams(p[0], p[1]), fam, p[2]);
}

double sup_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

// Full log-likelihood sums including the n log theta - n log A(theta) terms.
LikelihoodSums full_sums(const CompoundModel& model, std::span<const double> data, Order order,
                         Execution exec) {
  LikelihoodSums s = likelihood_sums(model, data, order, exec);
  const double n = static_cast<double>(data.size());
  const PsFamily& fam = model.family();
  const double theta = model.theta();
  s.value += n * (std::log(theta) - fam.log_value(theta));
  if (order != Order::Value) s.gradient[2] += n * (1.0 / theta - fam.d1(theta) / fam.value(theta));
  if (order == Order::Hessian)
    s.hessian[5] += n * (-1.0 / (theta * theta) - fam.log_value_curvature(theta));
  return s;
}

Eigen::Matrix3d negated(const SymMat3& h) {
  Eigen::Matrix3d j;
  j << -h[0], -h[1], -h[2], -h[1], -h[3], -h[4], -h[2], -h[4], -h[5];
  return j;
}

double total_loglik(const PsFamily& fam, const ParamVec& p, std::span<const double> data,
                    Execution exec) {
  if (!valid(fam, p)) return kNegInf;
  const double v = full_sums(make_model(fam, p), data, Order::Value, exec).value;
  return std::isfinite(v) ? v : kNegInf;
}

// Newton refinement in the original coordinates using the analytic
// information; only steps that increase the log-likelihood are taken.
ParamVec newton_refine(const PsFamily& fam, ParamVec p, std::span<const double> data,
                       Execution exec) {
  for (int it = 0; it < 30; ++it) {
    if (!valid(fam, p)) break;
    const LikelihoodSums s = full_sums(make_model(fam, p), data, Order::Hessian, exec);
    if (sup_norm(s.gradient) < 1e-11 * (1.0 + std::fabs(s.value))) break;
    const Eigen::LLT<Eigen::Matrix3d> llt(negated(s.hessian));
    if (llt.info() != Eigen::Success) break;
    const Eigen::Vector3d step = llt.solve(Eigen::Vector3d(s.gradient[0], s.gradient[1], s.gradient[2]));
    double scale = 1.0;
    bool accepted = false;
    ParamVec trial{};
    for (int b = 0; b < 30; ++b, scale *= 0.5) {
      trial = {p[0] + scale * step[0], p[1] + scale * step[1], p[2] + scale * step[2]};
      if (valid(fam, trial) && total_loglik(fam, trial, data, exec) >= s.value) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    const double moved = std::max({std::fabs(trial[0] - p[0]), std::fabs(trial[1] - p[1]),
                                   std::fabs(trial[2] - p[2])});
    p = trial;
    if (moved < 1e-15 * (1.0 + sup_norm(p))) break;
  }
  return p;
}

struct StartOutcome {
  ParamVec params{};
  double loglik = kNegInf;
  bool converged = false;
  int iterations = 0;
  std::string reason;
};

StartOutcome run_start(const PsFamily& fam, const ParamVec& start, std::span<const double> data,
                       int max_iter, double tol, Execution exec) {
  const Coordinates coords{std::isfinite(fam.upper())};
  optim::Objective objective = [&](std::span<const double> u, std::span<double> grad) {
    const ParamVec p = coords.to_params(u);
    if (!valid(fam, p)) return kNegInf;
    const Order order = grad.empty() ? Order::Value : Order::Gradient;
    const LikelihoodSums s = full_sums(make_model(fam, p), data, order, exec);
    if (!grad.empty()) {
      const ParamVec jac = coords.jacobian(p);
      for (int j = 0; j < 3; ++j) grad[j] = s.gradient[j] * jac[j];
    }
    return s.value;
  };
  optim::BfgsOptions bo;
  bo.max_iter = max_iter;
  bo.grad_tol = tol;
  StartOutcome out;
  const optim::BfgsResult r = optim::bfgs_maximize(objective, coords.to_coords(start), bo);
  out.iterations = r.iterations;
  out.reason = r.stop_reason;
  ParamVec p = coords.to_params(r.x);
  if (!valid(fam, p) || !std::isfinite(r.value)) return out;
  p = newton_refine(fam, p, data, exec);
  const LikelihoodSums s = full_sums(make_model(fam, p), data, Order::Gradient, exec);
  out.params = p;
  out.loglik = s.value;
  out.converged = r.converged || sup_norm(s.gradient) < tol * (1.0 + std::fabs(s.value));
  return out;
}

double radical_inverse(unsigned index, unsigned base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * (index % base);
    index /= base;
    f /= base;
  }
  return result;
}

double seed_shift(std::uint64_t seed, unsigned dim) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (dim + 1);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

double fast_mean(const CompoundModel& model) {
  // E[Y] = integral of the survival function over [0, 1].
  return boost::math::quadrature::gauss<double, 40>::integrate(
      [&model](double y) { return compound_survival(model, y); }, 0.0, 1.0);
}

ParamVec moment_matched_start(const PsFamily& fam, std::span<const double> data) {
  const double sample_mean = std::accumulate(data.begin(), data.end(), 0.0) / data.size();
  const bool bounded = std::isfinite(fam.upper());
  const std::vector<double> alphas{0.5, 1.0, 1.5};
  const std::vector<double> nus{0.5, 1.0, 2.0, 4.0};
  const std::vector<double> thetas =
      bounded ? std::vector<double>{0.1, 0.5, 0.8, 0.95} : std::vector<double>{0.3, 1.0, 3.0};
  ParamVec best{1.0, 1.0, thetas[0]};
  double best_gap = std::numeric_limits<double>::infinity();
  for (double a : alphas)
    for (double v : nus)
      for (double t : thetas) {
        const double gap = std::fabs(fast_mean(make_model(fam, {a, v, t})) - sample_mean);
        if (gap < best_gap) {
          best_gap = gap;
          best = {a, v, t};
        }
      }
  return best;
}

std::vector<std::string> boundary_flags(const PsFamily& fam, const ParamVec& p) {
  std::vector<std::string> out;
  if (p[0] < kBoundaryTolerance || p[0] > 2.0 - kBoundaryTolerance) out.emplace_back("alpha");
  if (p[1] < kBoundaryTolerance) out.emplace_back("nu");
  if (p[2] < kBoundaryTolerance || (std::isfinite(fam.upper()) && p[2] > fam.upper() - kBoundaryTolerance))
    out.emplace_back("theta");
  return out;
}

std::string model_label(const PsFamily& fam) {
  switch (fam.kind()) {
    case PsKind::Logarithmic: return "rgtl-log";
    case PsKind::Geometric: return "rgtl-geo";
    case PsKind::Poisson: return "rgtl-poi";
    case PsKind::Binomial: return "rgtl-bin";
  }
  return "rgtl-ps";
}

void fill_standard_errors(FitResult& res, const Eigen::MatrixXd& info) {
  const Eigen::LLT<Eigen::MatrixXd> llt(info);
  if (!info.allFinite() || llt.info() != Eigen::Success) {
    res.std_error_note = "observed information is not positive definite";
    return;
  }
  const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(info.rows(), info.cols()));
  for (Eigen::Index j = 0; j < cov.rows(); ++j) {
    if (!(cov(j, j) > 0.0)) {
      res.std_errors.clear();
      res.std_error_note = "inverse information has a non-positive diagonal";
      return;
    }
    res.std_errors.push_back(std::sqrt(cov(j, j)));
  }
}

FitResult summarize(const PsFamily& fam, const ParamVec& p, std::span<const double> data,
                    FitMethod method) {
  FitResult res;
  res.model = model_label(fam);
  res.names = {"alpha", "nu", "theta"};
  res.estimates = {p[0], p[1], p[2]};
  res.k = 3;
  res.n = data.size();
  res.m = fam.kind() == PsKind::Binomial ? fam.m() : 0;
  res.method = method;
  const CompoundModel model = make_model(fam, p);
  const LikelihoodSums s = full_sums(model, data, Order::Gradient, Execution::Parallel);
  res.loglik = s.value;
  res.aic = aic(res.loglik, res.k);
  res.gradient_norm = sup_norm(s.gradient);
  res.boundary = boundary_flags(fam, p);
  fill_standard_errors(res, observed_information(model, data));
  return res;
}

void check_sample_size(std::span<const double> data, std::size_t minimum) {
  if (data.size() < minimum)
    throw DomainError("fitting needs at least " + std::to_string(minimum) + " observations");
}

}  // namespace

void validate_data(std::span<const double> data) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double y = data[i];
    if (!(y > 0.0 && y < 1.0))
      throw DataError("observation " + std::to_string(i) + " = " + std::to_string(y) +
                          " is not strictly inside (0, 1)",
                      i);
  }
}

double aic(double loglik, int k) { return 2.0 * k - 2.0 * loglik; }

double loglik(const CompoundModel& model, std::span<const double> data, Execution exec) {
  validate_data(data);
  return full_sums(model, data, Order::Value, exec).value;
}

ParamVec score(const CompoundModel& model, std::span<const double> data, Execution exec) {
  validate_data(data);
  return full_sums(model, data, Order::Gradient, exec).gradient;
}

Eigen::Matrix3d observed_information(const CompoundModel& model, std::span<const double> data,
                                     InformationForm form) {
  validate_data(data);
  if (form == InformationForm::Corrected)
    return negated(full_sums(model, data, Order::Hessian, Execution::Parallel).hessian);

  // Entry by entry, with the known errors left in.
  const PsFamily& fam = model.family();
  const double alpha = model.alpha(), nu = model.nu(), theta = model.theta();
  const double n = static_cast<double>(data.size());
  double jaa = 0, jan = 0, jat = 0, jnn = 0, jnt = 0, r1s2 = 0;
  for (double y : data) {
    const double lb = rgtl_detail::log_base(alpha, y);
    const double e = rgtl_detail::slope(alpha, y);
    const double d = 1.0 + (alpha - 1.0) * y;
    const double s = std::exp(nu * lb);
    const double x = theta * s;
    const double r1 = fam.d2_over_d1_slope(x);
    const double r2 = fam.d2_over_d1(x);
    const double g = rgtl_pdf(model.base(), y);
    const double dg_a = g * ((nu - 1.0) * y / d + (2.0 * y - 1.0) / e);
    const double dg_n = g * (1.0 / nu + lb);
    const double ddg_aa = dg_a * dg_a - g * y * y * (nu - 1.0) / (e * e);
    const double ddg_an = dg_n * ((nu - 1.0) * y / d + (2.0 * y - 1.0) / e) + y * g / d;
    const double dG_a = -nu * y * s / d;
    const double dG_n = -s * lb;
    const double ddG_aa = -nu * (nu - 1.0) * y * y * s / (d * d);
    const double ddG_an = dG_a * (1.0 / nu + lb);
    const double ddG_nn = dG_n * lb;
    const double first_aa = -(ddg_aa * g - dg_a * dg_a) / (g * g);
    jaa += first_aa - theta * theta * r1 * dG_a * dG_a + theta * r2 * ddG_aa;
    jan += -(ddg_an * g - dg_a * dg_n) / (g * g) - theta * theta * r1 * dG_a * dG_n +
           theta * r2 * ddG_an;
    jat += r2 + theta * r1 * dG_a * s;
    jnn += first_aa - theta * theta * r1 * dG_n * dG_n + theta * r2 * ddG_nn;
    jnt += r2 + theta * r1 * dG_n * s;
    r1s2 += r1 * s * s;
  }
  const double jtt = n / theta + n * fam.log_value_curvature(theta) - r1s2;
  Eigen::Matrix3d j;
  j << jaa, jan, jat, jan, jnn, jnt, jat, jnt, jtt;
  return j;
}

double conditional_expected_z(const CompoundModel& model, double y) {
  if (!(y > 0.0 && y < 1.0))
    throw DomainError("conditional_expected_z: y must lie in (0, 1)");
  const double x = model.theta() * rgtl_survival(model.base(), y);
  return 1.0 + x * model.family().d2_over_d1(x);
}

std::vector<ParamVec> starting_points(const PsFamily& fam, std::span<const double> data,
                                      const FitOptions& opts) {
  const Coordinates coords{std::isfinite(fam.upper())};
  const double c_lo = coords.bounded_theta ? -2.5 : -2.5;
  const double c_hi = coords.bounded_theta ? 4.5 : 2.5;
  const unsigned bases[3] = {2, 3, 5};
  const double lo[3] = {-2.5, -1.6, c_lo};
  const double hi[3] = {2.5, 1.6, c_hi};
  std::vector<ParamVec> out;
  for (int i = 1; i <= opts.starts; ++i) {
    std::vector<double> u(3);
    for (unsigned j = 0; j < 3; ++j) {
      double h = radical_inverse(static_cast<unsigned>(i), bases[j]) + seed_shift(opts.seed, j);
      h -= std::floor(h);
      u[j] = lo[j] + (hi[j] - lo[j]) * h;
    }
    out.push_back(coords.to_params(u));
  }
  out.push_back(moment_matched_start(fam, data));
  return out;
}

FitResult fit_ml(const PsFamily& family, std::span<const double> data, const FitOptions& opts) {
  validate_data(data);
  check_sample_size(data, 5);
  const int max_iter = opts.max_iter > 0 ? opts.max_iter : kDefaultQuasiNewtonIter;
  const double tol = opts.tol > 0.0 ? opts.tol : kDefaultGradTol;
  const std::vector<ParamVec> starts = starting_points(family, data, opts);
  const long count = static_cast<long>(starts.size());
  std::vector<StartOutcome> outcomes(starts.size());
  const bool parallel = opts.execution == Execution::Parallel;

  // Starts are independent; each owns its slot and the reduction below runs
  // in index order.
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (long i = 0; i < count; ++i) {
    try {
      outcomes[i] = run_start(family, starts[i], data, max_iter, tol, Execution::Serial);
    } catch (const std::exception& e) {
      outcomes[i].reason = e.what();
    }
  }

  int best = -1;
  int converged = 0;
  for (int i = 0; i < count; ++i) {
    if (outcomes[i].converged) ++converged;
  }
  for (int i = 0; i < count; ++i) {
    const auto& o = outcomes[i];
    if (!std::isfinite(o.loglik)) continue;
    if (converged > 0 && !o.converged) continue;
    if (best < 0 || o.loglik > outcomes[best].loglik) best = i;
  }
  if (best < 0) {
    FitResult res;
    res.model = model_label(family);
    res.names = {"alpha", "nu", "theta"};
    res.k = 3;
    res.n = data.size();
    res.m = family.kind() == PsKind::Binomial ? family.m() : 0;
    res.loglik = kNegInf;
    res.aic = std::numeric_limits<double>::infinity();
    res.starts_tried = static_cast<int>(count);
    res.stop_reason = "no start produced a finite log-likelihood";
    return res;
  }
  FitResult res = summarize(family, outcomes[best].params, data, FitMethod::DirectML);
  res.converged = outcomes[best].converged;
  res.iterations = outcomes[best].iterations;
  res.starts_tried = static_cast<int>(count);
  res.starts_converged = converged;
  res.best_start = best;
  res.stop_reason = outcomes[best].reason;
  return res;
}

CompoundModel em_step(const CompoundModel& current, std::span<const double> data, Execution exec) {
  const PsFamily& fam = current.family();
  const std::size_t count = data.size();
  const double n = static_cast<double>(count);
  std::vector<double> w(count);
  expected_latent(current, data, w, exec);
  const double target = std::accumulate(w.begin(), w.end(), 0.0) / n;

  // theta: the mean of Z matches the average E-step weight.
  double theta = current.theta();
  if (fam.kind() == PsKind::Geometric) {
    theta = std::max(1.0 - 1.0 / target, std::numeric_limits<double>::min());
  } else if (!(fam.kind() == PsKind::Binomial && fam.m() == 1)) {
    const bool bounded = std::isfinite(fam.upper());
    const double lo = -40.0;
    const double hi = bounded ? 36.0 : 15.0;
    auto theta_of = [bounded](double c) { return bounded ? logistic(c) : std::exp(c); };
    auto gap = [&](double c) { return fam.mean(theta_of(c)) - target; };
    if (gap(lo) >= 0.0)
      theta = theta_of(lo);
    else if (gap(hi) <= 0.0)
      theta = theta_of(hi);
    else
      theta = theta_of(optim::bracketed_root(gap, lo, hi));
  }

  // (alpha, nu): nu is explicit given alpha, nu = -n / W(alpha); maximize the
  // profile Q(alpha) = -n + n log(-n / W) - L + Lambda by safeguarded Newton.
  struct Profile {
    double value, d1, d2, nu;
  };
  auto profile = [&](double alpha) {
    const CompleteDataSums c = complete_data_sums(alpha, data, w, exec);
    const double wsum = c.weighted_log_base[0];
    const double nu = -n / wsum;
    Profile p;
    p.nu = nu;
    p.value = -n + n * std::log(nu) - c.log_base[0] + c.log_slope[0];
    p.d1 = nu * c.weighted_log_base[1] - c.log_base[1] + c.log_slope[1];
    p.d2 = nu * c.weighted_log_base[2] - c.log_base[2] + c.log_slope[2] +
           n * c.weighted_log_base[1] * c.weighted_log_base[1] / (wsum * wsum);
    return p;
  };
  double alpha = current.alpha();
  Profile p = profile(alpha);
  for (int it = 0; it < 60; ++it) {
    double step = p.d2 < 0.0 ? -p.d1 / p.d2 : std::copysign(0.1, p.d1);
    if (alpha + step > 2.0) step = 2.0 - alpha;
    if (alpha + step <= 0.0) step = -0.5 * alpha;
    bool accepted = false;
    for (int b = 0; b < 40 && step != 0.0; ++b, step *= 0.5) {
      const double trial = alpha + step;
      if (!(trial > 0.0 && trial <= 2.0)) continue;
      const Profile q = profile(trial);
      if (std::isfinite(q.value) && q.value >= p.value) {
        accepted = true;
        alpha = trial;
        p = q;
        break;
      }
    }
    if (!accepted || std::fabs(step) < 1e-13) break;
  }
  return CompoundModel(RgtlParams(alpha, p.nu), fam, theta);
}

namespace {

struct EmRun {
  ParamVec params{};
  double loglik = kNegInf;
  bool converged = false;
  std::string reason = "cycle limit";
  int cycles = 0;
  std::vector<double> trace;
};

double max_change(const ParamVec& a, const ParamVec& b) {
  return std::max({std::fabs(a[0] - b[0]), std::fabs(a[1] - b[1]), std::fabs(a[2] - b[2])});
}

// EM from one start. With acceleration, two EM cycles are combined into a
// squared extrapolation step (SQUAREM) in the unconstrained coordinates,
// followed by one stabilizing cycle; the extrapolated point is kept only when
// it beats the plain two-cycle result, so the log-likelihood of the accepted
// sequence never decreases. Every individual EM cycle is checked for ascent.
EmRun run_em(const PsFamily& fam, const ParamVec& start, std::span<const double> data, int max_cycles,
             double tol, bool accelerate, Execution exec) {
  const Coordinates coords{std::isfinite(fam.upper())};
  EmRun run;
  auto cycle = [&](const ParamVec& p, double ll) {
    const CompoundModel next = em_step(make_model(fam, p), data, exec);
    ++run.cycles;
    const ParamVec q{next.alpha(), next.nu(), next.theta()};
    const double ll_next = full_sums(next, data, Order::Value, exec).value;
    if (!(ll_next >= ll - kEmMonotoneSlack))
      throw InternalError("EM cycle " + std::to_string(run.cycles) + " decreased the log-likelihood from " +
                          std::to_string(ll) + " to " + std::to_string(ll_next));
    return std::pair{q, ll_next};
  };

  ParamVec p = start;
  double ll = total_loglik(fam, p, data, exec);
  run.trace.push_back(ll);
  while (run.cycles < max_cycles) {
    ParamVec next;
    double ll_next;
    const auto [p1, ll1] = cycle(p, ll);
    if (!accelerate || run.cycles >= max_cycles) {
      next = p1;
      ll_next = ll1;
    } else {
      const auto [p2, ll2] = cycle(p1, ll1);
      next = p2;
      ll_next = ll2;
      const std::vector<double> u0 = coords.to_coords(p), u1 = coords.to_coords(p1), u2 = coords.to_coords(p2);
      double rr = 0.0, vv = 0.0;
      std::array<double, 3> r{}, v{};
      for (int j = 0; j < 3; ++j) {
        r[j] = u1[j] - u0[j];
        v[j] = u2[j] - u1[j] - r[j];
        rr += r[j] * r[j];
        vv += v[j] * v[j];
      }
      if (vv > 0.0 && std::isfinite(vv)) {
        double gamma = std::min(-1.0, -std::sqrt(rr / vv));
        for (int tries = 0; tries < 8 && gamma < -1.0 && run.cycles < max_cycles; ++tries) {
          std::vector<double> u(3);
          for (int j = 0; j < 3; ++j) u[j] = u0[j] - 2.0 * gamma * r[j] + gamma * gamma * v[j];
          const ParamVec pe = coords.to_params(u);
          const double lle = total_loglik(fam, pe, data, exec);
          if (std::isfinite(lle)) {
            const auto [p3, ll3] = cycle(pe, lle);
            if (ll3 >= ll2) {
              next = p3;
              ll_next = ll3;
              break;
            }
          }
          gamma = 0.5 * (gamma - 1.0);
        }
      }
    }
    const double change = max_change(next, p);
    p = next;
    ll = ll_next;
    run.trace.push_back(ll);
    if (change < tol) {
      run.converged = true;
      run.reason = "parameter change";
      break;
    }
    // Along flat ridges EM steps shrink long before they fall below tol;
    // the observed-data gradient rule used by the direct fitter also applies.
    const LikelihoodSums s = full_sums(make_model(fam, p), data, Order::Gradient, exec);
    if (sup_norm(s.gradient) < kDefaultGradTol * (1.0 + std::fabs(ll))) {
      run.converged = true;
      run.reason = "gradient";
      break;
    }
  }
  run.params = p;
  run.loglik = ll;
  return run;
}

}  // namespace

FitResult fit_em(const PsFamily& family, std::span<const double> data, const FitOptions& opts) {
  validate_data(data);
  check_sample_size(data, 5);
  const int max_cycles = opts.max_iter > 0 ? opts.max_iter : kDefaultEmCycles;
  const double tol = opts.tol > 0.0 ? opts.tol : kDefaultEmTol;
  const std::vector<ParamVec> starts = starting_points(family, data, opts);
  const long count = static_cast<long>(starts.size());
  std::vector<EmRun> runs(starts.size());
  std::vector<std::string> failures(starts.size());
  std::vector<char> internal(starts.size(), 0);
  const bool parallel = opts.execution == Execution::Parallel;

#pragma omp parallel for schedule(dynamic) if (parallel)
  for (long i = 0; i < count; ++i) {
    try {
      runs[i] = run_em(family, starts[i], data, max_cycles, tol, opts.em_acceleration, Execution::Serial);
    } catch (const InternalError& e) {
      failures[i] = e.what();
      internal[i] = 1;
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  }
  for (long i = 0; i < count; ++i)
    if (internal[i]) throw InternalError(failures[i]);

  int best = -1, converged = 0;
  for (const EmRun& r : runs) converged += r.converged ? 1 : 0;
  for (int i = 0; i < count; ++i) {
    const EmRun& r = runs[i];
    if (!std::isfinite(r.loglik) || (converged > 0 && !r.converged)) continue;
    if (best < 0 || r.loglik > runs[best].loglik) best = i;
  }
  if (best < 0) throw ConvergenceError("EM: no start produced a finite log-likelihood");

  EmRun& win = runs[best];
  FitResult res = summarize(family, win.params, data, FitMethod::EM);
  res.converged = win.converged;
  res.iterations = win.cycles;
  res.starts_tried = static_cast<int>(count);
  res.starts_converged = converged;
  res.best_start = best;
  res.stop_reason = win.reason;
  res.loglik_trace = std::move(win.trace);
  return res;
}

double rgtl_loglik(const RgtlParams& params, std::span<const double> data) {
  validate_data(data);
  return base_likelihood_sums(params, data, Order::Value).value;
}

FitResult fit_rgtl(std::span<const double> data, const FitOptions& opts) {
  validate_data(data);
  check_sample_size(data, 5);
  const int max_iter = opts.max_iter > 0 ? opts.max_iter : kDefaultQuasiNewtonIter;
  const double tol = opts.tol > 0.0 ? opts.tol : kDefaultGradTol;
  const Execution exec = opts.execution;

  auto params_of = [](std::span<const double> u) {
    return std::array<double, 2>{2.0 * logistic(u[0]), std::exp(u[1])};
  };
  optim::Objective objective = [&](std::span<const double> u, std::span<double> grad) {
    const auto p = params_of(u);
    if (!(p[0] > 0.0 && p[0] <= 2.0 && p[1] > 0.0 && std::isfinite(p[1]))) return kNegInf;
    const LikelihoodSums s = base_likelihood_sums(RgtlParams(p[0], p[1]), data,
                                                  grad.empty() ? Order::Value : Order::Gradient, exec);
    if (!grad.empty()) {
      grad[0] = s.gradient[0] * p[0] * (1.0 - p[0] / 2.0);
      grad[1] = s.gradient[1] * p[1];
    }
    return s.value;
  };
  optim::BfgsOptions bo;
  bo.max_iter = max_iter;
  bo.grad_tol = tol;

  optim::BfgsResult best;
  best.value = kNegInf;
  int best_index = -1, converged = 0;
  const int count = std::max(1, opts.starts);
  for (int i = 1; i <= count; ++i) {
    std::vector<double> u{
        -2.5 + 5.0 * std::fmod(radical_inverse(i, 2) + seed_shift(opts.seed, 0), 1.0),
        -1.6 + 3.2 * std::fmod(radical_inverse(i, 3) + seed_shift(opts.seed, 1), 1.0)};
    optim::BfgsResult r = optim::bfgs_maximize(objective, u, bo);
    if (r.converged) ++converged;
    const bool better = best_index < 0 || (r.converged && !best.converged) ||
                        (r.converged == best.converged && r.value > best.value);
    if (std::isfinite(r.value) && better) {
      best = std::move(r);
      best_index = i - 1;
    }
  }
  FitResult res;
  res.model = "rgtl";
  res.names = {"alpha", "nu"};
  res.k = 2;
  res.n = data.size();
  res.method = FitMethod::DirectML;
  res.starts_tried = count;
  res.starts_converged = converged;
  res.best_start = best_index;
  if (best_index < 0) {
    res.loglik = kNegInf;
    res.aic = std::numeric_limits<double>::infinity();
    res.stop_reason = "no start produced a finite log-likelihood";
    return res;
  }
  auto p = params_of(best.x);
  // Newton refinement on the 2x2 system.
  for (int it = 0; it < 30; ++it) {
    const LikelihoodSums s = base_likelihood_sums(RgtlParams(p[0], p[1]), data, Order::Hessian, exec);
    Eigen::Matrix2d j;
    j << -s.hessian[0], -s.hessian[1], -s.hessian[1], -s.hessian[3];
    const Eigen::LLT<Eigen::Matrix2d> llt(j);
    if (llt.info() != Eigen::Success) break;
    const Eigen::Vector2d step = llt.solve(Eigen::Vector2d(s.gradient[0], s.gradient[1]));
    double scale = 1.0;
    bool accepted = false;
    for (int b = 0; b < 30; ++b, scale *= 0.5) {
      const double a = p[0] + scale * step[0], v = p[1] + scale * step[1];
      if (a > 0.0 && a <= 2.0 && v > 0.0 &&
          base_likelihood_sums(RgtlParams(a, v), data, Order::Value, exec).value >= s.value) {
        p = {a, v};
        accepted = true;
        break;
      }
    }
    if (!accepted || scale * std::max(std::fabs(step[0]), std::fabs(step[1])) < 1e-15) break;
  }
  const RgtlParams fitted(p[0], p[1]);
  const LikelihoodSums s = base_likelihood_sums(fitted, data, Order::Hessian, exec);
  res.estimates = {p[0], p[1]};
  res.loglik = s.value;
  res.aic = aic(res.loglik, res.k);
  res.gradient_norm = std::max(std::fabs(s.gradient[0]), std::fabs(s.gradient[1]));
  res.converged = best.converged || res.gradient_norm < tol * (1.0 + std::fabs(s.value));
  res.iterations = best.iterations;
  res.stop_reason = best.stop_reason;
  if (p[0] < kBoundaryTolerance || p[0] > 2.0 - kBoundaryTolerance) res.boundary.emplace_back("alpha");
  if (p[1] < kBoundaryTolerance) res.boundary.emplace_back("nu");
  Eigen::MatrixXd info(2, 2);
  info << -s.hessian[0], -s.hessian[1], -s.hessian[1], -s.hessian[3];
  fill_standard_errors(res, info);
  return res;
}

}  // namespace rgtlps
