#include "rgtlps/oracles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>

#include "rgtlps/errors.hpp"

namespace rgtlps::oracle {

namespace {

// 7-point Gauss / 15-point Kronrod nodes on [-1, 1].
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  int depth;
  bool operator<(const Panel& o) const { return error < o.error; }
};

Panel kronrod(const RealFn& f, double a, double b, int depth, long& evals) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double gauss = fc * kWg[3];
  double kron = fc * kWgk[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double sum = f(c - dx) + f(c + dx);
    kron += kWgk[j] * sum;
    if (j % 2 == 1) gauss += kWg[j / 2] * sum;
  }
  evals += 15;
  const double value = kron * h;
  const double err = std::fabs((kron - gauss) * h);
  if (!std::isfinite(value)) throw ConvergenceError("integrate: integrand is not finite");
  return {a, b, value, err, depth};
}

Integral integrate_kronrod(const RealFn& f, double a, double b, const QuadratureSpec& spec) {
  Integral out;
  std::priority_queue<Panel> heap;
  heap.push(kronrod(f, a, b, 0, out.evaluations));
  double value = heap.top().value, error = heap.top().error;
  while (error > std::max(spec.abs_tol, spec.rel_tol * std::fabs(value))) {
    const Panel worst = heap.top();
    if (worst.depth >= spec.max_depth)
      throw ConvergenceError("integrate: tolerance not met at maximum subdivision depth");
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const Panel left = kronrod(f, worst.a, mid, worst.depth + 1, out.evaluations);
    const Panel right = kronrod(f, mid, worst.b, worst.depth + 1, out.evaluations);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    // Re-sum when the running error collapses below rounding of the updates.
    if (error <= 0.0 || heap.size() % 256 == 0) {
      value = error = 0.0;
      auto copy = heap;
      while (!copy.empty()) {
        value += copy.top().value;
        error += copy.top().error;
        copy.pop();
      }
    }
  }
  out.value = value;
  out.error = error;
  return out;
}

double simpson_step(const RealFn& f, double a, double b, double fa, double fm, double fb, double whole,
                    double tol, int depth, int max_depth, long& evals, double& err) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  evals += 2;
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::fabs(delta) <= 15.0 * tol) {
    err += std::fabs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  if (depth >= max_depth)
    throw ConvergenceError("integrate: tolerance not met at maximum subdivision depth");
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, max_depth, evals, err) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, max_depth, evals, err);
}

Integral integrate_simpson(const RealFn& f, double a, double b, const QuadratureSpec& spec) {
  Integral out;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  out.evaluations = 3;
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  // Absolute target from a coarse magnitude estimate.
  const double tol = std::max(spec.abs_tol, spec.rel_tol * std::fabs(whole));
  out.value = simpson_step(f, a, b, fa, fm, fb, whole, tol, 0, spec.max_depth, out.evaluations, out.error);
  if (!std::isfinite(out.value)) throw ConvergenceError("integrate: integrand is not finite");
  return out;
}

thread_local long g_last_terms = 0;

}  // namespace

Integral integrate(const RealFn& f, double a, double b, const QuadratureSpec& spec) {
  if (!(a < b)) throw DomainError("integrate: need a < b");
  return spec.rule == Rule::Simpson ? integrate_simpson(f, a, b, spec) : integrate_kronrod(f, a, b, spec);
}

Integral integrate_unit_density(const RealFn& pdf, const RealFn& survival, const QuadratureSpec& spec) {
  Integral best;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double eps : {1e-4, 1e-6, 1e-8}) {
    const double cut = 1.0 - eps;
    Integral part = integrate(pdf, 0.0, cut, spec);
    part.value += survival(cut);
    part.evaluations += best.evaluations;
    best = part;
    lo = std::min(lo, part.value);
    hi = std::max(hi, part.value);
  }
  best.error += hi - lo;
  return best;
}

std::vector<double> finite_diff_gradient(const std::function<double(const std::vector<double>&)>& f,
                                         const std::vector<double>& x) {
  std::vector<double> g(x.size());
  std::vector<double> xp = x;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double h = 1e-5 * std::max(1.0, std::fabs(x[j]));
    xp[j] = x[j] + h;
    const double up = f(xp);
    xp[j] = x[j] - h;
    const double down = f(xp);
    xp[j] = x[j];
    g[j] = (up - down) / (2.0 * h);
  }
  return g;
}

std::vector<double> finite_diff_hessian(const std::function<double(const std::vector<double>&)>& f,
                                        const std::vector<double>& x) {
  const std::size_t d = x.size();
  std::vector<double> h(d), out(d * d);
  for (std::size_t j = 0; j < d; ++j) h[j] = 1e-4 * std::max(1.0, std::fabs(x[j]));
  const double f0 = f(x);
  std::vector<double> p = x;
  for (std::size_t i = 0; i < d; ++i) {
    p[i] = x[i] + h[i];
    const double up = f(p);
    p[i] = x[i] - h[i];
    const double down = f(p);
    p[i] = x[i];
    out[i * d + i] = (up - 2.0 * f0 + down) / (h[i] * h[i]);
    for (std::size_t j = i + 1; j < d; ++j) {
      auto at = [&](double si, double sj) {
        p[i] = x[i] + si * h[i];
        p[j] = x[j] + sj * h[j];
        const double v = f(p);
        p[i] = x[i];
        p[j] = x[j];
        return v;
      };
      const double v = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h[i] * h[j]);
      out[i * d + j] = out[j * d + i] = v;
    }
  }
  return out;
}

double invert_cdf_bisection(const RealFn& cdf, double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("invert_cdf_bisection: q must lie in [0, 1]");
  if (q == 0.0) return 0.0;
  if (q == 1.0) return 1.0;
  double lo = 0.0, hi = 1.0;
  double flo = cdf(lo), fhi = cdf(hi);
  while (hi - lo > 1e-14) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = cdf(mid);
    if (fm < flo || fm > fhi) throw InternalError("invert_cdf_bisection: cdf is not monotone");
    if (fm < q) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
  }
  return 0.5 * (lo + hi);
}

double brute_force_mixture(const CompoundModel& model, double y, MixtureQuantity what, int r) {
  const PsFamily& fam = model.family();
  const double theta = model.theta();
  const double alpha = model.alpha(), nu = model.nu();
  const bool finite = fam.kind() == PsKind::Binomial;
  constexpr long cap = 1000000;
  // Bound on |component| used for truncation: z g(y) for the density,
  // 1 for the cdf and moments.
  const double g = what == MixtureQuantity::Pdf ? rgtl_pdf(model.base(), y) : 1.0;
  double sum = 0.0;
  double prev_bound = std::numeric_limits<double>::infinity();
  long z = 1;
  for (;; ++z) {
    if (z > cap) throw ConvergenceError("brute_force_mixture: term cap reached");
    if (finite && z > fam.max_support()) break;
    const double p = ps_pmf(fam, theta, z);
    const RgtlParams comp(alpha, nu * static_cast<double>(z));
    double c = 0.0;
    switch (what) {
      case MixtureQuantity::Pdf: c = rgtl_pdf(comp, y); break;
      case MixtureQuantity::Cdf: c = rgtl_cdf(comp, y); break;
      case MixtureQuantity::Moment: c = rgtl_moment(comp, r, MomentMethod::Quadrature); break;
    }
    sum += p * c;
    const double bound = p * (what == MixtureQuantity::Pdf ? z * g : 1.0);
    if (!finite && bound < 1e-16 * sum && bound <= prev_bound) break;
    prev_bound = bound;
  }
  g_last_terms = finite ? z - 1 : z;
  return sum;
}

long last_mixture_terms() { return g_last_terms; }

double brute_force_expected_z(const CompoundModel& model, double y) {
  const PsFamily& fam = model.family();
  const bool finite = fam.kind() == PsKind::Binomial;
  double num = 0.0, den = 0.0;
  for (long z = 1; z <= 1000000; ++z) {
    if (finite && z > fam.max_support()) return num / den;
    const double w = ps_pmf(fam, model.theta(), z) *
                     rgtl_pdf(RgtlParams(model.alpha(), model.nu() * static_cast<double>(z)), y);
    num += z * w;
    den += w;
    if (z > 1 && z * w < 1e-17 * num && w < 1e-17 * den) return num / den;
  }
  throw ConvergenceError("brute_force_expected_z: term cap reached");
}

}  // namespace rgtlps::oracle
