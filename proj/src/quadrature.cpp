#include "starcp/quadrature.hpp"

#include <map>
#include <mutex>

namespace starcp {

namespace {

// Legendre polynomial value and derivative via the three-term recurrence.
std::pair<Real, Real> legendre_pd(int n, const Real& x) {
  Real p0 = 1, p1 = x;
  for (int k = 2; k <= n; ++k) {
    Real p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  Real deriv = n * (x * p1 - p0) / (x * x - 1);
  return {p1, deriv};
}

std::pair<std::vector<Real>, std::vector<Real>> compute_gl(int n) {
  std::vector<Real> nodes(n), weights(n);
  Real pi_val = 4 * atan(Real(1));
  long prec = Real::default_precision();
  Real tol = pow(Real(10), -static_cast<long>(prec) + 2);
  for (int i = 0; i < n; ++i) {
    Real x = cos(pi_val * (i + Real(3) / 4) / (n + Real(1) / 2));
    for (int iter = 0; iter < 200; ++iter) {
      auto [p, dp] = legendre_pd(n, x);
      Real dx = p / dp;
      x -= dx;
      if (abs(dx) < tol) break;
    }
    auto [p, dp] = legendre_pd(n, x);
    (void)p;
    nodes[i] = x;
    weights[i] = 2 / ((1 - x * x) * dp * dp);
  }
  return {nodes, weights};
}

struct AdaptiveState {
  const Integrand* g;
  QuadratureOptions opts;
  std::size_t evals = 0;
  const std::vector<Real>* nodes;
  const std::vector<Real>* weights;
};

Real panel(AdaptiveState& st, const Real& a, const Real& b) {
  Real mid = (a + b) / 2, half = (b - a) / 2;
  Real sum = 0;
  const auto& xs = *st.nodes;
  const auto& ws = *st.weights;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sum += ws[i] * (*st.g)(mid + half * xs[i]);
  }
  st.evals += xs.size();
  if (st.evals > st.opts.max_evaluations)
    throw QuadratureError("quadrature evaluation budget exhausted");
  return sum * half;
}

Real refine(AdaptiveState& st, const Real& a, const Real& b, const Real& whole,
            const Real& global_scale, int depth) {
  Real mid = (a + b) / 2;
  Real left = panel(st, a, mid);
  Real right = panel(st, mid, b);
  Real err = abs(left + right - whole);
  if (err <= st.opts.rel_tol * global_scale || depth > 60) {
    return left + right;
  }
  return refine(st, a, mid, left, global_scale, depth + 1) +
         refine(st, mid, b, right, global_scale, depth + 1);
}

}  // namespace

const std::pair<std::vector<Real>, std::vector<Real>>& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<std::pair<int, long>, std::pair<std::vector<Real>, std::vector<Real>>> cache;
  long prec = Real::default_precision();
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(n, prec);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, compute_gl(n)).first;
  return it->second;
}

Real integrate_adaptive(const Integrand& g, const Real& a, const Real& b,
                        const QuadratureOptions& opts) {
  if (a == b) return Real(0);
  AdaptiveState st;
  st.g = &g;
  st.opts = opts;
  const auto& rule = gauss_legendre(opts.panel_order);
  st.nodes = &rule.first;
  st.weights = &rule.second;
  Real whole = panel(st, a, b);
  Real scale = abs(whole);
  if (scale == 0) scale = 1;
  return refine(st, a, b, whole, scale, 0);
}

Real integrate_singular(const Integrand& g, const Real& a, const Real& b,
                        const Real& beta, const QuadratureOptions& opts) {
  if (!(beta >= 0 && beta < 1))
    throw QuadratureError("non-integrable singularity exponent");
  if (beta == 0) return integrate_adaptive(g, a, b, opts);
  // u = b - s^{1/(1-beta)} maps s in [0, (b-a)^{1-beta}]; the Jacobian cancels
  // the singular factor identically.
  Real one_minus = 1 - beta;
  Real smax = pow(b - a, one_minus);
  Integrand transformed = [&](const Real& s) -> Real {
    Real u = b - pow(s, 1 / one_minus);
    if (u < a) u = a;
    if (u > b) u = b;
    return g(u) / one_minus;
  };
  return integrate_adaptive(transformed, Real(0), smax, opts);
}

}  // namespace starcp
