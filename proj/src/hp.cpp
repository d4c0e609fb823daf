#include "starcp/hp.hpp"

#include "starcp/quadrature.hpp"

namespace starcp {

Real beta_fn(const Real& a, const Real& b) {
  if (!(a > 0) || !(b > 0)) throw std::domain_error("beta_fn requires a, b > 0");
  return gamma_fn(a) * gamma_fn(b) / gamma_fn(a + b);
}

// Incomplete beta B(x; a, b) = int_0^x t^{a-1} (1-t)^{b-1} dt.
Real beta_fn(const Real& a, const Real& b, const Real& x) {
  if (!(a > 0) || !(b > 0)) throw std::domain_error("beta_fn requires a, b > 0");
  if (!(x > 0 && x <= 1)) throw std::domain_error("beta_fn requires x in (0,1]");
  if (x == 1) return beta_fn(a, b);

  // Split at x/2 so each piece has at most one algebraic endpoint factor.
  // Left piece: substitute t = s^{1/a}, which absorbs t^{a-1} exactly.
  Real split = x / 2;
  Integrand left = [&](const Real& s) -> Real {
    Real t = pow(s, 1 / a);
    return pow(1 - t, b - 1) / a;
  };
  Real result = integrate_adaptive(left, Real(0), pow(split, a));
  Integrand right = [&](const Real& t) -> Real {
    return pow(t, a - 1) * pow(1 - t, b - 1);
  };
  result += integrate_adaptive(right, split, x);
  return result;
}

}  // namespace starcp
