#include "starcp/qsd.hpp"

#include <ostream>

namespace starcp {

QsdSolution<Real> qsd_by_recurrence(const ModelParams& params,
                                    const PrecisionPolicy& policy) {
  policy.validate();
  QsdSolution<Real> prev;
  bool have_prev = false;
  for (int bits = policy.base_bits; bits <= policy.max_bits; bits *= 2) {
    PrecisionGuard guard(bits);
    QsdSolution<Real> cur = qsd_recurrence_fixed<Real>(params);
    if (have_prev) {
      double d = (std::max)(rel_diff(cur.v[0], prev.v[0]),
                            rel_diff(cur.u[0], prev.u[0]));
      if (d <= policy.target_rel_tol) {
        Real resid = qsd_residual(cur);
        Real bound = pow(Real(2), -bits / 2);
        if (resid <= bound) return cur;
      }
    }
    prev = std::move(cur);
    have_prev = true;
  }
  throw PrecisionExhausted("qsd recurrence did not stabilize within the precision budget");
}

namespace {

Real lam_of(const ModelParams& p) { return Real(p.lambda); }

}  // namespace

Real i_n_integral(const ModelParams& params, long order) {
  if (order < 0) throw std::invalid_argument("order must be >= 0");
  Real lam = lam_of(params);
  Real p = lam / (1 + 2 * lam);
  Real beta = 2 * lam / (1 + 2 * lam);
  Integrand g = [&](const Real& t) { return pow(1 - p * t, static_cast<int>(order)); };
  QuadratureOptions opts;
  return integrate_singular(g, Real(0), Real(1), beta, opts);
}

ClosedFormConstants b_over_pi0(const ModelParams& params) {
  params.validate();
  const long N = params.leaves;
  Real lam = lam_of(params);
  Real I_N = i_n_integral(params, N);
  Real I_Nm1 = i_n_integral(params, N - 1);
  ClosedFormConstants out;
  out.b_over_pi0 = lam * (1 + 2 * lam - I_N) / (I_N - I_Nm1);
  out.b_over_pi0_asym = -lam * lam * Real(N) * Real(N) + lam * (1 + 3 * lam) * Real(N);
  out.c_over_pi0 = -1;
  out.pi0 = 0;
  return out;
}

namespace {

// J(a,b) = int_0^{lam/(1+2lam)} u^a (1-u)^b (1 - (1+2lam)u/lam)^{-beta} du.
// The last factor equals (c - u)^{-beta} / c^{-beta} with c = lam/(1+2lam).
Real j_integral(const Real& lam, long a, long b) {
  Real c = lam / (1 + 2 * lam);
  Real beta = 2 * lam / (1 + 2 * lam);
  Real scale = pow(c, beta);
  Integrand g = [&](const Real& u) {
    Real val = scale;
    val *= pow_int(u, a);
    if (b >= 0)
      val *= pow_int(Real(1 - u), b);
    else
      val /= pow_int(Real(1 - u), -b);
    return val;
  };
  QuadratureOptions opts;
  return integrate_singular(g, Real(0), c, beta, opts);
}

Real real_binomial(long n, long k) {
  if (k < 0 || k > n) return Real(0);
  Integer b;
  mpz_bin_uiui(b.backend().data(), static_cast<unsigned long>(n),
               static_cast<unsigned long>(k));
  return Real(b);
}

}  // namespace

std::vector<Real> pi_profile(const ModelParams& params) {
  params.validate();
  const long N = params.leaves;
  Real lam = lam_of(params);
  Real b_ratio = b_over_pi0(params).b_over_pi0;
  Real c_ratio = -1;
  Real tail_coeff = (c_ratio - b_ratio / lam) / lam;  // (c - b/lambda)/lambda, over pi0

  std::vector<Real> pi(N + 1);
  pi[0] = 1;
  Real one_plus = 1 + lam;
  for (long n = 1; n <= N; ++n) {
    Real total = 0;
    if (n <= N - 1)
      total -= b_ratio / (lam * lam) * real_binomial(N - 1, n) *
               pow_int(one_plus, n) * j_integral(lam, n, N - n - 1);
    total -= b_ratio / lam * real_binomial(N - 1, n - 1) *
             pow_int(one_plus, n - 1) * j_integral(lam, n - 1, N - n);
    total -= tail_coeff * real_binomial(N, n) * pow_int(one_plus, n) *
             j_integral(lam, n, N - n);
    pi[n] = total;
  }
  Real sum = 0;
  for (const Real& p : pi) sum += p;
  for (Real& p : pi) p /= sum;
  return pi;
}

Real pi_integral(const ModelParams& params, long n) {
  if (n < 0 || n > params.leaves)
    throw std::invalid_argument("n out of range");
  return pi_profile(params)[n];
}

Real taylor_expansion_i(const ModelParams& params, long order, int m) {
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  Real lam = lam_of(params);
  Real a = -2 * lam / (1 + 2 * lam);
  Real p = lam / (1 + 2 * lam);
  Real sum = 0;
  Real binom = 1;  // C(a, k)
  Real sign = 1;
  for (int k = 0; k < m; ++k) {
    if (k > 0) {
      binom *= (a - (k - 1)) / k;
      sign = -sign;
    }
    sum += sign * binom * pow(p, -(k + 1)) *
           beta_fn(Real(k + 1), Real(order + 1));
  }
  return sum;
}

void emit_qsd_csv(const QsdSolution<Real>& s, std::ostream& os) {
  os << "n,u_decimal,v_decimal,log10_u,log10_v\n";
  for (long n = 0; n <= s.params.leaves; ++n) {
    os << n << ',' << to_decimal(s.u[n]) << ',' << to_decimal(s.v[n]) << ','
       << log10_approx(s.u[n]) << ',' << log10_approx(s.v[n]) << '\n';
  }
}

}  // namespace starcp
