#ifndef STARCP_QSD_HPP
#define STARCP_QSD_HPP

#include <iosfwd>
#include <vector>

#include "starcp/chain.hpp"
#include "starcp/linsolve.hpp"
#include "starcp/quadrature.hpp"
#include "starcp/stationary.hpp"

namespace starcp {

struct PrecisionExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Quasi-stationary measure of the regenerative chain, scaled so v[N] = 1.
// u[n] = mu(0,n), v[n] = mu(1,n), Z = sum of all entries.
template <typename T>
struct QsdSolution {
  std::vector<T> u, v;
  T Z{};
  ModelParams params;

  // nu = mu / Z on the ladder chain, indexed by ladder_index.
  std::vector<T> ladder_distribution() const {
    const long N = params.leaves;
    std::vector<T> nu(2 * (N + 1));
    for (long n = 0; n <= N; ++n) {
      nu[ladder_index(N, 0, n)] = u[n] / Z;
      nu[ladder_index(N, 1, n)] = v[n] / Z;
    }
    return nu;
  }

  // Restriction of nu to F = {(0,0)} cup {(1,n)}, indexed by trace_index.
  std::vector<T> trace_distribution() const {
    const long N = params.leaves;
    T mass = u[0];
    for (long n = 0; n <= N; ++n) mass += v[n];
    std::vector<T> nu(N + 2);
    nu[0] = u[0] / mass;
    for (long n = 0; n <= N; ++n) nu[trace_index(1, n)] = v[n] / mass;
    return nu;
  }

  // mu(F)/Z, the stationary mass of the trace set F.
  T trace_mass() const {
    T mass = u[0];
    for (long n = 0; n <= params.leaves; ++n) mass += v[n];
    return mass / Z;
  }
};

// Downward solve of the v-recurrence
//   (n+2) v_{n+2} - (n+2+lambda N) v_{n+1} + lambda(1+lambda)(N-n) v_n = 0
// from the exact boundary data v_{N+1} = 0, v_N = 1, followed by recovery of
// a_{n+1} = lambda(N-n) v_n - (n+1) v_{n+1} and u_n = a_n / n.
// Exact when T is Rational.
template <typename T>
QsdSolution<T> qsd_recurrence_fixed(const ModelParams& params) {
  params.validate();
  const long N = params.leaves;
  const T lam = scalar_from_rational<T>(params.lambda);
  const T alpha = scalar_from_rational<T>(params.alpha);

  QsdSolution<T> s;
  s.params = params;
  s.v.assign(N + 1, T{});
  s.u.assign(N + 1, T{});
  s.v[N] = 1;
  for (long n = N - 1; n >= 0; --n) {
    T vn2 = (n + 2 <= N) ? s.v[n + 2] : T{};
    s.v[n] = ((T(n + 2) + lam * N) * s.v[n + 1] - T(n + 2) * vn2) /
             (lam * (1 + lam) * T(N - n));
  }
  std::vector<T> a(N + 2, T{});
  for (long n = N; n >= 0; --n) {
    T vn1 = (n + 1 <= N) ? s.v[n + 1] : T{};
    a[n + 1] = lam * T(N - n) * s.v[n] - T(n + 1) * vn1;
  }
  a[0] = (s.v[0] + a[1]) / (1 + lam);
  s.u[0] = (1 + lam) * a[0] / alpha;
  for (long n = 1; n <= N; ++n) s.u[n] = a[n] / T(n);
  s.Z = T{};
  for (long n = 0; n <= N; ++n) s.Z += s.u[n] + s.v[n];
  return s;
}

// Residual of the two recurrence identities not used by the construction;
// a diagnostic for cancellation in the float path.
template <typename T>
T qsd_residual(const QsdSolution<T>& s) {
  const long N = s.params.leaves;
  const T lam = scalar_from_rational<T>(s.params.lambda);
  const T alpha = scalar_from_rational<T>(s.params.alpha);
  std::vector<T> a(N + 2, T{});
  a[0] = alpha * s.u[0] / (1 + lam);
  for (long n = 1; n <= N; ++n) a[n] = T(n) * s.u[n];
  T worst{};
  auto track = [&](const T& resid, const T& scale) {
    T r = scale > 0 ? abs(resid) / scale : abs(resid);
    if (r > worst) worst = r;
  };
  for (long n = 0; n <= N; ++n) {
    T an1 = (n + 1 <= N) ? a[n + 1] : T{};
    track(s.v[n] - ((1 + lam) * a[n] - an1), abs(s.v[n]));
  }
  for (long n = 0; n + 2 <= N; ++n) {
    T lhs = T(n + 1) * a[n + 2] - (T(n + 2) + lam * (N + 1)) * a[n + 1] +
            lam * (1 + lam) * T(N - n) * a[n];
    track(lhs, lam * (1 + lam) * T(N - n) * abs(a[n]));
  }
  return worst;
}

// Float path with precision escalation: doubles the working precision until
// v_0 and u_0 are stable to the policy tolerance.
QsdSolution<Real> qsd_by_recurrence(const ModelParams& params,
                                    const PrecisionPolicy& policy = {});

// Exact rational path (oracle-comparable).
inline QsdSolution<Rational> qsd_by_recurrence_exact(const ModelParams& params) {
  return qsd_recurrence_fixed<Rational>(params);
}

// I_{N'} = int_0^1 (1 - p t)^{N'} (1-t)^{-beta} dt with p = lambda/(1+2lambda)
// and beta = 2lambda/(1+2lambda).
Real i_n_integral(const ModelParams& params, long order);

struct ClosedFormConstants {
  Real b_over_pi0;       // quadrature ratio lambda(1+2lambda-I_N)/(I_N-I_{N-1})
  Real b_over_pi0_asym;  // two-term expansion -lambda^2 N^2 + lambda(1+3lambda) N
  Real c_over_pi0;       // identically -1
  Real pi0;              // filled by pi_profile, 0 otherwise
};

ClosedFormConstants b_over_pi0(const ModelParams& params);

// Full normalized profile (pi_n)_{0<=n<=N} via the three-integral
// representation; pi_integral returns one entry of it.
std::vector<Real> pi_profile(const ModelParams& params);
Real pi_integral(const ModelParams& params, long n);

// Laplace-type expansion sum_{k<m} (-1)^k C(a,k) p^{-k-1} B(k+1, N'+1)
// with a = -2lambda/(1+2lambda), p = lambda/(1+2lambda).
Real taylor_expansion_i(const ModelParams& params, long order, int m);

// CSV columns: n,u_decimal,v_decimal,log10_u,log10_v.
void emit_qsd_csv(const QsdSolution<Real>& s, std::ostream& os);

}  // namespace starcp

#endif  // STARCP_QSD_HPP
