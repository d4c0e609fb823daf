#include "starcp/asymptotics.hpp"

#include <cmath>
#include <stdexcept>

namespace starcp {

namespace {

Real pi_const() {
  Real out;
  mpfr_const_pi(out.backend().data(), MPFR_RNDN);
  return out;
}

Real binomial_real(long n, long k) {
  Integer b;
  mpz_bin_uiui(b.backend().data(), static_cast<unsigned long>(n),
               static_cast<unsigned long>(k));
  return Real(b);
}

double log_of(const Real& x) { return static_cast<double>(log(x)); }

}  // namespace

Regime classify_regime(const ModelParams& params, long n, double a) {
  params.validate();
  if (n < 0 || n > params.leaves) throw std::invalid_argument("n out of range");
  double N = static_cast<double>(params.leaves);
  double lam = static_cast<double>(Rational(params.lambda));
  double center = lam * N / (1 + 2 * lam);
  double half_width = std::pow(N, 0.5 + a);
  if (n > center + half_width) return Regime::high;
  if (n < center - half_width) return Regime::low;
  return Regime::transition;
}

AsymptoticReport v_high(const ModelParams& params, long n) {
  params.validate();
  const long N = params.leaves;
  if (n < 0 || n > N) throw std::invalid_argument("n out of range");
  Real lam(params.lambda);

  Real binom = binomial_real(N, n);
  Real power = pow(lam, static_cast<long>(n - N));
  Real f = 1;
  for (long k = n; k <= N - 1; ++k)
    f *= 1 + 1 / ((1 + 2 * lam) * (k + 1) - lam * N);

  AsymptoticReport rep;
  rep.value = binom * power * f;
  rep.log_value = log_of(rep.value);
  rep.regime = classify_regime(params, n);
  rep.components = {{"binomial", binom}, {"power", power}, {"f", f}};
  return rep;
}

Real c_n_lambda(const ModelParams& params) {
  params.validate();
  const long N = params.leaves;
  Real lam(params.lambda);
  Real inv = (lam / (1 + 2 * lam)) * N * beta_fn(1 / (1 + 2 * lam), Real(N)) *
             pow(lam * (1 + lam) / (1 + 2 * lam), N);
  return 1 / inv;
}

AsymptoticReport v_low(const ModelParams& params, long n) {
  params.validate();
  const long N = params.leaves;
  if (n < 0 || n > N) throw std::invalid_argument("n out of range");
  Real lam(params.lambda);
  Real arg = 1 - (1 + 2 * lam) * n / (lam * N);
  if (!(arg > 0))
    throw std::domain_error("v_low is singular at and beyond n = lambda N/(1+2 lambda)");
  Real C = c_n_lambda(params);
  Real power = pow_int(Real(1 + lam), n);
  Real g = pow(arg, -2 * lam / (1 + 2 * lam));

  AsymptoticReport rep;
  rep.value = C * power * g;
  rep.log_value = log_of(rep.value);
  rep.regime = classify_regime(params, n);
  rep.components = {{"C", C}, {"power", power}, {"g", g}};
  return rep;
}

AsymptoticReport metastable_mass(const ModelParams& params) {
  params.validate();
  const long N = params.leaves;
  Real lam(params.lambda);
  Real prefactor = (1 + lam) / sqrt(2 * pi_const() * lam * N);
  Real exponential = pow((1 + lam) / lam, N + 2 / (1 + 2 * lam));

  AsymptoticReport rep;
  rep.value = prefactor * exponential;
  rep.log_value = log_of(rep.value);
  rep.regime = Regime::transition;
  rep.components = {{"prefactor", prefactor}, {"exponential", exponential}};
  return rep;
}

AsymptoticReport total_mass(const ModelParams& params) {
  params.validate();
  const long N = params.leaves;
  Real lam(params.lambda);
  AsymptoticReport rep;
  rep.value = pow((1 + lam) / lam, N + 2 / (1 + 2 * lam));
  rep.log_value = log_of(rep.value);
  rep.regime = Regime::transition;
  rep.components = {{"exponential", rep.value}};
  return rep;
}

AsymptoticReport capacity_estimate(const ModelParams& params) {
  params.validate();
  const long N = params.leaves;
  Real lam(params.lambda);
  Real prefactor = (1 + 2 * lam) * pow(lam / (1 + lam), 2 / (1 + 2 * lam));
  Real beta_inv = 1 / beta_fn(1 / (1 + 2 * lam), Real(N));
  Real exponential = pow((1 + 2 * lam) / ((1 + lam) * (1 + lam)), N);

  AsymptoticReport rep;
  rep.value = prefactor * beta_inv * exponential;
  rep.log_value = log_of(rep.value);
  rep.regime = Regime::low;  // valid uniformly over the window [eps N, W]
  rep.components = {{"prefactor", prefactor},
                    {"beta_inverse", beta_inv},
                    {"exponential", exponential}};
  return rep;
}

EkTime ek_time(const ModelParams& params) {
  params.validate();
  const long N = params.leaves;
  Real lam(params.lambda);
  Real kappa = pow((1 + lam) / lam, 2 / (1 + 2 * lam)) *
               gamma_fn(2 * (1 + lam) / (1 + 2 * lam));
  Real power_of_n = pow(Real(N), -1 / (1 + 2 * lam));
  Real exponential = pow((1 + lam) * (1 + lam) / (1 + 2 * lam), N);

  EkTime out;
  out.gamma_form.value = kappa * power_of_n * exponential;
  out.gamma_form.log_value = log_of(out.gamma_form.value);
  out.gamma_form.regime = Regime::transition;
  out.gamma_form.components = {{"kappa", kappa},
                               {"power_of_N", power_of_n},
                               {"exponential", exponential}};
  out.beta_form = (1 / (1 + 2 * lam)) * pow((1 + lam) / lam, 2 / (1 + 2 * lam)) *
                  beta_fn(1 / (1 + 2 * lam), Real(N)) * exponential;
  return out;
}

Real ldp_exponent(const ModelParams& params) {
  params.validate();
  Real lam(params.lambda);
  return 2 * log(1 + lam) - log(1 + 2 * lam);
}

WThreshold w_threshold(const Rational& lambda) {
  if (!(lambda > 0)) throw std::invalid_argument("lambda must be > 0");
  const double lam = static_cast<double>(Rational(lambda));
  auto s = [lam](double t) {
    double v = std::log((1 + 2 * lam) / (lam * (1 + lam)));
    if (t > 0) v += t * std::log(t);
    if (t < 1) v += (1 - t) * std::log(1 - t) + (1 - t) * std::log(lam);
    return v;
  };

  WThreshold out;
  out.s_profile = s;
  const double phi = (1 + std::sqrt(5.0)) / 2;
  if (lam > phi) {
    out.w = out.w_tilde = 1.0;
    return out;
  }

  double lo = lam / (1 + 2 * lam), hi = 1.0;
  if (!(s(lo) < 0 && s(hi) >= 0))
    throw std::runtime_error("w_threshold: root bracketing failure");
  while (hi - lo > 1e-12) {
    double mid = (lo + hi) / 2;
    (s(mid) < 0 ? lo : hi) = mid;
  }
  out.w_tilde = (lo + hi) / 2;

  // largest dyadic backoff w = w~ - delta with w above lambda/(1+lambda) and
  // s(lambda, w) > -2 w log(1+lambda), with margin
  const double floor_w = lam / (1 + lam);
  for (double delta = out.w_tilde / 2; delta > 1e-15; delta /= 2) {
    double w = out.w_tilde - delta;
    if (w > floor_w && s(w) + 2 * w * std::log(1 + lam) > 1e-9) {
      out.w = w;
      return out;
    }
  }
  throw std::runtime_error("w_threshold: no admissible dyadic backoff found");
}

}  // namespace starcp
