#ifndef STARCP_ASYMPTOTICS_HPP
#define STARCP_ASYMPTOTICS_HPP

#include <functional>
#include <map>
#include <string>

#include "starcp/chain.hpp"

namespace starcp {

enum class Regime { high, low, transition };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::high: return "high";
    case Regime::low: return "low";
    default: return "transition";
  }
}

// Closed-form asymptotic value with its prefactor breakdown.
struct AsymptoticReport {
  Real value;
  double log_value = 0;  // natural log of value
  Regime regime = Regime::low;
  std::map<std::string, Real> components;
};

// Regime of n relative to the transition point lambda N/(1+2lambda), with
// window half-width N^{1/2+a}.
Regime classify_regime(const ModelParams& params, long n, double a = 0.1);

// v_n^high = C(N,n) lambda^{n-N} f_{N,lambda}(n),
// f = prod_{k=n}^{N-1} [1 + 1/((1+2lambda)(k+1) - lambda N)].
AsymptoticReport v_high(const ModelParams& params, long n);

// v_n^low = C_{N,lambda} (1+lambda)^n g_{N,lambda}(n),
// g = (1 - (1+2lambda) n/(lambda N))^{-2lambda/(1+2lambda)}.
AsymptoticReport v_low(const ModelParams& params, long n);

// C_{N,lambda}^{-1} = (lambda/(1+2lambda)) N B(1/(1+2lambda),N)
//                     (lambda(1+lambda)/(1+2lambda))^N.
Real c_n_lambda(const ModelParams& params);

// v_m ~ ((1+lambda)/sqrt(2 pi lambda N)) ((1+lambda)/lambda)^{N+2/(1+2lambda)}
// at the metastable state m = floor(lambda N/(1+lambda)).
AsymptoticReport metastable_mass(const ModelParams& params);

// Z ~ ((1+lambda)/lambda)^{N+2/(1+2lambda)}.
AsymptoticReport total_mass(const ModelParams& params);

// CAP((0,0),(1,n)) ~ (1+2lambda)(lambda/(1+lambda))^{2/(1+2lambda)}
//                    B(1/(1+2lambda),N)^{-1} ((1+2lambda)/(1+lambda)^2)^N,
// uniform over the window [eps N, W].
AsymptoticReport capacity_estimate(const ModelParams& params);

struct EkTime {
  AsymptoticReport gamma_form;  // kappa N^{-1/(1+2l)} ((1+l)^2/(1+2l))^N
  Real beta_form;               // equivalent incomplete-beta restatement
};

// Mean extinction time law with
// kappa = ((1+lambda)/lambda)^{2/(1+2lambda)} Gamma(2(1+lambda)/(1+2lambda)).
EkTime ek_time(const ModelParams& params);

// Large-deviation exponent 2 log(1+lambda) - log(1+2lambda).
Real ldp_exponent(const ModelParams& params);

struct WThreshold {
  double w = 1.0;        // admissible-window endpoint factor
  double w_tilde = 1.0;  // unique root of s(lambda, t) in (lambda/(1+2lambda), 1]
  std::function<double(double)> s_profile;
};

// s(lambda,t) = log((1+2l)/(l(1+l))) + t log t + (1-t) log(1-t) + (1-t) log l,
// with 0 log 0 = 0. For lambda > (1+sqrt 5)/2 the threshold is w = 1;
// otherwise w is a dyadic backoff from the root w~ keeping
// s(lambda, w) > -2 w log(1+lambda) with margin.
WThreshold w_threshold(const Rational& lambda);

inline long admissible_window_top(const ModelParams& params) {
  return static_cast<long>(w_threshold(params.lambda).w * params.leaves);
}

}  // namespace starcp

#endif  // STARCP_ASYMPTOTICS_HPP
