#ifndef STARCP_HP_HPP
#define STARCP_HP_HPP

#include <boost/multiprecision/mpfr.hpp>
#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <stdexcept>
#include <string>

namespace starcp {

namespace mp = boost::multiprecision;

// Arbitrary-precision binary float. MPFR's exponent range covers every
// magnitude reachable in this problem (values scale like e^{cN}), so a single
// representation serves both product chains and subtractive recurrences.
using Real = mp::number<mp::mpfr_float_backend<0>, mp::et_off>;

// Exact rational scalar for the small-N oracle path.
using Rational = mp::number<mp::gmp_rational, mp::et_off>;
using Integer = mp::number<mp::gmp_int, mp::et_off>;

inline int bits_to_digits(int bits) {
  return static_cast<int>(std::ceil(bits * 0.30103)) + 2;
}

// Working-precision escalation: start at base_bits and double until two
// consecutive precisions agree to target_rel_tol.
struct PrecisionPolicy {
  int base_bits = 256;
  int max_bits = 16384;
  double target_rel_tol = 1e-20;

  void validate() const {
    if (base_bits < 64) throw std::invalid_argument("base_bits must be >= 64");
    if (!(target_rel_tol > 0.0 && target_rel_tol <= 1e-6))
      throw std::invalid_argument("target_rel_tol must lie in (0, 1e-6]");
  }
};

// RAII guard for the thread-local default precision.
class PrecisionGuard {
 public:
  explicit PrecisionGuard(int bits)
      : saved_(static_cast<int>(Real::default_precision())) {
    Real::default_precision(bits_to_digits(bits));
  }
  ~PrecisionGuard() { Real::default_precision(saved_); }
  PrecisionGuard(const PrecisionGuard&) = delete;
  PrecisionGuard& operator=(const PrecisionGuard&) = delete;

 private:
  int saved_;
};

inline Real to_real(const Rational& q) { return Real(q); }

// Subtraction with a catastrophic-cancellation flag: the flag is raised when
// the result has lost more than half of the working precision.
struct SubResult {
  Real value;
  bool cancellation = false;
};

inline SubResult sub_checked(const Real& a, const Real& b) {
  SubResult r;
  r.value = a - b;
  Real scale = (std::max)(abs(a), abs(b));
  if (scale > 0) {
    long p = static_cast<long>(mpfr_get_prec(r.value.backend().data()));
    Real threshold = scale * pow(Real(2), -static_cast<long>(p / 2));
    r.cancellation = abs(r.value) < threshold;
  }
  return r;
}

// Gamma function, correct to the current working precision.
inline Real gamma_fn(const Real& a) {
  if (!(a > 0)) throw std::domain_error("gamma_fn requires a > 0");
  Real out;
  mpfr_gamma(out.backend().data(), a.backend().data(), MPFR_RNDN);
  return out;
}

Real beta_fn(const Real& a, const Real& b);
Real beta_fn(const Real& a, const Real& b, const Real& x);

// Decimal serialization: full-precision round-trippable string.
inline std::string to_decimal(const Real& x) {
  return x.str(0, std::ios_base::scientific);
}

inline std::string to_decimal(const Rational& q) {
  // Rationals are emitted through a 50-digit float; exact values in the exact
  // path are compared in memory, never through this serialization.
  Real r(q);
  return r.str(50, std::ios_base::scientific);
}

// log10 of a positive scalar as a double (for plotting columns).
inline double log10_approx(const Real& x) {
  if (x <= 0) throw std::domain_error("log10_approx requires x > 0");
  return static_cast<double>(log10(x));
}

inline double rel_diff(const Real& a, const Real& b) {
  Real scale = (std::max)(abs(a), abs(b));
  if (scale == 0) return 0.0;
  return static_cast<double>(abs(a - b) / scale);
}

}  // namespace starcp

#endif  // STARCP_HP_HPP
