#ifndef STARCP_QUADRATURE_HPP
#define STARCP_QUADRATURE_HPP

#include <functional>
#include <stdexcept>
#include <vector>

#include "starcp/hp.hpp"

namespace starcp {

using Integrand = std::function<Real(const Real&)>;

struct QuadratureOptions {
  double rel_tol = 1e-25;
  std::size_t max_evaluations = 1000000;
  int panel_order = 24;
};

struct QuadratureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Gauss-Legendre nodes/weights on [-1,1] at the current working precision.
const std::pair<std::vector<Real>, std::vector<Real>>& gauss_legendre(int n);

// Adaptive Gauss-Legendre quadrature of a smooth integrand on [a,b].
Real integrate_adaptive(const Integrand& g, const Real& a, const Real& b,
                        const QuadratureOptions& opts = {});

// Integrates g(u) * (b-u)^{-beta} over [a,b], where g is smooth on [a,b] and
// 0 <= beta < 1. The substitution s = (b-u)^{1-beta} removes the endpoint
// singularity exactly, leaving a smooth integrand for the adaptive rule.
Real integrate_singular(const Integrand& g, const Real& a, const Real& b,
                        const Real& beta, const QuadratureOptions& opts = {});

}  // namespace starcp

#endif  // STARCP_QUADRATURE_HPP
