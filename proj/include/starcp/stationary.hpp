#ifndef STARCP_STATIONARY_HPP
#define STARCP_STATIONARY_HPP

#include "starcp/chain.hpp"
#include "starcp/linsolve.hpp"

namespace starcp {

// Stationary distribution by a global-balance null-space solve: fix the
// reference state at mass 1, solve balance at every other state, normalize.
// Exact when T is Rational. Throws SingularSystem for reducible chains.
template <typename T>
std::vector<T> stationary_oracle(const Chain<T>& chain) {
  const int n = chain.size();
  if (n == 1) return {T(1)};
  // unknowns x_1..x_{n-1}; x_0 = 1
  SparseSystem<T> sys(n - 1);
  for (int j = 1; j < n; ++j) {
    sys.add(j - 1, j - 1, -chain.out_rate(j));
  }
  for (int i = 0; i < n; ++i) {
    for (const auto& [j, r] : chain.rates[i]) {
      if (j == 0) continue;
      if (i == 0)
        sys.rhs(j - 1) -= r;  // x_0 = 1 contribution moved to the rhs
      else
        sys.add(j - 1, i - 1, r);
    }
  }
  std::vector<T> x;
  try {
    x = sys.solve();
  } catch (const SingularSystem&) {
    throw SingularSystem("chain is reducible (null-space dimension != 1)");
  }
  std::vector<T> pi(n);
  pi[0] = 1;
  T total = pi[0];
  for (int j = 1; j < n; ++j) {
    pi[j] = x[j - 1];
    if (!(pi[j] > 0))
      throw SingularSystem("chain is reducible (nonpositive stationary mass)");
    total += pi[j];
  }
  for (auto& p : pi) p /= total;
  return pi;
}

template <typename T>
Chain<T> with_stationary(Chain<T> chain) {
  if (!chain.stationary) chain.stationary = stationary_oracle(chain);
  return chain;
}

}  // namespace starcp

#endif  // STARCP_STATIONARY_HPP
