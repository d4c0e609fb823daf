#ifndef STARCP_CHAIN_HPP
#define STARCP_CHAIN_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "starcp/hp.hpp"

namespace starcp {

// (N, lambda, alpha) for the star contact process. Rates are held as exact
// rationals so chains can be built in either the rational or the float path.
struct ModelParams {
  long leaves = 1;             // N
  Rational lambda = 1;         // infection rate
  Rational alpha = 1;          // regeneration rate

  void validate() const {
    if (leaves < 1) throw std::invalid_argument("N must be >= 1");
    if (!(lambda > 0)) throw std::invalid_argument("lambda must be > 0");
    if (!(alpha > 0)) throw std::invalid_argument("alpha must be > 0");
  }
};

// Point of the ladder chain: hub status and infected-leaf count.
struct State {
  int hub = 0;
  long n = 0;

  friend bool operator==(const State&, const State&) = default;
  friend auto operator<=>(const State&, const State&) = default;
};

inline std::string to_string(const State& s) {
  return "(" + std::to_string(s.hub) + "," + std::to_string(s.n) + ")";
}

// Generic finite CTMC with sparse nonnegative rates and an optional cached
// stationary distribution. Immutable after construction by convention.
template <typename T>
struct Chain {
  std::vector<State> states;                 // index -> label
  std::vector<std::map<int, T>> rates;       // out-edges, no self-loops
  std::optional<std::vector<T>> stationary;  // sums to 1 when present

  int size() const { return static_cast<int>(states.size()); }

  const T& rate(int x, int y) const {
    static const T zero{};
    auto it = rates[x].find(y);
    return it == rates[x].end() ? zero : it->second;
  }

  void add_rate(int x, int y, const T& r) {
    if (x == y) throw std::invalid_argument("self-loop rate");
    if (r < 0) throw std::invalid_argument("negative rate");
    if (r > 0) rates[x][y] += r;
  }

  T out_rate(int x) const {
    T total{};
    for (const auto& [y, r] : rates[x]) total += r;
    return total;
  }

  // Undirected adjacency x ~ y (r(x,y) + r(y,x) > 0).
  std::vector<std::vector<int>> neighbors() const {
    std::vector<std::vector<int>> nbr(states.size());
    for (int x = 0; x < size(); ++x) {
      for (const auto& [y, r] : rates[x]) {
        (void)r;
        nbr[x].push_back(y);
        if (rates[y].find(x) == rates[y].end()) nbr[y].push_back(x);
      }
    }
    for (auto& v : nbr) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    return nbr;
  }
};

template <typename T>
T pow_int(const T& base, long e) {
  T result = 1;
  T b = base;
  long k = e;
  while (k > 0) {
    if (k & 1) result *= b;
    b *= b;
    k >>= 1;
  }
  return result;
}

enum class ReducedMode { absorbing, regenerative };

// State index in the reduced/regenerative ladder chain: hub*(N+1) + n.
inline int ladder_index(long N, int hub, long n) {
  return static_cast<int>(hub * (N + 1) + n);
}

template <typename T>
T scalar_from_rational(const Rational& q) {
  if constexpr (std::is_same_v<T, Rational>) {
    return q;
  } else {
    return T(q);
  }
}

// The 2(N+1)-state ladder chain of the reduced contact process on a star.
// In regenerative mode the supplementary rate alpha on (0,0)->(1,0) restores
// irreducibility; in absorbing mode (0,0) has zero out-rate.
template <typename T>
Chain<T> build_reduced_chain(const ModelParams& params, ReducedMode mode) {
  params.validate();
  const long N = params.leaves;
  const T lam = scalar_from_rational<T>(params.lambda);
  Chain<T> chain;
  chain.states.resize(2 * (N + 1));
  chain.rates.resize(2 * (N + 1));
  for (int hub = 0; hub <= 1; ++hub)
    for (long n = 0; n <= N; ++n)
      chain.states[ladder_index(N, hub, n)] = State{hub, n};

  for (long n = 0; n <= N; ++n) {
    int up0 = ladder_index(N, 0, n);
    int up1 = ladder_index(N, 1, n);
    if (n < N) chain.add_rate(up1, ladder_index(N, 1, n + 1), lam * T(N - n));
    if (n >= 1) chain.add_rate(up1, ladder_index(N, 1, n - 1), T(n));
    chain.add_rate(up1, up0, T(1));
    if (n >= 1) {
      chain.add_rate(up0, ladder_index(N, 0, n - 1), T(n));
      chain.add_rate(up0, up1, lam * T(n));
    }
  }
  if (mode == ReducedMode::regenerative) {
    chain.add_rate(ladder_index(N, 0, 0), ladder_index(N, 1, 0),
                   scalar_from_rational<T>(params.alpha));
  }
  return chain;
}

// State index in the trace chain on F = {(0,0)} cup {(1,n)}: (0,0) -> 0,
// (1,n) -> n+1.
inline int trace_index(int hub, long n) {
  return hub == 0 ? 0 : static_cast<int>(n + 1);
}

// Closed-form trace process of the regenerative chain on F. Excursions with a
// healthy hub collapse into truncated-geometric down jumps and a direct rate
// to (0,0).
template <typename T>
Chain<T> build_trace_chain(const ModelParams& params) {
  params.validate();
  const long N = params.leaves;
  const T lam = scalar_from_rational<T>(params.lambda);
  const T one_plus = 1 + lam;
  Chain<T> chain;
  chain.states.resize(N + 2);
  chain.rates.resize(N + 2);
  chain.states[0] = State{0, 0};
  for (long n = 0; n <= N; ++n) chain.states[trace_index(1, n)] = State{1, n};

  chain.add_rate(0, trace_index(1, 0), scalar_from_rational<T>(params.alpha));
  for (long n = 0; n <= N; ++n) {
    int x = trace_index(1, n);
    if (n < N) chain.add_rate(x, trace_index(1, n + 1), lam * T(N - n));
    if (n >= 1) chain.add_rate(x, trace_index(1, n - 1), T(n));
    // hub-down excursion: land j levels lower with rate lambda/(1+lambda)^{j+1}
    T geo = lam / (one_plus * one_plus);
    for (long j = 1; j <= n - 1; ++j) {
      chain.add_rate(x, trace_index(1, n - j), geo);
      geo /= one_plus;
    }
    chain.add_rate(x, 0, 1 / pow_int(one_plus, n));
  }
  return chain;
}

}  // namespace starcp

#endif  // STARCP_CHAIN_HPP
