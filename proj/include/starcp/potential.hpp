#ifndef STARCP_POTENTIAL_HPP
#define STARCP_POTENTIAL_HPP

#include <cmath>
#include <functional>
#include <set>
#include <utility>
#include <vector>

#include "starcp/chain.hpp"
#include "starcp/linsolve.hpp"
#include "starcp/stationary.hpp"

namespace starcp {

using StateSet = std::set<int>;

// Antisymmetric edge function; stores phi(x,y) for x < y only.
template <typename T>
struct Flow {
  std::map<std::pair<int, int>, T> edges;

  void add(int x, int y, const T& v) {
    if (v == 0) return;
    if (x < y)
      edges[{x, y}] += v;
    else
      edges[{y, x}] -= v;
  }

  T get(int x, int y) const {
    auto it = edges.find(x < y ? std::make_pair(x, y) : std::make_pair(y, x));
    if (it == edges.end()) return T{};
    return x < y ? it->second : -it->second;
  }

  Flow scaled(const T& c) const {
    Flow out;
    for (const auto& [e, v] : edges) out.edges[e] = v * c;
    return out;
  }

  Flow& operator+=(const Flow& other) {
    for (const auto& [e, v] : other.edges) edges[e] += v;
    return *this;
  }

  Flow operator-(const Flow& other) const {
    Flow out = *this;
    for (const auto& [e, v] : other.edges) out.edges[e] -= v;
    return out;
  }
};

template <typename T>
std::vector<T> divergence_all(const Flow<T>& phi, int num_states) {
  std::vector<T> div(num_states);
  for (const auto& [e, v] : phi.edges) {
    div[e.first] += v;
    div[e.second] -= v;
  }
  return div;
}

template <typename T>
T divergence(const Flow<T>& phi, int x) {
  T d{};
  for (const auto& [e, v] : phi.edges) {
    if (e.first == x) d += v;
    if (e.second == x) d -= v;
  }
  return d;
}

namespace detail {
template <typename T>
const std::vector<T>& mu_of(const Chain<T>& chain) {
  if (!chain.stationary)
    throw std::invalid_argument("chain has no stationary distribution attached");
  return *chain.stationary;
}
}  // namespace detail

// Conductance c(x,y) = mu(x) r(x,y) and its symmetrization.
template <typename T>
T conductance(const Chain<T>& chain, int x, int y) {
  return detail::mu_of(chain)[x] * chain.rate(x, y);
}

template <typename T>
T sym_conductance(const Chain<T>& chain, int x, int y) {
  return (conductance(chain, x, y) + conductance(chain, y, x)) / 2;
}

// Dirichlet form D(f) = (1/2) sum mu(x) r(x,y) [f(y)-f(x)]^2.
template <typename T>
T dirichlet_form(const Chain<T>& chain, const std::vector<T>& f) {
  const auto& mu = detail::mu_of(chain);
  T acc{};
  for (int x = 0; x < chain.size(); ++x) {
    for (const auto& [y, r] : chain.rates[x]) {
      T d = f[y] - f[x];
      acc += mu[x] * r * d * d;
    }
  }
  return acc / 2;
}

// Time reversal: r^dagger(x,y) = mu(y) r(y,x) / mu(x).
template <typename T>
Chain<T> adjoint_chain(const Chain<T>& chain) {
  const auto& mu = detail::mu_of(chain);
  Chain<T> out;
  out.states = chain.states;
  out.rates.resize(chain.size());
  for (int y = 0; y < chain.size(); ++y) {
    if (!(mu[y] > 0))
      throw std::invalid_argument("adjoint requires strictly positive stationary mass");
    for (const auto& [x, r] : chain.rates[y]) {
      out.add_rate(x, y, mu[y] * r / mu[x]);
    }
  }
  out.stationary = mu;
  return out;
}

// Reversible average of a chain and its adjoint.
template <typename T>
Chain<T> symmetrized_chain(const Chain<T>& chain) {
  const auto& mu = detail::mu_of(chain);
  Chain<T> out;
  out.states = chain.states;
  out.rates.resize(chain.size());
  for (int x = 0; x < chain.size(); ++x) {
    if (!(mu[x] > 0))
      throw std::invalid_argument("symmetrization requires strictly positive stationary mass");
    for (const auto& [y, r] : chain.rates[x]) {
      out.add_rate(x, y, r / 2);
      out.add_rate(y, x, mu[x] * r / (2 * mu[y]));
    }
  }
  out.stationary = mu;
  return out;
}

template <typename T>
struct PotentialSolution {
  std::vector<T> h;  // 1 on A, 0 on B, harmonic elsewhere
  StateSet A, B;
  T capacity{};
};

namespace detail {
inline void check_sets(const StateSet& A, const StateSet& B) {
  if (A.empty() || B.empty())
    throw std::invalid_argument("A and B must be nonempty");
  for (int a : A)
    if (B.count(a)) throw std::invalid_argument("A and B must be disjoint");
}
}  // namespace detail

// Solves Lh = 0 off A and B with h = 1 on A and h = 0 on B; the capacity is
// the Dirichlet form of h.
template <typename T>
PotentialSolution<T> equilibrium_potential(const Chain<T>& chain,
                                           const StateSet& A,
                                           const StateSet& B) {
  detail::check_sets(A, B);
  const int n = chain.size();
  std::vector<int> unknown_of(n, -1);
  std::vector<int> interior;
  for (int x = 0; x < n; ++x) {
    if (!A.count(x) && !B.count(x)) {
      unknown_of[x] = static_cast<int>(interior.size());
      interior.push_back(x);
    }
  }
  SparseSystem<T> sys(static_cast<int>(interior.size()));
  for (int k = 0; k < static_cast<int>(interior.size()); ++k) {
    int x = interior[k];
    sys.add(k, k, -chain.out_rate(x));
    for (const auto& [y, r] : chain.rates[x]) {
      if (unknown_of[y] >= 0)
        sys.add(k, unknown_of[y], r);
      else if (A.count(y))
        sys.rhs(k) -= r;  // boundary value 1
    }
  }
  std::vector<T> sol;
  if (!interior.empty()) sol = sys.solve();

  PotentialSolution<T> out;
  out.A = A;
  out.B = B;
  out.h.assign(n, T{});
  for (int a : A) out.h[a] = 1;
  for (int k = 0; k < static_cast<int>(interior.size()); ++k)
    out.h[interior[k]] = sol[k];
  out.capacity = dirichlet_form(chain, out.h);
  return out;
}

template <typename T>
T capacity(const Chain<T>& chain, const StateSet& A, const StateSet& B) {
  return equilibrium_potential(chain, A, B).capacity;
}

// Mean hitting time E_x[tau_y] = (1/CAP(x,y)) sum_z h^dagger_{x,y}(z) mu(z).
template <typename T>
T mean_hitting_time(const Chain<T>& chain, int x, int y) {
  if (x == y) throw std::invalid_argument("x and y must be distinct");
  const auto& mu = detail::mu_of(chain);
  auto cap = capacity(chain, StateSet{x}, StateSet{y});
  auto adj = adjoint_chain(chain);
  auto pot = equilibrium_potential(adj, StateSet{x}, StateSet{y});
  T acc{};
  for (int z = 0; z < chain.size(); ++z) acc += pot.h[z] * mu[z];
  return acc / cap;
}

// First-step-analysis oracle: solves (-L)T = 1 off the target set and
// returns E_z[tau_target] for every state (0 on the target).
template <typename T>
std::vector<T> direct_hitting_times(const Chain<T>& chain,
                                    const StateSet& target) {
  const int n = chain.size();
  std::vector<int> unknown_of(n, -1);
  std::vector<int> interior;
  for (int z = 0; z < n; ++z) {
    if (!target.count(z)) {
      unknown_of[z] = static_cast<int>(interior.size());
      interior.push_back(z);
    }
  }
  SparseSystem<T> sys(static_cast<int>(interior.size()));
  for (int k = 0; k < static_cast<int>(interior.size()); ++k) {
    int z = interior[k];
    sys.add(k, k, chain.out_rate(z));
    for (const auto& [y, r] : chain.rates[z]) {
      if (unknown_of[y] >= 0) sys.add(k, unknown_of[y], -r);
    }
    sys.set_rhs(k, T(1));
  }
  std::vector<T> sol;
  try {
    sol = sys.solve();
  } catch (const SingularSystem&) {
    throw SingularSystem("target not reachable from some non-target state");
  }
  std::vector<T> out(n);
  for (int z = 0; z < n; ++z)
    if (unknown_of[z] >= 0) out[z] = sol[unknown_of[z]];
  return out;
}

template <typename T>
T direct_hitting_time(const Chain<T>& chain, int x, const StateSet& target) {
  if (target.count(x)) return T{};
  return direct_hitting_times(chain, target)[x];
}

// Capacity-ratio bracket for the equilibrium potential at x.
template <typename T>
std::pair<T, T> potential_bounds(const Chain<T>& chain, int x,
                                 const StateSet& A, const StateSet& B) {
  if (A.count(x) || B.count(x))
    throw std::invalid_argument("x must lie outside A and B");
  StateSet AB = A;
  AB.insert(B.begin(), B.end());
  T cap_xA = capacity(chain, StateSet{x}, A);
  T cap_xB = capacity(chain, StateSet{x}, B);
  T cap_xAB = capacity(chain, StateSet{x}, AB);
  return {1 - cap_xB / cap_xAB, cap_xA / cap_xAB};
}

template <typename T>
struct AssociatedFlows {
  Flow<T> forward;   // Phi_f
  Flow<T> backward;  // Phi*_f
  Flow<T> symmetric; // Psi_f = (Phi_f + Phi*_f)/2
};

// Phi_f(x,y) = f(y)c(y,x) - f(x)c(x,y); Phi*_f(x,y) = f(y)c(x,y) - f(x)c(y,x).
template <typename T>
AssociatedFlows<T> associated_flows(const Chain<T>& chain,
                                    const std::vector<T>& f) {
  const auto& mu = detail::mu_of(chain);
  AssociatedFlows<T> out;
  for (int x = 0; x < chain.size(); ++x) {
    for (const auto& [y, r] : chain.rates[x]) {
      T cxy = mu[x] * r;
      // c(x,y) appears once in each associated flow; antisymmetry fills in
      // the mirrored orientation
      out.forward.add(x, y, -f[x] * cxy);
      out.backward.add(x, y, f[y] * cxy);
    }
  }
  out.symmetric = out.forward;
  out.symmetric += out.backward;
  out.symmetric = out.symmetric.scaled(T(1) / 2);
  return out;
}

// <phi,psi> = (1/2) sum_{directed edges} phi psi / c^s.
template <typename T>
T flow_inner(const Chain<T>& chain, const Flow<T>& phi, const Flow<T>& psi) {
  T acc{};
  for (const auto& [e, v] : phi.edges) {
    if (v == 0) continue;
    T w = psi.get(e.first, e.second);
    if (w == 0) continue;
    T cs = sym_conductance(chain, e.first, e.second);
    if (!(cs > 0))
      throw std::invalid_argument("flow supported outside the chain's edge set");
    acc += v * w / cs;
  }
  return acc;
}

template <typename T>
T flow_norm2(const Chain<T>& chain, const Flow<T>& phi) {
  return flow_inner(chain, phi, phi);
}

// Dirichlet-principle objective: ||Phi_f - phi||^2 - 2 sum h (DIV phi).
// Upper-bounds the capacity for every feasible pair (f, phi); h is the exact
// equilibrium potential between A and B.
template <typename T>
T dirichlet_functional(const Chain<T>& chain, const std::vector<T>& f,
                       const Flow<T>& phi, const std::vector<T>& h) {
  auto flows = associated_flows(chain, f);
  T norm2 = flow_norm2(chain, flows.forward - phi);
  auto div = divergence_all(phi, chain.size());
  T lin{};
  for (int x = 0; x < chain.size(); ++x) lin += h[x] * div[x];
  return norm2 - 2 * lin;
}

// Thomson-principle objective: [sum h (DIV psi)]^2 / ||Phi_g - psi||^2.
// Lower-bounds the capacity for every feasible pair (g, psi != 0).
template <typename T>
T thomson_functional(const Chain<T>& chain, const std::vector<T>& g,
                     const Flow<T>& psi, const std::vector<T>& h) {
  auto flows = associated_flows(chain, g);
  T norm2 = flow_norm2(chain, flows.forward - psi);
  if (!(norm2 > 0)) throw std::invalid_argument("Thomson flow must be nonzero");
  auto div = divergence_all(psi, chain.size());
  T lin{};
  for (int x = 0; x < chain.size(); ++x) lin += h[x] * div[x];
  return lin * lin / norm2;
}

// Explicit test functions and divergence-corrected flows for the variational
// principles on the trace chain, targeting CAP((0,0),(1,n)).
template <typename T>
struct CapacityTestObjects {
  std::vector<T> h;         // indicator of (0,0)
  std::vector<T> h_dagger;  // truncated geometric (1+lambda)^{-k}, k <= R1
  std::vector<T> f, g;      // (h+h^d)/2 and (h^d-h)/2
  Flow<T> phi, psi;         // raw (Phi_{h^d} -/+ Phi*_h)/2
  Flow<T> phi_hat, psi_hat; // divergence-free off {(0,0),(1,n)}
  long R1 = 0, R2 = 0;
};

namespace detail {

// Two-stage correction making `flow` divergence-free at every (1,k), k != n.
// Stage 1 spreads the defect at (1,k), k <= R1, over incoming down-edges from
// (1,l), l in (k, R2]; only (1,1) has a down-edge into (1,0). Stage 2
// telescopes the remaining defects along the up-edges toward (1,n).
template <typename T>
void make_divergence_free(const Chain<T>& trace, Flow<T>& flow, long N,
                          long n, long R1, long R2) {
  for (long k = 0; k <= R1; ++k) {
    int site = trace_index(1, k);
    T D = divergence(flow, site);
    if (D == 0) continue;
    long lo = k + 1;
    long hi = (k == 0) ? 1 : R2;
    T share = D / T(hi - lo + 1);
    for (long l = lo; l <= hi; ++l)
      flow.add(trace_index(1, l), site, share);
  }
  auto div = divergence_all(flow, trace.size());
  T below{};  // sum of defects at (1,l), l <= k
  for (long l = 0; l <= R1; ++l) below += div[trace_index(1, l)];
  for (long k = R1 + 1; k <= n - 1; ++k) {
    below += div[trace_index(1, k)];
    flow.add(trace_index(1, k), trace_index(1, k + 1), -below);
  }
  T above{};  // sum of defects at (1,l), l > k
  for (long k = N - 1; k >= n; --k) {
    above += div[trace_index(1, k + 1)];
    flow.add(trace_index(1, k), trace_index(1, k + 1), above);
  }
}

}  // namespace detail

// Builds (f, phi_hat) and (g, psi_hat) on the trace chain (stationary
// distribution required). R1 = floor(N^q), R2 = floor(r N); requires
// R1 < R2 < n <= N.
template <typename T>
CapacityTestObjects<T> capacity_test_objects(const Chain<T>& trace,
                                             const ModelParams& params,
                                             long n, double q, double r) {
  const long N = params.leaves;
  if (trace.size() != static_cast<int>(N + 2))
    throw std::invalid_argument("chain is not the trace chain for these parameters");
  CapacityTestObjects<T> out;
  out.R1 = static_cast<long>(std::pow(static_cast<double>(N), q));
  out.R2 = static_cast<long>(r * static_cast<double>(N));
  if (!(out.R1 >= 1 && out.R1 < out.R2 && out.R2 < n && n <= N))
    throw std::invalid_argument("need 1 <= R1 < R2 < n <= N; adjust q, r, n");

  const T lam = scalar_from_rational<T>(params.lambda);
  const int size = trace.size();
  out.h.assign(size, T{});
  out.h[trace_index(0, 0)] = 1;
  out.h_dagger.assign(size, T{});
  out.h_dagger[trace_index(0, 0)] = 1;
  T geo = 1;
  for (long k = 0; k <= out.R1; ++k) {
    out.h_dagger[trace_index(1, k)] = geo;
    geo /= 1 + lam;
  }
  out.f.resize(size);
  out.g.resize(size);
  for (int x = 0; x < size; ++x) {
    out.f[x] = (out.h[x] + out.h_dagger[x]) / 2;
    out.g[x] = (out.h_dagger[x] - out.h[x]) / 2;
  }

  auto fl_h = associated_flows(trace, out.h);
  auto fl_hd = associated_flows(trace, out.h_dagger);
  out.phi = fl_hd.forward - fl_h.backward;
  out.phi = out.phi.scaled(T(1) / 2);
  out.psi = fl_hd.forward;
  out.psi += fl_h.backward;
  out.psi = out.psi.scaled(T(1) / 2);

  out.phi_hat = out.phi;
  out.psi_hat = out.psi;
  detail::make_divergence_free(trace, out.phi_hat, N, n, out.R1, out.R2);
  detail::make_divergence_free(trace, out.psi_hat, N, n, out.R1, out.R2);
  return out;
}

// Generic state elimination: the chain watched only on F, with excursions
// through F^c collapsed into direct rates via absorbing-probability solves.
template <typename T>
Chain<T> trace_chain_generic(const Chain<T>& chain, const StateSet& F) {
  if (F.empty() || static_cast<int>(F.size()) >= chain.size())
    throw std::invalid_argument("F must be a proper nonempty subset");
  const int n = chain.size();
  std::vector<int> comp_of(n, -1), f_of(n, -1);
  std::vector<int> comp, fstates;
  for (int x = 0; x < n; ++x) {
    if (F.count(x)) {
      f_of[x] = static_cast<int>(fstates.size());
      fstates.push_back(x);
    } else {
      comp_of[x] = static_cast<int>(comp.size());
      comp.push_back(x);
    }
  }

  // p_y(z) = P_z[first entry to F lands at y], one solve per y in F
  const int m = static_cast<int>(comp.size());
  std::vector<std::vector<T>> land(fstates.size());
  for (std::size_t yi = 0; yi < fstates.size(); ++yi) {
    int y = fstates[yi];
    SparseSystem<T> sys(m);
    for (int k = 0; k < m; ++k) {
      int z = comp[k];
      sys.add(k, k, chain.out_rate(z));
      for (const auto& [w, r] : chain.rates[z]) {
        if (comp_of[w] >= 0) sys.add(k, comp_of[w], -r);
      }
      sys.set_rhs(k, chain.rate(z, y));
    }
    land[yi] = m > 0 ? sys.solve() : std::vector<T>{};
  }

  Chain<T> out;
  out.states.reserve(fstates.size());
  for (int x : fstates) out.states.push_back(chain.states[x]);
  out.rates.resize(fstates.size());
  for (std::size_t xi = 0; xi < fstates.size(); ++xi) {
    int x = fstates[xi];
    for (std::size_t yi = 0; yi < fstates.size(); ++yi) {
      if (xi == yi) continue;
      int y = fstates[yi];
      T r = chain.rate(x, y);
      for (const auto& [z, rz] : chain.rates[x]) {
        if (comp_of[z] >= 0) r += rz * land[yi][comp_of[z]];
      }
      if (r > 0) out.rates[xi][yi] = r;
    }
  }

  if (chain.stationary) {
    const auto& mu = *chain.stationary;
    T mass{};
    for (int x : fstates) mass += mu[x];
    std::vector<T> muF(fstates.size());
    for (std::size_t xi = 0; xi < fstates.size(); ++xi)
      muF[xi] = mu[fstates[xi]] / mass;
    out.stationary = muF;
  }
  return out;
}

}  // namespace starcp

#endif  // STARCP_POTENTIAL_HPP
