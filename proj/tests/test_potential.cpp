#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "starcp/potential.hpp"
#include "starcp/qsd.hpp"

using namespace starcp;

namespace {

// Irreducible random chain with small rational rates.
Chain<Rational> random_chain(std::mt19937& gen, int n) {
  Chain<Rational> ch;
  ch.states.resize(n);
  for (int i = 0; i < n; ++i) ch.states[i] = State{0, i};
  ch.rates.resize(n);
  std::uniform_int_distribution<int> num(1, 6);
  std::uniform_real_distribution<double> coin(0, 1);
  for (int i = 0; i < n; ++i) {
    // ring edges guarantee irreducibility
    ch.add_rate(i, (i + 1) % n, Rational(num(gen), num(gen)));
    for (int j = 0; j < n; ++j) {
      if (j != i && coin(gen) < 0.3)
        ch.add_rate(i, j, Rational(num(gen), num(gen)));
    }
  }
  return with_stationary(std::move(ch));
}

// mu(x) (L f)(x) at every state.
template <typename T>
std::vector<T> mu_generator(const Chain<T>& ch, const std::vector<T>& f) {
  const auto& mu = *ch.stationary;
  std::vector<T> out(ch.size());
  for (int x = 0; x < ch.size(); ++x)
    for (const auto& [y, r] : ch.rates[x]) out[x] += mu[x] * r * (f[y] - f[x]);
  return out;
}

}  // namespace

TEST_CASE("flows: antisymmetric storage and divergence") {
  Flow<Rational> phi;
  phi.add(2, 5, Rational(3));
  phi.add(5, 2, Rational(1));
  CHECK(phi.get(2, 5) == 2);
  CHECK(phi.get(5, 2) == -2);
  phi.add(0, 2, Rational(1, 2));
  auto div = divergence_all(phi, 6);
  CHECK(div[2] == Rational(3, 2));
  CHECK(div[5] == -2);
  CHECK(div[0] == Rational(1, 2));
  CHECK(divergence(phi, 5) == -2);
  Flow<Rational> sum = phi;
  sum += phi.scaled(Rational(-1));
  for (const auto& [e, v] : sum.edges) CHECK(v == 0);
}

TEST_CASE("stationary oracle closed forms") {
  Chain<Rational> two;
  two.states = {State{0, 0}, State{0, 1}};
  two.rates.resize(2);
  two.add_rate(0, 1, Rational(3));   // a
  two.add_rate(1, 0, Rational(5));   // b
  auto pi = stationary_oracle(two);
  CHECK(pi[0] == Rational(5, 8));
  CHECK(pi[1] == Rational(3, 8));

  Chain<Rational> cyc;
  cyc.states.resize(3);
  cyc.rates.resize(3);
  for (int i = 0; i < 3; ++i) cyc.add_rate(i, (i + 1) % 3, 1);
  auto u = stationary_oracle(cyc);
  for (int i = 0; i < 3; ++i) CHECK(u[i] == Rational(1, 3));
}

TEST_CASE("adjoint and symmetrized chains") {
  std::mt19937 gen(7);
  auto ch = random_chain(gen, 6);
  auto adj = adjoint_chain(ch);
  auto sym = symmetrized_chain(ch);
  const auto& mu = *ch.stationary;
  // same stationary measure; adjoint reverses flows, symmetrized is reversible
  for (int x = 0; x < 6; ++x) {
    for (int y = 0; y < 6; ++y) {
      if (x == y) continue;
      CHECK(mu[x] * adj.rate(x, y) == mu[y] * ch.rate(y, x));
      CHECK(mu[x] * sym.rate(x, y) == mu[y] * sym.rate(y, x));
      CHECK(sym.rate(x, y) ==
            (mu[x] * ch.rate(x, y) + mu[y] * ch.rate(y, x)) / (2 * mu[x]));
    }
  }
  CHECK(stationary_oracle(adj) == mu);
  CHECK(stationary_oracle(sym) == mu);
}

TEST_CASE("dirichlet form and conductances") {
  std::mt19937 gen(11);
  auto ch = random_chain(gen, 5);
  const auto& mu = *ch.stationary;
  std::vector<Rational> f = {1, 0, Rational(1, 2), 2, Rational(-1, 3)};
  // D(f) equals -sum f mu L f for any f (generator identity)
  auto lf = mu_generator(ch, f);
  Rational rhs = 0;
  for (int x = 0; x < 5; ++x) rhs -= f[x] * lf[x];
  CHECK(dirichlet_form(ch, f) == rhs);
  CHECK(sym_conductance(ch, 1, 3) ==
        (mu[1] * ch.rate(1, 3) + mu[3] * ch.rate(3, 1)) / 2);
  // Dirichlet form agrees between the chain and its symmetrization
  CHECK(dirichlet_form(symmetrized_chain(ch), f) == dirichlet_form(ch, f));
}

TEST_CASE("capacity symmetries on random chains") {
  std::mt19937 gen(23);
  for (int trial = 0; trial < 20; ++trial) {
    auto ch = random_chain(gen, 4 + trial % 9);
    int n = ch.size();
    StateSet A{0}, B{1, n - 1};
    auto capAB = capacity(ch, A, B);
    CHECK(capAB == capacity(ch, B, A));
    CHECK(capAB == capacity(adjoint_chain(ch), A, B));
    // monotone under enlarging either set
    if (n >= 5) {
      StateSet A2 = A;
      A2.insert(2);
      CHECK(capacity(ch, A2, B) >= capAB);
    }
    // equilibrium potential is a probability bounded by the bracket
    auto pot = equilibrium_potential(ch, A, B);
    for (int x = 0; x < n; ++x) {
      CHECK(pot.h[x] >= 0);
      CHECK(pot.h[x] <= 1);
      if (!A.count(x) && !B.count(x)) {
        auto [lo, hi] = potential_bounds(ch, x, A, B);
        CHECK(lo <= pot.h[x]);
        CHECK(pot.h[x] <= hi);
      }
    }
  }
}

TEST_CASE("hitting time identities on random chains") {
  std::mt19937 gen(31);
  for (int trial = 0; trial < 10; ++trial) {
    auto ch = random_chain(gen, 5 + trial % 5);
    Rational mh = mean_hitting_time(ch, 0, 2);
    Rational dh = direct_hitting_time(ch, 0, StateSet{2});
    CHECK(mh == dh);
  }
  // unreachable target reports reducibility
  Chain<Rational> line;
  line.states.resize(3);
  line.rates.resize(3);
  line.add_rate(1, 0, 1);
  line.add_rate(2, 1, 1);
  line.add_rate(0, 1, 1);
  CHECK_THROWS_AS(direct_hitting_time(line, 0, StateSet{2}), SingularSystem);
}

TEST_CASE("associated flows encode the generator") {
  std::mt19937 gen(41);
  auto ch = random_chain(gen, 6);
  std::vector<Rational> f = {0, 1, Rational(1, 3), Rational(-2, 5), 2, 1};
  auto flows = associated_flows(ch, f);
  auto adj = adjoint_chain(ch);
  auto div_fwd = divergence_all(flows.forward, 6);
  auto div_bwd = divergence_all(flows.backward, 6);
  auto lf = mu_generator(ch, f);
  auto ldf = mu_generator(adj, f);
  for (int x = 0; x < 6; ++x) {
    CHECK(div_fwd[x] == ldf[x]);  // DIV Phi_f = mu L^dagger f
    CHECK(div_bwd[x] == lf[x]);   // DIV Phi*_f = mu L f
  }
  // Psi_f(x,y) = c^s(x,y) (f(y) - f(x))
  for (int x = 0; x < 6; ++x)
    for (int y = x + 1; y < 6; ++y)
      CHECK(flows.symmetric.get(x, y) ==
            sym_conductance(ch, x, y) * (f[y] - f[x]));
  // norm of Psi_f equals the Dirichlet form
  CHECK(flow_norm2(ch, flows.symmetric) == dirichlet_form(ch, f));
}

TEST_CASE("variational principles bracket the capacity") {
  std::mt19937 gen(53);
  auto ch = random_chain(gen, 7);
  StateSet A{0}, B{6};
  auto pot = equilibrium_potential(ch, A, B);
  auto potd = equilibrium_potential(adjoint_chain(ch), A, B);

  // exact extremizers reproduce the capacity
  std::vector<Rational> fex(7), gex(7);
  for (int x = 0; x < 7; ++x) {
    fex[x] = (pot.h[x] + potd.h[x]) / 2;
    gex[x] = (potd.h[x] - pot.h[x]) / (2 * pot.capacity);
  }
  auto fl_h = associated_flows(ch, pot.h);
  auto fl_hd = associated_flows(ch, potd.h);
  Flow<Rational> phi = fl_hd.forward - fl_h.backward;
  phi = phi.scaled(Rational(1, 2));
  Flow<Rational> psi = fl_hd.forward;
  psi += fl_h.backward;
  psi = psi.scaled(1 / (2 * pot.capacity));
  CHECK(dirichlet_functional(ch, fex, phi, pot.h) == pot.capacity);
  CHECK(thomson_functional(ch, gex, psi, pot.h) == pot.capacity);

  // feasible perturbations stay on the correct side
  std::uniform_int_distribution<int> num(1, 5);
  for (int trial = 0; trial < 10; ++trial) {
    auto fpert = fex;
    auto gpert = gex;
    for (int x = 1; x < 6; ++x) {
      fpert[x] += Rational(num(gen) - 3, 20);
      gpert[x] += Rational(num(gen) - 3, 20);
    }
    // both principles range over arbitrary flows on the edge set
    Flow<Rational> phip = phi, psip = psi;
    phip.add(1, 2, Rational(num(gen), 30));
    psip.add(3, 4, Rational(num(gen), 30));
    CHECK(dirichlet_functional(ch, fpert, phip, pot.h) >= pot.capacity);
    CHECK(thomson_functional(ch, gpert, psip, pot.h) <= pot.capacity);
  }
}

TEST_CASE("generic trace: 3-state hand computation") {
  // states 0,1,2; eliminate 2
  Chain<Rational> ch;
  ch.states.resize(3);
  ch.rates.resize(3);
  ch.add_rate(0, 1, 1);
  ch.add_rate(0, 2, 2);
  ch.add_rate(1, 0, 3);
  ch.add_rate(2, 0, 1);
  ch.add_rate(2, 1, 1);
  auto tr = trace_chain_generic(ch, StateSet{0, 1});
  // from 0: direct 1 plus excursion 2 * P(2 -> 1) = 2 * 1/2
  CHECK(tr.rate(0, 1) == 2);
  CHECK(tr.rate(1, 0) == 3);
}

TEST_CASE("trace of the star chain preserves hitting structure") {
  PrecisionGuard guard(256);
  ModelParams p{12, 1, 1};
  auto q = qsd_by_recurrence(p);
  auto full = build_reduced_chain<Real>(p, ReducedMode::regenerative);
  full.stationary = q.ladder_distribution();
  StateSet F{ladder_index(12, 0, 0)};
  for (long n = 0; n <= 12; ++n) F.insert(ladder_index(12, 1, n));
  auto tr = trace_chain_generic(full, F);
  // trace stationary equals the restricted-normalized measure
  auto nu = q.trace_distribution();
  REQUIRE(tr.stationary.has_value());
  for (int i = 0; i < tr.size(); ++i)
    CHECK(rel_diff((*tr.stationary)[i], nu[i]) < 1e-25);
  // capacity identity mu(F) CAP_F = CAP
  Real cap = capacity(full, StateSet{ladder_index(12, 0, 0)},
                      StateSet{ladder_index(12, 1, 6)});
  Real capF = capacity(tr, StateSet{0}, StateSet{trace_index(1, 6)});
  CHECK(rel_diff(q.trace_mass() * capF, cap) < 1e-25);
}

TEST_CASE("test objects: divergence-free flows and bracketing") {
  PrecisionGuard guard(320);
  ModelParams p{100, 1, 1};
  auto q = qsd_by_recurrence(p);
  auto tr = build_trace_chain<Real>(p);
  tr.stationary = q.trace_distribution();
  long n = 50;
  auto obj = capacity_test_objects(tr, p, n, 0.1, 0.1);
  CHECK(obj.R1 == 1);
  CHECK(obj.R2 == 10);
  CHECK(obj.h_dagger[trace_index(1, 0)] == 1);
  CHECK(rel_diff(obj.h_dagger[trace_index(1, 1)], Real(1) / 2) == 0);

  for (const Flow<Real>* fl : {&obj.phi_hat, &obj.psi_hat}) {
    Real norm = sqrt(flow_norm2(tr, *fl));
    auto div = divergence_all(*fl, tr.size());
    for (int x = 0; x < tr.size(); ++x) {
      if (x == trace_index(0, 0) || x == trace_index(1, n)) continue;
      CHECK(abs(div[x]) <= norm * 1e-10);
    }
  }

  auto pot = equilibrium_potential(tr, StateSet{trace_index(0, 0)},
                                   StateSet{trace_index(1, n)});
  Real dir = dirichlet_functional(tr, obj.f, obj.phi_hat, pot.h);
  Real tho = thomson_functional(tr, obj.g, obj.psi_hat, pot.h);
  CHECK(tho <= pot.capacity);
  CHECK(pot.capacity <= dir);

  CHECK_THROWS_AS(capacity_test_objects(tr, p, 5, 0.1, 0.1),
                  std::invalid_argument);
}
