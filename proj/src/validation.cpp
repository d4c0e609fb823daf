#include "starcp/validation.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "starcp/asymptotics.hpp"
#include "starcp/potential.hpp"
#include "starcp/qsd.hpp"
#include "starcp/sim.hpp"

namespace starcp {

namespace {

Real exact_extinction(const ModelParams& params) {
  auto chain = build_reduced_chain<Real>(params, ReducedMode::absorbing);
  const long N = params.leaves;
  return direct_hitting_time(chain, ladder_index(N, 1, N),
                             StateSet{ladder_index(N, 0, 0)});
}

// Regenerative chain with the recurrence measure attached as stationary.
std::pair<Chain<Real>, QsdSolution<Real>> regenerative_with_measure(
    const ModelParams& params) {
  auto q = qsd_by_recurrence(params);
  auto chain = build_reduced_chain<Real>(params, ReducedMode::regenerative);
  chain.stationary = q.ladder_distribution();
  return {std::move(chain), std::move(q)};
}

Chain<Real> trace_with_measure(const ModelParams& params,
                               const QsdSolution<Real>& q) {
  auto tr = build_trace_chain<Real>(params);
  tr.stationary = q.trace_distribution();
  return tr;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " FAILED[" << what << "]";
    }
  }
};

// --- criterion 1 & 2: Eyring-Kramers ratio and LDP exponent ----------------

struct EkSweep {
  // ratio exact/asymptotic per (lambda, N), plus the exact N=800 lambda=1 time
  std::map<std::pair<std::string, long>, double> ratio;
  double log_rate_800 = 0;  // (1/N) ln exact at N=800, lambda=1
};

EkSweep run_ek_sweep() {
  PrecisionGuard guard(768);
  EkSweep out;
  for (const Rational& lam : {Rational(1, 2), Rational(1), Rational(2)}) {
    for (long N : {50L, 100L, 200L, 400L, 800L}) {
      ModelParams p{N, lam, 1};
      Real exact = exact_extinction(p);
      Real asym = ek_time(p).gamma_form.value;
      out.ratio[{lam.str(), N}] = static_cast<double>(exact / asym);
      if (lam == 1 && N == 800)
        out.log_rate_800 = static_cast<double>(log(exact)) / 800.0;
    }
  }
  return out;
}

CriterionResult criterion_ek(const EkSweep& sweep) {
  Check c;
  for (const std::string& lam :
       {std::string("1/2"), std::string("1"), std::string("2")}) {
    double prev = -1;
    for (long N : {100L, 200L, 400L, 800L}) {
      double d = std::fabs(sweep.ratio.at({lam, N}) - 1);
      if (prev >= 0)
        c.require(d <= prev + 1e-12, "monotone lambda=" + lam + " N=" + std::to_string(N));
      prev = d;
    }
    double d800 = std::fabs(sweep.ratio.at({lam, 800}) - 1);
    c.detail << " lambda=" << lam << ":|r-1|@800=" << fmt(d800);
    c.require(d800 < 0.05, "threshold lambda=" + lam);
  }
  return {1, "eyring-kramers convergence", c.ok, c.detail.str(), 0};
}

CriterionResult criterion_ldp(const EkSweep& sweep) {
  Check c;
  double target = 2 * std::log(2.0) - std::log(3.0);
  double err = std::fabs(sweep.log_rate_800 - target);
  c.detail << " (1/N)ln(tau)=" << fmt(sweep.log_rate_800)
           << " ln(4/3)=" << fmt(target) << " err=" << fmt(err);
  c.require(err < 0.02, "ldp");
  return {2, "ldp exponent", c.ok, c.detail.str(), 0};
}

// --- criterion 3: small-N exactness -----------------------------------------

CriterionResult criterion_small_n() {
  Check c;
  const Rational vals[] = {Rational(1, 2), Rational(1), Rational(2)};
  for (long N = 1; N <= 8; ++N) {
    for (const auto& lam : vals) {
      for (const auto& alpha : vals) {
        ModelParams p{N, lam, alpha};
        auto q = qsd_recurrence_fixed<Rational>(p);
        auto chain = build_reduced_chain<Rational>(p, ReducedMode::regenerative);
        auto oracle = stationary_oracle(chain);
        auto nu = q.ladder_distribution();
        bool eq = nu.size() == oracle.size();
        for (std::size_t i = 0; eq && i < nu.size(); ++i)
          eq = nu[i] == oracle[i];
        c.require(eq, "qsd-vs-oracle N=" + std::to_string(N) + " lambda=" +
                          lam.str() + " alpha=" + alpha.str());
      }
    }
  }
  // hand-verified fixture at N=1, lambda=alpha=1
  {
    auto q = qsd_recurrence_fixed<Rational>(ModelParams{1, 1, 1});
    c.require(q.u[0] == 2 && q.u[1] == Rational(1, 2) &&
                  q.v[0] == Rational(3, 2) && q.v[1] == 1,
              "fixture (2,1/2,3/2,1)");
    auto abs1 = build_reduced_chain<Rational>(ModelParams{1, 1, 1},
                                              ReducedMode::absorbing);
    c.require(direct_hitting_time(abs1, ladder_index(1, 1, 1),
                                  StateSet{ladder_index(1, 0, 0)}) == 2,
              "fixture E tau = 2");
  }
  // hitting-time identity, N <= 50
  {
    PrecisionGuard guard(512);
    for (long N : {10L, 30L, 50L}) {
      ModelParams p{N, 1, 1};
      auto [chain, q] = regenerative_with_measure(p);
      int x = ladder_index(N, 1, N), y = ladder_index(N, 0, 0);
      Real mh = mean_hitting_time(chain, x, y);
      Real dh = direct_hitting_time(chain, x, StateSet{y});
      double rd = rel_diff(mh, dh);
      c.detail << " N=" << N << ":rel=" << fmt(rd);
      c.require(rd <= 1e-12, "hitting-identity N=" + std::to_string(N));
    }
  }
  return {3, "small-N exactness", c.ok, c.detail.str(), 0};
}

// --- criterion 4: regime asymptotics ----------------------------------------

CriterionResult criterion_regimes() {
  PrecisionGuard guard(512);
  Check c;
  const double eps = 0.1;
  std::map<long, double> sup_high, sup_low;
  for (long N : {200L, 400L, 800L}) {
    ModelParams p{N, 1, 1};
    auto q = qsd_by_recurrence(p);
    double center = static_cast<double>(N) / 3.0;
    long high_lo = static_cast<long>(std::ceil(center + eps * N));
    long low_hi = static_cast<long>(std::floor(center - eps * N));
    double sh = 0, sl = 0;
    for (long n = high_lo; n <= N; ++n)
      sh = (std::max)(sh, std::fabs(static_cast<double>(
                              q.v[n] / v_high(p, n).value - 1)));
    for (long n = 0; n <= low_hi; ++n)
      sl = (std::max)(sl, std::fabs(static_cast<double>(
                              q.v[n] / v_low(p, n).value - 1)));
    sup_high[N] = sh;
    sup_low[N] = sl;
  }
  double c_high = sup_high[200] * 200, c_low = sup_low[200] * 200;
  c.detail << " C_high=" << fmt(c_high) << " C_low=" << fmt(c_low);
  for (long N : {400L, 800L}) {
    c.detail << " high@" << N << "=" << fmt(sup_high[N]) << " low@" << N
             << "=" << fmt(sup_low[N]);
    c.require(sup_high[N] <= 3 * c_high / N, "high N=" + std::to_string(N));
    c.require(sup_low[N] <= 3 * c_low / N, "low N=" + std::to_string(N));
  }
  return {4, "regime asymptotics", c.ok, c.detail.str(), 0};
}

// --- criterion 5: capacity estimate ------------------------------------------

CriterionResult criterion_capacity(const QsdSolution<Real>& q400,
                                   const Chain<Real>& reg400) {
  PrecisionGuard guard(512);
  Check c;
  ModelParams p = q400.params;
  const long N = p.leaves;
  double w = w_threshold(p.lambda).w;
  long targets[3] = {static_cast<long>(0.3 * N), static_cast<long>(0.5 * N),
                     static_cast<long>(0.7 * w * N)};
  Real est = capacity_estimate(p).value;
  double ratios[3];
  for (int i = 0; i < 3; ++i) {
    Real cap = capacity(reg400, StateSet{ladder_index(N, 0, 0)},
                        StateSet{ladder_index(N, 1, targets[i])});
    ratios[i] = static_cast<double>(cap / est);
    c.detail << " n=" << targets[i] << ":ratio=" << fmt(ratios[i]);
    c.require(ratios[i] >= 0.9 && ratios[i] <= 1.1,
              "ratio n=" + std::to_string(targets[i]));
  }
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      c.require(std::fabs(ratios[i] / ratios[j] - 1) <= 0.05, "pairwise");
  return {5, "capacity estimate", c.ok, c.detail.str(), 0};
}

// --- criterion 6: variational bracketing ------------------------------------

struct BracketOut {
  double dir_ratio = 0, tho_ratio = 0;
  bool bracket = false;
};

BracketOut run_bracket(const ModelParams& p, const Chain<Real>& trace, long n,
                       double q_exp, double r_frac) {
  auto pot = equilibrium_potential(trace, StateSet{trace_index(0, 0)},
                                   StateSet{trace_index(1, n)});
  auto obj = capacity_test_objects(trace, p, n, q_exp, r_frac);
  Real dir = dirichlet_functional(trace, obj.f, obj.phi_hat, pot.h);
  Real tho = thomson_functional(trace, obj.g, obj.psi_hat, pot.h);
  BracketOut out;
  out.dir_ratio = static_cast<double>(dir / pot.capacity);
  out.tho_ratio = static_cast<double>(tho / pot.capacity);
  out.bracket = tho <= pot.capacity && pot.capacity <= dir;
  return out;
}

CriterionResult criterion_bracketing(const QsdSolution<Real>* q400) {
  PrecisionGuard guard(512);
  Check c;
  // exact extremizers reproduce the capacity at N = 50
  {
    ModelParams p{50, 1, 1};
    auto q = qsd_by_recurrence(p);
    auto tr = trace_with_measure(p, q);
    long n = 25;
    StateSet A{trace_index(0, 0)}, B{trace_index(1, n)};
    auto pot = equilibrium_potential(tr, A, B);
    auto potd = equilibrium_potential(adjoint_chain(tr), A, B);
    std::vector<Real> fex(tr.size()), gex(tr.size());
    for (int x = 0; x < tr.size(); ++x) {
      fex[x] = (pot.h[x] + potd.h[x]) / 2;
      gex[x] = (potd.h[x] - pot.h[x]) / (2 * pot.capacity);
    }
    auto fh = associated_flows(tr, pot.h);
    auto fhd = associated_flows(tr, potd.h);
    Flow<Real> phiex = fhd.forward - fh.backward;
    phiex = phiex.scaled(Real(1) / 2);
    Flow<Real> psiex = fhd.forward;
    psiex += fh.backward;
    psiex = psiex.scaled(Real(1) / (2 * pot.capacity));
    double dr = rel_diff(dirichlet_functional(tr, fex, phiex, pot.h), pot.capacity);
    double tr_ = rel_diff(thomson_functional(tr, gex, psiex, pot.h), pot.capacity);
    c.detail << " extremizers:dir=" << fmt(dr) << " tho=" << fmt(tr_);
    c.require(dr <= 1e-10 && tr_ <= 1e-10, "exact extremizers");

    auto br = run_bracket(p, tr, n, 0.35, 0.1);
    c.require(br.bracket, "bracket N=50");
  }
  {
    ModelParams p{100, Rational(1, 2), 1};
    auto q = qsd_by_recurrence(p);
    auto tr = trace_with_measure(p, q);
    auto br = run_bracket(p, tr, 40, 0.35, 0.1);
    c.require(br.bracket, "bracket N=100 lambda=1/2");
  }
  if (q400) {
    ModelParams p = q400->params;
    auto tr = trace_with_measure(p, *q400);
    auto br = run_bracket(p, tr, 200, 0.35, 0.1);
    c.detail << " N=400:dir/cap=" << fmt(br.dir_ratio)
             << " tho/cap=" << fmt(br.tho_ratio);
    c.require(br.bracket, "bracket N=400");
    c.require(br.dir_ratio <= 1.1 && br.tho_ratio >= 0.9, "10% at N=400");
  }
  return {6, "variational bracketing", c.ok, c.detail.str(), 0};
}

// --- criterion 7: trace consistency ------------------------------------------

CriterionResult criterion_trace() {
  Check c;
  for (long N = 2; N <= 6; ++N) {
    for (const Rational& lam : {Rational(1, 2), Rational(1), Rational(2)}) {
      ModelParams p{N, lam, 1};
      auto full = with_stationary(
          build_reduced_chain<Rational>(p, ReducedMode::regenerative));
      StateSet F{ladder_index(N, 0, 0)};
      for (long n = 0; n <= N; ++n) F.insert(ladder_index(N, 1, n));
      auto gen = trace_chain_generic(full, F);
      auto cf = build_trace_chain<Rational>(p);
      bool eq = true;
      for (int x = 0; eq && x < cf.size(); ++x)
        for (int y = 0; eq && y < cf.size(); ++y)
          eq = gen.rate(x, y) == cf.rate(x, y);
      c.require(eq, "trace rates N=" + std::to_string(N) + " lambda=" + lam.str());
    }
  }
  {
    PrecisionGuard guard(512);
    ModelParams p{50, 1, 1};
    auto [reg, q] = regenerative_with_measure(p);
    auto tr = trace_with_measure(p, q);
    long n = 25;
    Real cap = capacity(reg, StateSet{ladder_index(50, 0, 0)},
                        StateSet{ladder_index(50, 1, n)});
    Real capF = capacity(tr, StateSet{trace_index(0, 0)},
                         StateSet{trace_index(1, n)});
    double rd = rel_diff(q.trace_mass() * capF, cap);
    c.detail << " mu(F)CAP_F vs CAP rel=" << fmt(rd);
    c.require(rd <= 1e-10, "capacity-trace identity");
  }
  return {7, "trace consistency", c.ok, c.detail.str(), 0};
}

// --- criterion 8: mass lemmas -------------------------------------------------

CriterionResult criterion_mass() {
  PrecisionGuard guard(512);
  Check c;
  double prev_z = -1, prev_m = -1;
  for (long N : {200L, 400L, 800L}) {
    ModelParams p{N, 1, 1};
    auto q = qsd_by_recurrence(p);
    long m = N / 2;  // floor(lambda N/(1+lambda)), lambda = 1
    double z_err = std::fabs(static_cast<double>(q.Z / total_mass(p).value) - 1);
    double m_err =
        std::fabs(static_cast<double>(q.v[m] / metastable_mass(p).value) - 1);
    c.detail << " N=" << N << ":Z_err=" << fmt(z_err) << ",vm_err=" << fmt(m_err);
    if (prev_z >= 0) {
      c.require(z_err <= prev_z, "Z monotone N=" + std::to_string(N));
      c.require(m_err <= prev_m, "v_m monotone N=" + std::to_string(N));
    }
    if (N == 800) c.require(z_err < 0.1 && m_err < 0.1, "10% at N=800");
    prev_z = z_err;
    prev_m = m_err;
  }
  return {8, "mass lemmas", c.ok, c.detail.str(), 0};
}

// --- criterion 9: Monte Carlo -------------------------------------------------

CriterionResult criterion_monte_carlo(std::uint64_t seed) {
  Check c;
  {
    ModelParams p{10, Rational(3, 4), 1};
    SimConfig cfg;
    cfg.params = p;
    cfg.seed = seed;
    cfg.samples = 100000;
    auto est = estimate_mean(cfg);
    PrecisionGuard guard(256);
    auto chain = build_reduced_chain<Real>(p, ReducedMode::absorbing);
    double exact = static_cast<double>(direct_hitting_time(
        chain, ladder_index(10, 1, 10), StateSet{ladder_index(10, 0, 0)}));
    double dev = std::fabs(est.mean - exact) / est.std_error;
    c.detail << " mean=" << fmt(est.mean) << " exact=" << fmt(exact)
             << " dev=" << fmt(dev) << "SE";
    c.require(dev <= 3, "3 SE");
  }
  // lumping: full vs reduced extinction times (KS, 5 seeds, allow 1 failure)
  for (long N : {2L, 3L}) {
    for (const Rational& lam : {Rational(1, 2), Rational(1)}) {
      int failures = 0;
      for (int s = 0; s < 5; ++s) {
        SimConfig cfg;
        cfg.params = ModelParams{N, lam, 1};
        cfg.seed = seed + 17 * s + 1;
        cfg.samples = 3000;
        auto red = simulate_reduced(cfg);
        cfg.seed = seed + 17 * s + 9;
        auto ful = simulate_full(cfg);
        std::vector<double> a, b;
        for (const auto& x : red) a.push_back(x.time);
        for (const auto& x : ful) b.push_back(x.time);
        if (ks_two_sample(a, b).p_value <= 0.01) ++failures;
      }
      c.detail << " ks(N=" << N << ",l=" << lam.str() << "):fail=" << failures;
      c.require(failures <= 1, "ks N=" + std::to_string(N));
    }
  }
  return {9, "monte carlo cross-check", c.ok, c.detail.str(), 0};
}

// --- criterion 10: Laplace expansion -----------------------------------------

CriterionResult criterion_laplace() {
  PrecisionGuard guard(320);
  Check c;
  ModelParams p{1, 1, 1};
  auto err = [&](long order) {
    return static_cast<double>(abs(i_n_integral(p, order) -
                                   taylor_expansion_i(p, order, 3)) /
                               i_n_integral(p, order));
  };
  double e200 = err(200), e400 = err(400);
  double factor = e200 / e400;
  c.detail << " err200=" << fmt(e200) << " err400=" << fmt(e400)
           << " factor=" << fmt(factor);
  c.require(factor >= 6, "N'^-3 decay");
  return {10, "laplace expansion", c.ok, c.detail.str(), 0};
}

// --- criterion 11: martingale bound -------------------------------------------

// Hitting time of level m+1 from above, on the absorbing ladder restricted to
// n >= m+1 (the chain cannot leave that region without entering the target).
CriterionResult criterion_martingale(bool full) {
  PrecisionGuard guard(512);
  Check c;
  std::vector<long> sizes{50};
  if (full) sizes.push_back(200);
  for (long N : sizes) {
    ModelParams p{N, 1, 1};
    auto chain = build_reduced_chain<Real>(p, ReducedMode::absorbing);
    long m = N / 2;
    StateSet B{ladder_index(N, 0, m + 1), ladder_index(N, 1, m + 1)};
    // restrict: solve on states with n >= m+2 plus the target level
    Chain<Real> sub;
    std::vector<int> map_of(chain.size(), -1);
    for (int hub = 0; hub <= 1; ++hub)
      for (long n = m + 1; n <= N; ++n) {
        map_of[ladder_index(N, hub, n)] = static_cast<int>(sub.states.size());
        sub.states.push_back(State{hub, n});
      }
    sub.rates.resize(sub.states.size());
    for (int x = 0; x < chain.size(); ++x) {
      if (map_of[x] < 0 || B.count(x)) continue;
      for (const auto& [y, r] : chain.rates[x]) {
        if (map_of[y] >= 0) sub.add_rate(map_of[x], map_of[y], r);
      }
    }
    StateSet subB{map_of[ladder_index(N, 0, m + 1)],
                  map_of[ladder_index(N, 1, m + 1)]};
    auto times = direct_hitting_times(sub, subB);
    Real bound = N - m - 1;
    Real worst = 0;
    for (long n = m + 2; n <= N; ++n) {
      Real t = times[map_of[ladder_index(N, 1, n)]];
      if (t > worst) worst = t;
      c.require(t <= bound, "bound N=" + std::to_string(N) + " n=" + std::to_string(n));
    }
    c.detail << " N=" << N << ":max_E_tau=" << fmt(static_cast<double>(worst))
             << " bound=" << N - m - 1;
  }
  return {11, "martingale bound", c.ok, c.detail.str(), 0};
}

using CriterionFn = std::function<CriterionResult()>;

CriterionResult timed(const CriterionFn& fn, int id, const std::string& name) {
  auto t0 = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    r = fn();
  } catch (const std::exception& e) {
    r = {id, name, false, std::string(" exception: ") + e.what(), 0};
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                  .count();
  return r;
}

}  // namespace

std::vector<CriterionResult> run_validation(const ValidationOptions& opts,
                                            std::ostream& os) {
  std::vector<CriterionResult> results;
  auto report = [&](CriterionResult r) {
    os << (r.passed ? "PASS" : "FAIL") << " [" << r.id << "] " << r.name << " —"
       << r.detail << " (" << fmt(r.seconds) << "s)\n";
    os.flush();
    results.push_back(std::move(r));
  };

  if (opts.full) {
    EkSweep sweep;
    auto t0 = std::chrono::steady_clock::now();
    bool sweep_ok = true;
    std::string sweep_err;
    try {
      sweep = run_ek_sweep();
    } catch (const std::exception& e) {
      sweep_ok = false;
      sweep_err = e.what();
    }
    double sweep_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count() / 2;
    if (sweep_ok) {
      auto r1 = criterion_ek(sweep);
      r1.seconds = sweep_s;
      report(std::move(r1));
      auto r2 = criterion_ldp(sweep);
      r2.seconds = sweep_s;
      report(std::move(r2));
    } else {
      report({1, "eyring-kramers convergence", false, " exception: " + sweep_err, sweep_s});
      report({2, "ldp exponent", false, " exception: " + sweep_err, sweep_s});
    }
  }

  report(timed(criterion_small_n, 3, "small-N exactness"));

  std::optional<QsdSolution<Real>> q400;
  std::optional<Chain<Real>> reg400;
  if (opts.full) {
    report(timed(criterion_regimes, 4, "regime asymptotics"));
    try {
      PrecisionGuard guard(512);
      auto [chain, q] = regenerative_with_measure(ModelParams{400, 1, 1});
      q400 = std::move(q);
      reg400 = std::move(chain);
    } catch (const std::exception&) {
    }
    report(timed(
        [&] {
          if (!q400) throw std::runtime_error("N=400 measure unavailable");
          PrecisionGuard guard(512);
          return criterion_capacity(*q400, *reg400);
        },
        5, "capacity estimate"));
  }

  const QsdSolution<Real>* q400_ptr = q400 ? &*q400 : nullptr;
  report(timed([&] { return criterion_bracketing(q400_ptr); },
               6, "variational bracketing"));
  report(timed(criterion_trace, 7, "trace consistency"));
  if (opts.full) report(timed(criterion_mass, 8, "mass lemmas"));
  if (opts.full)
    report(timed([&] { return criterion_monte_carlo(opts.seed); }, 9,
                 "monte carlo cross-check"));
  report(timed(criterion_laplace, 10, "laplace expansion"));
  report(timed([&] { return criterion_martingale(opts.full); }, 11,
               "martingale bound"));
  return results;
}

bool all_passed(const std::vector<CriterionResult>& results) {
  for (const auto& r : results)
    if (!r.passed) return false;
  return true;
}

}  // namespace starcp
