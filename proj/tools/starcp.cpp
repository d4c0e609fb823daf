#include <atomic>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "starcp/asymptotics.hpp"
#include "starcp/potential.hpp"
#include "starcp/qsd.hpp"
#include "starcp/sim.hpp"
#include "starcp/validation.hpp"

using namespace starcp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitUsage = 2;
constexpr int kExitPrecision = 3;
constexpr int kExitInfeasible = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Accepts "3", "1/2", or "0.75" (decimals parsed exactly).
Rational parse_rational(const std::string& s) {
  try {
    auto slash = s.find('/');
    if (slash != std::string::npos) {
      Integer num(s.substr(0, slash)), den(s.substr(slash + 1));
      return Rational(num) / Rational(den);
    }
    auto dot = s.find('.');
    if (dot != std::string::npos) {
      std::string digits = s.substr(0, dot) + s.substr(dot + 1);
      Integer num(digits);
      Rational den = pow_int(Rational(10), static_cast<long>(s.size() - dot - 1));
      return Rational(num) / den;
    }
    return Rational(Integer(s));
  } catch (const std::exception&) {
    throw UsageError("cannot parse '" + s + "' as a rational");
  }
}

State parse_state(const std::string& s, long N) {
  auto comma = s.find(',');
  if (comma == std::string::npos) throw UsageError("state must be 'hub,count'");
  State st;
  try {
    st.hub = std::stoi(s.substr(0, comma));
    st.n = std::stol(s.substr(comma + 1));
  } catch (const std::exception&) {
    throw UsageError("state must be 'hub,count'");
  }
  if (st.hub < 0 || st.hub > 1 || st.n < 0 || st.n > N)
    throw UsageError("state out of range");
  return st;
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw UsageError("cannot open output file " + path);
  return file;
}

// Feasibility guard: refuse simulation when the asymptotic mean extinction
// time implies more than 1e7 expected events per sample.
void guard_simulation(const ModelParams& p) {
  PrecisionGuard guard(128);
  double log_tau = ek_time(p).gamma_form.log_value;
  double lam = static_cast<double>(Rational(p.lambda));
  double log_events = log_tau + std::log(p.leaves * (1 + 2 * lam));
  if (log_events > std::log(1e7))
    throw InfeasibleError(
        "expected event count exceeds 1e7 per sample; use --method exact");
}

int cmd_qsd(long n, const std::string& lambda, const std::string& alpha,
            int precision_bits, const std::string& format,
            const std::string& out_path) {
  ModelParams p{n, parse_rational(lambda), parse_rational(alpha)};
  PrecisionPolicy policy;
  policy.base_bits = precision_bits;
  policy.max_bits = (std::max)(precision_bits, 1 << 16);
  auto q = qsd_by_recurrence(p, policy);
  std::ofstream file;
  auto& os = open_out(file, out_path);
  if (format == "csv") {
    emit_qsd_csv(q, os);
  } else {
    nlohmann::ordered_json j;
    j["N"] = p.leaves;
    j["lambda"] = p.lambda.str();
    j["alpha"] = p.alpha.str();
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (long i = 0; i <= p.leaves; ++i)
      rows.push_back({{"n", i},
                      {"u", to_decimal(q.u[i])},
                      {"v", to_decimal(q.v[i])}});
    j["measure"] = rows;
    j["Z"] = to_decimal(q.Z);
    os << j.dump(2) << '\n';
  }
  return kExitOk;
}

int cmd_extinction(long n, const std::string& lambda, const std::string& from,
                   const std::string& method, long samples,
                   std::uint64_t seed, long max_events) {
  ModelParams p{n, parse_rational(lambda), 1};
  State start = from.empty() ? State{1, n} : parse_state(from, n);
  if (method == "formula") {
    PrecisionGuard guard(256);
    auto t = ek_time(p);
    std::cout << "method=formula N=" << n << " lambda=" << lambda << "\n"
              << "ek_time=" << to_decimal(t.gamma_form.value)
              << " log10=" << log10_approx(t.gamma_form.value) << "\n";
    return kExitOk;
  }
  if (method == "exact") {
    PrecisionGuard guard(768);
    auto chain = build_reduced_chain<Real>(p, ReducedMode::absorbing);
    Real t = direct_hitting_time(chain, ladder_index(n, start.hub, start.n),
                                 StateSet{ladder_index(n, 0, 0)});
    std::cout << "method=exact N=" << n << " lambda=" << lambda
              << " from=" << to_string(start) << "\n"
              << "mean_extinction_time=" << to_decimal(t) << "\n";
    return kExitOk;
  }
  if (method == "simulate") {
    guard_simulation(p);
    SimConfig cfg;
    cfg.params = p;
    cfg.initial = start;
    cfg.seed = seed;
    cfg.samples = samples;
    cfg.max_events = max_events;
    auto est = estimate_mean(cfg);
    emit_summary_json(est, std::cout);
    return kExitOk;
  }
  throw UsageError("unknown method '" + method + "'");
}

int cmd_capacity(long n, const std::string& lambda, const std::string& alpha,
                 long target, const std::string& method, double q_exp,
                 double eps, double r_frac) {
  ModelParams p{n, parse_rational(lambda), parse_rational(alpha)};
  if (target < 0 || target > n) throw UsageError("target must lie in [0, N]");
  if (method == "asymptotic") {
    PrecisionGuard guard(256);
    auto est = capacity_estimate(p);
    std::cout << "capacity_estimate=" << to_decimal(est.value)
              << " log10=" << log10_approx(est.value) << "\n";
    return kExitOk;
  }
  PrecisionGuard guard(512);
  if (method == "exact") {
    auto q = qsd_by_recurrence(p);
    auto chain = build_reduced_chain<Real>(p, ReducedMode::regenerative);
    chain.stationary = q.ladder_distribution();
    StateSet A{ladder_index(n, 0, 0)}, B{ladder_index(n, 1, target)};
    Real cap = capacity(chain, A, B);
    Real cap_adj = capacity(adjoint_chain(chain), A, B);
    std::cout << "capacity=" << to_decimal(cap) << "\n"
              << "capacity_adjoint=" << to_decimal(cap_adj) << "\n";
    return kExitOk;
  }
  if (method == "dirichlet" || method == "thomson") {
    double w = w_threshold(p.lambda).w;
    if (target < eps * n || target > w * n)
      throw InfeasibleError("target outside the admissible window [" +
                            std::to_string(static_cast<long>(eps * n)) + ", " +
                            std::to_string(static_cast<long>(w * n)) + "]");
    auto q = qsd_by_recurrence(p);
    auto tr = build_trace_chain<Real>(p);
    tr.stationary = q.trace_distribution();
    if (r_frac <= 0) {
      double lam = static_cast<double>(Rational(p.lambda));
      r_frac = 0.9 * (std::min)(eps, lam / (1 + 2 * lam));
    }
    auto obj = capacity_test_objects(tr, p, target, q_exp, r_frac);
    auto pot = equilibrium_potential(tr, StateSet{trace_index(0, 0)},
                                     StateSet{trace_index(1, target)});
    Real val = method == "dirichlet"
                   ? dirichlet_functional(tr, obj.f, obj.phi_hat, pot.h)
                   : thomson_functional(tr, obj.g, obj.psi_hat, pot.h);
    // report the trace-capacity functional rescaled to the full chain
    Real muF = q.trace_mass();
    std::cout << method << "_functional=" << to_decimal(muF * val) << "\n"
              << "exact_capacity=" << to_decimal(muF * pot.capacity) << "\n";
    return kExitOk;
  }
  throw UsageError("unknown method '" + method + "'");
}

struct StudyRow {
  Rational lambda;
  long N = 0;
  std::string exact_time, ek, cap_exact, cap_asym;
  double ratio = 0, cap_ratio = 0;
  long runtime_ms = 0;
  std::string error;
};

StudyRow study_row(const Rational& lam, long N) {
  StudyRow row;
  row.lambda = lam;
  row.N = N;
  auto t0 = std::chrono::steady_clock::now();
  try {
    PrecisionGuard guard(768);
    ModelParams p{N, lam, 1};
    auto chain = build_reduced_chain<Real>(p, ReducedMode::absorbing);
    Real exact = direct_hitting_time(chain, ladder_index(N, 1, N),
                                     StateSet{ladder_index(N, 0, 0)});
    Real asym = ek_time(p).gamma_form.value;
    row.exact_time = to_decimal(exact);
    row.ek = to_decimal(asym);
    row.ratio = static_cast<double>(exact / asym);

    auto q = qsd_by_recurrence(p);
    auto reg = build_reduced_chain<Real>(p, ReducedMode::regenerative);
    reg.stationary = q.ladder_distribution();
    double w = w_threshold(lam).w;
    long target = (std::max)(1L, static_cast<long>((0.1 + w) / 2 * N));
    Real cap = capacity(reg, StateSet{ladder_index(N, 0, 0)},
                        StateSet{ladder_index(N, 1, target)});
    Real cap_est = capacity_estimate(p).value;
    row.cap_exact = to_decimal(cap);
    row.cap_asym = to_decimal(cap_est);
    row.cap_ratio = static_cast<double>(cap / cap_est);
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  row.runtime_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  return row;
}

int cmd_study(const std::vector<std::string>& lambda_list,
              const std::vector<long>& n_list, const std::string& out_path,
              int jobs) {
  if (lambda_list.empty() || n_list.empty())
    throw UsageError("lambda-list and n-list must be nonempty");
  std::vector<std::pair<Rational, long>> grid;
  for (const auto& ls : lambda_list)
    for (long N : n_list) grid.emplace_back(parse_rational(ls), N);
  std::sort(grid.begin(), grid.end());

  std::vector<StudyRow> rows(grid.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= grid.size()) return;
      rows[i] = study_row(grid[i].first, grid[i].second);
    }
  };
  jobs = (std::max)(1, jobs);
  std::vector<std::thread> pool;
  for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::ofstream file;
  auto& os = open_out(file, out_path);
  os << "lambda,N,exact_time,ek_time,ratio,cap_exact,cap_asym,cap_ratio,"
        "runtime_ms,error\n";
  for (const auto& r : rows) {
    os << r.lambda.str() << ',' << r.N << ',' << r.exact_time << ',' << r.ek
       << ',' << r.ratio << ',' << r.cap_exact << ',' << r.cap_asym << ','
       << r.cap_ratio << ',' << r.runtime_ms << ',' << r.error << '\n';
  }
  return kExitOk;
}

int cmd_validate(const std::string& suite, std::uint64_t seed) {
  ValidationOptions opts;
  opts.full = suite == "full";
  opts.seed = seed;
  auto results = run_validation(opts, std::cout);
  return all_passed(results) ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact and asymptotic analysis of the contact process on stars"};
  app.require_subcommand(1);

  long n = 0, target = 0, samples = 10000, max_events = 1000000000L;
  std::string lambda = "1", alpha = "1", format = "csv", out_path, from_state;
  std::string method = "exact", suite = "quick";
  int precision_bits = 256, jobs = 1;
  std::uint64_t seed = 20240817;
  double q_exp = 0.35, eps = 0.1, r_frac = 0;
  std::vector<std::string> lambda_list{"1/2", "1", "2"};
  std::vector<long> n_list{50, 100, 200, 400, 800};

  auto* qsd = app.add_subcommand("qsd", "quasi-stationary measure table");
  qsd->add_option("--n", n, "number of leaves N")->required();
  qsd->add_option("--lambda", lambda, "infection rate");
  qsd->add_option("--alpha", alpha, "regeneration rate");
  qsd->add_option("--precision-bits", precision_bits, "starting precision");
  qsd->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));
  qsd->add_option("--out", out_path, "output path (default stdout)");

  auto* ext = app.add_subcommand("extinction", "mean extinction time");
  ext->add_option("--n", n, "number of leaves N")->required();
  ext->add_option("--lambda", lambda, "infection rate");
  ext->add_option("--from", from_state, "start state 'hub,count'");
  ext->add_option("--method", method)
      ->check(CLI::IsMember({"exact", "formula", "simulate"}));
  ext->add_option("--samples", samples, "simulation sample count");
  ext->add_option("--seed", seed, "simulation seed");
  ext->add_option("--max-events", max_events, "per-sample event cap");

  auto* cap = app.add_subcommand("capacity", "capacity between (0,0) and (1,target)");
  cap->add_option("--n", n, "number of leaves N")->required();
  cap->add_option("--lambda", lambda, "infection rate");
  cap->add_option("--alpha", alpha, "regeneration rate");
  cap->add_option("--target", target, "target level n of (1,n)")->required();
  cap->add_option("--method", method)
      ->check(CLI::IsMember({"exact", "asymptotic", "dirichlet", "thomson"}));
  cap->add_option("--q", q_exp, "geometric-cutoff exponent R1 = N^q");
  cap->add_option("--eps", eps, "window lower fraction");
  cap->add_option("--r", r_frac, "spread fraction R2 = rN (0: auto)");

  auto* study = app.add_subcommand("study", "convergence study table");
  study->add_option("--lambda-list", lambda_list, "comma-separated rates")
      ->delimiter(',');
  study->add_option("--n-list", n_list, "comma-separated leaf counts")
      ->delimiter(',');
  study->add_option("--out", out_path, "CSV output path (default stdout)");
  study->add_option("--jobs", jobs, "worker threads");

  auto* val = app.add_subcommand("validate", "invariant suites");
  val->add_option("--suite", suite, "quick or full")
      ->check(CLI::IsMember({"quick", "full"}));
  val->add_option("--seed", seed, "simulation seed for the full suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (qsd->parsed())
      return cmd_qsd(n, lambda, alpha, precision_bits, format, out_path);
    if (ext->parsed())
      return cmd_extinction(n, lambda, from_state, method, samples, seed,
                            max_events);
    if (cap->parsed())
      return cmd_capacity(n, lambda, alpha, target, method, q_exp, eps, r_frac);
    if (study->parsed()) return cmd_study(lambda_list, n_list, out_path, jobs);
    if (val->parsed()) return cmd_validate(suite, seed);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const PrecisionExhausted& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPrecision;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitUsage;
}
