#include "starcp/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace starcp {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

SplitMix64::SplitMix64(std::uint64_t seed, std::uint64_t stream)
    : state(mix64(seed) ^ mix64(stream * 0xda942042e4dd58b5ULL + 1)) {}

std::uint64_t SplitMix64::next() {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() {
  // 53-bit mantissa, shifted off zero
  return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
}

namespace {

struct EventChoice {
  double total;
  int index;  // categorical pick among the supplied weights
};

// Inverse-transform pick over up to four competing exponential clocks.
int pick(SplitMix64& rng, const double* w, int k, double total) {
  double u = rng.uniform() * total;
  for (int i = 0; i < k - 1; ++i) {
    if (u < w[i]) return i;
    u -= w[i];
  }
  return k - 1;
}

ExtinctionSample run_reduced(const SimConfig& config, std::uint64_t sample_idx) {
  const long N = config.params.leaves;
  const double lam = static_cast<double>(Rational(config.params.lambda));
  SplitMix64 rng(config.seed, sample_idx);
  State s = config.start_state();
  ExtinctionSample out;
  while (!(s.hub == 0 && s.n == 0)) {
    if (out.events >= config.max_events) {
      out.truncated = true;
      return out;
    }
    double w[3];
    int k = 0;
    // order: leaf infection, leaf recovery, hub transition
    if (s.hub == 1) {
      w[0] = lam * static_cast<double>(N - s.n);
      w[1] = static_cast<double>(s.n);
      w[2] = 1.0;
      k = 3;
    } else {
      w[0] = lam * static_cast<double>(s.n);
      w[1] = static_cast<double>(s.n);
      w[2] = 0.0;
      k = 2;
    }
    double total = w[0] + w[1] + w[2];
    out.time += -std::log(rng.uniform()) / total;
    ++out.events;
    int e = pick(rng, w, k, total);
    if (s.hub == 1) {
      if (e == 0)
        ++s.n;
      else if (e == 1)
        --s.n;
      else
        s.hub = 0;
    } else {
      if (e == 0)
        s.hub = 1;
      else
        --s.n;
    }
  }
  return out;
}

ExtinctionSample run_full(const SimConfig& config, std::uint64_t sample_idx) {
  const long N = config.params.leaves;
  const double lam = static_cast<double>(Rational(config.params.lambda));
  SplitMix64 rng(config.seed, sample_idx);
  State s0 = config.start_state();

  // leaves[0..infected-1] are infected; swapping keeps every event O(1)
  std::vector<long> leaves(N);
  std::iota(leaves.begin(), leaves.end(), 0L);
  long infected = s0.n;
  int hub = s0.hub;

  ExtinctionSample out;
  while (hub != 0 || infected != 0) {
    if (out.events >= config.max_events) {
      out.truncated = true;
      return out;
    }
    double w[4];
    // order: hub->leaf infection, leaf recovery, hub recovery, leaf->hub
    w[0] = hub == 1 ? lam * static_cast<double>(N - infected) : 0.0;
    w[1] = static_cast<double>(infected);
    w[2] = hub == 1 ? 1.0 : 0.0;
    w[3] = hub == 0 ? lam * static_cast<double>(infected) : 0.0;
    double total = w[0] + w[1] + w[2] + w[3];
    out.time += -std::log(rng.uniform()) / total;
    ++out.events;
    switch (pick(rng, w, 4, total)) {
      case 0: {
        long j = infected +
                 static_cast<long>(rng.uniform() * static_cast<double>(N - infected));
        j = (std::min)(j, N - 1);
        std::swap(leaves[infected], leaves[j]);
        ++infected;
        break;
      }
      case 1: {
        long j = static_cast<long>(rng.uniform() * static_cast<double>(infected));
        j = (std::min)(j, infected - 1);
        std::swap(leaves[j], leaves[infected - 1]);
        --infected;
        break;
      }
      case 2:
        hub = 0;
        break;
      default:
        hub = 1;
        break;
    }
  }
  return out;
}

}  // namespace

std::vector<ExtinctionSample> simulate_reduced(const SimConfig& config) {
  config.validate();
  std::vector<ExtinctionSample> out(config.samples);
  for (long i = 0; i < config.samples; ++i)
    out[i] = run_reduced(config, static_cast<std::uint64_t>(i));
  return out;
}

std::vector<ExtinctionSample> simulate_full(const SimConfig& config) {
  config.validate();
  std::vector<ExtinctionSample> out(config.samples);
  for (long i = 0; i < config.samples; ++i)
    out[i] = run_full(config, static_cast<std::uint64_t>(i));
  return out;
}

MeanEstimate estimate_mean(const std::vector<ExtinctionSample>& samples,
                           std::uint64_t seed) {
  if (samples.empty()) throw std::invalid_argument("no samples");
  for (const auto& s : samples)
    if (s.truncated)
      throw std::runtime_error("truncated samples present; increase max_events");
  MeanEstimate est;
  est.seed = seed;
  est.n = static_cast<long>(samples.size());
  double sum = 0;
  for (const auto& s : samples) sum += s.time;
  est.mean = sum / static_cast<double>(est.n);
  double ss = 0;
  for (const auto& s : samples) {
    double d = s.time - est.mean;
    ss += d * d;
  }
  double var = est.n > 1 ? ss / static_cast<double>(est.n - 1) : 0.0;
  est.std_error = std::sqrt(var / static_cast<double>(est.n));
  est.ci95_low = est.mean - 1.959963984540054 * est.std_error;
  est.ci95_high = est.mean + 1.959963984540054 * est.std_error;
  return est;
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double d = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    double x = (std::min)(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = (std::max)(d, std::fabs(static_cast<double>(i) / na -
                                static_cast<double>(j) / nb));
  }
  KsResult out;
  out.statistic = d;
  double en = std::sqrt(na * nb / (na + nb));
  double z = (en + 0.12 + 0.11 / en) * d;
  double p = 0;
  for (int k = 1; k <= 100; ++k) {
    double term = 2 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * z * z);
    p += term;
    if (std::fabs(term) < 1e-16) break;
  }
  out.p_value = (std::min)(1.0, (std::max)(0.0, p));
  return out;
}

void emit_samples_csv(const std::vector<ExtinctionSample>& samples,
                      std::ostream& os) {
  os << "sample_index,time,events,truncated\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    os << i << ',' << samples[i].time << ',' << samples[i].events << ','
       << (samples[i].truncated ? 1 : 0) << '\n';
  }
}

void emit_summary_json(const MeanEstimate& est, std::ostream& os) {
  nlohmann::ordered_json j;
  j["mean"] = est.mean;
  j["se"] = est.std_error;
  j["ci95"] = {est.ci95_low, est.ci95_high};
  j["seed"] = est.seed;
  j["n"] = est.n;
  os << j.dump(2) << '\n';
}

}  // namespace starcp
