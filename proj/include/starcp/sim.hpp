#ifndef STARCP_SIM_HPP
#define STARCP_SIM_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "starcp/chain.hpp"

namespace starcp {

// Counter-based stream: the state for sample i is a hash of (seed, i), so
// sample streams are reproducible under any parallel schedule.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t s) : state(s) {}
  SplitMix64(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next();
  double uniform();  // (0,1)
};

struct SimConfig {
  ModelParams params;
  std::optional<State> initial;  // nullopt: all infected (1,N)
  std::uint64_t seed = 0;
  long max_events = 1000000000L;
  long samples = 1;

  void validate() const {
    params.validate();
    if (samples < 1) throw std::invalid_argument("samples must be >= 1");
    if (max_events < 1) throw std::invalid_argument("max_events must be >= 1");
    if (initial &&
        (initial->hub < 0 || initial->hub > 1 || initial->n < 0 ||
         initial->n > params.leaves))
      throw std::invalid_argument("initial state out of range");
  }

  State start_state() const {
    return initial ? *initial : State{1, params.leaves};
  }
};

struct ExtinctionSample {
  double time = 0;
  long events = 0;
  bool truncated = false;
};

// Event loop on the absorbing (hub, count) chain.
std::vector<ExtinctionSample> simulate_reduced(const SimConfig& config);

// Leaf-resolved dynamics; leaves are held as a count-indexed partition so each
// event is O(1).
std::vector<ExtinctionSample> simulate_full(const SimConfig& config);

struct MeanEstimate {
  double mean = 0;
  double std_error = 0;
  double ci95_low = 0, ci95_high = 0;
  std::uint64_t seed = 0;
  long n = 0;
};

// Summary of a truncation-free sample set; throws on truncated or empty input.
MeanEstimate estimate_mean(const std::vector<ExtinctionSample>& samples,
                           std::uint64_t seed);

inline MeanEstimate estimate_mean(const SimConfig& config) {
  return estimate_mean(simulate_reduced(config), config.seed);
}

struct KsResult {
  double statistic = 0;
  double p_value = 1;
};

// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// CSV columns: sample_index,time,events,truncated.
void emit_samples_csv(const std::vector<ExtinctionSample>& samples,
                      std::ostream& os);
// JSON keys: mean, se, ci95, seed, n.
void emit_summary_json(const MeanEstimate& est, std::ostream& os);

}  // namespace starcp

#endif  // STARCP_SIM_HPP
