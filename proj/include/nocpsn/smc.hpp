#pragma once

// Monte-Carlo estimation of the same threshold properties, for horizons
// where exact checking is out of reach.

#include <cstdint>
#include <optional>

#include "nocpsn/abstractions.hpp"
#include "nocpsn/pmc.hpp"
#include "nocpsn/rng.hpp"

namespace nocpsn {

struct SimConfig {
  std::uint64_t runs = 10000;
  std::uint32_t max_cycles = 100;
  std::uint64_t seed = 1;
  NoiseKind kind = NoiseKind::Resistive;
  std::uint32_t threshold = 1;
  /// Worker threads; 0 picks the hardware concurrency.
  unsigned threads = 0;
  /// Periodic progress lines on stderr.
  bool progress = false;
};

struct Estimate {
  double p_hat = 0.0;
  std::uint64_t successes = 0;
  std::uint64_t runs = 0;
  double ci_lo = 0.0;
  double ci_hi = 1.0;
  /// Fewer than 30 successes: the interval is wide relative to p_hat.
  bool low_confidence = true;
  double seconds = 0.0;
};

/// Thresholds to watch during one run; 0 leaves a counter unwatched.
struct HitThresholds {
  std::uint32_t resistive = 0;
  std::uint32_t inductive = 0;
};

struct RunOutcome {
  std::optional<std::uint32_t> resistive_hit;  // first cycle with counter >= threshold
  std::optional<std::uint32_t> inductive_hit;
  std::uint32_t cycles = 0;
};

/// Samples one path of at most max_cycles steps. Stops early once every
/// watched counter has reached its threshold.
RunOutcome simulate_run(const Model& model, std::uint32_t max_cycles, HitThresholds thresholds, CounterRng& rng,
                        DrawTally* tally = nullptr);

/// Runs config.runs independent paths; run i draws from stream i of the
/// seed, so the result does not depend on thread count or scheduling.
Estimate estimate(const Model& model, const SimConfig& config);

/// Exact (Clopper-Pearson) interval for a binomial proportion.
std::pair<double, double> clopper_pearson(std::uint64_t successes, std::uint64_t trials, double confidence = 0.95);

/// Simulates seeded runs of max_cycles steps until at least min_draws
/// choices of the given kind have been resolved; returns all tallies.
DrawTally tally_choices(const Model& model, ChoiceKind kind, std::uint64_t min_draws, std::uint32_t max_cycles,
                        std::uint64_t seed);

}  // namespace nocpsn
