#pragma once

// Explicit-state probabilistic model checking of cycle-bounded noise
// properties: P(counter >= K within N cycles).

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nocpsn/abstractions.hpp"
#include "nocpsn/probability.hpp"

namespace nocpsn {

enum class NoiseKind : std::uint8_t { Resistive, Inductive };

std::string_view to_string(NoiseKind kind);
NoiseKind parse_noise_kind(std::string_view text);

inline std::uint32_t counter_of(const Observation& o, NoiseKind kind) {
  return kind == NoiseKind::Resistive ? o.resistive : o.inductive;
}

/// Throws InvalidArgument unless 1 <= threshold <= the counter's cap and
/// the counter is enabled.
void validate_property(const Model& model, NoiseKind kind, std::uint32_t threshold);

struct PropertySpec {
  NoiseKind kind = NoiseKind::Resistive;
  std::uint32_t threshold = 1;  // K
  std::uint32_t cycles = 0;     // N
};

struct EngineOptions {
  ArithmeticMode mode = ArithmeticMode::Rational;
  /// Upper bound on the number of unique states generated.
  std::uint64_t state_budget = 20'000'000;
  /// Merge identical states in the frontier. Turning this off only changes
  /// state counts, never probabilities.
  bool merge_states = true;
};

/// Default arithmetic: exact up to 30 cycles, compensated doubles beyond.
ArithmeticMode default_mode_for(std::uint32_t cycles);

struct CycleStats {
  std::uint32_t cycle = 0;
  std::uint64_t states = 0;
  std::uint64_t cumulative = 0;
  double seconds = 0.0;
};

struct StateSpaceStats {
  std::vector<CycleStats> per_cycle;
  std::uint64_t total_states = 0;
  bool budget_exhausted = false;
  double seconds = 0.0;
};

/// Evidence from a fully generated finite reachable set. When no
/// transition anywhere in it increments the counter, the probability of
/// reaching any threshold is exactly zero for every horizon.
struct CoverageCertificate {
  std::uint64_t reachable_states = 0;
  std::uint64_t transitions = 0;
  std::uint32_t max_step_increment = 0;
  bool noise_free() const { return max_step_increment == 0; }
};

struct CheckResult {
  double probability = 0.0;
  /// Exact value as "p/q" (or "0"); set in rational mode.
  std::optional<std::string> exact_value;
  std::uint64_t states_explored = 0;
  std::uint32_t cycles = 0;
  bool exact = false;
  StateSpaceStats stats;
  std::optional<CoverageCertificate> certificate;
};

/// Thrown when exploration would exceed the state budget; carries the
/// statistics gathered up to that point.
class BudgetExhausted : public std::runtime_error {
 public:
  BudgetExhausted(const std::string& what, StateSpaceStats partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const StateSpaceStats& partial() const { return partial_; }

 private:
  StateSpaceStats partial_;
};

/// P(counter >= K within N) by forward propagation; states reaching the
/// threshold become absorbing.
CheckResult check_transient(const Model& model, const PropertySpec& prop, const EngineOptions& opts = {});

/// probability[k][n] = P(counter >= thresholds[k] within n cycles) for
/// n = 0..max_cycles, from a single propagation.
struct TransientSeries {
  std::vector<std::uint32_t> thresholds;
  std::uint32_t max_cycles = 0;
  std::vector<std::vector<double>> probability;
  std::vector<std::vector<std::string>> exact;  // empty in float mode
  StateSpaceStats stats;
};

TransientSeries transient_series(const Model& model, NoiseKind kind, std::span<const std::uint32_t> thresholds,
                                 std::uint32_t max_cycles, const EngineOptions& opts = {});

/// Same probability over the finite graph of a model whose clock is
/// transient. The clock and the noise counters leave the state and become
/// rewards on the transitions; the cycle bound caps the accumulated clock.
CheckResult check_reward_bounded(const Model& model, const PropertySpec& prop, const EngineOptions& opts = {});

/// Counter-free transition graph of a periodic model. Reusable across
/// thresholds and horizons.
class RewardGraph {
 public:
  struct Edge {
    std::uint32_t target;
    std::uint16_t prob;  // index into the probability table
    std::uint8_t resistive;
    std::uint8_t inductive;
  };

  RewardGraph(const Model& model, std::uint64_t state_budget);

  std::uint64_t states() const { return offsets_.size() - 1; }
  std::uint64_t transitions() const { return edges_.size(); }
  CoverageCertificate certificate(NoiseKind kind) const;

  /// probability[k][n] as in TransientSeries.
  TransientSeries series(NoiseKind kind, std::span<const std::uint32_t> thresholds, std::uint32_t max_cycles,
                         ArithmeticMode mode) const;

 private:
  template <class Mass>
  TransientSeries propagate(NoiseKind kind, std::vector<std::uint32_t> thresholds, std::uint32_t max_cycles) const;

  std::vector<std::uint32_t> offsets_;
  std::vector<Edge> edges_;
  std::vector<BranchProb> probs_;
  std::uint8_t max_resistive_ = 0;
  std::uint8_t max_inductive_ = 0;
  double build_seconds_ = 0.0;
};

/// Breadth-first, cycle-synchronous enumeration of reachable states.
/// Never throws on budget exhaustion: the partial statistics are flagged.
StateSpaceStats explore(const Model& model, std::uint32_t max_cycles, std::uint64_t state_budget = 20'000'000);

/// Exact distribution of (resistive, inductive) at cycle N.
using JointDistribution = std::map<std::pair<std::uint32_t, std::uint32_t>, Rational>;
JointDistribution joint_noise_distribution(const Model& model, std::uint32_t cycles,
                                           std::uint64_t state_budget = 20'000'000);

/// Independent oracle: enumerates every path of the unmerged step tree as a
/// distinct leaf, in exact arithmetic, without any state hashing.
struct BruteForceResult {
  Rational probability;
  Rational total_mass;
  std::uint64_t leaves = 0;
};

inline constexpr std::uint32_t kBruteForceMaxCycles = 6;

BruteForceResult brute_force_check(const Model& model, const PropertySpec& prop);

}  // namespace nocpsn
