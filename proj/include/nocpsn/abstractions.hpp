#pragma once

// The three cumulative abstractions of the concrete model and the uniform
// probabilistic-transition-system interface that both engines consume.

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nocpsn/core_model.hpp"
#include "nocpsn/packed_state.hpp"
#include "nocpsn/probability.hpp"
#include "nocpsn/rng.hpp"
#include "nocpsn/types.hpp"

namespace nocpsn {

enum class ModelLevel : std::uint8_t { Concrete, Predicate, ProbChoice, BooleanQueue };

inline constexpr std::array<ModelLevel, 4> kAllLevels{ModelLevel::Concrete, ModelLevel::Predicate, ModelLevel::ProbChoice,
                                                      ModelLevel::BooleanQueue};

std::string_view to_string(ModelLevel level);
ModelLevel parse_model_level(std::string_view text);

// ---- Predicate abstraction ---------------------------------------------

/// A flit reduced to the routing predicates it still has to satisfy: whether
/// an X hop and a Y hop remain. Carries no router identity.
struct PredicateFlit {
  bool needs_x = false;
  bool needs_y = false;

  OutputPort direction() const {
    if (needs_x) return OutputPort::ToXNeighbor;
    return needs_y ? OutputPort::ToYNeighbor : OutputPort::Eject;
  }
  static PredicateFlit toward(RouterId from, RouterId dest) {
    const int off = from.value() ^ dest.value();
    return {(off & 1) != 0, (off & 2) != 0};
  }

  bool operator==(const PredicateFlit&) const = default;
};

using PredicateState = NocStateT<PredicateFlit>;

PredicateState project_to_predicate(const NocState& s);
TransitionDistributionT<PredicateState> predicate_step(const PredicateState& s, const ModelOptions& opts);

// ---- Probabilistic-choice abstraction ----------------------------------

/// Anonymous flit. A token's routing direction is drawn only when it is
/// routed; a drawn direction of a denied front token is kept in the
/// channel's `direction` field (the lock) until the token leaves.
struct Token {
  bool operator==(const Token&) const = default;
};

using ProbChoiceState = NocStateT<Token>;

/// Lazy routing choices that replace the destination variable.
inline constexpr BranchProb kLocalToX{2, 3};
inline constexpr BranchProb kLocalToY{1, 3};
inline constexpr BranchProb kXChanEject{1, 2};
inline constexpr BranchProb kXChanToY{1, 2};

TransitionDistributionT<ProbChoiceState> prob_choice_step(const ProbChoiceState& s, const ModelOptions& opts);

// ---- Boolean-queue abstraction -----------------------------------------

/// Router after the Boolean-queue abstraction: occupancies instead of
/// contents, and the relative priority of the local and ns buffers with
/// respect to the ew buffer (local and ns never compete for a port).
struct BoolQueueRouter {
  std::uint8_t local_len = 0;
  std::uint8_t ew_len = 0;
  std::uint8_t ns_len = 0;
  bool local_priority = true;  // local ahead of ew
  bool ns_priority = false;    // ns ahead of ew
  /// Direction a denied front flit is locked to (e.g. local locked to ns).
  std::optional<OutputPort> local_lock;
  std::optional<OutputPort> ew_lock;
  Activity prev_activity = Activity::Low;

  bool operator==(const BoolQueueRouter&) const = default;
};

struct BoolQueueState {
  std::array<BoolQueueRouter, kRouters> routers;
  NoiseCounters noise;
  std::uint32_t clk = 0;
  std::uint32_t phase = 0;
  std::uint32_t dropped = 0;

  bool operator==(const BoolQueueState&) const = default;
};

/// Servicing order of the decision procedure when the ew buffer is
/// non-empty, selected by (local_priority, ns_priority).
enum class ServiceBranch : std::uint8_t { LocalNsEw = 1, EwLocalNs = 2, NsEwLocal = 3, LocalEwNs = 4 };
ServiceBranch service_branch(bool local_priority, bool ns_priority);
std::array<ChannelClass, kChannels> service_order(ServiceBranch b);

BoolQueueState project_to_bool_queue(const ProbChoiceState& s);
TransitionDistributionT<BoolQueueState> bool_queue_step(const BoolQueueState& s, const ModelOptions& opts);

// ---- Uniform model interface -------------------------------------------

struct Observation {
  std::uint32_t resistive = 0;
  std::uint32_t inductive = 0;
  std::uint32_t clk = 0;

  bool operator==(const Observation&) const = default;
};

using TransitionDistribution = std::vector<Weighted<PackedState>>;

enum class ChoiceKind : std::uint8_t { Destination, LocalDirection, XChanDirection };

/// Outcome counts of sampled random choices, by kind. Outcome indices:
/// destination = k-th other router in id order; local = X, Y;
/// XChan = eject, Y.
struct DrawTally {
  std::array<std::array<std::uint64_t, 3>, 3> counts{};
  std::uint64_t total(ChoiceKind k) const {
    const auto& c = counts[static_cast<int>(k)];
    return c[0] + c[1] + c[2];
  }
};

/// A DTMC over packed states. Step distributions sum to one; the packed
/// form doubles as the canonical key.
class Model {
 public:
  explicit Model(ModelOptions opts) : opts_(std::move(opts)) {}
  virtual ~Model() = default;

  virtual ModelLevel level() const = 0;
  const ModelOptions& options() const { return opts_; }

  virtual PackedState initial() const = 0;
  /// Successor distribution with identical successors merged, ordered by key.
  TransitionDistribution step(const PackedState& s) const;
  /// One branch per combination of random outcomes, nothing merged.
  virtual TransitionDistribution step_unmerged(const PackedState& s) const = 0;
  /// Draws one successor, optionally tallying the drawn outcomes.
  virtual PackedState sample_step(const PackedState& s, CounterRng& rng, DrawTally* tally = nullptr) const = 0;
  /// Human-readable rendering, for diagnostics.
  virtual std::string describe(const PackedState& s) const = 0;

  Observation observe(const PackedState& s) const {
    const StateHeader h = packed::header(s);
    return {h.resistive, h.inductive, h.clk};
  }
  std::uint32_t dropped_flits(const PackedState& s) const { return packed::header(s).dropped; }
  const PackedState& canonicalize(const PackedState& s) const { return s; }

 private:
  ModelOptions opts_;
};

/// Builds the model of the given fidelity. Throws InvalidArgument for an
/// unusable configuration.
std::unique_ptr<Model> make_model(ModelLevel level, const ModelOptions& opts);

// Level-specific encodings, exposed for tests and diagnostics.
PackedState encode(const PredicateState& s);
PackedState encode(const ProbChoiceState& s);
PackedState encode(const BoolQueueState& s);
PredicateState decode_predicate_state(const PackedState& p);
ProbChoiceState decode_prob_choice_state(const PackedState& p);
BoolQueueState decode_bool_queue_state(const PackedState& p);

}  // namespace nocpsn
