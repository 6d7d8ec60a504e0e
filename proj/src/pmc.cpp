#include "nocpsn/pmc.hpp"

#include <algorithm>
#include <chrono>
#include <functional>

#include <absl/container/flat_hash_map.h>
#include <absl/container/flat_hash_set.h>

namespace nocpsn {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

void validate_property(const Model& model, NoiseKind kind, std::uint32_t threshold) {
  if (threshold == 0) throw InvalidArgument("noise threshold must be at least 1");
  const auto& caps = model.options().caps;
  const auto cap = kind == NoiseKind::Resistive ? caps.resistive : caps.inductive;
  if (cap && *cap == 0) throw InvalidArgument(std::string("the ") + std::string(to_string(kind)) +
                                              " counter is disabled by its cap");
  if (cap && threshold > *cap) throw InvalidArgument("noise threshold exceeds the counter cap");
  if (threshold > kCounterLimit) throw InvalidArgument("noise threshold exceeds the counter width");
}

namespace {

template <class Mass>
using Frontier = std::vector<std::pair<PackedState, Mass>>;

template <class Mass>
std::string exact_of(const Mass& m) {
  if constexpr (std::is_same_v<Mass, Rational>) {
    return exact_string(m);
  } else {
    (void)m;
    return {};
  }
}

void normalize_thresholds(std::vector<std::uint32_t>& thresholds) {
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  if (thresholds.empty()) throw InvalidArgument("at least one threshold is required");
  if (thresholds.front() == 0) throw InvalidArgument("noise threshold must be at least 1");
}

template <class Mass>
TransientSeries empty_series(const std::vector<std::uint32_t>& thresholds, std::uint32_t max_cycles) {
  TransientSeries out;
  out.thresholds = thresholds;
  out.max_cycles = max_cycles;
  out.probability.assign(thresholds.size(), std::vector<double>(max_cycles + 1, 0.0));
  if constexpr (std::is_same_v<Mass, Rational>)
    out.exact.assign(thresholds.size(), std::vector<std::string>(max_cycles + 1, "0"));
  return out;
}

// Probability mass that first carries a counter across each threshold.
// A cycle's crossings are summed with compensation, then folded into the
// running totals by plain addition of non-negative terms, so reported
// probabilities never decrease with the horizon, even in floating point.
template <class Mass>
class Crossings {
 public:
  explicit Crossings(const std::vector<std::uint32_t>& thresholds)
      : ks_(thresholds), cycle_(thresholds.size()), total_(thresholds.size()) {}

  void flow(std::uint32_t from, std::uint32_t to, const Mass& m, BranchProb p) {
    if (to <= from) return;
    const auto lo = std::upper_bound(ks_.begin(), ks_.end(), from) - ks_.begin();
    const auto hi = std::upper_bound(ks_.begin(), ks_.end(), to) - ks_.begin();
    for (auto k = lo; k < hi; ++k) add_scaled(cycle_[k], m, p);
  }

  void close_cycle(TransientSeries& out, std::uint32_t n) {
    for (std::size_t k = 0; k < ks_.size(); ++k) {
      if constexpr (std::is_same_v<Mass, Rational>) {
        total_[k] += cycle_[k];
        out.exact[k][n] = exact_of(total_[k]);
      } else {
        total_[k].sum += cycle_[k].value();
      }
      cycle_[k] = Mass{};
      out.probability[k][n] = to_double(total_[k]);
    }
  }

 private:
  const std::vector<std::uint32_t>& ks_;
  std::vector<Mass> cycle_;
  std::vector<Mass> total_;
};

template <class Mass>
TransientSeries propagate(const Model& model, NoiseKind kind, std::vector<std::uint32_t> thresholds,
                          std::uint32_t max_cycles, const EngineOptions& opts) {
  const auto t0 = Clock::now();
  normalize_thresholds(thresholds);
  for (const auto k : thresholds) validate_property(model, kind, k);
  const std::uint32_t top = thresholds.back();
  TransientSeries out = empty_series<Mass>(thresholds, max_cycles);

  Frontier<Mass> frontier;
  frontier.emplace_back(model.initial(), one_mass<Mass>());
  Crossings<Mass> crossings(out.thresholds);
  std::uint64_t cumulative = 1;
  out.stats.per_cycle.push_back({0, 1, 1, 0.0});
  out.stats.total_states = 1;

  for (std::uint32_t n = 1; n <= max_cycles; ++n) {
    absl::flat_hash_map<PackedState, Mass> merged;
    Frontier<Mass> unmerged;
    for (const auto& [s, m] : frontier) {
      const std::uint32_t c = counter_of(model.observe(s), kind);
      for (const auto& [p, t] : model.step(s)) {
        const std::uint32_t nc = counter_of(model.observe(t), kind);
        crossings.flow(c, nc, m, p);
        // Past the largest threshold a state no longer matters.
        if (nc >= top) {
          continue;
        } else if (opts.merge_states) {
          add_scaled(merged[t], m, p);
        } else {
          Mass w{};
          add_scaled(w, m, p);
          unmerged.emplace_back(t, std::move(w));
        }
      }
    }
    frontier.clear();
    frontier.shrink_to_fit();
    if (opts.merge_states) {
      frontier.reserve(merged.size());
      for (auto& e : merged) frontier.emplace_back(e.first, std::move(e.second));
      merged = {};
      // Sorted iteration keeps float reductions independent of hash order.
      std::sort(frontier.begin(), frontier.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    } else {
      frontier = std::move(unmerged);
    }

    cumulative += frontier.size();
    out.stats.per_cycle.push_back({n, frontier.size(), cumulative, seconds_since(t0)});
    out.stats.total_states = cumulative;
    if (cumulative > opts.state_budget) {
      out.stats.budget_exhausted = true;
      out.stats.seconds = seconds_since(t0);
      throw BudgetExhausted("state budget of " + std::to_string(opts.state_budget) + " exhausted at cycle " +
                                std::to_string(n),
                            out.stats);
    }

    crossings.close_cycle(out, n);
  }
  out.stats.seconds = seconds_since(t0);
  return out;
}

}  // namespace

std::string_view to_string(NoiseKind kind) {
  return kind == NoiseKind::Resistive ? "resistive" : "inductive";
}

NoiseKind parse_noise_kind(std::string_view text) {
  if (text == "resistive") return NoiseKind::Resistive;
  if (text == "inductive") return NoiseKind::Inductive;
  throw InvalidArgument("unknown noise kind: " + std::string(text));
}

ArithmeticMode default_mode_for(std::uint32_t cycles) {
  return cycles <= 30 ? ArithmeticMode::Rational : ArithmeticMode::Float;
}

TransientSeries transient_series(const Model& model, NoiseKind kind, std::span<const std::uint32_t> thresholds,
                                 std::uint32_t max_cycles, const EngineOptions& opts) {
  std::vector<std::uint32_t> ks(thresholds.begin(), thresholds.end());
  if (opts.mode == ArithmeticMode::Rational) return propagate<Rational>(model, kind, std::move(ks), max_cycles, opts);
  return propagate<FloatMass>(model, kind, std::move(ks), max_cycles, opts);
}

CheckResult check_transient(const Model& model, const PropertySpec& prop, const EngineOptions& opts) {
  const std::uint32_t k = prop.threshold;
  auto series = transient_series(model, prop.kind, std::span<const std::uint32_t>(&k, 1), prop.cycles, opts);
  CheckResult r;
  r.probability = series.probability[0][prop.cycles];
  r.exact = opts.mode == ArithmeticMode::Rational;
  if (r.exact) r.exact_value = series.exact[0][prop.cycles];
  r.cycles = prop.cycles;
  r.states_explored = series.stats.total_states;
  r.stats = std::move(series.stats);
  return r;
}

RewardGraph::RewardGraph(const Model& model, std::uint64_t state_budget) {
  if (model.options().track_clk)
    throw InvalidArgument("reward-bounded checking needs a model built without the clock in its state");
  const auto t0 = Clock::now();
  auto strip = [](PackedState p) {
    const StateHeader h = packed::header(p);
    packed::set_header(p, {0, 0, 0, h.phase, h.dropped});
    return p;
  };
  absl::flat_hash_map<PackedState, std::uint32_t> index;
  absl::flat_hash_map<std::pair<std::uint64_t, std::uint64_t>, std::uint16_t> prob_index;
  std::vector<PackedState> states{strip(model.initial())};
  index.emplace(states.front(), 0);
  offsets_.push_back(0);
  for (std::size_t i = 0; i < states.size(); ++i) {
    const PackedState s = states[i];
    for (const auto& [p, t] : model.step(s)) {
      // Counters start from zero in every stored state, so the successor's
      // counters are the per-step increments.
      const Observation o = model.observe(t);
      const PackedState key = strip(t);
      auto [it, inserted] = index.try_emplace(key, static_cast<std::uint32_t>(states.size()));
      if (inserted) {
        states.push_back(key);
        if (states.size() > state_budget) {
          StateSpaceStats partial;
          partial.total_states = states.size();
          partial.budget_exhausted = true;
          partial.seconds = seconds_since(t0);
          throw BudgetExhausted("state budget of " + std::to_string(state_budget) + " exhausted", partial);
        }
      }
      auto [pi, fresh] = prob_index.try_emplace(std::pair{p.num, p.den}, static_cast<std::uint16_t>(probs_.size()));
      if (fresh) {
        if (probs_.size() == 0xFFFF) throw std::length_error("too many distinct branch probabilities");
        probs_.push_back(p);
      }
      edges_.push_back({it->second, pi->second, static_cast<std::uint8_t>(o.resistive),
                        static_cast<std::uint8_t>(o.inductive)});
      max_resistive_ = std::max<std::uint8_t>(max_resistive_, static_cast<std::uint8_t>(o.resistive));
      max_inductive_ = std::max<std::uint8_t>(max_inductive_, static_cast<std::uint8_t>(o.inductive));
    }
    offsets_.push_back(static_cast<std::uint32_t>(edges_.size()));
  }
  build_seconds_ = seconds_since(t0);
}

CoverageCertificate RewardGraph::certificate(NoiseKind kind) const {
  return {states(), transitions(), kind == NoiseKind::Resistive ? max_resistive_ : max_inductive_};
}

template <class Mass>
TransientSeries RewardGraph::propagate(NoiseKind kind, std::vector<std::uint32_t> thresholds,
                                       std::uint32_t max_cycles) const {
  const auto t0 = Clock::now();
  normalize_thresholds(thresholds);
  TransientSeries out = empty_series<Mass>(thresholds, max_cycles);
  out.stats.total_states = states();
  out.stats.per_cycle.push_back({0, states(), states(), build_seconds_});
  if (certificate(kind).noise_free()) {
    out.stats.seconds = build_seconds_;
    return out;
  }
  const std::uint32_t top = thresholds.back();
  const bool resistive = kind == NoiseKind::Resistive;
  const std::size_t n_states = states();
  std::vector<Mass> cur(n_states * top), next(n_states * top);
  cur[0] = one_mass<Mass>();
  Crossings<Mass> crossings(out.thresholds);
  for (std::uint32_t n = 1; n <= max_cycles; ++n) {
    std::fill(next.begin(), next.end(), Mass{});
    for (std::size_t s = 0; s < n_states; ++s) {
      for (std::uint32_t c = 0; c < top; ++c) {
        const Mass& m = cur[s * top + c];
        if (is_zero(m)) continue;
        for (std::uint32_t e = offsets_[s]; e < offsets_[s + 1]; ++e) {
          const Edge& edge = edges_[e];
          const std::uint32_t nc = c + (resistive ? edge.resistive : edge.inductive);
          crossings.flow(c, nc, m, probs_[edge.prob]);
          if (nc < top) add_scaled(next[std::size_t{edge.target} * top + nc], m, probs_[edge.prob]);
        }
      }
    }
    std::swap(cur, next);
    crossings.close_cycle(out, n);
    out.stats.per_cycle.push_back({n, n_states, n_states, build_seconds_ + seconds_since(t0)});
  }
  out.stats.seconds = build_seconds_ + seconds_since(t0);
  return out;
}

TransientSeries RewardGraph::series(NoiseKind kind, std::span<const std::uint32_t> thresholds,
                                    std::uint32_t max_cycles, ArithmeticMode mode) const {
  std::vector<std::uint32_t> ks(thresholds.begin(), thresholds.end());
  if (mode == ArithmeticMode::Rational) return propagate<Rational>(kind, std::move(ks), max_cycles);
  return propagate<FloatMass>(kind, std::move(ks), max_cycles);
}

CheckResult check_reward_bounded(const Model& model, const PropertySpec& prop, const EngineOptions& opts) {
  validate_property(model, prop.kind, prop.threshold);
  const RewardGraph graph(model, opts.state_budget);
  const std::uint32_t k = prop.threshold;
  auto series = graph.series(prop.kind, std::span<const std::uint32_t>(&k, 1), prop.cycles, opts.mode);
  CheckResult r;
  r.probability = series.probability[0][prop.cycles];
  r.exact = opts.mode == ArithmeticMode::Rational;
  if (r.exact) r.exact_value = series.exact[0][prop.cycles];
  r.cycles = prop.cycles;
  r.states_explored = graph.states();
  r.stats = std::move(series.stats);
  r.certificate = graph.certificate(prop.kind);
  return r;
}

StateSpaceStats explore(const Model& model, std::uint32_t max_cycles, std::uint64_t state_budget) {
  const auto t0 = Clock::now();
  StateSpaceStats stats;
  const bool timed = model.options().track_clk;
  std::vector<PackedState> frontier{model.initial()};
  // Without the clock in the state, the same state can recur in later
  // cycles; cumulative counts then refer to distinct states overall.
  absl::flat_hash_set<PackedState> seen;
  if (!timed) seen.insert(frontier.front());
  std::uint64_t cumulative = 1;
  stats.per_cycle.push_back({0, 1, 1, 0.0});
  stats.total_states = 1;
  for (std::uint32_t n = 1; n <= max_cycles; ++n) {
    absl::flat_hash_set<PackedState> next;
    for (const auto& s : frontier) {
      for (const auto& b : model.step(s)) next.insert(b.state);
    }
    frontier.assign(next.begin(), next.end());
    next = {};
    if (timed) {
      cumulative += frontier.size();
    } else {
      for (const auto& s : frontier) seen.insert(s);
      cumulative = seen.size();
    }
    stats.per_cycle.push_back({n, frontier.size(), cumulative, seconds_since(t0)});
    stats.total_states = cumulative;
    if (cumulative > state_budget) {
      stats.budget_exhausted = true;
      break;
    }
  }
  stats.seconds = seconds_since(t0);
  return stats;
}

JointDistribution joint_noise_distribution(const Model& model, std::uint32_t cycles, std::uint64_t state_budget) {
  absl::flat_hash_map<PackedState, Rational> frontier;
  frontier.emplace(model.initial(), Rational(1));
  std::uint64_t cumulative = 1;
  for (std::uint32_t n = 1; n <= cycles; ++n) {
    absl::flat_hash_map<PackedState, Rational> next;
    for (const auto& [s, m] : frontier) {
      for (const auto& [p, t] : model.step(s)) add_scaled(next[t], m, p);
    }
    frontier = std::move(next);
    cumulative += frontier.size();
    if (cumulative > state_budget) {
      StateSpaceStats partial;
      partial.total_states = cumulative;
      partial.budget_exhausted = true;
      throw BudgetExhausted("state budget of " + std::to_string(state_budget) + " exhausted", partial);
    }
  }
  JointDistribution out;
  for (const auto& [s, m] : frontier) {
    const Observation o = model.observe(s);
    out[{o.resistive, o.inductive}] += m;
  }
  return out;
}

BruteForceResult brute_force_check(const Model& model, const PropertySpec& prop) {
  if (prop.cycles > kBruteForceMaxCycles)
    throw InvalidArgument("brute-force enumeration is limited to " + std::to_string(kBruteForceMaxCycles) + " cycles");
  validate_property(model, prop.kind, prop.threshold);
  BruteForceResult out;
  std::function<void(const PackedState&, const Rational&, std::uint32_t)> walk =
      [&](const PackedState& s, const Rational& mass, std::uint32_t depth) {
        if (counter_of(model.observe(s), prop.kind) >= prop.threshold) {
          out.probability += mass;
          out.total_mass += mass;
          ++out.leaves;
          return;
        }
        if (depth == prop.cycles) {
          out.total_mass += mass;
          ++out.leaves;
          return;
        }
        for (const auto& [p, t] : model.step_unmerged(s)) {
          walk(t, mass * Rational(static_cast<unsigned long>(p.num), static_cast<unsigned long>(p.den)), depth + 1);
        }
      };
  walk(model.initial(), Rational(1), 0);
  return out;
}

}  // namespace nocpsn
