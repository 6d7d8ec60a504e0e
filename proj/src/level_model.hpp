#pragma once

// Shared driver turning a level description into a Model. A level splits
// each cycle into a deterministic `prepare`, a list of independent random
// choice points, and a deterministic `apply` given one outcome per choice.
// Enumerating the outcome product yields the step distribution; drawing
// each outcome yields a sample.

#include <array>
#include <memory>
#include <sstream>
#include <string>

#include "nocpsn/abstractions.hpp"

namespace nocpsn::detail {

struct Choice {
  std::uint8_t arity = 1;
  std::array<BranchProb, 3> probs{};
  ChoiceKind kind = ChoiceKind::Destination;
};

inline constexpr int kMaxChoices = 16;

class ChoiceList {
 public:
  void push(const Choice& c) { items_.at(static_cast<std::size_t>(n_++)) = c; }
  int size() const { return n_; }
  const Choice& operator[](int i) const { return items_[static_cast<std::size_t>(i)]; }

 private:
  std::array<Choice, kMaxChoices> items_{};
  int n_ = 0;
};

using Outcomes = std::array<std::uint8_t, kMaxChoices>;

inline Choice uniform_of_three() {
  return Choice{3, {BranchProb{1, 3}, BranchProb{1, 3}, BranchProb{1, 3}}, ChoiceKind::Destination};
}
inline Choice local_direction_choice() { return Choice{2, {kLocalToX, kLocalToY, {}}, ChoiceKind::LocalDirection}; }
inline Choice xchan_direction_choice() { return Choice{2, {kXChanEject, kXChanToY, {}}, ChoiceKind::XChanDirection}; }

template <class Level, class Sink>
void for_each_branch(const Level& level, const typename Level::State& s, Sink&& sink) {
  const auto prepared = level.prepare(s);
  ChoiceList choices;
  level.choices(prepared, choices);
  Outcomes outcome{};
  const int n = choices.size();
  while (true) {
    BranchProb p = BranchProb::one();
    for (int i = 0; i < n; ++i) p = p * choices[i].probs[outcome[i]];
    sink(p, level.apply(prepared, outcome));
    int i = 0;
    for (; i < n; ++i) {
      if (++outcome[i] < choices[i].arity) break;
      outcome[i] = 0;
    }
    if (i == n) break;
  }
}

template <class Level>
TransitionDistributionT<typename Level::State> enumerate_step(const Level& level, const typename Level::State& s) {
  TransitionDistributionT<typename Level::State> out;
  for_each_branch(level, s, [&](BranchProb p, typename Level::State&& next) { out.push_back({p, std::move(next)}); });
  return out;
}

inline std::uint8_t draw(const Choice& c, CounterRng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::uint8_t k = 0; k + 1 < c.arity; ++k) {
    acc += c.probs[k].to_double();
    if (u < acc) return k;
  }
  return static_cast<std::uint8_t>(c.arity - 1);
}

template <class Level>
class LevelModel final : public Model {
 public:
  explicit LevelModel(const ModelOptions& opts) : Model(opts), level_{options()} {}

  ModelLevel level() const override { return Level::kLevel; }

  PackedState initial() const override { return level_.encode(level_.initial()); }

  TransitionDistribution step_unmerged(const PackedState& p) const override {
    TransitionDistribution out;
    for_each_branch(level_, level_.decode(p),
                    [&](BranchProb prob, typename Level::State&& next) { out.push_back({prob, level_.encode(next)}); });
    return out;
  }

  PackedState sample_step(const PackedState& p, CounterRng& rng, DrawTally* tally) const override {
    const auto prepared = level_.prepare(level_.decode(p));
    ChoiceList choices;
    level_.choices(prepared, choices);
    Outcomes outcome{};
    for (int i = 0; i < choices.size(); ++i) {
      outcome[i] = draw(choices[i], rng);
      if (tally) ++tally->counts[static_cast<int>(choices[i].kind)][outcome[i]];
    }
    return level_.encode(level_.apply(prepared, outcome));
  }

  std::string describe(const PackedState& p) const override { return level_.describe(level_.decode(p)); }

 private:
  Level level_;
};

template <class Elem, class ElemFmt>
std::string describe_noc(const NocStateT<Elem>& s, ElemFmt&& fmt) {
  std::ostringstream os;
  os << "clk=" << s.clk << " phase=" << s.phase << " R=" << s.noise.resistive << " I=" << s.noise.inductive;
  if (s.dropped) os << " dropped=" << s.dropped;
  for (int r = 0; r < kRouters; ++r) {
    const auto& router = s.routers[r];
    os << "\n  r" << r << " prev=" << to_string(router.prev_activity) << " order=";
    for (const auto& ch : router.channels) os << to_string(ch.id) << ' ';
    for (int c = 0; c < kChannels; ++c) {
      const auto& ch = router.channel(static_cast<ChannelClass>(c));
      os << "| " << to_string(ch.id) << '[';
      for (int i = 0; i < ch.buffer.size(); ++i) os << (i ? "," : "") << fmt(ch.buffer[i]);
      os << ']';
      if (ch.direction) os << "->" << to_string(*ch.direction);
      os << ' ';
    }
  }
  return os.str();
}

/// 2-bit code for an optional port: 0 = none, 1 + port otherwise.
inline std::uint64_t lock_code(const std::optional<OutputPort>& p) {
  return p ? static_cast<std::uint64_t>(p.value()) + 1 : 0;
}
inline std::optional<OutputPort> lock_from_code(std::uint64_t c) {
  if (c == 0) return std::nullopt;
  return static_cast<OutputPort>(c - 1);
}

std::unique_ptr<Model> make_concrete_model(const ModelOptions& opts);
std::unique_ptr<Model> make_predicate_model(const ModelOptions& opts);
std::unique_ptr<Model> make_prob_choice_model(const ModelOptions& opts);
std::unique_ptr<Model> make_bool_queue_model(const ModelOptions& opts);

}  // namespace nocpsn::detail
