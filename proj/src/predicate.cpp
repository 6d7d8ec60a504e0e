#include "level_model.hpp"

namespace nocpsn {

namespace {

PredicateFlit take_hop(PredicateFlit f, OutputPort port) {
  if (port == OutputPort::ToXNeighbor) f.needs_x = false;
  if (port == OutputPort::ToYNeighbor) f.needs_y = false;
  return f;
}

void refresh_directions(PredicateState& s) {
  for (auto& r : s.routers) {
    for (auto& ch : r.channels) {
      if (ch.buffer.empty()) {
        ch.direction.reset();
      } else {
        ch.direction = ch.buffer.front().direction();
      }
    }
  }
}

struct PredicateLevel {
  static constexpr ModelLevel kLevel = ModelLevel::Predicate;
  using State = PredicateState;

  const ModelOptions& opts;

  State initial() const { return State{}; }
  State decode(const PackedState& p) const { return decode_predicate_state(p); }
  PackedState encode(const State& s) const { return nocpsn::encode(s); }
  State prepare(const State& s) const { return s; }

  void choices(const State& s, detail::ChoiceList& out) const {
    if (!opts.pattern.injects_at(static_cast<int>(s.phase))) return;
    for (int r = 0; r < kRouters; ++r) out.push(detail::uniform_of_three());
  }

  // A uniformly drawn destination fixes which hops remain: with routers
  // in ascending order the three outcomes give offsets in {1, 2, 3}.
  State apply(const State& s, const detail::Outcomes& o) const {
    State next = s;
    if (opts.pattern.injects_at(static_cast<int>(s.phase))) {
      for (int r = 0; r < kRouters; ++r) {
        const RouterId here(r);
        inject_into(next, here, PredicateFlit::toward(here, destination_choice(here, o[r])));
      }
    }
    refresh_directions(next);
    next = complete_cycle(std::move(next), opts, take_hop);
    refresh_directions(next);
    return next;
  }

  std::string describe(const State& s) const {
    return detail::describe_noc(s, [](const PredicateFlit& f) {
      return std::string(f.needs_x ? "X" : "") + (f.needs_y ? "Y" : "") + (f.needs_x || f.needs_y ? "" : "E");
    });
  }
};

}  // namespace

PredicateState project_to_predicate(const NocState& s) {
  PredicateState out;
  out.noise = s.noise;
  out.clk = s.clk;
  out.phase = s.phase;
  out.dropped = s.dropped;
  for (int r = 0; r < kRouters; ++r) {
    const auto& src = s.routers[r];
    auto& dst = out.routers[r];
    dst.prev_activity = src.prev_activity;
    set_order(dst, src.order());
    for (int c = 0; c < kChannels; ++c) {
      const auto cls = static_cast<ChannelClass>(c);
      const auto& from = src.channel(cls).buffer;
      auto& to = dst.channel(cls).buffer;
      for (int i = 0; i < from.size(); ++i) to.push(PredicateFlit::toward(RouterId(r), from[i].dest));
    }
  }
  refresh_directions(out);
  return out;
}

TransitionDistributionT<PredicateState> predicate_step(const PredicateState& s, const ModelOptions& opts) {
  return detail::enumerate_step(PredicateLevel{opts}, s);
}

PackedState encode(const PredicateState& s) {
  PackedState p;
  packed::set_header(p, {s.noise.resistive, s.noise.inductive, s.clk, s.phase, s.dropped});
  BitWriter w(p);
  for (const auto& r : s.routers) {
    for (int c = 0; c < kChannels; ++c) {
      const auto& buf = r.channel(static_cast<ChannelClass>(c)).buffer;
      w.put(static_cast<std::uint64_t>(buf.size()), 3);
      for (int i = 0; i < kBufferCapacity; ++i) {
        const std::uint64_t bits = i < buf.size() ? (buf[i].needs_x ? 1u : 0u) | (buf[i].needs_y ? 2u : 0u) : 0u;
        w.put(bits, 2);
      }
    }
    w.put(static_cast<std::uint64_t>(permutation_index(r.order())), 3);
    w.put(static_cast<std::uint64_t>(r.prev_activity), 2);
  }
  return p;
}

PredicateState decode_predicate_state(const PackedState& p) {
  PredicateState s;
  const StateHeader h = packed::header(p);
  s.noise = {h.resistive, h.inductive};
  s.clk = h.clk;
  s.phase = h.phase;
  s.dropped = h.dropped;
  BitReader rd(p);
  for (auto& r : s.routers) {
    for (int c = 0; c < kChannels; ++c) {
      auto& buf = r.channel(static_cast<ChannelClass>(c)).buffer;
      const int len = static_cast<int>(rd.get(3));
      for (int i = 0; i < kBufferCapacity; ++i) {
        const auto bits = rd.get(2);
        if (i < len) buf.push(PredicateFlit{(bits & 1u) != 0, (bits & 2u) != 0});
      }
    }
    set_order(r, permutation_from_index(static_cast<int>(rd.get(3))));
    r.prev_activity = static_cast<Activity>(rd.get(2));
  }
  refresh_directions(s);
  return s;
}

namespace detail {

std::unique_ptr<Model> make_predicate_model(const ModelOptions& opts) {
  return std::make_unique<LevelModel<PredicateLevel>>(opts);
}

}  // namespace detail

}  // namespace nocpsn
