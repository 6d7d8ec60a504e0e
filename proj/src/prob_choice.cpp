#include "level_model.hpp"

namespace nocpsn {

namespace {

Token keep_token(Token t, OutputPort) { return t; }

// ns tokens can only be destined for the router they sit in.
void fix_ns_directions(ProbChoiceState& s) {
  for (auto& r : s.routers) {
    auto& ns = r.channel(ChannelClass::YChan);
    if (ns.buffer.empty()) {
      ns.direction.reset();
    } else {
      ns.direction = OutputPort::Eject;
    }
  }
}

struct ProbChoiceLevel {
  static constexpr ModelLevel kLevel = ModelLevel::ProbChoice;
  using State = ProbChoiceState;

  const ModelOptions& opts;

  State initial() const { return State{}; }
  State decode(const PackedState& p) const { return decode_prob_choice_state(p); }
  PackedState encode(const State& s) const { return nocpsn::encode(s); }

  State prepare(const State& s) const {
    State next = s;
    if (opts.pattern.injects_at(static_cast<int>(s.phase))) {
      for (int r = 0; r < kRouters; ++r) inject_into(next, RouterId(r), Token{});
    }
    fix_ns_directions(next);
    return next;
  }

  // One choice per unresolved front token of a local or ew buffer.
  void choices(const State& s, detail::ChoiceList& out) const {
    for (const auto& r : s.routers) {
      const auto& local = r.channel(ChannelClass::Local);
      if (!local.buffer.empty() && !local.direction) out.push(detail::local_direction_choice());
      const auto& ew = r.channel(ChannelClass::XChan);
      if (!ew.buffer.empty() && !ew.direction) out.push(detail::xchan_direction_choice());
    }
  }

  State apply(const State& s, const detail::Outcomes& o) const {
    State next = s;
    int k = 0;
    for (auto& r : next.routers) {
      auto& local = r.channel(ChannelClass::Local);
      if (!local.buffer.empty() && !local.direction)
        local.direction = o[k++] == 0 ? OutputPort::ToXNeighbor : OutputPort::ToYNeighbor;
      auto& ew = r.channel(ChannelClass::XChan);
      if (!ew.buffer.empty() && !ew.direction) ew.direction = o[k++] == 0 ? OutputPort::Eject : OutputPort::ToYNeighbor;
    }
    next = complete_cycle(std::move(next), opts, keep_token);
    fix_ns_directions(next);
    return next;
  }

  std::string describe(const State& s) const {
    return detail::describe_noc(s, [](const Token&) { return std::string("*"); });
  }
};

}  // namespace

TransitionDistributionT<ProbChoiceState> prob_choice_step(const ProbChoiceState& s, const ModelOptions& opts) {
  return detail::enumerate_step(ProbChoiceLevel{opts}, s);
}

// Per router: local length + lock, ew length + lock, ns length, then the
// 3-bit permutation index and the previous activity.
PackedState encode(const ProbChoiceState& s) {
  PackedState p;
  packed::set_header(p, {s.noise.resistive, s.noise.inductive, s.clk, s.phase, s.dropped});
  BitWriter w(p);
  for (const auto& r : s.routers) {
    const auto& local = r.channel(ChannelClass::Local);
    const auto& ew = r.channel(ChannelClass::XChan);
    const auto& ns = r.channel(ChannelClass::YChan);
    w.put(static_cast<std::uint64_t>(local.buffer.size()), 3);
    w.put(detail::lock_code(local.direction), 2);
    w.put(static_cast<std::uint64_t>(ew.buffer.size()), 3);
    w.put(detail::lock_code(ew.direction), 2);
    w.put(static_cast<std::uint64_t>(ns.buffer.size()), 3);
    w.put(static_cast<std::uint64_t>(permutation_index(r.order())), 3);
    w.put(static_cast<std::uint64_t>(r.prev_activity), 2);
  }
  return p;
}

ProbChoiceState decode_prob_choice_state(const PackedState& p) {
  ProbChoiceState s;
  const StateHeader h = packed::header(p);
  s.noise = {h.resistive, h.inductive};
  s.clk = h.clk;
  s.phase = h.phase;
  s.dropped = h.dropped;
  BitReader rd(p);
  for (auto& r : s.routers) {
    auto fill = [](ChannelState<Token>& ch, int len) {
      for (int i = 0; i < len; ++i) ch.buffer.push(Token{});
    };
    auto& local = r.channel(ChannelClass::Local);
    fill(local, static_cast<int>(rd.get(3)));
    local.direction = detail::lock_from_code(rd.get(2));
    auto& ew = r.channel(ChannelClass::XChan);
    fill(ew, static_cast<int>(rd.get(3)));
    ew.direction = detail::lock_from_code(rd.get(2));
    fill(r.channel(ChannelClass::YChan), static_cast<int>(rd.get(3)));
    set_order(r, permutation_from_index(static_cast<int>(rd.get(3))));
    r.prev_activity = static_cast<Activity>(rd.get(2));
  }
  fix_ns_directions(s);
  return s;
}

namespace detail {

std::unique_ptr<Model> make_prob_choice_model(const ModelOptions& opts) {
  return std::make_unique<LevelModel<ProbChoiceLevel>>(opts);
}

}  // namespace detail

}  // namespace nocpsn
