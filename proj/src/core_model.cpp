#include "nocpsn/core_model.hpp"

namespace nocpsn {

namespace {

constexpr std::array<std::array<ChannelClass, kChannels>, 6> kPermutations{{
    {ChannelClass::Local, ChannelClass::XChan, ChannelClass::YChan},
    {ChannelClass::Local, ChannelClass::YChan, ChannelClass::XChan},
    {ChannelClass::XChan, ChannelClass::Local, ChannelClass::YChan},
    {ChannelClass::XChan, ChannelClass::YChan, ChannelClass::Local},
    {ChannelClass::YChan, ChannelClass::Local, ChannelClass::XChan},
    {ChannelClass::YChan, ChannelClass::XChan, ChannelClass::Local},
}};

Flit keep_flit(const Flit& f, OutputPort) { return f; }

}  // namespace

int permutation_index(const std::array<ChannelClass, kChannels>& order) {
  for (int i = 0; i < static_cast<int>(kPermutations.size()); ++i)
    if (kPermutations[i] == order) return i;
  throw std::logic_error("channel order is not a permutation");
}

std::array<ChannelClass, kChannels> permutation_from_index(int index) {
  if (index < 0 || index >= static_cast<int>(kPermutations.size())) throw std::logic_error("bad permutation index");
  return kPermutations[index];
}

NoiseUpdate update_noise(NoiseCounters counters, const ActivityVector& prev, const ActivityVector& now,
                         const ModelOptions& opts) {
  int high = 0;
  int switches = 0;
  for (int r = 0; r < kRouters; ++r) {
    high += resistive_increment(now[r]);
    switches += inductive_increment(prev[r], now[r]);
  }
  NoiseUpdate out;
  out.counters = counters;
  if (opts.tracks_resistive()) out.counters.resistive = saturate(std::uint64_t{counters.resistive} + high, opts.caps.resistive);
  if (opts.tracks_inductive()) {
    out.counters.inductive = saturate(std::uint64_t{counters.inductive} + switches, opts.caps.inductive);
    out.prev = now;
  } else {
    out.prev.fill(Activity::Low);
  }
  return out;
}

RouterId destination_choice(RouterId src, int k) {
  int seen = 0;
  for (int d = 0; d < kRouters; ++d) {
    if (d == src.value()) continue;
    if (seen++ == k) return RouterId(d);
  }
  throw std::logic_error("destination choice out of range");
}

NocState initial_noc_state() { return NocState{}; }

void refresh_directions(NocState& s) {
  for (int r = 0; r < kRouters; ++r) {
    for (auto& ch : s.routers[r].channels) {
      if (ch.buffer.empty()) {
        ch.direction.reset();
      } else {
        ch.direction = xy_route(RouterId(r), ch.buffer.front().dest);
      }
    }
  }
}

TransitionDistributionT<NocState> inject_distribution(const NocState& s, const InjectionPattern& pattern) {
  TransitionDistributionT<NocState> out;
  if (!pattern.injects_at(static_cast<int>(s.phase))) {
    out.push_back({BranchProb::one(), s});
    return out;
  }
  out.reserve(81);
  for (int combo = 0; combo < 81; ++combo) {
    NocState next = s;
    int c = combo;
    for (int r = 0; r < kRouters; ++r, c /= 3) {
      inject_into(next, RouterId(r), Flit{destination_choice(RouterId(r), c % 3)});
    }
    out.push_back({BranchProb{1, 81}, std::move(next)});
  }
  return out;
}

NocState finish_concrete_cycle(NocState s, const ModelOptions& opts) {
  refresh_directions(s);
  s = complete_cycle(std::move(s), opts, keep_flit);
  refresh_directions(s);
  return s;
}

TransitionDistributionT<NocState> step_concrete(const NocState& s, const ModelOptions& opts) {
  auto branches = inject_distribution(s, opts.pattern);
  for (auto& b : branches) b.state = finish_concrete_cycle(std::move(b.state), opts);
  return branches;
}

// Layout per router, channel classes in fixed order Local, XChan, YChan:
// 3-bit length and four 2-bit destination slots; then a 3-bit permutation
// index and a 2-bit previous activity. Empty slots are zero.
PackedState encode(const NocState& s) {
  PackedState p;
  packed::set_header(p, {s.noise.resistive, s.noise.inductive, s.clk, s.phase, s.dropped});
  BitWriter w(p);
  for (const auto& r : s.routers) {
    for (int c = 0; c < kChannels; ++c) {
      const auto& buf = r.channel(static_cast<ChannelClass>(c)).buffer;
      w.put(static_cast<std::uint64_t>(buf.size()), 3);
      for (int i = 0; i < kBufferCapacity; ++i) w.put(i < buf.size() ? static_cast<std::uint64_t>(buf[i].dest.value()) : 0, 2);
    }
    w.put(static_cast<std::uint64_t>(permutation_index(r.order())), 3);
    w.put(static_cast<std::uint64_t>(r.prev_activity), 2);
  }
  return p;
}

NocState decode_noc_state(const PackedState& p) {
  NocState s;
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
        const int d = static_cast<int>(rd.get(2));
        if (i < len) buf.push(Flit{RouterId(d)});
      }
    }
    set_order(r, permutation_from_index(static_cast<int>(rd.get(3))));
    r.prev_activity = static_cast<Activity>(rd.get(2));
  }
  refresh_directions(s);
  return s;
}

}  // namespace nocpsn
