#pragma once

// Cycle-accurate semantics of the 2x2 mesh: buffering, X-Y routing,
// round-robin arbitration, synchronous transfer and noise accounting.
//
// The router machinery is templated over the buffered element so the
// concrete model (flits carry a destination), the predicate model (flits
// carry remaining-hop predicates) and the probabilistic-choice model
// (anonymous tokens) share one arbitration implementation.

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "nocpsn/packed_state.hpp"
#include "nocpsn/probability.hpp"
#include "nocpsn/types.hpp"

namespace nocpsn {

struct Flit {
  RouterId dest;

  bool operator==(const Flit&) const = default;
};

/// Bounded FIFO without interior gaps.
template <class Elem>
class BufferQueue {
 public:
  int size() const { return size_; }
  bool empty() const { return size_ == 0; }
  bool full() const { return size_ == kBufferCapacity; }

  const Elem& front() const { return items_[0]; }
  const Elem& operator[](int i) const { return items_[static_cast<std::size_t>(i)]; }

  void push(const Elem& e) {
    if (full()) throw std::logic_error("push into a full buffer");
    items_[size_++] = e;
  }

  Elem pop() {
    if (empty()) throw std::logic_error("pop from an empty buffer");
    Elem e = items_[0];
    std::shift_left(items_.begin(), items_.begin() + size_, 1);
    items_[--size_] = Elem{};
    return e;
  }

  bool operator==(const BufferQueue&) const = default;

 private:
  std::array<Elem, kBufferCapacity> items_{};
  std::uint8_t size_ = 0;
};

template <class Elem>
struct ChannelState {
  BufferQueue<Elem> buffer;
  /// Output requested by the front flit; none while unresolved or empty.
  std::optional<OutputPort> direction;
  bool serviced = false;
  std::uint8_t priority = 0;
  ChannelClass id = ChannelClass::Local;

  bool operator==(const ChannelState&) const = default;
};

template <class Elem>
struct RouterState {
  /// Arbitration order; index 0 has the highest priority.
  std::array<ChannelState<Elem>, kChannels> channels;
  std::uint8_t unserviced = 0;
  std::uint8_t total_unserviced = 0;
  Activity prev_activity = Activity::Low;

  RouterState() {
    for (int i = 0; i < kChannels; ++i) {
      channels[i].id = static_cast<ChannelClass>(i);
      channels[i].priority = static_cast<std::uint8_t>(i);
    }
  }

  ChannelState<Elem>& channel(ChannelClass c) {
    for (auto& ch : channels)
      if (ch.id == c) return ch;
    throw std::logic_error("router lacks a channel class");
  }
  const ChannelState<Elem>& channel(ChannelClass c) const {
    for (const auto& ch : channels)
      if (ch.id == c) return ch;
    throw std::logic_error("router lacks a channel class");
  }

  /// Channel classes in arbitration order.
  std::array<ChannelClass, kChannels> order() const {
    return {channels[0].id, channels[1].id, channels[2].id};
  }

  bool operator==(const RouterState&) const = default;
};

template <class Elem>
struct NocStateT {
  std::array<RouterState<Elem>, kRouters> routers;
  NoiseCounters noise;
  std::uint32_t clk = 0;
  std::uint32_t phase = 0;
  std::uint32_t dropped = 0;

  RouterState<Elem>& router(RouterId r) { return routers[static_cast<std::size_t>(r.value())]; }
  const RouterState<Elem>& router(RouterId r) const { return routers[static_cast<std::size_t>(r.value())]; }

  int flits_in_flight() const {
    int n = 0;
    for (const auto& r : routers)
      for (const auto& ch : r.channels) n += ch.buffer.size();
    return n;
  }

  bool operator==(const NocStateT&) const = default;
};

using NocState = NocStateT<Flit>;

template <class State>
struct Weighted {
  BranchProb prob;
  State state;
};

template <class State>
using TransitionDistributionT = std::vector<Weighted<State>>;

using ActivityVector = std::array<Activity, kRouters>;

template <class Elem>
struct TransferResult {
  NocStateT<Elem> state;
  ActivityVector activity{};
  int ejected = 0;
};

/// Two-phase synchronous arbitration over all four routers. Phase A grants
/// each output port to at most one channel per router, scanning channels in
/// priority order; a transfer also needs the receiving buffer to have had
/// space before the cycle started. Phase B moves the granted flits.
/// `on_hop(elem, port)` rewrites a flit as it enters the next router.
/// Channel directions must already be set for every non-empty buffer.
template <class Elem, class HopFn>
TransferResult<Elem> arbitrate_and_transfer(NocStateT<Elem> s, HopFn&& on_hop) {
  struct Move {
    RouterId to;
    ChannelClass cls;
    Elem elem;
  };
  std::array<std::array<int, kChannels>, kRouters> occupancy{};
  for (int r = 0; r < kRouters; ++r)
    for (const auto& ch : s.routers[r].channels) occupancy[r][static_cast<int>(ch.id)] = ch.buffer.size();

  TransferResult<Elem> out;
  std::array<Move, kRouters * kChannels> moves;
  int n_moves = 0;

  for (int ri = 0; ri < kRouters; ++ri) {
    const RouterId here(ri);
    auto& router = s.routers[ri];
    unsigned granted = 0;
    int sent = 0;
    router.unserviced = 0;
    router.total_unserviced = 0;
    for (auto& ch : router.channels) {
      if (ch.buffer.empty()) {
        ch.serviced = true;
        continue;
      }
      if (!ch.direction) throw std::logic_error("arbitration with an unresolved front flit");
      const OutputPort port = *ch.direction;
      const unsigned bit = 1u << static_cast<unsigned>(port);
      const bool conflict = (granted & bit) != 0;
      bool space = true;
      if (!conflict && port != OutputPort::Eject) {
        space = occupancy[neighbor(here, port).value()][static_cast<int>(receiving_class(port))] < kBufferCapacity;
      }
      if (!conflict && space) {
        granted |= bit;
        ch.serviced = true;
        ch.direction.reset();
        Elem e = ch.buffer.pop();
        ++sent;
        if (port == OutputPort::Eject) {
          ++out.ejected;
        } else {
          moves[n_moves++] = Move{neighbor(here, port), receiving_class(port), on_hop(e, port)};
        }
      } else {
        ch.serviced = false;
        if (conflict) ++router.unserviced;
        ++router.total_unserviced;
      }
    }
    out.activity[ri] = sent == kChannels ? Activity::High : (sent == 0 ? Activity::Low : Activity::Mid);
  }

  for (int i = 0; i < n_moves; ++i) s.router(moves[i].to).channel(moves[i].cls).buffer.push(moves[i].elem);
  out.state = std::move(s);
  return out;
}

/// Round-robin update: unserviced channels move to the front, serviced ones
/// to the back, each group keeping its relative order. Flags and counters
/// are cleared for the next cycle.
template <class Elem>
RouterState<Elem> update_priority(RouterState<Elem> r) {
  std::stable_partition(r.channels.begin(), r.channels.end(), [](const auto& ch) { return !ch.serviced; });
  for (int i = 0; i < kChannels; ++i) {
    r.channels[i].priority = static_cast<std::uint8_t>(i);
    r.channels[i].serviced = false;
  }
  r.unserviced = 0;
  r.total_unserviced = 0;
  return r;
}

struct NoiseUpdate {
  NoiseCounters counters;
  ActivityVector prev{};
};

/// Applies one cycle of router activity to the noise counters and returns
/// the activity history to carry into the next cycle.
NoiseUpdate update_noise(NoiseCounters counters, const ActivityVector& prev, const ActivityVector& now,
                         const ModelOptions& opts);

/// Deterministic tail of a cycle, after injection and direction refresh:
/// arbitrate/transfer, noise update, priority update, clock advance.
template <class Elem, class HopFn>
NocStateT<Elem> complete_cycle(NocStateT<Elem> s, const ModelOptions& opts, HopFn&& on_hop) {
  ActivityVector prev{};
  for (int r = 0; r < kRouters; ++r) prev[r] = s.routers[r].prev_activity;
  auto tr = arbitrate_and_transfer(std::move(s), on_hop);
  const NoiseUpdate nu = update_noise(tr.state.noise, prev, tr.activity, opts);
  tr.state.noise = nu.counters;
  for (int r = 0; r < kRouters; ++r) {
    tr.state.routers[r].prev_activity = nu.prev[r];
    tr.state.routers[r] = update_priority(std::move(tr.state.routers[r]));
  }
  if (opts.track_clk) tr.state.clk = std::min<std::uint32_t>(tr.state.clk + 1, kCounterLimit);
  tr.state.phase = (tr.state.phase + 1) % static_cast<std::uint32_t>(opts.pattern.period());
  return std::move(tr.state);
}

/// Appends a freshly injected element to a local buffer, or counts a drop.
template <class Elem>
void inject_into(NocStateT<Elem>& s, RouterId r, const Elem& e) {
  auto& buf = s.router(r).channel(ChannelClass::Local).buffer;
  if (buf.full()) {
    s.dropped = std::min<std::uint32_t>(s.dropped + 1, 0xFF);
  } else {
    buf.push(e);
  }
}

// Permutations of the three channel classes, indexed 0..5.
int permutation_index(const std::array<ChannelClass, kChannels>& order);
std::array<ChannelClass, kChannels> permutation_from_index(int index);

/// Reorders a router's channels to `order` keeping their contents.
template <class Elem>
void set_order(RouterState<Elem>& r, const std::array<ChannelClass, kChannels>& order) {
  auto old = r.channels;
  for (int i = 0; i < kChannels; ++i) {
    for (const auto& ch : old) {
      if (ch.id == order[i]) r.channels[i] = ch;
    }
    r.channels[i].priority = static_cast<std::uint8_t>(i);
  }
}

// ---- Concrete model ----------------------------------------------------

/// The `k`-th (0..2) destination other than `src`, in ascending router order.
RouterId destination_choice(RouterId src, int k);

NocState initial_noc_state();

/// Sets every non-empty channel's direction from its front flit.
void refresh_directions(NocState& s);

/// Injection step of a cycle: 81 equiprobable branches on an injecting
/// cycle, the unchanged state otherwise.
TransitionDistributionT<NocState> inject_distribution(const NocState& s, const InjectionPattern& pattern);

/// One full cycle of the concrete model (unmerged branches).
TransitionDistributionT<NocState> step_concrete(const NocState& s, const ModelOptions& opts);

/// Deterministic remainder of a concrete cycle once injection happened.
NocState finish_concrete_cycle(NocState s, const ModelOptions& opts);

PackedState encode(const NocState& s);
NocState decode_noc_state(const PackedState& p);

}  // namespace nocpsn
