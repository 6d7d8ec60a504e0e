#include <sstream>

#include "level_model.hpp"

namespace nocpsn {

ServiceBranch service_branch(bool local_priority, bool ns_priority) {
  if (local_priority && ns_priority) return ServiceBranch::LocalNsEw;
  if (!local_priority && !ns_priority) return ServiceBranch::EwLocalNs;
  if (ns_priority) return ServiceBranch::NsEwLocal;
  return ServiceBranch::LocalEwNs;
}

std::array<ChannelClass, kChannels> service_order(ServiceBranch b) {
  using C = ChannelClass;
  switch (b) {
    case ServiceBranch::LocalNsEw: return {C::Local, C::YChan, C::XChan};
    case ServiceBranch::EwLocalNs: return {C::XChan, C::Local, C::YChan};
    case ServiceBranch::NsEwLocal: return {C::YChan, C::XChan, C::Local};
    case ServiceBranch::LocalEwNs: return {C::Local, C::XChan, C::YChan};
  }
  throw std::logic_error("bad service branch");
}

namespace {

struct Request {
  bool active = false;
  OutputPort port = OutputPort::Eject;
};

std::uint8_t& length(BoolQueueRouter& r, ChannelClass c) {
  switch (c) {
    case ChannelClass::Local: return r.local_len;
    case ChannelClass::XChan: return r.ew_len;
    case ChannelClass::YChan: return r.ns_len;
  }
  throw std::logic_error("bad channel class");
}

struct BoolQueueLevel {
  static constexpr ModelLevel kLevel = ModelLevel::BooleanQueue;
  using State = BoolQueueState;

  const ModelOptions& opts;

  State initial() const { return State{}; }
  State decode(const PackedState& p) const { return decode_bool_queue_state(p); }
  PackedState encode(const State& s) const { return nocpsn::encode(s); }

  State prepare(const State& s) const {
    State next = s;
    if (opts.pattern.injects_at(static_cast<int>(s.phase))) {
      for (auto& r : next.routers) {
        if (r.local_len == kBufferCapacity) {
          next.dropped = std::min<std::uint32_t>(next.dropped + 1, 0xFF);
        } else {
          ++r.local_len;
        }
      }
    }
    return next;
  }

  void choices(const State& s, detail::ChoiceList& out) const {
    for (const auto& r : s.routers) {
      if (r.local_len > 0 && !r.local_lock) out.push(detail::local_direction_choice());
      if (r.ew_len > 0 && !r.ew_lock) out.push(detail::xchan_direction_choice());
    }
  }

  // Router decision procedure. With an empty ew buffer nothing can
  // conflict; otherwise the priority booleans pick one of four servicing
  // orders and each buffer in turn claims its output port. A buffer that
  // loses its port, or whose receiver was full at the start of the cycle,
  // stays locked to its direction and moves ahead of ew.
  State apply(const State& s, const detail::Outcomes& o) const {
    State next = s;
    std::array<std::array<Request, kChannels>, kRouters> req{};
    int k = 0;
    for (int ri = 0; ri < kRouters; ++ri) {
      const auto& r = s.routers[ri];
      auto& q = req[ri];
      if (r.local_len > 0) {
        q[0] = {true, r.local_lock ? *r.local_lock
                                   : (o[k++] == 0 ? OutputPort::ToXNeighbor : OutputPort::ToYNeighbor)};
      }
      if (r.ew_len > 0) {
        q[1] = {true, r.ew_lock ? *r.ew_lock : (o[k++] == 0 ? OutputPort::Eject : OutputPort::ToYNeighbor)};
      }
      if (r.ns_len > 0) q[2] = {true, OutputPort::Eject};
    }

    std::array<std::array<bool, kChannels>, kRouters> sent{};
    ActivityVector activity{};
    for (int ri = 0; ri < kRouters; ++ri) {
      const auto& r = s.routers[ri];
      const auto order = r.ew_len == 0 ? service_order(ServiceBranch::LocalNsEw)
                                       : service_order(service_branch(r.local_priority, r.ns_priority));
      unsigned claimed = 0;
      int count = 0;
      for (const ChannelClass c : order) {
        const Request& rq = req[ri][static_cast<int>(c)];
        if (!rq.active) continue;
        const unsigned bit = 1u << static_cast<unsigned>(rq.port);
        if (claimed & bit) continue;
        if (rq.port != OutputPort::Eject) {
          const auto& dst = s.routers[neighbor(RouterId(ri), rq.port).value()];
          const int occ = rq.port == OutputPort::ToXNeighbor ? dst.ew_len : dst.ns_len;
          if (occ >= kBufferCapacity) continue;
        }
        claimed |= bit;
        sent[ri][static_cast<int>(c)] = true;
        ++count;
      }
      activity[ri] = count == kChannels ? Activity::High : (count == 0 ? Activity::Low : Activity::Mid);
    }

    for (int ri = 0; ri < kRouters; ++ri) {
      auto& r = next.routers[ri];
      for (int c = 0; c < kChannels; ++c) {
        const Request& rq = req[ri][c];
        if (!rq.active) continue;
        const auto cls = static_cast<ChannelClass>(c);
        std::optional<OutputPort> lock;
        if (sent[ri][c]) {
          --length(r, cls);
          if (rq.port != OutputPort::Eject) {
            auto& dst = next.routers[neighbor(RouterId(ri), rq.port).value()];
            ++length(dst, receiving_class(rq.port));
          }
        } else {
          lock = rq.port;
        }
        if (cls == ChannelClass::Local) r.local_lock = lock;
        if (cls == ChannelClass::XChan) r.ew_lock = lock;
      }
      const bool local_denied = req[ri][0].active && !sent[ri][0];
      const bool ew_denied = req[ri][1].active && !sent[ri][1];
      const bool ns_denied = req[ri][2].active && !sent[ri][2];
      if (local_denied != ew_denied) r.local_priority = local_denied;
      if (ns_denied != ew_denied) r.ns_priority = ns_denied;
    }

    ActivityVector prev{};
    for (int ri = 0; ri < kRouters; ++ri) prev[ri] = s.routers[ri].prev_activity;
    const NoiseUpdate nu = update_noise(s.noise, prev, activity, opts);
    next.noise = nu.counters;
    for (int ri = 0; ri < kRouters; ++ri) next.routers[ri].prev_activity = nu.prev[ri];
    if (opts.track_clk) next.clk = std::min<std::uint32_t>(s.clk + 1, kCounterLimit);
    next.phase = (s.phase + 1) % static_cast<std::uint32_t>(opts.pattern.period());
    return next;
  }

  std::string describe(const State& s) const {
    std::ostringstream os;
    os << "clk=" << s.clk << " phase=" << s.phase << " R=" << s.noise.resistive << " I=" << s.noise.inductive;
    for (int ri = 0; ri < kRouters; ++ri) {
      const auto& r = s.routers[ri];
      os << "\n  r" << ri << " local=" << int(r.local_len) << " ew=" << int(r.ew_len) << " ns=" << int(r.ns_len)
         << " localPriority=" << r.local_priority << " nsPriority=" << r.ns_priority;
      if (r.local_lock) os << " localL" << to_string(*r.local_lock);
      if (r.ew_lock) os << " ewL" << to_string(*r.ew_lock);
      os << " prev=" << to_string(r.prev_activity);
    }
    return os.str();
  }
};

}  // namespace

BoolQueueState project_to_bool_queue(const ProbChoiceState& s) {
  BoolQueueState out;
  out.noise = s.noise;
  out.clk = s.clk;
  out.phase = s.phase;
  out.dropped = s.dropped;
  for (int ri = 0; ri < kRouters; ++ri) {
    const auto& src = s.routers[ri];
    auto& dst = out.routers[ri];
    const auto& local = src.channel(ChannelClass::Local);
    const auto& ew = src.channel(ChannelClass::XChan);
    const auto& ns = src.channel(ChannelClass::YChan);
    dst.local_len = static_cast<std::uint8_t>(local.buffer.size());
    dst.ew_len = static_cast<std::uint8_t>(ew.buffer.size());
    dst.ns_len = static_cast<std::uint8_t>(ns.buffer.size());
    dst.local_lock = local.buffer.empty() ? std::nullopt : local.direction;
    dst.ew_lock = ew.buffer.empty() ? std::nullopt : ew.direction;
    const auto order = src.order();
    auto rank = [&](ChannelClass c) { return std::find(order.begin(), order.end(), c) - order.begin(); };
    dst.local_priority = rank(ChannelClass::Local) < rank(ChannelClass::XChan);
    dst.ns_priority = rank(ChannelClass::YChan) < rank(ChannelClass::XChan);
    dst.prev_activity = src.prev_activity;
  }
  return out;
}

TransitionDistributionT<BoolQueueState> bool_queue_step(const BoolQueueState& s, const ModelOptions& opts) {
  return detail::enumerate_step(BoolQueueLevel{opts}, s);
}

PackedState encode(const BoolQueueState& s) {
  PackedState p;
  packed::set_header(p, {s.noise.resistive, s.noise.inductive, s.clk, s.phase, s.dropped});
  BitWriter w(p);
  for (const auto& r : s.routers) {
    w.put(r.local_len, 3);
    w.put(r.ew_len, 3);
    w.put(r.ns_len, 3);
    w.put(r.local_priority ? 1 : 0, 1);
    w.put(r.ns_priority ? 1 : 0, 1);
    w.put(detail::lock_code(r.local_lock), 2);
    w.put(detail::lock_code(r.ew_lock), 2);
    w.put(static_cast<std::uint64_t>(r.prev_activity), 2);
  }
  return p;
}

BoolQueueState decode_bool_queue_state(const PackedState& p) {
  BoolQueueState s;
  const StateHeader h = packed::header(p);
  s.noise = {h.resistive, h.inductive};
  s.clk = h.clk;
  s.phase = h.phase;
  s.dropped = h.dropped;
  BitReader rd(p);
  for (auto& r : s.routers) {
    r.local_len = static_cast<std::uint8_t>(rd.get(3));
    r.ew_len = static_cast<std::uint8_t>(rd.get(3));
    r.ns_len = static_cast<std::uint8_t>(rd.get(3));
    r.local_priority = rd.get(1) != 0;
    r.ns_priority = rd.get(1) != 0;
    r.local_lock = detail::lock_from_code(rd.get(2));
    r.ew_lock = detail::lock_from_code(rd.get(2));
    r.prev_activity = static_cast<Activity>(rd.get(2));
  }
  return s;
}

namespace detail {

std::unique_ptr<Model> make_bool_queue_model(const ModelOptions& opts) {
  return std::make_unique<LevelModel<BoolQueueLevel>>(opts);
}

}  // namespace detail

}  // namespace nocpsn
