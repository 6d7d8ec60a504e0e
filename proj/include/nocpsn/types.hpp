#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace nocpsn {

inline constexpr int kRouters = 4;
inline constexpr int kChannels = 3;
inline constexpr int kBufferCapacity = 4;

/// Raised for malformed parameters and violated preconditions.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Router index in the 2x2 mesh. Routers 0-1 form the top row, 2-3 the
/// bottom row, so the X neighbor is `id ^ 1` and the Y neighbor `id ^ 2`.
class RouterId {
 public:
  constexpr RouterId() = default;
  constexpr explicit RouterId(int id) : id_(static_cast<std::uint8_t>(id)) {
    if (id < 0 || id >= kRouters) throw InvalidArgument("router id out of range");
  }

  constexpr int value() const { return id_; }
  constexpr int column() const { return id_ & 1; }
  constexpr int row() const { return id_ >> 1; }
  constexpr RouterId x_neighbor() const { return RouterId(id_ ^ 1); }
  constexpr RouterId y_neighbor() const { return RouterId(id_ ^ 2); }

  constexpr auto operator<=>(const RouterId&) const = default;

 private:
  std::uint8_t id_ = 0;
};

enum class ChannelClass : std::uint8_t { Local = 0, XChan = 1, YChan = 2 };
enum class OutputPort : std::uint8_t { ToXNeighbor = 0, ToYNeighbor = 1, Eject = 2 };
enum class Activity : std::uint8_t { Low = 0, Mid = 1, High = 2 };

std::string_view to_string(ChannelClass c);
std::string_view to_string(OutputPort p);
std::string_view to_string(Activity a);

/// Dimension-ordered routing: X first, then Y, then eject.
constexpr OutputPort xy_route(RouterId current, RouterId dest) {
  if (current == dest) return OutputPort::Eject;
  if (current.column() != dest.column()) return OutputPort::ToXNeighbor;
  return OutputPort::ToYNeighbor;
}

/// Router reached through `port`; undefined for Eject.
constexpr RouterId neighbor(RouterId r, OutputPort port) {
  return port == OutputPort::ToXNeighbor ? r.x_neighbor() : r.y_neighbor();
}

/// Input channel a flit lands in after leaving through `port`.
constexpr ChannelClass receiving_class(OutputPort port) {
  return port == OutputPort::ToXNeighbor ? ChannelClass::XChan : ChannelClass::YChan;
}

/// Flit-injection schedule shared by all four routers. Every-other-cycle is
/// a period-2 schedule with one injecting cycle.
class InjectionPattern {
 public:
  enum class Kind : std::uint8_t { EveryOtherCycle, Burst };

  static InjectionPattern every_other_cycle() { return InjectionPattern(Kind::EveryOtherCycle, 1, 1); }
  static InjectionPattern burst(int burst_len, int idle_len);
  /// Accepts "every-other" or "burst:<b>,<i>".
  static InjectionPattern parse(std::string_view text);

  Kind kind() const { return kind_; }
  int burst_length() const { return burst_; }
  int idle_length() const { return idle_; }
  int period() const { return burst_ + idle_; }
  bool injects_at(int phase) const { return phase < burst_; }
  double flits_per_cycle() const { return static_cast<double>(burst_) / period(); }
  std::string to_string() const;

  bool operator==(const InjectionPattern&) const = default;

 private:
  InjectionPattern(Kind k, int b, int i) : kind_(k), burst_(b), idle_(i) {}

  Kind kind_;
  int burst_;
  int idle_;
};

/// Saturation caps for the noise counters. A cap of 0 disables the counter
/// entirely; a disabled inductive counter also drops the activity history.
struct NoiseCaps {
  std::optional<std::uint32_t> resistive;
  std::optional<std::uint32_t> inductive;

  bool operator==(const NoiseCaps&) const = default;
};

struct NoiseCounters {
  std::uint32_t resistive = 0;
  std::uint32_t inductive = 0;

  bool operator==(const NoiseCounters&) const = default;
};

/// Largest value a stored counter can hold regardless of caps.
inline constexpr std::uint32_t kCounterLimit = 0xFFFF;

struct ModelOptions {
  InjectionPattern pattern = InjectionPattern::every_other_cycle();
  NoiseCaps caps;
  /// When false the cycle counter is transient: it is not part of the state
  /// and the reachable graph of a periodic pattern is finite under caps.
  bool track_clk = true;

  bool tracks_inductive() const { return !caps.inductive || *caps.inductive > 0; }
  bool tracks_resistive() const { return !caps.resistive || *caps.resistive > 0; }
};

/// Per-router noise contribution of one completed cycle.
///   resistive += 1 when the router serviced all three channels;
///   inductive += 1 on a direct High<->Low switch against the previous cycle.
constexpr int resistive_increment(Activity now) { return now == Activity::High ? 1 : 0; }
constexpr int inductive_increment(Activity prev, Activity now) {
  return (prev == Activity::High && now == Activity::Low) || (prev == Activity::Low && now == Activity::High) ? 1 : 0;
}

std::uint32_t saturate(std::uint64_t value, std::optional<std::uint32_t> cap);

}  // namespace nocpsn
