#include "nocpsn/types.hpp"

#include <algorithm>
#include <charconv>

#include "nocpsn/probability.hpp"

namespace nocpsn {

std::string_view to_string(ChannelClass c) {
  switch (c) {
    case ChannelClass::Local: return "local";
    case ChannelClass::XChan: return "ew";
    case ChannelClass::YChan: return "ns";
  }
  return "?";
}

std::string_view to_string(OutputPort p) {
  switch (p) {
    case OutputPort::ToXNeighbor: return "x";
    case OutputPort::ToYNeighbor: return "y";
    case OutputPort::Eject: return "eject";
  }
  return "?";
}

std::string_view to_string(Activity a) {
  switch (a) {
    case Activity::Low: return "low";
    case Activity::Mid: return "mid";
    case Activity::High: return "high";
  }
  return "?";
}

InjectionPattern InjectionPattern::burst(int burst_len, int idle_len) {
  if (burst_len <= 0 || idle_len <= 0) throw InvalidArgument("burst and idle lengths must be positive");
  if (burst_len + idle_len > 255) throw InvalidArgument("injection period must not exceed 255 cycles");
  return InjectionPattern(Kind::Burst, burst_len, idle_len);
}

namespace {

int parse_positive(std::string_view s) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw InvalidArgument("malformed integer in pattern: " + std::string(s));
  return v;
}

}  // namespace

InjectionPattern InjectionPattern::parse(std::string_view text) {
  if (text == "every-other") return every_other_cycle();
  constexpr std::string_view prefix = "burst:";
  if (text.substr(0, prefix.size()) == prefix) {
    const auto body = text.substr(prefix.size());
    const auto comma = body.find(',');
    if (comma == std::string_view::npos) throw InvalidArgument("pattern must look like burst:<b>,<i>");
    return burst(parse_positive(body.substr(0, comma)), parse_positive(body.substr(comma + 1)));
  }
  throw InvalidArgument("unknown injection pattern: " + std::string(text));
}

std::string InjectionPattern::to_string() const {
  if (kind_ == Kind::EveryOtherCycle) return "every-other";
  return "burst:" + std::to_string(burst_) + "," + std::to_string(idle_);
}

std::uint32_t saturate(std::uint64_t value, std::optional<std::uint32_t> cap) {
  const std::uint64_t limit = cap ? std::min<std::uint64_t>(*cap, kCounterLimit) : kCounterLimit;
  return static_cast<std::uint32_t>(std::min(value, limit));
}

std::string to_string(ArithmeticMode m) { return m == ArithmeticMode::Rational ? "rational" : "float"; }

ArithmeticMode parse_arithmetic_mode(const std::string& text) {
  if (text == "rational") return ArithmeticMode::Rational;
  if (text == "float") return ArithmeticMode::Float;
  throw InvalidArgument("unknown arithmetic mode: " + text);
}

}  // namespace nocpsn
