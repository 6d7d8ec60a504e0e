#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <utility>

namespace nocpsn {

/// Canonical, fixed-width encoding of a model state. Word 0 carries the
/// fields every level shares (noise counters, clock, injection phase and the
/// dropped-flit diagnostic); words 1-3 carry the level-specific router data.
/// Two states are semantically equal iff their packed forms are equal.
struct PackedState {
  std::array<std::uint64_t, 4> words{};

  auto operator<=>(const PackedState&) const = default;

  template <typename H>
  friend H AbslHashValue(H h, const PackedState& s) {
    return H::combine(std::move(h), s.words[0], s.words[1], s.words[2], s.words[3]);
  }
};

struct StateHeader {
  std::uint32_t resistive = 0;
  std::uint32_t inductive = 0;
  std::uint32_t clk = 0;
  std::uint32_t phase = 0;
  std::uint32_t dropped = 0;
};

namespace packed {

inline StateHeader header(const PackedState& s) {
  const std::uint64_t w = s.words[0];
  return StateHeader{static_cast<std::uint32_t>(w & 0xFFFF), static_cast<std::uint32_t>((w >> 16) & 0xFFFF),
                     static_cast<std::uint32_t>((w >> 32) & 0xFFFF), static_cast<std::uint32_t>((w >> 48) & 0xFF),
                     static_cast<std::uint32_t>((w >> 56) & 0xFF)};
}

inline void set_header(PackedState& s, const StateHeader& h) {
  s.words[0] = (static_cast<std::uint64_t>(h.resistive & 0xFFFF)) | (static_cast<std::uint64_t>(h.inductive & 0xFFFF) << 16) |
               (static_cast<std::uint64_t>(h.clk & 0xFFFF) << 32) | (static_cast<std::uint64_t>(h.phase & 0xFF) << 48) |
               (static_cast<std::uint64_t>(h.dropped & 0xFF) << 56);
}

}  // namespace packed

/// Appends little bit fields into words 1..3 of a PackedState.
class BitWriter {
 public:
  explicit BitWriter(PackedState& s) : state_(s) {}

  void put(std::uint64_t value, int bits) {
    for (int i = 0; i < bits; ++i, ++pos_) {
      if ((value >> i) & 1u) state_.words[1 + pos_ / 64] |= std::uint64_t{1} << (pos_ % 64);
    }
  }

 private:
  PackedState& state_;
  int pos_ = 0;
};

class BitReader {
 public:
  explicit BitReader(const PackedState& s) : state_(s) {}

  std::uint64_t get(int bits) {
    std::uint64_t v = 0;
    for (int i = 0; i < bits; ++i, ++pos_) {
      v |= ((state_.words[1 + pos_ / 64] >> (pos_ % 64)) & 1u) << i;
    }
    return v;
  }

 private:
  const PackedState& state_;
  int pos_ = 0;
};

}  // namespace nocpsn
