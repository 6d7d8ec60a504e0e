#pragma once

#include <map>
#include <set>
#include <vector>

#include "nocpsn/abstractions.hpp"
#include "nocpsn/rng.hpp"

namespace nocpsn::testing {

/// Reachable states collected along seeded random paths.
inline std::vector<PackedState> sample_states(const Model& m, int paths, int depth, std::uint64_t seed = 7) {
  std::set<PackedState> seen;
  for (int p = 0; p < paths; ++p) {
    CounterRng rng(seed, static_cast<std::uint64_t>(p));
    PackedState s = m.initial();
    seen.insert(s);
    for (int d = 0; d < depth; ++d) {
      s = m.sample_step(s, rng);
      seen.insert(s);
    }
  }
  return {seen.begin(), seen.end()};
}

/// Distribution as an exact map, duplicates summed.
template <class State, class Encode>
std::map<PackedState, Rational> merged(const TransitionDistributionT<State>& d, Encode&& encode) {
  std::map<PackedState, Rational> out;
  for (const auto& w : d)
    out[encode(w.state)] += Rational(static_cast<unsigned long>(w.prob.num), static_cast<unsigned long>(w.prob.den));
  return out;
}

inline Rational total(const TransitionDistribution& d) {
  Rational t;
  for (const auto& w : d) t += Rational(static_cast<unsigned long>(w.prob.num), static_cast<unsigned long>(w.prob.den));
  return t;
}

inline ModelOptions options_for(const char* pattern, bool track_clk = true) {
  ModelOptions o;
  o.pattern = InjectionPattern::parse(pattern);
  o.track_clk = track_clk;
  return o;
}

}  // namespace nocpsn::testing
