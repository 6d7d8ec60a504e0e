#include <doctest.h>

#include <vector>

#include "nocpsn/pmc.hpp"
#include "support.hpp"

using namespace nocpsn;
using nocpsn::testing::options_for;

namespace {

Rational exact(const CheckResult& r) {
  REQUIRE(r.exact_value);
  return Rational(*r.exact_value);
}

ModelOptions with_caps(ModelOptions o, std::optional<std::uint32_t> resistive, std::optional<std::uint32_t> inductive) {
  o.caps.resistive = resistive;
  o.caps.inductive = inductive;
  return o;
}

}  // namespace

TEST_CASE("zero cycles gives probability zero") {
  auto m = make_model(ModelLevel::Concrete, ModelOptions{});
  const auto r = check_transient(*m, {NoiseKind::Resistive, 1, 0});
  CHECK(r.probability == 0.0);
  CHECK(exact(r) == 0);
}

TEST_CASE("engine matches path enumeration exactly") {
  struct Case {
    ModelLevel level;
    const char* pattern;
    NoiseKind kind;
    std::uint32_t threshold;
    std::uint32_t cycles;
  };
  const std::vector<Case> cases = {
      {ModelLevel::Concrete, "burst:3,7", NoiseKind::Resistive, 1, 5},
      {ModelLevel::Concrete, "burst:2,4", NoiseKind::Inductive, 1, 5},
      {ModelLevel::Predicate, "burst:3,7", NoiseKind::Resistive, 2, 5},
      {ModelLevel::ProbChoice, "burst:3,7", NoiseKind::Resistive, 1, 6},
      {ModelLevel::ProbChoice, "burst:2,4", NoiseKind::Inductive, 1, 6},
      {ModelLevel::BooleanQueue, "burst:3,7", NoiseKind::Resistive, 1, 6},
      {ModelLevel::BooleanQueue, "burst:3,7", NoiseKind::Inductive, 1, 6},
      {ModelLevel::BooleanQueue, "every-other", NoiseKind::Resistive, 1, 6},
      {ModelLevel::BooleanQueue, "burst:2,4", NoiseKind::Resistive, 3, 6},
  };
  for (const auto& c : cases) {
    CAPTURE(to_string(c.level));
    CAPTURE(c.pattern);
    CAPTURE(to_string(c.kind));
    auto m = make_model(c.level, options_for(c.pattern));
    const PropertySpec prop{c.kind, c.threshold, c.cycles};
    const auto oracle = brute_force_check(*m, prop);
    CHECK(oracle.total_mass == 1);
    CHECK(exact(check_transient(*m, prop)) == oracle.probability);
  }
}

TEST_CASE("path enumeration refuses long horizons") {
  auto m = make_model(ModelLevel::BooleanQueue, ModelOptions{});
  CHECK_THROWS_AS(brute_force_check(*m, {NoiseKind::Resistive, 1, kBruteForceMaxCycles + 1}), InvalidArgument);
}

TEST_CASE("probability is monotone in the horizon and antitone in the threshold") {
  auto m = make_model(ModelLevel::BooleanQueue, with_caps(options_for("burst:2,4"), 5, 0));
  const std::vector<std::uint32_t> ks{1, 2, 3, 5};
  const auto s = transient_series(*m, NoiseKind::Resistive, ks, 12);
  REQUIRE(s.exact.size() == ks.size());
  for (std::size_t k = 0; k < ks.size(); ++k) {
    CHECK(Rational(s.exact[k][0]) == 0);
    for (std::uint32_t n = 1; n <= 12; ++n) {
      CHECK(Rational(s.exact[k][n - 1]) <= Rational(s.exact[k][n]));
      if (k > 0) CHECK(Rational(s.exact[k][n]) <= Rational(s.exact[k - 1][n]));
    }
  }
  // The series agrees with single checks.
  for (const std::uint32_t n : {4u, 9u, 12u})
    CHECK(exact(check_transient(*m, {NoiseKind::Resistive, 2, n})) == Rational(s.exact[1][n]));
}

TEST_CASE("merging identical states changes counts, not probabilities") {
  auto m = make_model(ModelLevel::ProbChoice, options_for("burst:2,4"));
  const PropertySpec prop{NoiseKind::Resistive, 1, 7};
  EngineOptions unmerged;
  unmerged.merge_states = false;
  const auto a = check_transient(*m, prop);
  const auto b = check_transient(*m, prop, unmerged);
  CHECK(exact(a) == exact(b));
  CHECK(b.states_explored >= a.states_explored);
}

TEST_CASE("caps at or above the threshold do not change the answer") {
  const ModelOptions base = options_for("burst:2,4");
  {
    const PropertySpec prop{NoiseKind::Resistive, 3, 11};
    const auto reference = exact(check_transient(*make_model(ModelLevel::BooleanQueue, with_caps(base, {}, 0)), prop));
    CHECK(reference > 0);
    for (const std::uint32_t cap : {3u, 4u, 9u}) {
      CAPTURE(cap);
      auto m = make_model(ModelLevel::BooleanQueue, with_caps(base, cap, 0));
      CHECK(exact(check_transient(*m, prop)) == reference);
    }
  }
  // Disabling the counter not under test is sound as well.
  const PropertySpec prop{NoiseKind::Resistive, 2, 8};
  const auto both = exact(check_transient(*make_model(ModelLevel::BooleanQueue, base), prop));
  CHECK(exact(check_transient(*make_model(ModelLevel::BooleanQueue, with_caps(base, 2, 0)), prop)) == both);
  const PropertySpec ind{NoiseKind::Inductive, 1, 8};
  const auto both_i = exact(check_transient(*make_model(ModelLevel::BooleanQueue, base), ind));
  CHECK(exact(check_transient(*make_model(ModelLevel::BooleanQueue, with_caps(base, 0, 1)), ind)) == both_i);
}

TEST_CASE("float mode agrees with rational mode") {
  auto m = make_model(ModelLevel::BooleanQueue, ModelOptions{});
  const PropertySpec prop{NoiseKind::Resistive, 1, 14};
  EngineOptions f;
  f.mode = ArithmeticMode::Float;
  const auto a = check_transient(*m, prop);
  const auto b = check_transient(*m, prop, f);
  CHECK_FALSE(b.exact_value);
  CHECK(b.probability == doctest::Approx(a.probability).epsilon(1e-12));
  CHECK(default_mode_for(30) == ArithmeticMode::Rational);
  CHECK(default_mode_for(31) == ArithmeticMode::Float);
}

TEST_CASE("checks are deterministic") {
  auto m = make_model(ModelLevel::BooleanQueue, options_for("burst:3,7"));
  const PropertySpec prop{NoiseKind::Inductive, 1, 12};
  const auto a = check_transient(*m, prop);
  const auto b = check_transient(*m, prop);
  CHECK(*a.exact_value == *b.exact_value);
  CHECK(a.states_explored == b.states_explored);
}

TEST_CASE("invalid properties are rejected") {
  const ModelOptions base = options_for("burst:3,7");
  auto capped = make_model(ModelLevel::BooleanQueue, with_caps(base, 4, 0));
  CHECK_THROWS_AS(check_transient(*capped, {NoiseKind::Resistive, 5, 3}), InvalidArgument);
  CHECK_THROWS_AS(check_transient(*capped, {NoiseKind::Inductive, 1, 3}), InvalidArgument);
  CHECK_THROWS_AS(check_transient(*capped, {NoiseKind::Resistive, 0, 3}), InvalidArgument);
  CHECK_NOTHROW(validate_property(*capped, NoiseKind::Resistive, 4));
  // The reward graph needs a transient clock.
  CHECK_THROWS_AS(RewardGraph(*capped, 1000), InvalidArgument);
}

TEST_CASE("reward graph agrees with forward propagation") {
  const std::vector<std::uint32_t> ks{1, 2, 4};
  for (const NoiseKind kind : {NoiseKind::Resistive, NoiseKind::Inductive}) {
    CAPTURE(to_string(kind));
    // Capping the watched counter and dropping the other keeps the forward
    // state space small without changing the answer.
    ModelOptions capped = options_for("burst:2,4", true);
    capped.caps.resistive = kind == NoiseKind::Resistive ? 4u : 0u;
    capped.caps.inductive = kind == NoiseKind::Inductive ? 4u : 0u;
    auto tracked = make_model(ModelLevel::BooleanQueue, capped);
    auto periodic = make_model(ModelLevel::BooleanQueue, options_for("burst:2,4", false));
    const RewardGraph g(*periodic, 10'000'000);
    const auto fwd = transient_series(*tracked, kind, ks, 14);
    const auto rg = g.series(kind, ks, 14, ArithmeticMode::Rational);
    for (std::size_t k = 0; k < ks.size(); ++k)
      for (std::uint32_t n = 0; n <= 14; ++n) CHECK(Rational(rg.exact[k][n]) == Rational(fwd.exact[k][n]));

    EngineOptions f;
    f.mode = ArithmeticMode::Float;
    const auto fwd_float = transient_series(*tracked, kind, ks, 30, f);
    const auto rg_float = g.series(kind, ks, 30, ArithmeticMode::Float);
    for (std::size_t k = 0; k < ks.size(); ++k)
      for (std::uint32_t n = 0; n <= 30; ++n)
        CHECK(std::abs(rg_float.probability[k][n] - fwd_float.probability[k][n]) <= 1e-9);

    const auto single = check_reward_bounded(*periodic, {kind, 2, 14});
    CHECK(exact(single) == Rational(fwd.exact[1][14]));
  }
}

TEST_CASE("float series never decrease with the horizon") {
  // Idle cycles add exactly nothing; rounding must not show up as a dip.
  const RewardGraph g(*make_model(ModelLevel::BooleanQueue, options_for("burst:2,4", false)), 10'000'000);
  const std::vector<std::uint32_t> ks{1, 2, 3, 6};
  for (const NoiseKind kind : {NoiseKind::Resistive, NoiseKind::Inductive}) {
    const auto s = g.series(kind, ks, 120, ArithmeticMode::Float);
    for (std::size_t k = 0; k < ks.size(); ++k)
      for (std::uint32_t n = 1; n <= 120; ++n) CHECK(s.probability[k][n] >= s.probability[k][n - 1]);
  }
}

TEST_CASE("reachable graph certificates") {
  SUBCASE("a sparse burst never makes noise") {
    for (const ModelLevel level : kAllLevels) {
      CAPTURE(to_string(level));
      const RewardGraph g(*make_model(level, options_for("burst:1,2", false)), 10'000'000);
      CHECK(g.certificate(NoiseKind::Resistive).noise_free());
      CHECK(g.certificate(NoiseKind::Inductive).noise_free());
      CHECK(g.certificate(NoiseKind::Resistive).reachable_states == g.states());
      const auto r = check_reward_bounded(*make_model(level, options_for("burst:1,2", false)),
                                          {NoiseKind::Resistive, 1, 200});
      CHECK(r.probability == 0.0);
      REQUIRE(r.certificate);
      CHECK(r.certificate->noise_free());
    }
  }
  SUBCASE("a dense burst does") {
    const RewardGraph g(*make_model(ModelLevel::BooleanQueue, options_for("burst:3,7", false)), 10'000'000);
    CHECK_FALSE(g.certificate(NoiseKind::Resistive).noise_free());
    CHECK_FALSE(g.certificate(NoiseKind::Inductive).noise_free());
  }
}

TEST_CASE("state-space exploration") {
  auto m = make_model(ModelLevel::Concrete, ModelOptions{});
  const auto zero = explore(*m, 0);
  REQUIRE(zero.per_cycle.size() == 1);
  CHECK(zero.per_cycle[0].states == 1);
  CHECK(zero.total_states == 1);

  const auto s = explore(*m, 6);
  REQUIRE(s.per_cycle.size() == 7);
  std::uint64_t sum = 0;
  for (const auto& c : s.per_cycle) {
    sum += c.states;
    CHECK(c.cumulative == sum);
  }
  CHECK(s.total_states == sum);
  CHECK_FALSE(s.budget_exhausted);

  const auto cut = explore(*m, 12, 5000);
  CHECK(cut.budget_exhausted);
  CHECK(cut.per_cycle.size() < 13);
}

TEST_CASE("budget exhaustion reports partial statistics") {
  auto m = make_model(ModelLevel::Concrete, ModelOptions{});
  EngineOptions tight;
  tight.state_budget = 100'000;
  try {
    (void)check_transient(*m, {NoiseKind::Resistive, 1, 10}, tight);
    FAIL("expected the budget to run out");
  } catch (const BudgetExhausted& e) {
    CHECK(e.partial().budget_exhausted);
    CHECK_FALSE(e.partial().per_cycle.empty());
    // The overflowing cycle is reported; every cycle before it fit.
    CHECK(e.partial().total_states > tight.state_budget);
    const auto& cycles = e.partial().per_cycle;
    REQUIRE(cycles.size() >= 2);
    CHECK(cycles[cycles.size() - 2].cumulative <= tight.state_budget);
  }
}

TEST_CASE("joint noise distribution") {
  const auto opts = options_for("burst:3,7");
  const std::uint32_t n = 12;
  auto m = make_model(ModelLevel::BooleanQueue, opts);
  const auto joint = joint_noise_distribution(*m, n);
  Rational total, r_hit, i_hit;
  for (const auto& [key, p] : joint) {
    total += p;
    if (key.first >= 2) r_hit += p;
    if (key.second >= 1) i_hit += p;
  }
  CHECK(total == 1);
  // Counters never decrease, so "at N" and "within N" coincide.
  CHECK(r_hit == exact(check_transient(*m, {NoiseKind::Resistive, 2, n})));
  CHECK(i_hit == exact(check_transient(*m, {NoiseKind::Inductive, 1, n})));
}

TEST_CASE("noise kinds parse") {
  CHECK(parse_noise_kind("resistive") == NoiseKind::Resistive);
  CHECK(parse_noise_kind(to_string(NoiseKind::Inductive)) == NoiseKind::Inductive);
  CHECK_THROWS_AS(parse_noise_kind("thermal"), InvalidArgument);
}
