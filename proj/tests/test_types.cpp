#include <doctest.h>

#include "nocpsn/core_model.hpp"

using namespace nocpsn;

TEST_CASE("xy routing goes X first, then Y, then ejects") {
  CHECK(xy_route(RouterId(0), RouterId(3)) == OutputPort::ToXNeighbor);
  CHECK(xy_route(RouterId(1), RouterId(3)) == OutputPort::ToYNeighbor);
  CHECK(xy_route(RouterId(3), RouterId(3)) == OutputPort::Eject);
  CHECK(xy_route(RouterId(0), RouterId(1)) == OutputPort::ToXNeighbor);
  CHECK(xy_route(RouterId(0), RouterId(2)) == OutputPort::ToYNeighbor);
  CHECK(xy_route(RouterId(2), RouterId(1)) == OutputPort::ToXNeighbor);
}

TEST_CASE("mesh neighbours") {
  CHECK(RouterId(0).x_neighbor() == RouterId(1));
  CHECK(RouterId(0).y_neighbor() == RouterId(2));
  CHECK(RouterId(3).x_neighbor() == RouterId(2));
  CHECK(RouterId(3).y_neighbor() == RouterId(1));
  CHECK(receiving_class(OutputPort::ToXNeighbor) == ChannelClass::XChan);
  CHECK(receiving_class(OutputPort::ToYNeighbor) == ChannelClass::YChan);
  CHECK_THROWS_AS(RouterId(4), InvalidArgument);
  CHECK_THROWS_AS(RouterId(-1), InvalidArgument);
}

TEST_CASE("injection patterns parse and round-trip") {
  const auto every = InjectionPattern::parse("every-other");
  CHECK(every.period() == 2);
  CHECK(every.injects_at(0));
  CHECK_FALSE(every.injects_at(1));
  CHECK(every.to_string() == "every-other");

  const auto b = InjectionPattern::parse("burst:3,7");
  CHECK(b.burst_length() == 3);
  CHECK(b.idle_length() == 7);
  CHECK(b.period() == 10);
  CHECK(b.injects_at(2));
  CHECK_FALSE(b.injects_at(3));
  CHECK(b.flits_per_cycle() == doctest::Approx(0.3));
  CHECK(InjectionPattern::parse(b.to_string()) == b);
  CHECK(InjectionPattern::burst(1, 2).flits_per_cycle() > InjectionPattern::burst(3, 7).flits_per_cycle());

  CHECK_THROWS_AS(InjectionPattern::parse("burst:0,3"), InvalidArgument);
  CHECK_THROWS_AS(InjectionPattern::parse("burst:3"), InvalidArgument);
  CHECK_THROWS_AS(InjectionPattern::parse("burst:a,b"), InvalidArgument);
  CHECK_THROWS_AS(InjectionPattern::parse("sometimes"), InvalidArgument);
  CHECK_THROWS_AS(InjectionPattern::burst(200, 100), InvalidArgument);
}

TEST_CASE("noise increments") {
  CHECK(resistive_increment(Activity::High) == 1);
  CHECK(resistive_increment(Activity::Mid) == 0);
  CHECK(inductive_increment(Activity::Low, Activity::High) == 1);
  CHECK(inductive_increment(Activity::High, Activity::Low) == 1);
  CHECK(inductive_increment(Activity::High, Activity::Mid) == 0);
  CHECK(inductive_increment(Activity::Mid, Activity::Low) == 0);
  CHECK(inductive_increment(Activity::High, Activity::High) == 0);
}

TEST_CASE("noise update over a cycle") {
  ModelOptions opts;
  const ActivityVector low{Activity::Low, Activity::Low, Activity::Low, Activity::Low};
  const ActivityVector mixed{Activity::High, Activity::High, Activity::Mid, Activity::Low};

  SUBCASE("two High routers add two resistive and two inductive") {
    const auto u = update_noise({}, low, mixed, opts);
    CHECK(u.counters.resistive == 2);
    CHECK(u.counters.inductive == 2);
    CHECK(u.prev == mixed);
  }
  SUBCASE("High then Mid then Low never counts as a switch") {
    const ActivityVector high{Activity::High, Activity::High, Activity::High, Activity::High};
    const ActivityVector mid{Activity::Mid, Activity::Mid, Activity::Mid, Activity::Mid};
    auto u = update_noise({}, mid, high, opts);
    const std::uint32_t after_high = u.counters.inductive;
    u = update_noise(u.counters, u.prev, mid, opts);
    u = update_noise(u.counters, u.prev, low, opts);
    CHECK(u.counters.inductive == after_high);
  }
  SUBCASE("caps saturate") {
    opts.caps.resistive = 3;
    const auto u = update_noise({2, 0}, low, mixed, opts);
    CHECK(u.counters.resistive == 3);
  }
  SUBCASE("a zero cap disables the counter and its history") {
    opts.caps.inductive = 0;
    const auto u = update_noise({}, low, mixed, opts);
    CHECK(u.counters.inductive == 0);
    CHECK(u.counters.resistive == 2);
    CHECK(u.prev == low);
  }
  SUBCASE("uncapped counters saturate at the stored width") {
    const auto u = update_noise({kCounterLimit, 0}, low, mixed, opts);
    CHECK(u.counters.resistive == kCounterLimit);
  }
}

TEST_CASE("branch probabilities stay reduced") {
  const BranchProb third{1, 3};
  CHECK((third + third + third) == BranchProb::one());
  CHECK((third * BranchProb{3, 4}) == BranchProb{1, 4});
  CHECK((third * BranchProb{3, 4}).den == 4);
}
