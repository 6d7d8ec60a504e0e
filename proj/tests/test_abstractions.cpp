#include <doctest.h>

#include <set>

#include "nocpsn/abstractions.hpp"
#include "nocpsn/pmc.hpp"
#include "support.hpp"

using namespace nocpsn;
using nocpsn::testing::merged;
using nocpsn::testing::options_for;
using nocpsn::testing::sample_states;

namespace {

using C = ChannelClass;

int position(const std::array<C, 3>& order, C c) {
  for (int i = 0; i < 3; ++i)
    if (order[i] == c) return i;
  return -1;
}

}  // namespace

TEST_CASE("predicate projection commutes with one step") {
  for (const char* pattern : {"every-other", "burst:3,7"}) {
    const ModelOptions opts = options_for(pattern);
    auto model = make_model(ModelLevel::Concrete, opts);
    for (const auto& p : sample_states(*model, 30, 14)) {
      const NocState s = decode_noc_state(p);
      const auto lhs = merged(step_concrete(s, opts), [](const NocState& x) { return encode(project_to_predicate(x)); });
      const auto rhs = merged(predicate_step(project_to_predicate(s), opts), [](const PredicateState& x) { return encode(x); });
      CHECK(lhs == rhs);
    }
  }
}

TEST_CASE("Boolean-queue projection commutes with one step") {
  for (const char* pattern : {"every-other", "burst:2,4"}) {
    const ModelOptions opts = options_for(pattern);
    auto model = make_model(ModelLevel::ProbChoice, opts);
    for (const auto& p : sample_states(*model, 40, 16)) {
      const ProbChoiceState s = decode_prob_choice_state(p);
      const auto lhs =
          merged(prob_choice_step(s, opts), [](const ProbChoiceState& x) { return encode(project_to_bool_queue(x)); });
      const auto rhs = merged(bool_queue_step(project_to_bool_queue(s), opts), [](const BoolQueueState& x) { return encode(x); });
      CHECK(lhs == rhs);
    }
  }
}

TEST_CASE("Boolean-queue projection keeps buffer occupancies") {
  auto model = make_model(ModelLevel::ProbChoice, ModelOptions{});
  for (const auto& p : sample_states(*model, 40, 16)) {
    const ProbChoiceState s = decode_prob_choice_state(p);
    const BoolQueueState b = project_to_bool_queue(s);
    for (int r = 0; r < kRouters; ++r) {
      CHECK(b.routers[r].local_len == s.routers[r].channel(C::Local).buffer.size());
      CHECK(b.routers[r].ew_len == s.routers[r].channel(C::XChan).buffer.size());
      CHECK(b.routers[r].ns_len == s.routers[r].channel(C::YChan).buffer.size());
    }
    CHECK(b.noise == s.noise);
  }
}

TEST_CASE("six arbitration orders collapse to four servicing branches") {
  std::set<ServiceBranch> branches;
  for (int i = 0; i < 6; ++i) {
    const auto order = permutation_from_index(i);
    const bool local_first = position(order, C::Local) < position(order, C::XChan);
    const bool ns_first = position(order, C::YChan) < position(order, C::XChan);
    const ServiceBranch b = service_branch(local_first, ns_first);
    branches.insert(b);
    const auto served = service_order(b);
    CHECK((position(served, C::Local) < position(served, C::XChan)) == local_first);
    CHECK((position(served, C::YChan) < position(served, C::XChan)) == ns_first);
  }
  CHECK(branches.size() == 4);
}

TEST_CASE("local and ns requests never target the same port") {
  // ns flits always eject; local flits always leave through a neighbour port.
  auto model = make_model(ModelLevel::Predicate, ModelOptions{});
  for (const auto& p : sample_states(*model, 100, 20)) {
    const PredicateState s = decode_predicate_state(p);
    for (const auto& router : s.routers) {
      const auto& ns = router.channel(C::YChan).buffer;
      for (int i = 0; i < ns.size(); ++i) CHECK(ns[i].direction() == OutputPort::Eject);
      const auto& local = router.channel(C::Local).buffer;
      for (int i = 0; i < local.size(); ++i) CHECK(local[i].direction() != OutputPort::Eject);
      const auto& ew = router.channel(C::XChan).buffer;
      for (int i = 0; i < ew.size(); ++i) CHECK_FALSE(ew[i].needs_x);
    }
  }
}

TEST_CASE("every level's encoding round-trips") {
  const ModelOptions opts = options_for("burst:3,7");
  {
    auto m = make_model(ModelLevel::Predicate, opts);
    for (const auto& p : sample_states(*m, 30, 20)) CHECK(encode(decode_predicate_state(p)) == p);
  }
  {
    auto m = make_model(ModelLevel::ProbChoice, opts);
    for (const auto& p : sample_states(*m, 30, 20)) CHECK(encode(decode_prob_choice_state(p)) == p);
  }
  {
    auto m = make_model(ModelLevel::BooleanQueue, opts);
    for (const auto& p : sample_states(*m, 30, 20)) CHECK(encode(decode_bool_queue_state(p)) == p);
  }
}

TEST_CASE("distinct states have distinct encodings") {
  auto m = make_model(ModelLevel::BooleanQueue, ModelOptions{});
  std::set<PackedState> keys;
  std::set<std::string> renderings;
  for (const auto& p : sample_states(*m, 40, 12)) {
    keys.insert(p);
    renderings.insert(m->describe(p));
  }
  CHECK(keys.size() == renderings.size());
}

TEST_CASE("every level's steps are probability distributions") {
  for (const ModelLevel level : kAllLevels) {
    CAPTURE(to_string(level));
    auto m = make_model(level, options_for("burst:2,4"));
    for (const auto& p : sample_states(*m, 10, 12)) {
      CHECK(nocpsn::testing::total(m->step_unmerged(p)) == Rational(1));
      const auto d = m->step(p);
      CHECK(nocpsn::testing::total(d) == Rational(1));
      for (std::size_t i = 1; i < d.size(); ++i) CHECK(d[i - 1].state < d[i].state);
    }
  }
}

TEST_CASE("abstraction never grows the per-cycle state count") {
  std::array<StateSpaceStats, 4> stats;
  for (std::size_t i = 0; i < kAllLevels.size(); ++i) stats[i] = explore(*make_model(kAllLevels[i], ModelOptions{}), 8);
  for (std::size_t c = 0; c <= 8; ++c) {
    CAPTURE(c);
    const auto concrete = stats[0].per_cycle[c].states;
    CHECK(stats[1].per_cycle[c].states == concrete);
    CHECK(stats[2].per_cycle[c].states <= concrete);
    CHECK(stats[3].per_cycle[c].states <= stats[2].per_cycle[c].states);
  }
  CHECK(stats[0].per_cycle[1].states == 81);
  CHECK(stats[3].per_cycle[1].states < 81);
}

TEST_CASE("level names parse") {
  for (const ModelLevel level : kAllLevels) CHECK(parse_model_level(to_string(level)) == level);
  CHECK_THROWS_AS(parse_model_level("abstract"), InvalidArgument);
}
