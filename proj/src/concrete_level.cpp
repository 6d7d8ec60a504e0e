#include "level_model.hpp"

namespace nocpsn::detail {

namespace {

struct ConcreteLevel {
  static constexpr ModelLevel kLevel = ModelLevel::Concrete;
  using State = NocState;

  const ModelOptions& opts;

  State initial() const { return initial_noc_state(); }
  State decode(const PackedState& p) const { return decode_noc_state(p); }
  PackedState encode(const State& s) const { return nocpsn::encode(s); }
  State prepare(const State& s) const { return s; }

  void choices(const State& s, ChoiceList& out) const {
    if (!opts.pattern.injects_at(static_cast<int>(s.phase))) return;
    for (int r = 0; r < kRouters; ++r) out.push(uniform_of_three());
  }

  State apply(const State& s, const Outcomes& o) const {
    State next = s;
    if (opts.pattern.injects_at(static_cast<int>(s.phase))) {
      for (int r = 0; r < kRouters; ++r) inject_into(next, RouterId(r), Flit{destination_choice(RouterId(r), o[r])});
    }
    return finish_concrete_cycle(std::move(next), opts);
  }

  std::string describe(const State& s) const {
    return describe_noc(s, [](const Flit& f) { return std::to_string(f.dest.value()); });
  }
};

}  // namespace

std::unique_ptr<Model> make_concrete_model(const ModelOptions& opts) {
  return std::make_unique<LevelModel<ConcreteLevel>>(opts);
}

}  // namespace nocpsn::detail
