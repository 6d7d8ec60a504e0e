#include <algorithm>

#include "level_model.hpp"

namespace nocpsn {

std::string_view to_string(ModelLevel level) {
  switch (level) {
    case ModelLevel::Concrete: return "concrete";
    case ModelLevel::Predicate: return "predicate";
    case ModelLevel::ProbChoice: return "prob-choice";
    case ModelLevel::BooleanQueue: return "boolean-queue";
  }
  return "?";
}

ModelLevel parse_model_level(std::string_view text) {
  for (const auto level : kAllLevels)
    if (to_string(level) == text) return level;
  throw InvalidArgument("unknown model level: " + std::string(text));
}

TransitionDistribution Model::step(const PackedState& s) const {
  auto branches = step_unmerged(s);
  std::sort(branches.begin(), branches.end(), [](const auto& a, const auto& b) { return a.state < b.state; });
  TransitionDistribution out;
  out.reserve(branches.size());
  for (auto& b : branches) {
    if (!out.empty() && out.back().state == b.state) {
      out.back().prob = out.back().prob + b.prob;
    } else {
      out.push_back(std::move(b));
    }
  }
  return out;
}

std::unique_ptr<Model> make_model(ModelLevel level, const ModelOptions& opts) {
  for (const auto cap : {opts.caps.resistive, opts.caps.inductive}) {
    if (cap && *cap > kCounterLimit) throw InvalidArgument("noise cap exceeds the counter width");
  }
  switch (level) {
    case ModelLevel::Concrete: return detail::make_concrete_model(opts);
    case ModelLevel::Predicate: return detail::make_predicate_model(opts);
    case ModelLevel::ProbChoice: return detail::make_prob_choice_model(opts);
    case ModelLevel::BooleanQueue: return detail::make_bool_queue_model(opts);
  }
  throw InvalidArgument("unknown model level");
}

}  // namespace nocpsn
