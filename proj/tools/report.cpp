#include "report.hpp"

#include <cmath>
#include <cstdio>

namespace nocpsn::report {

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  for (int precision = 6; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::string field(std::string_view s) {
  if (s.find_first_of(",\"") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += fields[i];
  }
  return out;
}

Json to_json(const StateSpaceStats& s) {
  Json per_cycle = Json::array();
  for (const auto& c : s.per_cycle)
    per_cycle.push_back({{"cycle", c.cycle}, {"states", c.states}, {"cumulative", c.cumulative}, {"seconds", c.seconds}});
  return {{"total_states", s.total_states},
          {"budget_exhausted", s.budget_exhausted},
          {"seconds", s.seconds},
          {"per_cycle", std::move(per_cycle)}};
}

Json to_json(const CoverageCertificate& c) {
  return {{"reachable_states", c.reachable_states},
          {"transitions", c.transitions},
          {"max_step_increment", c.max_step_increment},
          {"noise_free", c.noise_free()}};
}

Json to_json(const CheckResult& r) {
  Json j = {{"probability", r.probability},
            {"exact", r.exact},
            {"exact_value", r.exact_value ? Json(*r.exact_value) : Json(nullptr)},
            {"states_explored", r.states_explored},
            {"cycles", r.cycles}};
  j["certificate"] = r.certificate ? to_json(*r.certificate) : Json(nullptr);
  j["stats"] = to_json(r.stats);
  return j;
}

Json to_json(const Estimate& e) {
  return {{"p_hat", e.p_hat},   {"successes", e.successes},   {"runs", e.runs},
          {"ci95", {e.ci_lo, e.ci_hi}}, {"low_confidence", e.low_confidence}, {"seconds", e.seconds}};
}

Json to_json(const FitResult& f) {
  return {{"kind", std::string(to_string(f.kind))},
          {"degree", f.degree},
          {"params", f.params},
          {"r2", f.r2},
          {"r2_log", std::isnan(f.r2_log) ? Json(nullptr) : Json(f.r2_log)}};
}

Json to_json(const CdfTable& t) {
  Json j = {{"noise", std::string(to_string(t.kind))},
            {"thresholds", t.thresholds},
            {"cycles", t.cycles},
            {"probability", t.probability},
            {"states", t.states},
            {"monotone_in_cycles", t.monotone_in_cycles()},
            {"antitone_in_threshold", t.antitone_in_threshold()}};
  if (!t.exact.empty()) j["exact"] = t.exact;
  return j;
}

Json to_json(const ComparisonRow& r) {
  return {{"N", r.cycles},
          {"level_a", std::string(to_string(r.level_a))},
          {"level_b", std::string(to_string(r.level_b))},
          {"p_a", r.p_a},
          {"p_b", r.p_b},
          {"abs_diff", r.abs_diff},
          {"rel_diff", r.rel_diff},
          {"exact_equal", r.exact_equal ? Json(*r.exact_equal) : Json(nullptr)}};
}

Json to_json(const SweepEntry& e) {
  return {{"pattern", e.pattern.to_string()},
          {"flits_per_cycle", e.flits_per_cycle},
          {"probability", e.budget_exhausted ? Json(nullptr) : Json(e.probability)},
          {"exact_value", e.exact_value ? Json(*e.exact_value) : Json(nullptr)},
          {"zero_resistive", e.zero_resistive},
          {"zero_inductive", e.zero_inductive},
          {"reachable_states", e.reachable_states},
          {"transitions", e.transitions},
          {"status", e.status}};
}

}  // namespace nocpsn::report
