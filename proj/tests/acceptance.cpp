// Acceptance run: one PASS/FAIL line per criterion, details indented.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "nocpsn/analysis.hpp"
#include "nocpsn/pmc.hpp"
#include "nocpsn/smc.hpp"

using namespace nocpsn;

namespace {

struct Verdict {
  bool pass = false;
  std::string summary;
};

std::ostringstream detail;

void note(const std::string& s) { detail << "    " << s << "\n"; }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

ModelOptions opts(const char* pattern, bool track_clk = true) {
  ModelOptions o;
  o.pattern = InjectionPattern::parse(pattern);
  o.track_clk = track_clk;
  return o;
}

ModelOptions only(ModelOptions o, NoiseKind kind, std::optional<std::uint32_t> cap = std::nullopt) {
  o.caps.resistive = kind == NoiseKind::Resistive ? cap : std::optional<std::uint32_t>(0);
  o.caps.inductive = kind == NoiseKind::Inductive ? cap : std::optional<std::uint32_t>(0);
  return o;
}

Rational exact(const CheckResult& r) { return Rational(*r.exact_value); }

// 1. Engine equals path enumeration.
Verdict oracle_equivalence() {
  struct Case {
    const char* pattern;
    NoiseKind kind;
    bool required;
  };
  // The every-other K=1 resistive cases are zero up to N=6 on every level,
  // so burst and inductive cases are added to make the comparison bite.
  const std::vector<Case> cases = {{"every-other", NoiseKind::Resistive, true},
                                   {"every-other", NoiseKind::Inductive, false},
                                   {"burst:3,7", NoiseKind::Resistive, false},
                                   {"burst:2,4", NoiseKind::Inductive, false}};
  int compared = 0, nonzero = 0, mismatched = 0;
  for (const auto& c : cases) {
    for (const ModelLevel level : kAllLevels) {
      auto m = make_model(level, opts(c.pattern));
      for (const std::uint32_t n : {2u, 4u, 6u}) {
        const PropertySpec prop{c.kind, 1, n};
        const auto engine = exact(check_transient(*m, prop));
        const auto oracle = brute_force_check(*m, prop);
        ++compared;
        if (engine != oracle.probability || oracle.total_mass != 1) {
          ++mismatched;
          note(std::string("mismatch: ") + std::string(to_string(level)) + " " + c.pattern + " " +
               std::string(to_string(c.kind)) + " N=" + std::to_string(n));
        }
        if (engine != 0) ++nonzero;
        if (n == 6 && level == ModelLevel::BooleanQueue)
          note(std::string(c.pattern) + " " + std::string(to_string(c.kind)) + " N=6: " + engine.get_str());
      }
    }
  }
  return {mismatched == 0, std::to_string(compared) + " exact comparisons, " + std::to_string(nonzero) +
                               " nonzero, " + std::to_string(mismatched) + " mismatched"};
}

// 2. Joint (resistive, inductive) distributions agree across levels.
Verdict cross_level_equivalence() {
  int compared = 0, differing = 0;
  for (const char* pattern : {"every-other", "burst:3,7"}) {
    std::vector<std::unique_ptr<Model>> models;
    for (const ModelLevel level : kAllLevels) models.push_back(make_model(level, opts(pattern)));
    for (std::uint32_t n = 1; n <= 12; ++n) {
      const std::size_t first = n <= 6 ? 0 : 1;
      const auto reference = joint_noise_distribution(*models[first], n);
      for (std::size_t i = first + 1; i < models.size(); ++i) {
        ++compared;
        if (joint_noise_distribution(*models[i], n) != reference) {
          ++differing;
          note(std::string("differs: ") + pattern + " " + std::string(to_string(kAllLevels[i])) + " N=" +
               std::to_string(n));
        }
      }
      if (n == 12) note(std::string(pattern) + " N=12: " + std::to_string(reference.size()) + " (R, I) outcomes");
    }
  }
  return {differing == 0, std::to_string(compared) + " joint distributions compared exactly, " +
                              std::to_string(differing) + " differing"};
}

// 3. Burst(1,2) is certified noise-free.
Verdict zero_noise_pattern() {
  bool ok = true;
  std::string sizes;
  for (const ModelLevel level : kAllLevels) {
    auto m = make_model(level, opts("burst:1,2", false));
    const RewardGraph g(*m, 50'000'000);
    for (const NoiseKind kind : {NoiseKind::Resistive, NoiseKind::Inductive}) {
      const auto cert = g.certificate(kind);
      ok = ok && cert.noise_free() && cert.reachable_states == g.states();
      const auto r = check_reward_bounded(*m, {kind, 1, 1000});
      ok = ok && r.exact_value && *r.exact_value == "0";
    }
    sizes += std::string(sizes.empty() ? "" : ", ") + std::string(to_string(level)) + " " + std::to_string(g.states());
  }
  return {ok, "both counters exactly 0 at N=1000, reachable sets exhausted (" + sizes + ")"};
}

// 4. Exponential growth for Concrete, polynomial for BooleanQueue.
Verdict growth_regime() {
  const std::uint64_t budget = 10'000'000;
  const auto concrete = explore(*make_model(ModelLevel::Concrete, ModelOptions{}), 15, budget);
  const auto bq = explore(*make_model(ModelLevel::BooleanQueue, ModelOptions{}), 15, budget);
  if (concrete.budget_exhausted || bq.budget_exhausted) return {false, "state budget exhausted"};

  const auto c_series = cumulative_series(concrete, "concrete");
  const auto b_series = cumulative_series(bq, "boolean-queue");
  const auto c_exp = fit(c_series.prefix(8), FitKind::Exponential);
  const auto c_poly = fit(c_series.prefix(8), FitKind::Polynomial);
  const auto b_exp = fit(b_series, FitKind::Exponential);
  const auto b_poly = fit(b_series, FitKind::Polynomial);
  const auto c_hold = holdout_predict(c_series);
  const auto b_hold = holdout_predict(b_series);

  note("concrete cycles 1..8: R2 exp " + fmt(c_exp.r2) + " (log " + fmt(c_exp.r2_log) + "), poly " + fmt(c_poly.r2));
  note("concrete holdout 10+5: SSE exp " + fmt(c_hold.exponential_sse) + ", poly " + fmt(c_hold.polynomial_sse));
  note("boolean-queue cycles 1..15: R2 exp " + fmt(b_exp.r2) + " (log " + fmt(b_exp.r2_log) + "), poly " +
       fmt(b_poly.r2));
  note("boolean-queue holdout 10+5: SSE exp " + fmt(b_hold.exponential_sse) + ", poly " + fmt(b_hold.polynomial_sse));
  const auto c_per = per_cycle_series(concrete, "concrete");
  note("concrete per-cycle counts, for reference: R2 exp " + fmt(fit(c_per.prefix(8), FitKind::Exponential).r2) +
       ", poly " + fmt(fit(c_per.prefix(8), FitKind::Polynomial).r2));

  const bool concrete_exp = c_exp.r2 > c_poly.r2 && c_hold.winner == FitKind::Exponential;
  const bool bq_poly = b_poly.r2 > b_exp.r2 && b_hold.winner == FitKind::Polynomial;
  return {concrete_exp && bq_poly, std::string("concrete ") + (concrete_exp ? "exponential" : "not exponential") +
                                       ", boolean-queue " + (bq_poly ? "polynomial" : "not polynomial")};
}

// Shared by 5 and 7: every-other, BooleanQueue, resistive K=1 up to N=30.
TransientSeries every_other_reference() {
  static const TransientSeries s = [] {
    auto m = make_model(ModelLevel::BooleanQueue, only(ModelOptions{}, NoiseKind::Resistive));
    EngineOptions e;
    e.state_budget = 50'000'000;
    const std::vector<std::uint32_t> ks{1};
    return transient_series(*m, NoiseKind::Resistive, ks, 30, e);
  }();
  return s;
}

// 5. Bursty injection is noisier than spread injection.
Verdict burst_ordering() {
  const auto spread = every_other_reference();
  auto m = make_model(ModelLevel::BooleanQueue, only(opts("burst:3,7"), NoiseKind::Resistive));
  const std::vector<std::uint32_t> ks{1};
  const auto burst = transient_series(*m, NoiseKind::Resistive, ks, 30);
  bool ok = true;
  for (const std::uint32_t n : {20u, 30u}) {
    const Rational b(burst.exact[0][n]);
    const Rational s(spread.exact[0][n]);
    ok = ok && b > s;
    note("N=" + std::to_string(n) + ": burst(3,7) " + fmt(b.get_d()) + ", every-other " + fmt(s.get_d()));
  }
  return {ok, ok ? "burst strictly above every-other at N=20 and N=30" : "ordering violated"};
}

// 6. CDF tables over N up to 100.
Verdict cdf_structure() {
  EngineOptions f;
  f.mode = ArithmeticMode::Float;
  f.state_budget = 50'000'000;
  std::vector<std::uint32_t> cycles;
  for (std::uint32_t n = 0; n <= 100; ++n) cycles.push_back(n);
  bool ok = true;
  struct Table {
    NoiseKind kind;
    std::uint32_t cap;
    std::vector<std::uint32_t> ks;
  };
  for (const Table& t : {Table{NoiseKind::Resistive, 20, {1, 5, 10, 20}}, Table{NoiseKind::Inductive, 8, {1, 5, 8}}}) {
    ModelOptions o = opts("burst:3,7", false);
    (t.kind == NoiseKind::Resistive ? o.caps.resistive : o.caps.inductive) = t.cap;
    auto m = make_model(ModelLevel::BooleanQueue, o);
    const auto table = cdf_table(*m, t.kind, t.ks, cycles, f);
    ok = ok && table.monotone_in_cycles() && table.antitone_in_threshold();
    std::string last;
    for (std::size_t k = 0; k < t.ks.size(); ++k)
      last += " K=" + std::to_string(t.ks[k]) + ":" + fmt(table.probability[k].back());
    note(std::string(to_string(t.kind)) + " N=100" + last + " (" + std::to_string(table.states) + " states)");
  }
  return {ok, ok ? "both tables monotone in N and antitone in K at every grid point" : "shape violated"};
}

// 7. Simulation brackets the exact value.
Verdict smc_consistency() {
  const auto ref = every_other_reference();
  const Rational p(ref.exact[0][30]);
  auto m = make_model(ModelLevel::BooleanQueue, ModelOptions{});
  SimConfig c;
  c.runs = 1'000'000;
  c.max_cycles = 30;
  c.seed = 20240501;
  const auto e = estimate(*m, c);
  c.threads = 3;
  const auto again = estimate(*m, c);
  const bool inside = e.ci_lo <= p.get_d() && p.get_d() <= e.ci_hi;
  const bool same = again.successes == e.successes;
  note("exact " + fmt(p.get_d()) + ", p_hat " + fmt(e.p_hat) + " (" + std::to_string(e.successes) + "/" +
       std::to_string(e.runs) + "), 95% CI [" + fmt(e.ci_lo) + ", " + fmt(e.ci_hi) + "]" +
       (e.low_confidence ? ", low confidence" : ""));
  return {inside && same, std::string(inside ? "exact value inside the interval" : "exact value outside the interval") +
                              (same ? ", reproducible across thread counts" : ", NOT reproducible")};
}

// 8. The local-buffer choice goes X two times in three.
Verdict branch_frequency() {
  auto m = make_model(ModelLevel::ProbChoice, ModelOptions{});
  const auto t = tally_choices(*m, ChoiceKind::LocalDirection, 100'000, 30, 8);
  const double n = static_cast<double>(t.total(ChoiceKind::LocalDirection));
  const double share = static_cast<double>(t.counts[static_cast<int>(ChoiceKind::LocalDirection)][0]) / n;
  const double sigma = std::sqrt((2.0 / 3.0) * (1.0 / 3.0) / n);
  const double z = (share - 2.0 / 3.0) / sigma;
  return {std::abs(z) <= 3.0, "X share " + fmt(share) + " over " + fmt(n) + " draws, z = " + fmt(z)};
}

// 9. Budget exhaustion is a handled result.
Verdict budget_exhaustion() {
  auto m = make_model(ModelLevel::Concrete, ModelOptions{});
  EngineOptions e;
  e.state_budget = 100'000;
  try {
    (void)check_transient(*m, {NoiseKind::Resistive, 1, 10}, e);
  } catch (const BudgetExhausted& ex) {
    const auto& partial = ex.partial();
    const bool ok = partial.budget_exhausted && !partial.per_cycle.empty();
    return {ok, std::string(ex.what()) + ", " + std::to_string(partial.per_cycle.size()) + " cycles of partial stats"};
  }
  return {false, "completed without exhausting the budget"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"oracle-equivalence", oracle_equivalence}, {"cross-level-equivalence", cross_level_equivalence},
      {"zero-noise-pattern", zero_noise_pattern}, {"growth-regime", growth_regime},
      {"burst-ordering", burst_ordering},         {"cdf-structure", cdf_structure},
      {"smc-consistency", smc_consistency},       {"branch-frequency", branch_frequency},
      {"budget-exhaustion", budget_exhaustion}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    detail.str("");
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!v.pass) ++failed;
    std::cout << (v.pass ? "PASS" : "FAIL") << " " << i + 1 << " " << criteria[i].first << ": " << v.summary << " ("
              << fmt(secs) << " s)\n"
              << detail.str() << std::flush;
  }
  std::cout << criteria.size() - static_cast<std::size_t>(failed) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
