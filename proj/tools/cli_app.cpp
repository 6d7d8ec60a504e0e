#include "cli_app.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "report.hpp"

namespace nocpsn::cli {

namespace {

using report::Json;
namespace fs = std::filesystem;

struct OutputArgs {
  std::string format = "csv";
  std::string output_dir;
};

struct Outcome {
  std::string command;
  Json config = Json::object();
  Json results = Json::object();
  std::string_view header;
  std::vector<std::string> rows;
  std::string status = "ok";
  int code = kExitOk;
};

struct Context {
  std::ostream& out;
  std::ostream& err;
  bool dry_run = false;
};

// ---- argument helpers ----------------------------------------------------

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  return parts;
}

std::uint32_t parse_u32(const std::string& text, const std::string& what) {
  std::size_t pos = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != text.size() || v > 0xFFFFFFFFul || text.front() == '-')
    throw InvalidArgument("invalid " + what + ": '" + text + "'");
  return static_cast<std::uint32_t>(v);
}

// "resistive=20,inductive=none"; unspecified counters keep their defaults.
NoiseCaps parse_caps(const std::string& text, NoiseCaps caps) {
  if (text.empty()) return caps;
  if (text == "none") return NoiseCaps{};
  for (const auto& item : split(text, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw InvalidArgument("caps must look like resistive=<n|none>,inductive=<n|none>");
    const std::string name = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    std::optional<std::uint32_t> cap;
    if (value != "none") cap = parse_u32(value, "cap");
    if (cap && *cap > kCounterLimit) throw InvalidArgument("cap exceeds the counter width");
    if (name == "resistive") {
      caps.resistive = cap;
    } else if (name == "inductive") {
      caps.inductive = cap;
    } else {
      throw InvalidArgument("unknown counter in caps: " + name);
    }
  }
  return caps;
}

std::string caps_string(const NoiseCaps& c) {
  auto one = [](const std::optional<std::uint32_t>& v) { return v ? std::to_string(*v) : std::string("none"); };
  return "resistive=" + one(c.resistive) + ",inductive=" + one(c.inductive);
}

// The counter not under test is disabled unless the user sets its cap.
NoiseCaps property_caps(const std::string& text, NoiseKind kind) {
  NoiseCaps defaults;
  (kind == NoiseKind::Resistive ? defaults.inductive : defaults.resistive) = 0;
  return parse_caps(text, defaults);
}

ArithmeticMode resolve_mode(const std::string& text, std::uint32_t cycles) {
  return text.empty() ? default_mode_for(cycles) : parse_arithmetic_mode(text);
}

std::string resolve_engine(const std::string& text, const InjectionPattern& pattern) {
  if (text == "auto") return pattern.kind() == InjectionPattern::Kind::Burst ? "reward" : "transient";
  if (text != "transient" && text != "reward") throw InvalidArgument("engine must be auto, transient or reward");
  return text;
}

std::vector<ModelLevel> parse_levels(const std::vector<std::string>& names) {
  std::vector<ModelLevel> levels;
  for (const auto& n : names) {
    if (n == "all") {
      levels.assign(kAllLevels.begin(), kAllLevels.end());
      continue;
    }
    levels.push_back(parse_model_level(n));
  }
  if (levels.empty()) throw InvalidArgument("at least one level is required");
  return levels;
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

// Minimal CSV line splitter with double-quote support.
std::vector<std::string> csv_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// ---- commands -----------------------------------------------------------

struct CheckArgs {
  std::string level = "boolean-queue";
  std::string pattern = "every-other";
  std::string noise = "resistive";
  std::uint32_t k = 1;
  std::uint32_t n = 0;
  std::string caps;
  std::string mode;
  std::string engine = "auto";
  std::uint64_t budget = 20'000'000;
};

int cmd_check(const CheckArgs& a, Outcome& o, Context& ctx) {
  const ModelLevel level = parse_model_level(a.level);
  const auto pattern = InjectionPattern::parse(a.pattern);
  const NoiseKind kind = parse_noise_kind(a.noise);
  const NoiseCaps caps = property_caps(a.caps, kind);
  const ArithmeticMode mode = resolve_mode(a.mode, a.n);
  const std::string engine = resolve_engine(a.engine, pattern);
  ModelOptions mo;
  mo.pattern = pattern;
  mo.caps = caps;
  mo.track_clk = engine == "transient";
  const auto model = make_model(level, mo);
  validate_property(*model, kind, a.k);
  o.config = {{"command", "check"},   {"level", a.level},         {"pattern", pattern.to_string()},
              {"noise", a.noise},     {"K", a.k},                 {"N", a.n},
              {"caps", caps_string(caps)}, {"mode", to_string(mode)}, {"engine", engine},
              {"budget-states", a.budget}};
  o.header = report::kCheckHeader;
  if (ctx.dry_run) return kExitOk;

  const EngineOptions eo{mode, a.budget, true};
  std::vector<std::string> row = {std::string(to_string(level)), report::field(pattern.to_string()),
                                  std::string(to_string(kind)), std::to_string(a.k), std::to_string(a.n),
                                  to_string(mode), engine};
  try {
    const PropertySpec prop{kind, a.k, a.n};
    const CheckResult r = engine == "reward" ? check_reward_bounded(*model, prop, eo) : check_transient(*model, prop, eo);
    o.results = report::to_json(r);
    const bool certified = r.certificate && r.certificate->noise_free();
    row.insert(row.end(), {report::number(r.probability), r.exact_value.value_or(""),
                           std::to_string(r.states_explored), bool_text(certified), "ok"});
    ctx.err << "P(" << to_string(kind) << " >= " << a.k << " within " << a.n << ") = " << report::number(r.probability)
            << (r.exact_value ? " = " + *r.exact_value : std::string()) << "\n";
    if (certified)
      ctx.err << "zero certified: " << r.certificate->reachable_states
              << " reachable states, no transition increments the counter\n";
  } catch (const BudgetExhausted& e) {
    o.results = {{"partial", report::to_json(e.partial())}, {"message", e.what()}};
    o.status = "budget-exhausted";
    o.code = kExitBudgetExhausted;
    row.insert(row.end(), {"", "", std::to_string(e.partial().total_states), "false", o.status});
    ctx.err << "budget exhausted: " << e.what() << "\n";
  }
  o.rows.push_back(report::join(row));
  return o.code;
}

struct ExploreArgs {
  std::vector<std::string> levels{"all"};
  std::string pattern = "every-other";
  std::uint32_t cycles = 8;
  std::string caps = "none";
  std::uint64_t budget = 20'000'000;
};

int cmd_explore(const ExploreArgs& a, Outcome& o, Context& ctx) {
  const auto levels = parse_levels(a.levels);
  const auto pattern = InjectionPattern::parse(a.pattern);
  const NoiseCaps caps = parse_caps(a.caps, {});
  ModelOptions mo;
  mo.pattern = pattern;
  mo.caps = caps;
  std::vector<std::unique_ptr<Model>> models;
  for (const auto l : levels) models.push_back(make_model(l, mo));
  o.config = {{"command", "explore"}, {"level", a.levels},        {"pattern", pattern.to_string()},
              {"cycles", a.cycles},   {"caps", caps_string(caps)}, {"budget-states", a.budget}};
  o.header = report::kExploreHeader;
  if (ctx.dry_run) return kExitOk;

  o.results = Json::object();
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const StateSpaceStats s = explore(*models[i], a.cycles, a.budget);
    const std::string name(to_string(levels[i]));
    o.results[name] = report::to_json(s);
    for (const auto& c : s.per_cycle) {
      o.rows.push_back(report::join({name, report::field(pattern.to_string()), std::to_string(c.cycle),
                                     std::to_string(c.states), std::to_string(c.cumulative), report::number(c.seconds)}));
    }
    ctx.err << name << ": " << s.total_states << " states through cycle " << s.per_cycle.back().cycle << "\n";
    if (s.budget_exhausted) {
      o.status = "budget-exhausted";
      o.code = kExitBudgetExhausted;
      ctx.err << name << ": state budget exhausted, partial series reported\n";
    }
  }
  return o.code;
}

struct SimulateArgs {
  std::string level = "boolean-queue";
  std::string pattern = "every-other";
  std::string noise = "resistive";
  std::uint32_t k = 1;
  std::string caps;
  std::uint64_t runs = 0;
  std::uint64_t seed = 0;
  std::uint32_t max_cycles = 0;
  unsigned threads = 0;
  bool progress = false;
};

int cmd_simulate(const SimulateArgs& a, Outcome& o, Context& ctx) {
  const ModelLevel level = parse_model_level(a.level);
  const auto pattern = InjectionPattern::parse(a.pattern);
  const NoiseKind kind = parse_noise_kind(a.noise);
  const NoiseCaps caps = property_caps(a.caps, kind);
  if (a.runs == 0) throw InvalidArgument("--runs must be at least 1");
  if (a.max_cycles == 0) throw InvalidArgument("--max-cycles must be at least 1");
  ModelOptions mo;
  mo.pattern = pattern;
  mo.caps = caps;
  const auto model = make_model(level, mo);
  validate_property(*model, kind, a.k);
  o.config = {{"command", "simulate"}, {"level", a.level},   {"pattern", pattern.to_string()},
              {"noise", a.noise},      {"K", a.k},           {"caps", caps_string(caps)},
              {"runs", a.runs},        {"seed", a.seed},     {"max-cycles", a.max_cycles}};
  o.header = report::kSimulateHeader;
  if (ctx.dry_run) return kExitOk;

  SimConfig sc;
  sc.runs = a.runs;
  sc.max_cycles = a.max_cycles;
  sc.seed = a.seed;
  sc.kind = kind;
  sc.threshold = a.k;
  sc.threads = a.threads;
  sc.progress = a.progress;
  const Estimate e = estimate(*model, sc);
  o.results = report::to_json(e);
  o.rows.push_back(report::join({std::string(to_string(level)), report::field(pattern.to_string()),
                                 std::string(to_string(kind)), std::to_string(a.k), std::to_string(a.max_cycles),
                                 std::to_string(a.runs), std::to_string(a.seed), std::to_string(e.successes),
                                 report::number(e.p_hat), report::number(e.ci_lo), report::number(e.ci_hi),
                                 bool_text(e.low_confidence)}));
  ctx.err << "p_hat = " << report::number(e.p_hat) << " (" << e.successes << "/" << e.runs << "), 95% CI ["
          << report::number(e.ci_lo) << ", " << report::number(e.ci_hi) << "]\n";
  if (e.low_confidence) ctx.err << "warning: fewer than 30 successes, low statistical confidence\n";
  return kExitOk;
}

struct CdfArgs {
  std::string level = "boolean-queue";
  std::string pattern = "burst:3,7";
  std::string noise = "resistive";
  std::vector<std::uint32_t> ks{1};
  std::vector<std::uint32_t> ns;
  std::uint32_t max_cycles = 0;
  std::uint32_t step = 1;
  std::string caps;
  std::string mode;
  std::string engine = "auto";
  std::uint64_t budget = 20'000'000;
};

int cmd_cdf(const CdfArgs& a, Outcome& o, Context& ctx) {
  const ModelLevel level = parse_model_level(a.level);
  const auto pattern = InjectionPattern::parse(a.pattern);
  const NoiseKind kind = parse_noise_kind(a.noise);
  const NoiseCaps caps = property_caps(a.caps, kind);
  std::vector<std::uint32_t> ns = a.ns;
  if (ns.empty()) {
    if (a.step == 0) throw InvalidArgument("--step must be at least 1");
    for (std::uint32_t n = 0; n <= a.max_cycles; n += a.step) ns.push_back(n);
  }
  if (a.ks.empty()) throw InvalidArgument("at least one threshold is required");
  const std::uint32_t top = *std::max_element(ns.begin(), ns.end());
  const ArithmeticMode mode = resolve_mode(a.mode, top);
  const std::string engine = resolve_engine(a.engine, pattern);
  ModelOptions mo;
  mo.pattern = pattern;
  mo.caps = caps;
  mo.track_clk = engine == "transient";
  const auto model = make_model(level, mo);
  for (const auto k : a.ks) validate_property(*model, kind, k);
  o.config = {{"command", "cdf"}, {"level", a.level}, {"pattern", pattern.to_string()}, {"noise", a.noise},
              {"K", a.ks},        {"N", ns},          {"caps", caps_string(caps)},      {"mode", to_string(mode)},
              {"engine", engine}, {"budget-states", a.budget}};
  o.header = report::kCdfHeader;
  if (ctx.dry_run) return kExitOk;

  try {
    const CdfTable t = cdf_table(*model, kind, a.ks, ns, EngineOptions{mode, a.budget, true});
    o.results = report::to_json(t);
    for (std::size_t i = 0; i < t.thresholds.size(); ++i) {
      for (std::size_t j = 0; j < t.cycles.size(); ++j) {
        o.rows.push_back(report::join({std::string(to_string(level)), report::field(pattern.to_string()),
                                       std::string(to_string(kind)), std::to_string(t.thresholds[i]),
                                       std::to_string(t.cycles[j]), report::number(t.probability[i][j]),
                                       t.exact.empty() ? "" : t.exact[i][j]}));
      }
    }
  } catch (const BudgetExhausted& e) {
    o.results = {{"partial", report::to_json(e.partial())}, {"message", e.what()}};
    o.status = "budget-exhausted";
    o.code = kExitBudgetExhausted;
    ctx.err << "budget exhausted: " << e.what() << "\n";
  }
  return o.code;
}

struct CompareArgs {
  std::vector<std::string> levels{"all"};
  std::string pattern = "every-other";
  std::string noise = "resistive";
  std::uint32_t k = 1;
  std::vector<std::uint32_t> ns;
  std::string caps;
  std::string mode;
  std::uint64_t budget = 20'000'000;
};

int cmd_compare(const CompareArgs& a, Outcome& o, Context& ctx) {
  const auto levels = parse_levels(a.levels);
  const auto pattern = InjectionPattern::parse(a.pattern);
  const NoiseKind kind = parse_noise_kind(a.noise);
  const NoiseCaps caps = property_caps(a.caps, kind);
  if (a.ns.empty()) throw InvalidArgument("-N needs at least one horizon");
  const std::uint32_t top = *std::max_element(a.ns.begin(), a.ns.end());
  const ArithmeticMode mode = resolve_mode(a.mode, top);
  ModelOptions mo;
  mo.pattern = pattern;
  mo.caps = caps;
  for (const auto l : levels) validate_property(*make_model(l, mo), kind, a.k);
  std::vector<std::string> level_names;
  for (const auto l : levels) level_names.emplace_back(to_string(l));
  o.config = {{"command", "compare"}, {"levels", level_names}, {"pattern", pattern.to_string()},
              {"noise", a.noise},     {"K", a.k},              {"N", a.ns},
              {"caps", caps_string(caps)}, {"mode", to_string(mode)}, {"budget-states", a.budget}};
  o.header = report::kCompareHeader;
  if (ctx.dry_run) return kExitOk;

  try {
    const auto rows = compare_models(levels, mo, kind, a.k, a.ns, EngineOptions{mode, a.budget, true});
    o.results = Json::array();
    for (const auto& r : rows) {
      o.results.push_back(report::to_json(r));
      o.rows.push_back(report::join({std::to_string(r.cycles), std::string(to_string(r.level_a)),
                                     std::string(to_string(r.level_b)), report::number(r.p_a), report::number(r.p_b),
                                     report::number(r.abs_diff), report::number(r.rel_diff),
                                     r.exact_equal ? bool_text(*r.exact_equal) : ""}));
    }
  } catch (const BudgetExhausted& e) {
    o.results = {{"partial", report::to_json(e.partial())}, {"message", e.what()}};
    o.status = "budget-exhausted";
    o.code = kExitBudgetExhausted;
    ctx.err << "budget exhausted: " << e.what() << "\n";
  }
  return o.code;
}

struct SweepArgs {
  std::vector<std::uint32_t> bursts{1, 2, 3};
  std::uint32_t max_idle = 7;
  std::string level = "boolean-queue";
  std::string noise = "resistive";
  std::uint32_t k = 1;
  std::uint32_t n = 30;
  std::string mode = "float";
  std::uint64_t budget = 20'000'000;
};

int cmd_sweep(const SweepArgs& a, Outcome& o, Context& ctx) {
  SweepConfig sc;
  sc.bursts = a.bursts;
  sc.max_idle = a.max_idle;
  sc.level = parse_model_level(a.level);
  sc.kind = parse_noise_kind(a.noise);
  sc.threshold = a.k;
  sc.reference_cycles = a.n;
  sc.engine = EngineOptions{parse_arithmetic_mode(a.mode), a.budget, true};
  if (a.k == 0) throw InvalidArgument("noise threshold must be at least 1");
  for (const auto b : a.bursts) {
    if (b == 0) throw InvalidArgument("burst length must be at least 1");
    if (b + a.max_idle > 255) throw InvalidArgument("pattern period too long");
  }
  o.config = {{"command", "sweep"}, {"bursts", a.bursts}, {"max-idle", a.max_idle}, {"level", a.level},
              {"noise", a.noise},   {"K", a.k},           {"N", a.n},               {"mode", a.mode},
              {"budget-states", a.budget}};
  o.header = report::kSweepHeader;
  if (ctx.dry_run) return kExitOk;

  const auto entries = pattern_sweep(sc);
  o.results = Json::array();
  for (const auto& e : entries) {
    o.results.push_back(report::to_json(e));
    o.rows.push_back(report::join(
        {std::to_string(e.pattern.burst_length()), std::to_string(e.pattern.idle_length()),
         report::number(e.flits_per_cycle), std::string(to_string(sc.kind)), std::to_string(a.k), std::to_string(a.n),
         e.budget_exhausted ? "" : report::number(e.probability), bool_text(e.zero_resistive),
         bool_text(e.zero_inductive), std::to_string(e.reachable_states), e.status}));
    ctx.err << e.pattern.to_string() << ": " << e.status;
    if (!e.budget_exhausted)
      ctx.err << ", p = " << report::number(e.probability)
              << (e.zero_resistive && e.zero_inductive ? " (zero PSN, certified)" : "");
    ctx.err << "\n";
    if (e.budget_exhausted) o.status = "partial";
  }
  return kExitOk;
}

struct FitArgs {
  std::string input;
  std::vector<std::string> kinds{"exp", "poly"};
  int degree = kDefaultPolynomialDegree;
  std::string column = "cumulative_states";
  std::vector<std::uint32_t> holdout;
};

std::vector<Series> read_series(const std::string& path, const std::string& column) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument(path + " is empty");
  const auto header = csv_fields(line);
  auto col = [&](const std::string& name) -> int {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> groups;
  std::vector<std::string> order;
  const int level_col = col("level");
  const int cycle_col = col("cycle");
  const int value_col = col(column);
  const bool explore_layout = level_col >= 0 && cycle_col >= 0 && value_col >= 0;
  if (!explore_layout && header.size() != 2)
    throw InvalidArgument(path + ": expected explore output or a two-column x,y file");
  const std::string stem = fs::path(path).stem().string();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = csv_fields(line);
    std::string name = stem;
    double x = 0.0;
    double y = 0.0;
    try {
      if (explore_layout) {
        name = f.at(static_cast<std::size_t>(level_col));
        x = std::stod(f.at(static_cast<std::size_t>(cycle_col)));
        y = std::stod(f.at(static_cast<std::size_t>(value_col)));
      } else {
        x = std::stod(f.at(0));
        y = std::stod(f.at(1));
      }
    } catch (const std::exception&) {
      throw InvalidArgument(path + ": malformed row '" + line + "'");
    }
    // Cycle 0 is the single initial state; growth fits start at cycle 1.
    if (explore_layout && x == 0.0) continue;
    if (!groups.count(name)) order.push_back(name);
    groups[name].first.push_back(x);
    groups[name].second.push_back(y);
  }
  std::vector<Series> out;
  for (const auto& name : order) out.push_back(Series::make(name, groups[name].first, groups[name].second));
  return out;
}

int cmd_fit(const FitArgs& a, Outcome& o, Context& ctx) {
  std::vector<FitKind> kinds;
  for (const auto& k : a.kinds) kinds.push_back(parse_fit_kind(k));
  if (!a.holdout.empty() && a.holdout.size() != 2) throw InvalidArgument("--holdout takes <train>,<horizon>");
  if (a.column != "states" && a.column != "cumulative_states")
    throw InvalidArgument("--column must be states or cumulative_states");
  const auto series = read_series(a.input, a.column);
  o.config = {{"command", "fit"}, {"input", a.input}, {"kinds", a.kinds}, {"degree", a.degree}, {"column", a.column}};
  if (!a.holdout.empty()) o.config["holdout"] = a.holdout;
  o.header = report::kFitHeader;
  if (ctx.dry_run) return kExitOk;

  o.results = Json::array();
  for (const auto& s : series) {
    Json entry = {{"series", s.name}, {"points", s.size()}, {"fits", Json::array()}};
    std::optional<HoldoutResult> h;
    if (!a.holdout.empty()) {
      if (s.size() >= a.holdout[0] + a.holdout[1]) {
        h = holdout_predict(s, a.holdout[0], a.holdout[1], a.degree);
        entry["holdout"] = {{"train", a.holdout[0]},
                            {"horizon", a.holdout[1]},
                            {"exp_sse", h->exponential_sse},
                            {"poly_sse", h->polynomial_sse},
                            {"winner", std::string(to_string(h->winner))}};
      } else {
        ctx.err << s.name << ": " << s.size() << " points, too few for the holdout test\n";
      }
    }
    for (const auto kind : kinds) {
      const FitResult f = fit(s, kind, a.degree);
      entry["fits"].push_back(report::to_json(f));
      std::vector<std::string> params;
      for (const double p : f.params) params.push_back(report::number(p));
      std::string sse;
      if (h) sse = report::number(kind == FitKind::Exponential ? h->exponential_sse : h->polynomial_sse);
      o.rows.push_back(report::join({report::field(s.name), std::string(to_string(kind)), std::to_string(f.degree),
                                     report::number(f.r2), report::number(f.r2_log), sse,
                                     report::field(report::join(params))}));
    }
    o.results.push_back(std::move(entry));
  }
  return kExitOk;
}

// ---- output ---------------------------------------------------------------

Json host_info() {
  char name[256] = {};
  if (gethostname(name, sizeof name - 1) != 0) name[0] = '\0';
  return {{"hostname", std::string(name)}, {"hardware_threads", std::thread::hardware_concurrency()}};
}

void emit(const Outcome& o, const OutputArgs& out_args, double seconds, Context& ctx) {
  Json record = {{"tool", "nocpsn"},
                 {"version", kVersion},
                 {"command", o.command},
                 {"config", o.config},
                 {"status", o.status},
                 {"results", o.results},
                 {"wall_seconds", seconds},
                 {"host", host_info()}};
  std::ostringstream csv;
  csv << o.header << "\n";
  for (const auto& r : o.rows) csv << r << "\n";
  if (out_args.format == "json") {
    ctx.out << record.dump(2) << "\n";
  } else {
    ctx.out << csv.str();
  }
  std::string dir = out_args.output_dir;
  if (dir.empty()) {
    if (const char* env = std::getenv("NOCPSN_OUTPUT_DIR")) dir = env;
  }
  if (!dir.empty()) {
    fs::create_directories(dir);
    std::ofstream(fs::path(dir) / (o.command + ".json")) << record.dump(2) << "\n";
    std::ofstream(fs::path(dir) / (o.command + ".csv")) << csv.str();
  }
}

void add_output_flags(CLI::App* sub, OutputArgs& o) {
  sub->add_option("--format", o.format, "Format written to stdout")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--output-dir", o.output_dir,
                  "Directory for <command>.json and <command>.csv (default: $NOCPSN_OUTPUT_DIR)");
}

int run_impl(const std::vector<std::string>& args, Context& ctx);

// Each experiment object maps flag names to values; "command" selects the
// subcommand. Unknown keys surface as unknown flags.
std::vector<std::string> experiment_args(const Json& e, const std::string& output_dir, std::size_t index) {
  if (!e.is_object() || !e.contains("command") || !e["command"].is_string())
    throw InvalidArgument("each experiment needs a \"command\" string");
  std::vector<std::string> args{e["command"].get<std::string>()};
  bool has_dir = false;
  for (const auto& [key, value] : e.items()) {
    if (key == "command") continue;
    if (key == "output-dir") has_dir = true;
    const std::string flag = key.size() == 1 ? "-" + key : "--" + key;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(flag);
      continue;
    }
    if (value.is_null()) continue;
    std::string text;
    if (value.is_string()) {
      text = value.get<std::string>();
    } else if (value.is_array()) {
      for (const auto& item : value) {
        if (!text.empty()) text += ',';
        text += item.is_string() ? item.get<std::string>() : item.dump();
      }
    } else if (value.is_number()) {
      text = value.dump();
    } else {
      throw InvalidArgument("unsupported value for \"" + key + "\"");
    }
    args.push_back(flag);
    args.push_back(text);
  }
  if (!has_dir && !output_dir.empty()) {
    char prefix[16];
    std::snprintf(prefix, sizeof prefix, "%02zu-", index + 1);
    args.push_back("--output-dir");
    args.push_back((fs::path(output_dir) / (prefix + args.front())).string());
  }
  return args;
}

int cmd_run(const std::string& path, const std::string& output_dir, Context& ctx) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read " + path);
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InvalidArgument(path + ": " + e.what());
  }
  if (!doc.is_object()) throw InvalidArgument(path + ": expected a JSON object");
  std::vector<Json> experiments;
  if (doc.contains("experiments")) {
    for (const auto& [key, value] : doc.items())
      if (key != "experiments") throw InvalidArgument(path + ": unknown key \"" + key + "\"");
    if (!doc["experiments"].is_array()) throw InvalidArgument(path + ": \"experiments\" must be a list");
    for (const auto& e : doc["experiments"]) experiments.push_back(e);
  } else if (doc.contains("config")) {
    // A run record replays its own resolved configuration.
    experiments.push_back(doc["config"]);
  } else {
    throw InvalidArgument(path + ": expected \"experiments\" or a run record");
  }
  std::vector<std::vector<std::string>> argv;
  for (std::size_t i = 0; i < experiments.size(); ++i) {
    argv.push_back(experiment_args(experiments[i], output_dir, i));
    if (argv.back().front() == "run") throw InvalidArgument("config files cannot nest run commands");
  }
  // Validate everything before computing anything.
  std::ostringstream sink;
  Context dry{sink, ctx.err, true};
  for (std::size_t i = 0; i < argv.size(); ++i) {
    const int code = run_impl(argv[i], dry);
    if (code != kExitOk) {
      ctx.err << path << ": experiment " << i + 1 << " is invalid\n";
      return kExitInvalidConfig;
    }
  }
  int worst = kExitOk;
  for (const auto& a : argv) {
    const int code = run_impl(a, ctx);
    if (code != kExitOk && worst != kExitFailure) worst = code;
  }
  return worst;
}

int run_impl(const std::vector<std::string>& args, Context& ctx) {
  CLI::App app{"Cycle-bounded power-supply-noise analysis of a 2x2 mesh network-on-chip", "nocpsn"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  OutputArgs out_args;

  CheckArgs check;
  auto* c = app.add_subcommand("check", "Exact probability of a noise threshold within N cycles");
  c->add_option("--level", check.level, "concrete | predicate | prob-choice | boolean-queue")->capture_default_str();
  c->add_option("--pattern", check.pattern, "every-other | burst:<b>,<i>")->capture_default_str();
  c->add_option("--noise", check.noise, "resistive | inductive")->capture_default_str();
  c->add_option("-K", check.k, "Counter threshold")->capture_default_str();
  c->add_option("-N", check.n, "Cycle bound")->required();
  c->add_option("--caps", check.caps, "resistive=<n|none>,inductive=<n|none>");
  c->add_option("--mode", check.mode, "rational | float (default: rational up to N=30)");
  c->add_option("--engine", check.engine, "auto | transient | reward")->capture_default_str();
  c->add_option("--budget-states", check.budget, "Unique-state budget")->capture_default_str();
  add_output_flags(c, out_args);

  ExploreArgs ex;
  auto* e = app.add_subcommand("explore", "Reachable-state counts per cycle");
  e->add_option("--level", ex.levels, "Levels, or all")->delimiter(',')->capture_default_str();
  e->add_option("--pattern", ex.pattern)->capture_default_str();
  e->add_option("--cycles", ex.cycles)->capture_default_str();
  e->add_option("--caps", ex.caps)->capture_default_str();
  e->add_option("--budget-states", ex.budget)->capture_default_str();
  add_output_flags(e, out_args);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Monte-Carlo estimate with an exact 95% interval");
  s->add_option("--level", sim.level)->capture_default_str();
  s->add_option("--pattern", sim.pattern)->capture_default_str();
  s->add_option("--noise", sim.noise)->capture_default_str();
  s->add_option("-K", sim.k)->capture_default_str();
  s->add_option("--caps", sim.caps);
  s->add_option("--runs", sim.runs)->required();
  s->add_option("--seed", sim.seed)->required();
  s->add_option("--max-cycles", sim.max_cycles)->required();
  s->add_option("--threads", sim.threads, "0 = hardware concurrency")->capture_default_str();
  s->add_flag("--progress", sim.progress, "Progress lines on stderr");
  add_output_flags(s, out_args);

  CdfArgs cdf;
  auto* d = app.add_subcommand("cdf", "Probability table over thresholds and horizons");
  d->add_option("--level", cdf.level)->capture_default_str();
  d->add_option("--pattern", cdf.pattern)->capture_default_str();
  d->add_option("--noise", cdf.noise)->capture_default_str();
  d->add_option("-K", cdf.ks, "Thresholds")->delimiter(',')->capture_default_str();
  d->add_option("-N", cdf.ns, "Horizons")->delimiter(',');
  d->add_option("--max-cycles", cdf.max_cycles, "With --step, horizons 0, step, ..., max");
  d->add_option("--step", cdf.step)->capture_default_str();
  d->add_option("--caps", cdf.caps);
  d->add_option("--mode", cdf.mode);
  d->add_option("--engine", cdf.engine)->capture_default_str();
  d->add_option("--budget-states", cdf.budget)->capture_default_str();
  add_output_flags(d, out_args);

  CompareArgs cmp;
  auto* m = app.add_subcommand("compare", "Pairwise probability differences between levels");
  m->add_option("--levels", cmp.levels)->delimiter(',')->capture_default_str();
  m->add_option("--pattern", cmp.pattern)->capture_default_str();
  m->add_option("--noise", cmp.noise)->capture_default_str();
  m->add_option("-K", cmp.k)->capture_default_str();
  m->add_option("-N", cmp.ns, "Horizons")->delimiter(',')->required();
  m->add_option("--caps", cmp.caps);
  m->add_option("--mode", cmp.mode);
  m->add_option("--budget-states", cmp.budget)->capture_default_str();
  add_output_flags(m, out_args);

  SweepArgs sw;
  auto* w = app.add_subcommand("sweep", "Classify burst patterns Burst(b, i), i >= 2b");
  w->add_option("--bursts", sw.bursts)->delimiter(',')->capture_default_str();
  w->add_option("--max-idle", sw.max_idle)->capture_default_str();
  w->add_option("--level", sw.level)->capture_default_str();
  w->add_option("--noise", sw.noise)->capture_default_str();
  w->add_option("-K", sw.k)->capture_default_str();
  w->add_option("-N", sw.n, "Reference horizon")->capture_default_str();
  w->add_option("--mode", sw.mode)->capture_default_str();
  w->add_option("--budget-states", sw.budget)->capture_default_str();
  add_output_flags(w, out_args);

  FitArgs ft;
  auto* f = app.add_subcommand("fit", "Exponential and polynomial fits of state-growth series");
  f->add_option("--input", ft.input, "explore CSV or two-column x,y CSV")->required();
  f->add_option("--kinds", ft.kinds)->delimiter(',')->capture_default_str();
  f->add_option("--degree", ft.degree)->capture_default_str();
  f->add_option("--column", ft.column, "states | cumulative_states")->capture_default_str();
  f->add_option("--holdout", ft.holdout, "<train>,<horizon>")->delimiter(',');
  add_output_flags(f, out_args);

  std::string config_path;
  auto* r = app.add_subcommand("run", "Run every experiment in a JSON config file or replay a run record");
  r->add_option("--config", config_path)->required();
  r->add_option("--output-dir", out_args.output_dir);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    ctx.out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    ctx.out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    ctx.out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& err) {
    ctx.err << "error: " << err.what() << "\n";
    return kExitInvalidConfig;
  }

  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  int code = kExitOk;
  try {
    if (*r) return cmd_run(config_path, out_args.output_dir, ctx);
    if (*c) {
      o.command = "check";
      code = cmd_check(check, o, ctx);
    } else if (*e) {
      o.command = "explore";
      code = cmd_explore(ex, o, ctx);
    } else if (*s) {
      o.command = "simulate";
      code = cmd_simulate(sim, o, ctx);
    } else if (*d) {
      o.command = "cdf";
      code = cmd_cdf(cdf, o, ctx);
    } else if (*m) {
      o.command = "compare";
      code = cmd_compare(cmp, o, ctx);
    } else if (*w) {
      o.command = "sweep";
      code = cmd_sweep(sw, o, ctx);
    } else if (*f) {
      o.command = "fit";
      code = cmd_fit(ft, o, ctx);
    }
  } catch (const InvalidArgument& ex_) {
    ctx.err << "error: " << ex_.what() << "\n";
    return kExitInvalidConfig;
  } catch (const std::exception& ex_) {
    ctx.err << "error: " << ex_.what() << "\n";
    return kExitFailure;
  }
  if (ctx.dry_run) return code;
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  try {
    emit(o, out_args, seconds, ctx);
  } catch (const std::exception& ex_) {
    ctx.err << "error: " << ex_.what() << "\n";
    return kExitFailure;
  }
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Context ctx{out, err, false};
  return run_impl(args, ctx);
}

}  // namespace nocpsn::cli
