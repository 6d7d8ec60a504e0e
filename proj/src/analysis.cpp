#include "nocpsn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace nocpsn {

namespace {

double r_squared(const std::vector<double>& y, const std::vector<double>& fitted) {
  double mean = 0.0;
  for (const double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double sse = 0.0;
  double sst = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sse += (y[i] - fitted[i]) * (y[i] - fitted[i]);
    sst += (y[i] - mean) * (y[i] - mean);
  }
  if (sst == 0.0) return sse == 0.0 ? 1.0 : 0.0;
  return 1.0 - sse / sst;
}

// Least squares on the monomial basis 1, x, ..., x^degree.
std::vector<double> polyfit(const std::vector<double>& x, const std::vector<double>& y, int degree) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd a(n, degree + 1);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double p = 1.0;
    for (int j = 0; j <= degree; ++j) {
      a(i, j) = p;
      p *= x[static_cast<std::size_t>(i)];
    }
    b(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);
  return {c.data(), c.data() + c.size()};
}

double polyval(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
  return v;
}

}  // namespace

Series Series::make(std::string name, std::vector<double> x, std::vector<double> y) {
  if (x.size() != y.size()) throw InvalidArgument("series x and y differ in length");
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1])) throw InvalidArgument("series x values must be strictly increasing");
  for (const double v : y)
    if (!(v >= 0.0)) throw InvalidArgument("series y values must be non-negative");
  return Series{std::move(name), std::move(x), std::move(y)};
}

Series Series::prefix(std::size_t n) const {
  n = std::min(n, size());
  return Series{name, {x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n)},
                {y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n)}};
}

Series per_cycle_series(const StateSpaceStats& stats, std::string name) {
  std::vector<double> x, y;
  for (const auto& c : stats.per_cycle) {
    if (c.cycle == 0) continue;
    x.push_back(c.cycle);
    y.push_back(static_cast<double>(c.states));
  }
  return Series::make(std::move(name), std::move(x), std::move(y));
}

Series cumulative_series(const StateSpaceStats& stats, std::string name) {
  std::vector<double> x, y;
  for (const auto& c : stats.per_cycle) {
    if (c.cycle == 0) continue;
    x.push_back(c.cycle);
    y.push_back(static_cast<double>(c.cumulative));
  }
  return Series::make(std::move(name), std::move(x), std::move(y));
}

std::string_view to_string(FitKind kind) { return kind == FitKind::Exponential ? "exp" : "poly"; }

FitKind parse_fit_kind(std::string_view text) {
  if (text == "exp" || text == "exponential") return FitKind::Exponential;
  if (text == "poly" || text == "polynomial") return FitKind::Polynomial;
  throw InvalidArgument("unknown fit kind: " + std::string(text));
}

double FitResult::predict(double x) const {
  if (kind == FitKind::Exponential) return params[0] * std::pow(params[1], x);
  return polyval(params, x);
}

FitResult fit(const Series& s, FitKind kind, int degree) {
  if (s.size() < 3) throw InvalidArgument("a fit needs at least 3 points");
  FitResult r;
  r.kind = kind;
  if (kind == FitKind::Exponential) {
    std::vector<double> logy;
    for (const double v : s.y) {
      if (!(v > 0.0)) throw InvalidArgument("an exponential fit needs positive y values");
      logy.push_back(std::log(v));
    }
    const auto line = polyfit(s.x, logy, 1);
    r.degree = 1;
    r.params = {std::exp(line[0]), std::exp(line[1])};
    std::vector<double> fitted_log, fitted;
    for (const double x : s.x) {
      fitted_log.push_back(polyval(line, x));
      fitted.push_back(r.predict(x));
    }
    r.r2_log = r_squared(logy, fitted_log);
    r.r2 = r_squared(s.y, fitted);
    return r;
  }
  if (degree < 1) throw InvalidArgument("polynomial degree must be at least 1");
  if (s.size() < static_cast<std::size_t>(degree) + 1)
    throw InvalidArgument("a degree-" + std::to_string(degree) + " polynomial needs at least " +
                          std::to_string(degree + 1) + " points");
  r.degree = degree;
  r.params = polyfit(s.x, s.y, degree);
  std::vector<double> fitted;
  for (const double x : s.x) fitted.push_back(r.predict(x));
  r.r2 = r_squared(s.y, fitted);
  r.r2_log = std::numeric_limits<double>::quiet_NaN();
  return r;
}

HoldoutResult holdout_predict(const Series& s, std::size_t train, std::size_t horizon, int degree) {
  if (s.size() < train + horizon)
    throw InvalidArgument("holdout needs " + std::to_string(train + horizon) + " points, series has " +
                          std::to_string(s.size()));
  const Series head = s.prefix(train);
  HoldoutResult h;
  h.exponential = fit(head, FitKind::Exponential);
  h.polynomial = fit(head, FitKind::Polynomial, degree);
  for (std::size_t i = train; i < train + horizon; ++i) {
    const double de = h.exponential.predict(s.x[i]) - s.y[i];
    const double dp = h.polynomial.predict(s.x[i]) - s.y[i];
    h.exponential_sse += de * de;
    h.polynomial_sse += dp * dp;
  }
  h.winner = h.exponential_sse < h.polynomial_sse ? FitKind::Exponential : FitKind::Polynomial;
  return h;
}

bool CdfTable::monotone_in_cycles() const {
  for (const auto& row : probability)
    for (std::size_t j = 1; j < row.size(); ++j)
      if (row[j] < row[j - 1]) return false;
  return true;
}

bool CdfTable::antitone_in_threshold() const {
  for (std::size_t i = 1; i < probability.size(); ++i)
    for (std::size_t j = 0; j < probability[i].size(); ++j)
      if (probability[i][j] > probability[i - 1][j]) return false;
  return true;
}

CdfTable cdf_table(const Model& model, NoiseKind kind, std::vector<std::uint32_t> thresholds,
                   std::vector<std::uint32_t> cycles, const EngineOptions& opts) {
  if (thresholds.empty() || cycles.empty()) throw InvalidArgument("a CDF table needs thresholds and cycles");
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  std::sort(cycles.begin(), cycles.end());
  cycles.erase(std::unique(cycles.begin(), cycles.end()), cycles.end());
  for (const auto k : thresholds) validate_property(model, kind, k);

  TransientSeries series;
  if (model.options().track_clk) {
    series = transient_series(model, kind, thresholds, cycles.back(), opts);
  } else {
    const RewardGraph graph(model, opts.state_budget);
    series = graph.series(kind, thresholds, cycles.back(), opts.mode);
  }
  CdfTable t;
  t.kind = kind;
  t.thresholds = thresholds;
  t.cycles = cycles;
  t.states = series.stats.total_states;
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    std::vector<double> row;
    std::vector<std::string> exact_row;
    for (const auto n : cycles) {
      row.push_back(series.probability[k][n]);
      if (!series.exact.empty()) exact_row.push_back(series.exact[k][n]);
    }
    t.probability.push_back(std::move(row));
    if (!series.exact.empty()) t.exact.push_back(std::move(exact_row));
  }
  return t;
}

std::vector<ComparisonRow> compare_models(const std::vector<ModelLevel>& levels, const ModelOptions& base,
                                          NoiseKind kind, std::uint32_t threshold,
                                          const std::vector<std::uint32_t>& cycles, const EngineOptions& opts) {
  if (levels.empty() || cycles.empty()) throw InvalidArgument("a comparison needs levels and cycles");
  const std::uint32_t top = *std::max_element(cycles.begin(), cycles.end());
  std::vector<TransientSeries> per_level;
  for (const auto level : levels) {
    auto model = make_model(level, base);
    per_level.push_back(transient_series(*model, kind, std::span<const std::uint32_t>(&threshold, 1), top, opts));
  }
  std::vector<ComparisonRow> rows;
  for (const auto n : cycles) {
    for (std::size_t a = 0; a < levels.size(); ++a) {
      for (std::size_t b = a + 1; b < levels.size(); ++b) {
        ComparisonRow r;
        r.cycles = n;
        r.level_a = levels[a];
        r.level_b = levels[b];
        r.p_a = per_level[a].probability[0][n];
        r.p_b = per_level[b].probability[0][n];
        r.abs_diff = std::abs(r.p_a - r.p_b);
        const double scale = std::max(std::abs(r.p_a), std::abs(r.p_b));
        r.rel_diff = scale == 0.0 ? 0.0 : r.abs_diff / scale;
        if (!per_level[a].exact.empty()) r.exact_equal = per_level[a].exact[0][n] == per_level[b].exact[0][n];
        rows.push_back(r);
      }
    }
  }
  return rows;
}

std::vector<SweepEntry> pattern_sweep(const SweepConfig& config) {
  if (config.threshold == 0) throw InvalidArgument("noise threshold must be at least 1");
  std::vector<SweepEntry> out;
  for (const auto b : config.bursts) {
    if (b == 0) throw InvalidArgument("burst length must be at least 1");
    for (std::uint32_t i = 2 * b; i <= config.max_idle; ++i) {
      SweepEntry e;
      e.pattern = InjectionPattern::burst(static_cast<int>(b), static_cast<int>(i));
      e.flits_per_cycle = e.pattern.flits_per_cycle();
      ModelOptions mo;
      mo.pattern = e.pattern;
      mo.track_clk = false;
      try {
        auto model = make_model(config.level, mo);
        const RewardGraph graph(*model, config.engine.state_budget);
        e.reachable_states = graph.states();
        e.transitions = graph.transitions();
        e.zero_resistive = graph.certificate(NoiseKind::Resistive).noise_free();
        e.zero_inductive = graph.certificate(NoiseKind::Inductive).noise_free();
        const auto series = graph.series(config.kind, std::span<const std::uint32_t>(&config.threshold, 1),
                                         config.reference_cycles, config.engine.mode);
        e.probability = series.probability[0][config.reference_cycles];
        if (!series.exact.empty()) e.exact_value = series.exact[0][config.reference_cycles];
        e.status = "ok";
      } catch (const BudgetExhausted& ex) {
        e.budget_exhausted = true;
        e.reachable_states = ex.partial().total_states;
        e.status = "budget-exhausted";
      }
      out.push_back(std::move(e));
    }
  }
  return out;
}

}  // namespace nocpsn
