#pragma once

// Post-processing: growth regressions, CDF tables, cross-level
// differences and injection-pattern sweeps.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nocpsn/abstractions.hpp"
#include "nocpsn/pmc.hpp"

namespace nocpsn {

struct Series {
  std::string name;
  std::vector<double> x;  // strictly increasing
  std::vector<double> y;

  static Series make(std::string name, std::vector<double> x, std::vector<double> y);
  std::size_t size() const { return x.size(); }
  Series prefix(std::size_t n) const;
};

/// Per-cycle state counts for cycles 1..n, as stored in explore() output.
Series per_cycle_series(const StateSpaceStats& stats, std::string name);
/// Cumulative unique-state counts for cycles 1..n.
Series cumulative_series(const StateSpaceStats& stats, std::string name);

enum class FitKind : std::uint8_t { Exponential, Polynomial };

std::string_view to_string(FitKind kind);
FitKind parse_fit_kind(std::string_view text);  // "exp" | "poly"

inline constexpr int kDefaultPolynomialDegree = 4;

struct FitResult {
  FitKind kind = FitKind::Polynomial;
  int degree = 0;
  /// Exponential: {a, b} for y = a * b^x. Polynomial: c0..cd.
  std::vector<double> params;
  /// Coefficient of determination on the raw y values.
  double r2 = 0.0;
  /// Exponential only: R^2 of the linear fit to log y. NaN for polynomials.
  double r2_log = 0.0;

  double predict(double x) const;
};

/// Least-squares fit. The exponential is fitted as a line through log y.
FitResult fit(const Series& s, FitKind kind, int degree = kDefaultPolynomialDegree);

struct HoldoutResult {
  FitResult exponential;
  FitResult polynomial;
  double exponential_sse = 0.0;
  double polynomial_sse = 0.0;
  FitKind winner = FitKind::Polynomial;
};

/// Fits both kinds on the first `train` points and scores the squared
/// prediction error over the next `horizon` points.
HoldoutResult holdout_predict(const Series& s, std::size_t train = 10, std::size_t horizon = 5,
                              int degree = kDefaultPolynomialDegree);

struct CdfTable {
  NoiseKind kind = NoiseKind::Resistive;
  std::vector<std::uint32_t> thresholds;
  std::vector<std::uint32_t> cycles;
  std::vector<std::vector<double>> probability;    // [threshold][cycle]
  std::vector<std::vector<std::string>> exact;     // empty in float mode
  std::uint64_t states = 0;

  bool monotone_in_cycles() const;
  bool antitone_in_threshold() const;
};

/// P(counter >= K within N) over a (K, N) grid. Uses the finite reward
/// graph when the model's clock is transient, forward propagation otherwise.
CdfTable cdf_table(const Model& model, NoiseKind kind, std::vector<std::uint32_t> thresholds,
                   std::vector<std::uint32_t> cycles, const EngineOptions& opts = {});

struct ComparisonRow {
  std::uint32_t cycles = 0;
  ModelLevel level_a = ModelLevel::Concrete;
  ModelLevel level_b = ModelLevel::Concrete;
  double p_a = 0.0;
  double p_b = 0.0;
  double abs_diff = 0.0;
  double rel_diff = 0.0;
  /// Decided exactly in rational mode; unset in float mode.
  std::optional<bool> exact_equal;
};

/// Pairwise differences between levels for each horizon in `cycles`.
std::vector<ComparisonRow> compare_models(const std::vector<ModelLevel>& levels, const ModelOptions& base,
                                          NoiseKind kind, std::uint32_t threshold,
                                          const std::vector<std::uint32_t>& cycles, const EngineOptions& opts = {});

struct SweepConfig {
  std::vector<std::uint32_t> bursts{1, 2, 3};
  /// Idle lengths tried for burst b: 2b .. max_idle.
  std::uint32_t max_idle = 7;
  NoiseKind kind = NoiseKind::Resistive;
  std::uint32_t threshold = 1;
  std::uint32_t reference_cycles = 30;
  ModelLevel level = ModelLevel::BooleanQueue;
  EngineOptions engine{ArithmeticMode::Float, 20'000'000, true};
};

struct SweepEntry {
  InjectionPattern pattern = InjectionPattern::every_other_cycle();
  double flits_per_cycle = 0.0;
  double probability = 0.0;
  std::optional<std::string> exact_value;
  /// Both noise kinds, from full-coverage certificates.
  bool zero_resistive = false;
  bool zero_inductive = false;
  std::uint64_t reachable_states = 0;
  std::uint64_t transitions = 0;
  bool budget_exhausted = false;
  std::string status;
};

/// Classifies every pattern Burst(b, i) with i >= 2b. A pattern whose
/// budget runs out is recorded as such and the sweep continues.
std::vector<SweepEntry> pattern_sweep(const SweepConfig& config);

}  // namespace nocpsn
