#include "nocpsn/smc.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <iostream>
#include <thread>
#include <vector>

#include <boost/math/distributions/beta.hpp>

namespace nocpsn {

RunOutcome simulate_run(const Model& model, std::uint32_t max_cycles, HitThresholds thresholds, CounterRng& rng,
                        DrawTally* tally) {
  RunOutcome out;
  PackedState s = model.initial();
  const bool watch_r = thresholds.resistive > 0;
  const bool watch_i = thresholds.inductive > 0;
  for (std::uint32_t n = 1; n <= max_cycles; ++n) {
    s = model.sample_step(s, rng, tally);
    out.cycles = n;
    const Observation o = model.observe(s);
    if (watch_r && !out.resistive_hit && o.resistive >= thresholds.resistive) out.resistive_hit = n;
    if (watch_i && !out.inductive_hit && o.inductive >= thresholds.inductive) out.inductive_hit = n;
    if ((!watch_r || out.resistive_hit) && (!watch_i || out.inductive_hit) && (watch_r || watch_i)) break;
  }
  return out;
}

std::pair<double, double> clopper_pearson(std::uint64_t successes, std::uint64_t trials, double confidence) {
  if (trials == 0) throw InvalidArgument("an interval needs at least one trial");
  if (successes > trials) throw InvalidArgument("more successes than trials");
  const double alpha = 1.0 - confidence;
  const double s = static_cast<double>(successes);
  const double n = static_cast<double>(trials);
  double lo = 0.0;
  double hi = 1.0;
  if (successes > 0) lo = boost::math::quantile(boost::math::beta_distribution<double>(s, n - s + 1), alpha / 2);
  if (successes < trials) hi = boost::math::quantile(boost::math::beta_distribution<double>(s + 1, n - s), 1 - alpha / 2);
  return {lo, hi};
}

Estimate estimate(const Model& model, const SimConfig& config) {
  if (config.runs == 0) throw InvalidArgument("runs must be at least 1");
  if (config.max_cycles == 0) throw InvalidArgument("max cycles must be at least 1");
  if (config.threshold == 0) throw InvalidArgument("noise threshold must be at least 1");
  const auto t0 = std::chrono::steady_clock::now();
  HitThresholds th;
  (config.kind == NoiseKind::Resistive ? th.resistive : th.inductive) = config.threshold;

  unsigned workers = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, config.runs));
  std::vector<std::uint64_t> hits(workers, 0);
  std::atomic<std::uint64_t> done{0};
  auto work = [&](unsigned w) {
    // Contiguous blocks of run indices; successes are summed per block.
    const std::uint64_t lo = config.runs * w / workers;
    const std::uint64_t hi = config.runs * (w + 1) / workers;
    const std::uint64_t step = std::max<std::uint64_t>(1, config.runs / 20);
    for (std::uint64_t r = lo; r < hi; ++r) {
      CounterRng rng(config.seed, r);
      const RunOutcome o = simulate_run(model, config.max_cycles, th, rng);
      if (config.kind == NoiseKind::Resistive ? o.resistive_hit.has_value() : o.inductive_hit.has_value()) ++hits[w];
      const std::uint64_t d = done.fetch_add(1) + 1;
      if (config.progress && d % step == 0) std::cerr << "simulate: " << d << "/" << config.runs << " runs\n";
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }

  Estimate e;
  e.runs = config.runs;
  for (const auto h : hits) e.successes += h;
  e.p_hat = static_cast<double>(e.successes) / static_cast<double>(e.runs);
  std::tie(e.ci_lo, e.ci_hi) = clopper_pearson(e.successes, e.runs);
  e.low_confidence = e.successes < 30;
  e.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return e;
}

DrawTally tally_choices(const Model& model, ChoiceKind kind, std::uint64_t min_draws, std::uint32_t max_cycles,
                        std::uint64_t seed) {
  if (max_cycles == 0) throw InvalidArgument("max cycles must be at least 1");
  DrawTally tally;
  for (std::uint64_t r = 0; tally.total(kind) < min_draws; ++r) {
    if (r == 1000 && tally.total(kind) == 0)
      throw InvalidArgument("the model never resolves choices of the requested kind");
    CounterRng rng(seed, r);
    simulate_run(model, max_cycles, {}, rng, &tally);
  }
  return tally;
}

}  // namespace nocpsn
