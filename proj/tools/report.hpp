#pragma once

// CSV row formatting and JSON records for the command-line front end.

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nocpsn/analysis.hpp"
#include "nocpsn/pmc.hpp"
#include "nocpsn/smc.hpp"

namespace nocpsn::report {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kCheckHeader =
    "level,pattern,noise,K,N,mode,engine,probability,exact,states_explored,certified_zero,status";
inline constexpr std::string_view kExploreHeader = "level,pattern,cycle,states,cumulative_states,seconds";
inline constexpr std::string_view kSimulateHeader =
    "level,pattern,noise,K,max_cycles,runs,seed,successes,p_hat,ci_lo,ci_hi,low_confidence";
inline constexpr std::string_view kSweepHeader =
    "burst,idle,flits_per_cycle,noise,K,N,probability,zero_resistive,zero_inductive,reachable_states,status";
inline constexpr std::string_view kCompareHeader = "N,level_a,level_b,p_a,p_b,abs_diff,rel_diff,exact_equal";
inline constexpr std::string_view kFitHeader = "series,kind,degree,r2,r2_log,holdout_sse,params";
inline constexpr std::string_view kCdfHeader = "level,pattern,noise,K,N,probability,exact";

/// Shortest decimal that reads back to the same double.
std::string number(double v);
/// Quotes a field that contains a comma or a quote.
std::string field(std::string_view s);
std::string join(const std::vector<std::string>& fields);

Json to_json(const StateSpaceStats& s);
Json to_json(const CoverageCertificate& c);
Json to_json(const CheckResult& r);
Json to_json(const Estimate& e);
Json to_json(const FitResult& f);
Json to_json(const CdfTable& t);
Json to_json(const ComparisonRow& r);
Json to_json(const SweepEntry& e);

}  // namespace nocpsn::report
