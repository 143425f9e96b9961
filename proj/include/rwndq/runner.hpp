#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "rwndq/fluid.hpp"
#include "rwndq/metrics.hpp"
#include "rwndq/scenario.hpp"

namespace rwndq {

enum class RunMode { Fluid, Sim, AbCompare };

// A parsed run: mode plus the module configs it may need. Defaults mirror
// the standard setup (alpha 0.2, 50 us tick, 10 ticks per update,
// rto_min 2 ms, 10 Gbps bottleneck, 100 us RTT, 83-packet buffer).
struct RunSpec {
    RunMode mode = RunMode::Sim;
    ScenarioConfig scenario;
    FluidConfig fluid;

    bool operator==(const RunSpec&) const = default;
};

// Key-value scenario text, one setting per line, [section] per module.
// Throws ParseError (with line number) on syntax/unknown keys and
// ValidationError (naming the field) on out-of-range values.
RunSpec parse_scenario(std::string_view text);

// Canonical form: fixed section and key order, full-precision numbers.
// parse(serialize(spec)) reproduces spec; serialize(parse(text))
// normalizes text.
std::string serialize_scenario(const RunSpec& spec);

struct AbSummary {
    double drop_reduction_pct = 0.0;  // bottleneck drops vs the baseline
    double fct_mean_delta = 0.0;      // managed minus baseline, seconds
    double fct_p99_delta = 0.0;
    double jain_delta = 0.0;
};

struct AbResult {
    MetricsReport rwndq;
    MetricsReport droptail;
    AbSummary summary;
};

// Runs the two arms of an A/B comparison. The arms must be the same
// scenario (seed included) apart from the queue discipline; a seed
// mismatch throws ValidationError.
AbResult run_ab(const ScenarioConfig& rwndq_arm, const ScenarioConfig& droptail_arm);
AbResult run_ab(const ScenarioConfig& base);

void write_ab_summary(std::ostream& out, const AbResult& r);

// Emits the CSV set for one simulation run into dir (created if needed).
// Returns the paths written.
std::vector<std::filesystem::path> write_report_files(
    const std::filesystem::path& dir, const MetricsReport& report);

}  // namespace rwndq
