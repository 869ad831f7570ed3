#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wwkit/recurrence.hpp"
#include "wwkit/seminorms.hpp"

namespace wwkit {

// Least-squares fit of value ~ C / N^slope on (log N, log value); entries with
// value <= 0 are skipped, at least 3 positive points required.
struct DecayFit {
    double slope = 0;      // the estimated power type
    double intercept = 0;  // log C (natural log)
    double r2 = 0;         // 1 on exact power laws and constant series
};

DecayFit fit_decay(const std::vector<std::pair<std::int64_t, double>>& series);

enum class ExperimentKind { ww_decay, bourgain, vdc, seminorm, return_times, rt_chain, classical };

// Parsed and validated experiment description. `source` keeps the resolved
// JSON (all defaults explicit) for the emitted report.
struct ExperimentConfig {
    ExperimentKind kind;
    std::string source;
    std::string out;  // output path prefix; writes <out>.csv and <out>.json
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config_file(const std::string& path);

struct RunResult {
    std::string csv_path;
    std::string json_path;
    bool ok = true;  // false when a check experiment recorded failures
};

RunResult run(const ExperimentConfig& config);

// Seed precedence: explicit flag, then config value, then the WWKIT_SEED
// environment variable, then the built-in default.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag_seed, std::optional<std::uint64_t> config_seed,
                           const char* env_value);

// shared parsing helpers (also used by the CLI for flag overrides)
SystemSpec system_from_json(const std::string& json_text);
ObsPtr observable_from_json(const std::string& json_text, const SystemSpec& system);

}  // namespace wwkit
