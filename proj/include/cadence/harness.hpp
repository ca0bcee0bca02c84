#pragma once

#include "cadence/classifier.hpp"
#include "cadence/keystroke.hpp"
#include "cadence/template_bank.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace cadence::harness {

enum class StrategyKind { paste, fixed_delay, random_delay };

struct BotStrategy {
    StrategyKind kind = StrategyKind::paste;
    double delay_ms = 50.0;        // fixed_delay
    double delay_mean_ms = 180.0;  // random_delay
    double delay_stddev_ms = 60.0; // random_delay
    std::uint64_t rng_seed = 0;
};

/// Stand-in typist used in place of human volunteers. Defaults are roughly a
/// 40 words-per-minute typist with coefficient of variation 0.5.
struct HumanProfile {
    double mean_gap_ms = 300.0;
    double gap_stddev_ms = 150.0;
};

/// paste: no keydowns, paste flag set. fixed_delay: one keydown per character
/// at exact multiples of delay_ms. random_delay: normal gaps, negatives redrawn.
KeystrokeTrace synthesize_bot_trace(const BotStrategy& strategy, std::string_view answer);

/// One keydown per character with normal gaps, non-positive draws redrawn.
/// Throws std::invalid_argument unless both profile values are positive.
KeystrokeTrace synthesize_human_trace(std::string_view answer, std::uint64_t seed, const HumanProfile& profile);

using Participant = std::variant<BotStrategy, HumanProfile>;

struct GroupConfig {
    std::string name;
    Participant participant;
    std::size_t trials = 0;
    std::optional<Category> category; // random per trial when unset
};

struct ExperimentConfig {
    std::vector<GroupConfig> groups;
    Thresholds thresholds;
    std::uint64_t seed = 0;
    std::optional<std::filesystem::path> templates;

    /// Throws ConfigError.
    void validate() const;
};

/// Reads {"seed", "thresholds", "templates", "groups": [{"name", "trials",
/// "category", "strategy": {"kind": "paste"|"fixed_delay"|"random_delay"|"human", ...}}]}.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct TrialRecord {
    std::string group;
    std::size_t trial_index = 0;
    std::string verdict; // reason code
    std::string challenge_question;
    FeatureVector features;

    bool operator==(const TrialRecord&) const = default;
};

nlohmann::json to_json(const TrialRecord& record);

struct GroupSummary {
    std::string group;
    std::size_t trials = 0;
    std::size_t success_count = 0;
    double success_rate_percent = 0.0;
    std::optional<std::string> modal_failure_reason; // reason code

    bool operator==(const GroupSummary&) const = default;
};

struct ExperimentReport {
    std::vector<GroupSummary> groups;

    bool operator==(const ExperimentReport&) const = default;
};

using TrialSink = std::function<void(const TrialRecord&)>;

/// Per-group aggregation. The modal failure is the most frequent non-ok code,
/// ties broken by first occurrence.
ExperimentReport summarize(const std::vector<TrialRecord>& records, const std::vector<std::string>& group_order);

/// Runs every group in order, sequentially, straight against the template bank
/// and classifier. Deterministic for a fixed config.
ExperimentReport run_experiment(const ExperimentConfig& config, const TrialSink& sink = {});

/// Same trials driven through a running service's HTTP API. Answers are
/// recovered from the published hash by searching the template bank.
ExperimentReport run_experiment_live(const ExperimentConfig& config, const std::string& base_url,
                                     const TrialSink& sink = {});

enum class ReportFormat { text_table, csv };

/// "text" or "csv"; throws UnknownFormat.
ReportFormat parse_report_format(std::string_view name);

/// Columns: group, trials, success rate %, primary failure reason.
std::string emit_report(const ExperimentReport& report, ReportFormat format);
std::string emit_report(const ExperimentReport& report, std::string_view format);

/// Human-readable label for a reason code; unknown codes are returned as-is.
std::string explain_code(std::string_view code);

// Seeded trial streams: independent 64-bit seeds derived from (seed, a, b, c).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c);

} // namespace cadence::harness
