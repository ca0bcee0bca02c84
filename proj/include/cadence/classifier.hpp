#pragma once

#include "cadence/keystroke.hpp"

#include <cstddef>
#include <optional>
#include <string_view>

namespace cadence {

struct Thresholds {
    double min_stddev_ms = 20.0;            // latency standard deviation must exceed this
    double min_total_ms = 150.0;            // total typing time must exceed this...
    std::size_t min_len_for_total_check = 3; // ...for answers longer than this many chars
    std::size_t min_keystrokes = 1;

    /// Throws ConfigError if any value is negative.
    void validate() const;

    bool operator==(const Thresholds&) const = default;
};

enum class Decision { human, bot };

// Declared in check order.
enum class Reason { ok, hash_mismatch, paste_detected, too_few_keystrokes, low_variance, too_fast };

struct Verdict {
    Decision decision = Decision::bot;
    Reason reason = Reason::hash_mismatch;
    FeatureVector features;
};

/// Ordered checks, first failure wins:
///   1. answer hash matches           -> hash_mismatch
///   2. no paste event                -> paste_detected
///   3. enough keydowns for the text  -> too_few_keystrokes
///   4. stddev > min_stddev_ms        -> low_variance
///   5. total > min_total_ms (long answers only) -> too_fast
/// Features are only computed once the hash and paste checks pass.
/// Throws NonMonotonicTrace.
Verdict classify(std::string_view typed_text, const KeystrokeTrace& trace, std::string_view target_hash,
                 const Thresholds& th);

/// Stable machine-readable code, e.g. "paste_detected".
std::string_view reason_code(Reason reason);
std::optional<Reason> parse_reason(std::string_view code);
std::string_view decision_code(Decision decision);

/// Table-style human-readable reason, e.g. "Paste event detected".
std::string_view explain(Reason reason);
std::string_view explain(const Verdict& verdict);

} // namespace cadence
