#pragma once

#include "json.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace cadence {

/// Keydown timestamps (ms on a monotonic clock, fractional allowed) for one
/// answer attempt, plus the client-reported paste flag.
struct KeystrokeTrace {
    std::vector<double> timestamps_ms;
    bool paste_flagged = false;
    std::string typed_text;

    bool operator==(const KeystrokeTrace&) const = default;
};

struct FeatureVector {
    double total_duration_ms = 0.0;
    double mean_latency_ms = 0.0;
    double stddev_latency_ms = 0.0; // population standard deviation
    std::size_t keystroke_count = 0;
    std::size_t flight_count = 0;

    bool operator==(const FeatureVector&) const = default;
};

/// F_i = t_{i+1} - t_i. Equal adjacent timestamps are allowed; a negative gap
/// throws NonMonotonicTrace.
std::vector<double> flight_times(std::span<const double> timestamps_ms);

/// Total duration, mean and population standard deviation of flight times.
/// Empty and single-key traces produce all-zero statistics.
FeatureVector compute_features(const KeystrokeTrace& trace);

// Wire form: {"timestamps": [...], "paste_flagged": bool, "typed_text": str}.
// typed_text is optional on input.
void to_json(nlohmann::json& j, const KeystrokeTrace& trace);
void from_json(const nlohmann::json& j, KeystrokeTrace& trace);

void to_json(nlohmann::json& j, const FeatureVector& features);

} // namespace cadence
