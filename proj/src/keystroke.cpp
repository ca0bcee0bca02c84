#include "cadence/keystroke.hpp"

#include "cadence/errors.hpp"

#include <cmath>

namespace cadence {

std::vector<double> flight_times(std::span<const double> timestamps_ms)
{
    std::vector<double> flights;
    if (timestamps_ms.size() < 2)
        return flights;
    flights.reserve(timestamps_ms.size() - 1);
    for (std::size_t i = 0; i + 1 < timestamps_ms.size(); ++i) {
        double gap = timestamps_ms[i + 1] - timestamps_ms[i];
        if (!(gap >= 0.0))
            throw NonMonotonicTrace("keydown " + std::to_string(i + 1) + " precedes keydown " +
                                    std::to_string(i));
        flights.push_back(gap);
    }
    return flights;
}

FeatureVector compute_features(const KeystrokeTrace& trace)
{
    const auto& ts = trace.timestamps_ms;
    auto flights = flight_times(ts);

    FeatureVector fv;
    fv.keystroke_count = ts.size();
    fv.flight_count = flights.size();
    if (flights.empty())
        return fv;

    fv.total_duration_ms = ts.back() - ts.front();

    // Welford's single-pass mean/variance.
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t k = 0;
    for (double f : flights) {
        ++k;
        double delta = f - mean;
        mean += delta / static_cast<double>(k);
        m2 += delta * (f - mean);
    }
    fv.mean_latency_ms = mean;
    fv.stddev_latency_ms = flights.size() > 1 ? std::sqrt(m2 / static_cast<double>(k)) : 0.0;
    return fv;
}

void to_json(nlohmann::json& j, const KeystrokeTrace& trace)
{
    j = nlohmann::json{{"timestamps", trace.timestamps_ms},
                       {"paste_flagged", trace.paste_flagged},
                       {"typed_text", trace.typed_text}};
}

void from_json(const nlohmann::json& j, KeystrokeTrace& trace)
{
    if (!j.is_object())
        throw nlohmann::json::type_error::create(302, "trace must be an object", &j);
    const auto& ts = j.at("timestamps");
    if (!ts.is_array())
        throw nlohmann::json::type_error::create(302, "timestamps must be an array", &ts);
    trace.timestamps_ms.clear();
    trace.timestamps_ms.reserve(ts.size());
    for (const auto& t : ts) {
        if (!t.is_number())
            throw nlohmann::json::type_error::create(302, "timestamps must be numbers", &t);
        trace.timestamps_ms.push_back(t.get<double>());
    }
    trace.paste_flagged = j.at("paste_flagged").get<bool>();
    trace.typed_text = j.value("typed_text", std::string());
}

void to_json(nlohmann::json& j, const FeatureVector& fv)
{
    j = nlohmann::json{{"total_duration_ms", fv.total_duration_ms},
                       {"mean_latency_ms", fv.mean_latency_ms},
                       {"stddev_latency_ms", fv.stddev_latency_ms},
                       {"keystroke_count", fv.keystroke_count},
                       {"flight_count", fv.flight_count}};
}

} // namespace cadence
