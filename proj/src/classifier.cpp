#include "cadence/classifier.hpp"

#include "cadence/challenge.hpp"
#include "cadence/errors.hpp"

#include <array>

namespace cadence {

namespace {

struct ReasonInfo {
    Reason reason;
    std::string_view code;
    std::string_view text;
};

constexpr std::array<ReasonInfo, 6> kReasons = {{
    {Reason::ok, "ok", "verified"},
    {Reason::hash_mismatch, "hash_mismatch", "Incorrect answer"},
    {Reason::paste_detected, "paste_detected", "Paste event detected"},
    {Reason::too_few_keystrokes, "too_few_keystrokes", "Too few keystrokes for the answer"},
    {Reason::low_variance, "low_variance", "Low latency std. deviation"},
    {Reason::too_fast, "too_fast", "Typing too fast"},
}};

Verdict bot(Reason reason, const FeatureVector& features = {})
{
    return Verdict{Decision::bot, reason, features};
}

} // namespace

void Thresholds::validate() const
{
    if (min_stddev_ms < 0.0 || min_total_ms < 0.0)
        throw ConfigError("thresholds must be non-negative");
}

Verdict classify(std::string_view typed_text, const KeystrokeTrace& trace, std::string_view target_hash,
                 const Thresholds& th)
{
    auto normalized = normalize_answer(typed_text);
    if (hash_answer(normalized) != target_hash)
        return bot(Reason::hash_mismatch);

    if (trace.paste_flagged)
        return bot(Reason::paste_detected);

    auto features = compute_features(trace);
    auto answer_len = utf8_length(normalized);

    if (features.keystroke_count < th.min_keystrokes || features.keystroke_count < answer_len)
        return bot(Reason::too_few_keystrokes, features);

    if (!(features.stddev_latency_ms > th.min_stddev_ms))
        return bot(Reason::low_variance, features);

    if (answer_len > th.min_len_for_total_check && !(features.total_duration_ms > th.min_total_ms))
        return bot(Reason::too_fast, features);

    return Verdict{Decision::human, Reason::ok, features};
}

std::string_view reason_code(Reason reason)
{
    return kReasons[static_cast<std::size_t>(reason)].code;
}

std::optional<Reason> parse_reason(std::string_view code)
{
    for (const auto& info : kReasons) {
        if (info.code == code)
            return info.reason;
    }
    return std::nullopt;
}

std::string_view decision_code(Decision decision)
{
    return decision == Decision::human ? "human" : "bot";
}

std::string_view explain(Reason reason)
{
    return kReasons[static_cast<std::size_t>(reason)].text;
}

std::string_view explain(const Verdict& verdict)
{
    return explain(verdict.reason);
}

} // namespace cadence
