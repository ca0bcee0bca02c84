#include "cadence/challenge.hpp"
#include "cadence/classifier.hpp"
#include "cadence/errors.hpp"

#include "doctest.h"

#include <random>

using namespace cadence;

namespace {

KeystrokeTrace typed(std::vector<double> ts)
{
    return KeystrokeTrace{std::move(ts), false, ""};
}

std::vector<double> cumulative(const std::vector<double>& gaps, double start = 0.0)
{
    std::vector<double> ts{start};
    for (double g : gaps)
        ts.push_back(ts.back() + g);
    return ts;
}

// Restatement of the decision rule, used to enumerate the whole grid.
bool expected_human(bool hash_ok, bool paste, std::size_t count, std::size_t len, double sigma, double total,
                    const Thresholds& th)
{
    return hash_ok && !paste && count >= std::max(th.min_keystrokes, len) && sigma > th.min_stddev_ms &&
           (len <= th.min_len_for_total_check || total > th.min_total_ms);
}

} // namespace

TEST_CASE("paste is rejected before timing is looked at")
{
    KeystrokeTrace trace{{}, true, "blue"};
    auto v = classify("blue", trace, hash_answer("blue"), Thresholds{});
    CHECK(v.decision == Decision::bot);
    CHECK(v.reason == Reason::paste_detected);
    CHECK(explain(v) == "Paste event detected");
}

TEST_CASE("constant 50 ms typing is low variance")
{
    auto v = classify("blue", typed({0, 50, 100, 150}), hash_answer("blue"), Thresholds{});
    CHECK(v.decision == Decision::bot);
    CHECK(v.reason == Reason::low_variance);
    CHECK(v.features.stddev_latency_ms == 0.0);
    CHECK(explain(v) == "Low latency std. deviation");
}

TEST_CASE("irregular typing passes")
{
    auto v = classify("blue", typed({0, 120, 300, 310}), hash_answer("blue"), Thresholds{});
    CHECK(v.decision == Decision::human);
    CHECK(v.reason == Reason::ok);
    CHECK(v.features.total_duration_ms == 310);
}

TEST_CASE("wrong answer is reported regardless of timing")
{
    KeystrokeTrace pasted{{}, true, ""};
    auto v = classify("green", pasted, hash_answer("blue"), Thresholds{});
    CHECK(v.decision == Decision::bot);
    CHECK(v.reason == Reason::hash_mismatch);
    CHECK(explain(v) == "Incorrect answer");
    // Normalization happens before hashing.
    CHECK(classify("  BLUE ", typed({0, 120, 300, 310}), hash_answer("blue"), Thresholds{}).reason == Reason::ok);
}

TEST_CASE("too few keystrokes and too fast")
{
    auto few = classify("yellow", typed({0, 120, 300}), hash_answer("yellow"), Thresholds{});
    CHECK(few.reason == Reason::too_few_keystrokes);
    CHECK(explain(few) == "Too few keystrokes for the answer");

    // sigma well above 20 but only 140 ms in total
    auto fast = classify("yellow", typed({0, 1, 2, 3, 70, 140}), hash_answer("yellow"), Thresholds{});
    CHECK(fast.features.stddev_latency_ms > 20.0);
    CHECK(fast.reason == Reason::too_fast);
    CHECK(explain(fast) == "Typing too fast");

    // Exactly at the threshold is still too fast.
    auto edge = classify("yellow", typed({0, 1, 2, 3, 75, 150}), hash_answer("yellow"), Thresholds{});
    CHECK(edge.reason == Reason::too_fast);

    // Short answers skip the total-time check.
    auto short_answer = classify("abc", typed({0, 1, 60}), hash_answer("abc"), Thresholds{});
    CHECK(short_answer.reason == Reason::ok);
}

TEST_CASE("stddev threshold is strict")
{
    // flights 10 and 50: sigma exactly 20
    auto v = classify("abc", typed({0, 10, 60}), hash_answer("abc"), Thresholds{});
    CHECK(v.features.stddev_latency_ms == 20.0);
    CHECK(v.reason == Reason::low_variance);
}

TEST_CASE("malformed traces throw")
{
    CHECK_THROWS_AS(classify("abc", typed({0, 100, 50}), hash_answer("abc"), Thresholds{}), NonMonotonicTrace);
}

TEST_CASE("human iff every check passes, over an enumerated grid")
{
    Thresholds th;
    const std::vector<std::string> answers = {"ab", "abc", "abcd", "yellow"};
    const std::vector<std::vector<double>> gap_sets = {
        {}, {50}, {10, 50}, {0, 0, 0}, {50, 50, 50}, {10, 90, 20}, {1, 1, 1, 120, 5},
        {100, 300, 20, 40, 200}, {5, 60, 5, 60, 5}, {30, 30, 30, 30, 31}, {200, 10, 200, 10, 200, 10},
    };
    int humans = 0;
    for (const auto& answer : answers) {
        auto len = utf8_length(normalize_answer(answer));
        for (bool hash_ok : {true, false}) {
            for (bool paste : {false, true}) {
                for (const auto& gaps : gap_sets) {
                    KeystrokeTrace trace{cumulative(gaps, 1000), paste, answer};
                    auto fv = compute_features(trace);
                    auto v = classify(answer, trace, hash_answer(hash_ok ? answer : "nope"), th);
                    bool want = expected_human(hash_ok, paste, trace.timestamps_ms.size(), len,
                                               fv.stddev_latency_ms, fv.total_duration_ms, th);
                    CAPTURE(answer);
                    CAPTURE(trace.timestamps_ms.size());
                    CHECK((v.decision == Decision::human) == want);
                    CHECK((v.reason == Reason::ok) == want);
                    humans += want;
                }
            }
        }
    }
    CHECK(humans > 0);
}

TEST_CASE("raising thresholds never turns bot into human")
{
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> gap(0.0, 400.0);
    std::uniform_int_distribution<int> len(2, 12);
    for (int i = 0; i < 2000; ++i) {
        std::string answer(static_cast<std::size_t>(len(rng)), 'q');
        std::vector<double> gaps(answer.size() - 1);
        for (auto& g : gaps)
            g = gap(rng);
        KeystrokeTrace trace{cumulative(gaps), false, answer};
        auto hash = hash_answer(answer);

        Thresholds lo;
        Thresholds hi{lo.min_stddev_ms + 15.0, lo.min_total_ms + 200.0, lo.min_len_for_total_check,
                      lo.min_keystrokes};
        bool human_lo = classify(answer, trace, hash, lo).decision == Decision::human;
        bool human_hi = classify(answer, trace, hash, hi).decision == Decision::human;
        CHECK((!human_hi || human_lo));
    }
}

TEST_CASE("degenerate thresholds reduce to hash, paste and keystroke count")
{
    Thresholds th{-1.0, 0.0, 3, 1};
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> gap(0.001, 500.0);
    std::uniform_int_distribution<int> len(1, 10);
    for (int i = 0; i < 1000; ++i) {
        std::string answer(static_cast<std::size_t>(len(rng)), 'w');
        std::vector<double> gaps(answer.size() - 1);
        for (auto& g : gaps)
            g = gap(rng);
        KeystrokeTrace trace{cumulative(gaps), false, answer};
        CHECK(classify(answer, trace, hash_answer(answer), th).decision == Decision::human);
        trace.paste_flagged = true;
        CHECK(classify(answer, trace, hash_answer(answer), th).reason == Reason::paste_detected);
    }
}

TEST_CASE("reason codes round-trip")
{
    for (auto r : {Reason::ok, Reason::hash_mismatch, Reason::paste_detected, Reason::too_few_keystrokes,
                   Reason::low_variance, Reason::too_fast}) {
        CHECK(parse_reason(reason_code(r)) == r);
    }
    CHECK_FALSE(parse_reason("nonsense").has_value());
    CHECK(explain(Reason::ok) == "verified");
    CHECK(decision_code(Decision::human) == "human");
    CHECK(decision_code(Decision::bot) == "bot");
}

TEST_CASE("threshold validation")
{
    CHECK_NOTHROW(Thresholds{}.validate());
    CHECK_THROWS_AS((Thresholds{-1.0, 150.0, 3, 1}.validate()), ConfigError);
    CHECK_THROWS_AS((Thresholds{20.0, -0.5, 3, 1}.validate()), ConfigError);
}
