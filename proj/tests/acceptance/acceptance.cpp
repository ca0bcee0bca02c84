// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include "cadence/classifier.hpp"
#include "cadence/harness.hpp"
#include "cadence/http_api.hpp"
#include "cadence/session.hpp"

#include "../unit/recording_provider.hpp"
#include "httplib.h"

#include <spdlog/spdlog.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

using namespace cadence;
using namespace cadence::harness;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, auto... args)
{
    char buf[256];
    std::snprintf(buf, sizeof(buf), f, args...);
    return buf;
}

struct GroupRun {
    GroupSummary summary;
    std::vector<TrialRecord> records;
    double seconds = 0.0;
};

GroupRun run_group(const std::string& name, Participant participant, std::size_t trials, std::uint64_t seed)
{
    ExperimentConfig cfg;
    cfg.seed = seed;
    cfg.groups = {GroupConfig{name, participant, trials, std::nullopt}};
    GroupRun run;
    auto start = Clock::now();
    auto report = run_experiment(cfg, [&](const TrialRecord& r) { run.records.push_back(r); });
    run.seconds = seconds_since(start);
    run.summary = report.groups.at(0);
    return run;
}

bool all_reasons(const std::vector<TrialRecord>& recs, std::string_view code)
{
    return std::all_of(recs.begin(), recs.end(), [&](const TrialRecord& r) { return r.verdict == code; });
}

Outcome paste_bot()
{
    auto run = run_group("Bot (Paste-based)", BotStrategy{StrategyKind::paste}, 50, 2024);
    bool ok = run.summary.trials == 50 && run.summary.success_count == 0 &&
              all_reasons(run.records, "paste_detected") && run.seconds < 5.0;
    return {ok, fmt("50 trials, success %.2f%%, all paste_detected=%d, %.3fs", run.summary.success_rate_percent,
                    all_reasons(run.records, "paste_detected"), run.seconds)};
}

Outcome fixed_delay_bot()
{
    auto run = run_group("Bot (Typing Simulation)", BotStrategy{StrategyKind::fixed_delay, 50.0}, 50, 2024);
    bool sigma_zero = std::all_of(run.records.begin(), run.records.end(),
                                  [](const TrialRecord& r) { return r.features.stddev_latency_ms == 0.0; });
    bool ok = run.summary.trials == 50 && run.summary.success_count == 0 &&
              all_reasons(run.records, "low_variance") && sigma_zero && run.seconds < 5.0;
    return {ok, fmt("50 trials, success %.2f%%, all low_variance=%d, sigma==0 exactly=%d, %.3fs",
                    run.summary.success_rate_percent, all_reasons(run.records, "low_variance"), sigma_zero,
                    run.seconds)};
}

Outcome synthetic_humans()
{
    auto run = run_group("Synthetic humans", HumanProfile{}, 1000, 2024);
    bool rate_ok = run.summary.trials == 1000 && run.summary.success_rate_percent >= 99.0;

    // Typo, then the right answer on the same id.
    auto provider = std::make_shared<RecordingProvider>();
    SessionService service(SessionOptions{}, provider);
    int retry_ok = 0;
    const int retry_trials = 20;
    for (int i = 0; i < retry_trials; ++i) {
        auto issued = service.issue_challenge();
        auto answer = provider->answer(issued.id);
        auto typo = answer + "x";
        auto first = service.verify({issued.id, typo, synthesize_human_trace(typo, i, HumanProfile{})});
        auto second = service.verify({issued.id, answer, synthesize_human_trace(answer, 1000 + i, HumanProfile{})});
        retry_ok += first.reason == "hash_mismatch" && first.retry_allowed &&
                    second.decision == ResponseDecision::human;
    }
    return {rate_ok && retry_ok == retry_trials,
            fmt("profile (%.0f,%.0f) ms: %zu/1000 human (%.2f%%); typo-retry human on attempt 2: %d/%d",
                HumanProfile{}.mean_gap_ms, HumanProfile{}.gap_stddev_ms, run.summary.success_count,
                run.summary.success_rate_percent, retry_ok, retry_trials)};
}

Outcome feature_oracle()
{
    std::mt19937_64 rng(20240611);
    std::uniform_int_distribution<int> len(0, 60);
    std::uniform_real_distribution<double> gap(0.0, 800.0), origin(0.0, 1e7);
    double worst = 0.0;
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max({1e-300, std::abs(a), std::abs(b)}); };
    auto start = Clock::now();
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> ts;
        int n = len(rng);
        if (n > 0)
            ts.push_back(origin(rng));
        for (int k = 1; k < n; ++k)
            ts.push_back(ts.back() + gap(rng));

        auto fv = compute_features(KeystrokeTrace{ts, false, ""});

        // naive two-pass reference
        double total = 0, mean = 0, sd = 0;
        if (ts.size() >= 2) {
            std::vector<double> f;
            for (std::size_t k = 1; k < ts.size(); ++k)
                f.push_back(ts[k] - ts[k - 1]);
            total = ts.back() - ts.front();
            for (double x : f)
                mean += x;
            mean /= static_cast<double>(f.size());
            for (double x : f)
                sd += (x - mean) * (x - mean);
            sd = std::sqrt(sd / static_cast<double>(f.size()));
        }
        if (total != fv.total_duration_ms)
            worst = std::max(worst, rel(total, fv.total_duration_ms));
        if (mean != fv.mean_latency_ms)
            worst = std::max(worst, rel(mean, fv.mean_latency_ms));
        if (sd != fv.stddev_latency_ms)
            worst = std::max(worst, rel(sd, fv.stddev_latency_ms));
    }
    double secs = seconds_since(start);
    return {worst <= 1e-9 && secs < 1.0, fmt("1000 traces, max relative error %.3g, %.3fs", worst, secs)};
}

Outcome classifier_iff()
{
    // Five predicates toggled independently on a six-character answer.
    const std::string answer = "yellow";
    const auto target = hash_answer(answer);
    auto timestamps = [](bool enough_keys, bool sigma_ok, bool total_ok) {
        std::size_t keys = enough_keys ? 6 : 5;
        std::vector<double> gaps;
        for (std::size_t i = 0; i + 1 < keys; ++i) {
            if (sigma_ok && total_ok)
                gaps.push_back(i % 2 == 0 ? 50.0 : 250.0);
            else if (sigma_ok)
                gaps.push_back(i + 2 == keys ? 120.0 : 1.0);
            else
                gaps.push_back(total_ok ? 100.0 : 10.0);
        }
        std::vector<double> ts{5000.0};
        for (double g : gaps)
            ts.push_back(ts.back() + g);
        return ts;
    };
    const std::array<Reason, 5> order = {Reason::hash_mismatch, Reason::paste_detected, Reason::too_few_keystrokes,
                                         Reason::low_variance, Reason::too_fast};
    int cases = 0, agree = 0;
    for (unsigned mask = 0; mask < 32; ++mask) {
        std::array<bool, 5> pass{};
        for (int k = 0; k < 5; ++k)
            pass[k] = (mask >> k) & 1u;
        KeystrokeTrace trace{timestamps(pass[2], pass[3], pass[4]), !pass[1], ""};
        auto fv = compute_features(trace);
        // the crafted trace must realise exactly the intended predicate values
        bool crafted = (fv.keystroke_count >= answer.size()) == pass[2] && (fv.stddev_latency_ms > 20.0) == pass[3] &&
                       (fv.total_duration_ms > 150.0) == pass[4];
        auto v = classify(pass[0] ? "Yellow " : "purple", trace, target, Thresholds{});
        Reason expected = Reason::ok;
        for (int k = 0; k < 5; ++k) {
            if (!pass[k]) {
                expected = order[k];
                break;
            }
        }
        bool all = mask == 31;
        ++cases;
        agree += crafted && (v.decision == Decision::human) == all && v.reason == expected;
    }
    return {agree == cases, fmt("%d/%d predicate combinations match (human iff all pass, reason = first failure)",
                                agree, cases)};
}

Outcome protocol_safety()
{
    auto provider = std::make_shared<RecordingProvider>();
    SessionService service(SessionOptions{}, provider);
    http::ApiServer api(service);
    int port = api.start("127.0.0.1", 0);
    httplib::Client client("127.0.0.1", port);

    std::vector<std::string> bodies;
    std::mutex bodies_mu;
    auto post = [&](httplib::Client& cli, const std::string& path, const json& body) {
        auto res = cli.Post(path, body.dump(), "application/json");
        if (!res)
            throw std::runtime_error("request failed: " + path);
        std::lock_guard lock(bodies_mu);
        bodies.push_back(res->body);
        return json::parse(res->body);
    };
    auto verify_body = [](const std::string& id, const std::string& text, const KeystrokeTrace& t) {
        return json{{"challenge_id", id}, {"typed_text", text}, {"trace", t}};
    };

    const int issued_count = 120;
    std::vector<std::string> ids;
    int double_verify_ok = 0, double_verify_total = 0;
    for (int i = 0; i < issued_count; ++i) {
        auto issued = post(client, "/api/challenge", json::object());
        auto id = issued.at("id").get<std::string>();
        ids.push_back(id);
        auto answer = provider->answer(id);
        auto trace = synthesize_human_trace(answer, static_cast<std::uint64_t>(i), HumanProfile{});
        switch (i % 3) {
        case 0: { // correct, then verify again
            post(client, "/api/verify", verify_body(id, answer, trace));
            auto again = post(client, "/api/verify", verify_body(id, answer, trace));
            ++double_verify_total;
            double_verify_ok += again["decision"] == "error" && again["reason"] == "already_used";
            break;
        }
        case 1: // pasted
            post(client, "/api/verify", verify_body(id, answer, KeystrokeTrace{{}, true, answer}));
            break;
        default: // wrong answer
            post(client, "/api/verify", verify_body(id, "zzzzz", trace));
            break;
        }
    }

    // concurrent verifies on fresh ids
    const int races = 20;
    int race_ok = 0;
    for (int r = 0; r < races; ++r) {
        auto issued = post(client, "/api/challenge", json::object());
        auto id = issued.at("id").get<std::string>();
        auto answer = provider->answer(id);
        auto body = verify_body(id, answer, synthesize_human_trace(answer, 5000 + r, HumanProfile{}));
        std::atomic<int> humans{0};
        std::vector<std::thread> threads;
        for (int t = 0; t < 8; ++t) {
            threads.emplace_back([&] {
                httplib::Client cli("127.0.0.1", port);
                if (post(cli, "/api/verify", body)["decision"] == "human")
                    ++humans;
            });
        }
        for (auto& t : threads)
            t.join();
        race_ok += humans.load() <= 1;
    }

    auto answers = provider->answers();
    std::size_t leaks = 0;
    for (const auto& body : bodies) {
        auto haystack = normalize_answer(body);
        for (const auto& [id, answer] : answers) {
            auto needle = normalize_answer(answer);
            // only this challenge's own answer counts for challenge bodies; verify
            // bodies are checked against every answer
            bool own = body.find(id) != std::string::npos;
            bool is_challenge = body.find("\"question\"") != std::string::npos;
            if ((own || !is_challenge) && haystack.find(needle) != std::string::npos)
                ++leaks;
        }
    }
    api.stop();

    bool ok = answers.size() >= 100 && leaks == 0 && double_verify_ok == double_verify_total && race_ok == races;
    return {ok, fmt("%zu challenges with known answers, %zu bodies scanned, %zu leaks; already_used %d/%d; "
                    "races with <=1 human %d/%d",
                    answers.size(), bodies.size(), leaks, double_verify_ok, double_verify_total, race_ok, races)};
}

Outcome random_delay_limitation()
{
    auto run = run_group("Bot (Randomized Delays)", BotStrategy{StrategyKind::random_delay, 0, 180.0, 60.0, 1}, 200,
                         2024);
    return {run.summary.trials == 200 && run.summary.success_rate_percent > 50.0,
            fmt("mu=180 sigma=60 ms, 200 trials: %.2f%% judged human (limitation observable)",
                run.summary.success_rate_percent)};
}

} // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"paste bot rejected (0%, paste_detected, <5s)", paste_bot},
        {"fixed 50 ms bot rejected (0%, low_variance, sigma=0, <5s)", fixed_delay_bot},
        {"synthetic humans >=99% and typo retry", synthetic_humans},
        {"feature oracle equivalence (1e-9, <1s)", feature_oracle},
        {"classifier iff enumeration", classifier_iff},
        {"protocol safety over HTTP", protocol_safety},
        {"randomized-delay bot evades (>50% human)", random_delay_limitation},
    };

    spdlog::set_level(spdlog::level::warn);
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s  %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        failed += !o.pass;
    }
    std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
    return failed == 0 ? 0 : 1;
}
