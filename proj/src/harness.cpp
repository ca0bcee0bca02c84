#include "cadence/harness.hpp"

#include "cadence/config.hpp"
#include "cadence/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace cadence::harness {

namespace {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Draws from normal(mean, stddev), redrawing values below the floor (or at it,
// when `strict`).
double truncated_normal(std::mt19937_64& rng, double mean, double stddev, bool strict)
{
    if (stddev == 0.0)
        return std::max(mean, 0.0);
    std::normal_distribution<double> dist(mean, stddev);
    for (;;) {
        double v = dist(rng);
        if (strict ? v > 0.0 : v >= 0.0)
            return v;
    }
}

KeystrokeTrace typed_trace(std::string_view answer, std::mt19937_64& rng, double mean, double stddev, bool strict)
{
    KeystrokeTrace trace;
    trace.typed_text = std::string(answer);
    auto n = utf8_length(answer);
    trace.timestamps_ms.reserve(n);
    double t = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0)
            t += truncated_normal(rng, mean, stddev, strict);
        trace.timestamps_ms.push_back(t);
    }
    return trace;
}

std::mt19937_64 seeded(std::uint64_t seed)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    return std::mt19937_64(seq);
}

std::string format_percent(double value)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", value);
    std::string s(buf);
    while (!s.empty() && s.back() == '0')
        s.pop_back();
    if (!s.empty() && s.back() == '.')
        s.pop_back();
    return s;
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

template <typename T>
T get_or(const json& j, const char* key, T fallback)
{
    auto it = j.find(key);
    if (it == j.end() || it->is_null())
        return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("experiment key '") + key + "' has the wrong type");
    }
}

Participant parse_strategy(const json& s)
{
    if (!s.is_object())
        throw ConfigError("group strategy must be an object");
    auto kind = get_or<std::string>(s, "kind", "");
    if (kind == "human") {
        HumanProfile p;
        p.mean_gap_ms = get_or(s, "mean_gap_ms", p.mean_gap_ms);
        p.gap_stddev_ms = get_or(s, "gap_stddev_ms", p.gap_stddev_ms);
        return p;
    }
    BotStrategy b;
    if (kind == "paste")
        b.kind = StrategyKind::paste;
    else if (kind == "fixed_delay")
        b.kind = StrategyKind::fixed_delay;
    else if (kind == "random_delay")
        b.kind = StrategyKind::random_delay;
    else
        throw ConfigError("unknown strategy kind: '" + kind + "'");
    b.delay_ms = get_or(s, "delay_ms", b.delay_ms);
    b.delay_mean_ms = get_or(s, "mean_ms", b.delay_mean_ms);
    b.delay_stddev_ms = get_or(s, "stddev_ms", b.delay_stddev_ms);
    b.rng_seed = get_or<std::uint64_t>(s, "seed", b.rng_seed);
    return b;
}

} // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c)
{
    auto h = splitmix64(seed);
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ b);
    return splitmix64(h ^ c);
}

KeystrokeTrace synthesize_bot_trace(const BotStrategy& strategy, std::string_view answer)
{
    switch (strategy.kind) {
    case StrategyKind::paste: {
        KeystrokeTrace trace;
        trace.paste_flagged = true;
        trace.typed_text = std::string(answer);
        return trace;
    }
    case StrategyKind::fixed_delay: {
        KeystrokeTrace trace;
        trace.typed_text = std::string(answer);
        auto n = utf8_length(answer);
        for (std::size_t i = 0; i < n; ++i)
            trace.timestamps_ms.push_back(static_cast<double>(i) * strategy.delay_ms);
        return trace;
    }
    case StrategyKind::random_delay: {
        auto rng = seeded(strategy.rng_seed);
        return typed_trace(answer, rng, strategy.delay_mean_ms, strategy.delay_stddev_ms, false);
    }
    }
    throw std::invalid_argument("unknown bot strategy");
}

KeystrokeTrace synthesize_human_trace(std::string_view answer, std::uint64_t seed, const HumanProfile& profile)
{
    if (!(profile.gap_stddev_ms > 0.0) || !(profile.mean_gap_ms > 0.0))
        throw std::invalid_argument("human profile needs positive mean and stddev");
    auto rng = seeded(seed);
    return typed_trace(answer, rng, profile.mean_gap_ms, profile.gap_stddev_ms, true);
}

void ExperimentConfig::validate() const
{
    thresholds.validate();
    if (groups.empty())
        throw ConfigError("experiment config has no groups");
    std::set<std::string> names;
    for (const auto& g : groups) {
        if (g.name.empty())
            throw ConfigError("experiment group without a name");
        if (!names.insert(g.name).second)
            throw ConfigError("duplicate experiment group: " + g.name);
        if (g.trials == 0)
            throw ConfigError("group '" + g.name + "' has no trials");
        if (const auto* b = std::get_if<BotStrategy>(&g.participant)) {
            for (double v : {b->delay_ms, b->delay_mean_ms, b->delay_stddev_ms}) {
                if (!(v >= 0.0) || !std::isfinite(v))
                    throw ConfigError("group '" + g.name + "' has a negative delay parameter");
            }
        } else {
            const auto& h = std::get<HumanProfile>(g.participant);
            if (!(h.mean_gap_ms > 0.0) || !(h.gap_stddev_ms > 0.0) || !std::isfinite(h.mean_gap_ms) ||
                !std::isfinite(h.gap_stddev_ms))
                throw ConfigError("group '" + g.name + "' needs a positive human profile");
        }
    }
}

ExperimentConfig parse_experiment_config(const json& j)
{
    if (!j.is_object())
        throw ConfigError("experiment config must be a JSON object");
    ExperimentConfig cfg;
    cfg.seed = get_or<std::uint64_t>(j, "seed", 0);
    if (auto it = j.find("thresholds"); it != j.end())
        cfg.thresholds = parse_thresholds(*it);
    if (auto path = get_or<std::string>(j, "templates", ""); !path.empty())
        cfg.templates = path;

    auto groups = j.find("groups");
    if (groups == j.end() || !groups->is_array())
        throw ConfigError("experiment config needs a 'groups' array");
    for (const auto& g : *groups) {
        if (!g.is_object())
            throw ConfigError("experiment group must be an object");
        GroupConfig gc;
        gc.name = get_or<std::string>(g, "name", "");
        gc.trials = get_or<std::size_t>(g, "trials", 0);
        if (auto cat = get_or<std::string>(g, "category", ""); !cat.empty()) {
            try {
                gc.category = parse_category(cat);
            } catch (const UnknownCategory& e) {
                throw ConfigError(e.what());
            }
        }
        auto strategy = g.find("strategy");
        if (strategy == g.end())
            throw ConfigError("group '" + gc.name + "' has no strategy");
        gc.participant = parse_strategy(*strategy);
        cfg.groups.push_back(std::move(gc));
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open experiment config: " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError("experiment config " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_experiment_config(doc);
}

json to_json(const TrialRecord& r)
{
    json features;
    cadence::to_json(features, r.features);
    return json{{"group", r.group},
                {"trial_index", r.trial_index},
                {"verdict", r.verdict},
                {"challenge_question", r.challenge_question},
                {"features", features}};
}

ExperimentReport summarize(const std::vector<TrialRecord>& records, const std::vector<std::string>& group_order)
{
    ExperimentReport report;
    for (const auto& name : group_order) {
        GroupSummary s;
        s.group = name;
        std::vector<std::pair<std::string, std::size_t>> failures; // first-occurrence order
        for (const auto& r : records) {
            if (r.group != name)
                continue;
            ++s.trials;
            if (r.verdict == reason_code(Reason::ok)) {
                ++s.success_count;
                continue;
            }
            auto it = std::find_if(failures.begin(), failures.end(), [&](const auto& f) { return f.first == r.verdict; });
            if (it == failures.end())
                failures.emplace_back(r.verdict, 1);
            else
                ++it->second;
        }
        if (s.trials > 0)
            s.success_rate_percent = static_cast<double>(s.success_count) / static_cast<double>(s.trials) * 100.0;
        std::size_t best = 0;
        for (const auto& [code, count] : failures) {
            if (count > best) {
                best = count;
                s.modal_failure_reason = code;
            }
        }
        report.groups.push_back(std::move(s));
    }
    return report;
}

ExperimentReport run_experiment(const ExperimentConfig& config, const TrialSink& sink)
{
    config.validate();
    auto bank = TemplateBank::load(config.templates);

    std::vector<TrialRecord> records;
    std::vector<std::string> order;
    for (std::size_t g = 0; g < config.groups.size(); ++g) {
        const auto& group = config.groups[g];
        order.push_back(group.name);
        for (std::size_t t = 0; t < group.trials; ++t) {
            auto challenge_seed = derive_seed(config.seed, g, t, 0);
            auto trace_seed = derive_seed(config.seed, g, t, 1);
            auto category = group.category.value_or(kAllCategories[challenge_seed % kAllCategories.size()]);
            auto qa = bank->generate(challenge_seed, category);
            auto challenge = make_challenge(qa.question, qa.answer, category);

            KeystrokeTrace trace;
            if (const auto* bot = std::get_if<BotStrategy>(&group.participant)) {
                auto strategy = *bot;
                strategy.rng_seed = derive_seed(bot->rng_seed, trace_seed, g, t);
                trace = synthesize_bot_trace(strategy, qa.answer);
            } else {
                trace = synthesize_human_trace(qa.answer, trace_seed, std::get<HumanProfile>(group.participant));
            }

            TrialRecord record{group.name, t, "", qa.question, {}};
            try {
                auto verdict = classify(trace.typed_text, trace, challenge.answer_hash, config.thresholds);
                record.verdict = std::string(reason_code(verdict.reason));
                record.features = verdict.features;
            } catch (const NonMonotonicTrace&) {
                record.verdict = "malformed_trace";
            }
            if (sink)
                sink(record);
            records.push_back(std::move(record));
        }
    }
    return summarize(records, order);
}

ReportFormat parse_report_format(std::string_view name)
{
    if (name == "text" || name == "text_table")
        return ReportFormat::text_table;
    if (name == "csv")
        return ReportFormat::csv;
    throw UnknownFormat(std::string(name));
}

std::string explain_code(std::string_view code)
{
    if (auto reason = parse_reason(code))
        return std::string(explain(*reason));
    if (code == "malformed_trace")
        return "Malformed keystroke trace";
    if (code == "answer_unresolved")
        return "Answer not recoverable";
    return std::string(code);
}

std::string emit_report(const ExperimentReport& report, ReportFormat format)
{
    const std::array<std::string, 4> header = {"Participant Group", "Trials", "Success Rate (%)",
                                               "Primary Reason for Failure"};
    std::vector<std::array<std::string, 4>> rows;
    for (const auto& g : report.groups) {
        rows.push_back({g.group, std::to_string(g.trials), format_percent(g.success_rate_percent),
                        g.modal_failure_reason ? explain_code(*g.modal_failure_reason) : "-"});
    }

    std::ostringstream out;
    if (format == ReportFormat::csv) {
        out << "group,trials,success_rate_percent,primary_failure_reason\n";
        for (const auto& row : rows)
            out << csv_field(row[0]) << ',' << row[1] << ',' << row[2] << ',' << csv_field(row[3]) << '\n';
        return out.str();
    }

    std::array<std::size_t, 4> width{};
    for (std::size_t c = 0; c < 4; ++c) {
        width[c] = header[c].size();
        for (const auto& row : rows)
            width[c] = std::max(width[c], row[c].size());
    }
    auto emit_row = [&](const std::array<std::string, 4>& row) {
        out << row[0] << std::string(width[0] - row[0].size() + 2, ' ');
        out << std::string(width[1] - row[1].size(), ' ') << row[1] << "  ";
        out << std::string(width[2] - row[2].size(), ' ') << row[2] << "  ";
        out << row[3] << '\n';
    };
    emit_row(header);
    for (const auto& row : rows)
        emit_row(row);
    return out.str();
}

std::string emit_report(const ExperimentReport& report, std::string_view format)
{
    return emit_report(report, parse_report_format(format));
}

} // namespace cadence::harness
