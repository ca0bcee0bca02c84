#include "cadence/errors.hpp"
#include "cadence/harness.hpp"

#include "httplib.h"

#include <unordered_map>

namespace cadence::harness {

namespace {

using nlohmann::json;

// The service publishes the answer hash, so any answer drawn from a known
// bank can be recovered offline by hashing every candidate.
std::unordered_map<std::string, std::string> answer_dictionary(const TemplateBank& bank)
{
    std::unordered_map<std::string, std::string> by_hash;
    for (auto category : kAllCategories) {
        for (const auto& answer : bank.possible_answers(category))
            by_hash.emplace(hash_answer(answer), answer);
    }
    return by_hash;
}

json post_json(httplib::Client& cli, const std::string& path, const json& body)
{
    auto res = cli.Post(path, body.dump(), "application/json");
    if (!res)
        throw TransportError("POST " + path + " failed: " + httplib::to_string(res.error()));
    auto doc = json::parse(res->body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw TransportError("POST " + path + " returned HTTP " + std::to_string(res->status) + " without JSON");
    if (res->status != 200 && path == "/api/challenge")
        throw TransportError("POST /api/challenge returned HTTP " + std::to_string(res->status));
    return doc;
}

} // namespace

ExperimentReport run_experiment_live(const ExperimentConfig& config, const std::string& base_url,
                                     const TrialSink& sink)
{
    config.validate();
    auto bank = TemplateBank::load(config.templates);
    auto dictionary = answer_dictionary(*bank);

    httplib::Client cli(base_url);
    cli.set_connection_timeout(std::chrono::seconds(5));
    cli.set_read_timeout(std::chrono::seconds(30));

    std::vector<TrialRecord> records;
    std::vector<std::string> order;
    for (std::size_t g = 0; g < config.groups.size(); ++g) {
        const auto& group = config.groups[g];
        order.push_back(group.name);
        for (std::size_t t = 0; t < group.trials; ++t) {
            auto challenge_seed = derive_seed(config.seed, g, t, 0);
            auto trace_seed = derive_seed(config.seed, g, t, 1);
            auto category = group.category.value_or(kAllCategories[challenge_seed % kAllCategories.size()]);

            auto issued = post_json(cli, "/api/challenge", {{"category", std::string(to_string(category))}});
            TrialRecord record{group.name, t, "", issued.value("question", ""), {}};

            auto found = dictionary.find(issued.value("answer_hash", ""));
            if (found == dictionary.end()) {
                record.verdict = "answer_unresolved";
            } else {
                const auto& answer = found->second;
                KeystrokeTrace trace;
                if (const auto* bot = std::get_if<BotStrategy>(&group.participant)) {
                    auto strategy = *bot;
                    strategy.rng_seed = derive_seed(bot->rng_seed, trace_seed, g, t);
                    trace = synthesize_bot_trace(strategy, answer);
                } else {
                    trace = synthesize_human_trace(answer, trace_seed, std::get<HumanProfile>(group.participant));
                }
                json body = {{"challenge_id", issued.value("id", "")},
                             {"typed_text", answer},
                             {"trace", {{"timestamps", trace.timestamps_ms}, {"paste_flagged", trace.paste_flagged}}}};
                auto verdict = post_json(cli, "/api/verify", body);
                record.verdict = verdict.value("reason", "error");
            }
            if (sink)
                sink(record);
            records.push_back(std::move(record));
        }
    }
    return summarize(records, order);
}

} // namespace cadence::harness
