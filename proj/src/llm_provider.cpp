#include "cadence/llm_provider.hpp"

#include "cadence/errors.hpp"

#include <spdlog/spdlog.h>

#include <array>
#include <future>
#include <random>
#include <thread>

namespace cadence {

namespace {

constexpr std::size_t kMaxAnswerChars = 32;

constexpr std::string_view kSystemPrompt =
    "You are a CAPTCHA generator. Produce one short question that any adult can answer instantly "
    "and that has exactly one correct answer. Respond with a single JSON object with exactly two "
    "string keys, \"question\" and \"answer\", and nothing else: no prose, no code fences. The "
    "answer must be one or two common lowercase words of at least five letters; write numbers "
    "out as words. The answer must not appear in the question.";

constexpr std::array<std::string_view, 4> kPhrasings = {
    "Ask a simple question about {topic}.",
    "Write one easy question about {topic} that a child could answer.",
    "Create a quick common-knowledge question about {topic}.",
    "Give me a short, unambiguous question about {topic}.",
};

std::string_view topic_of(Category category)
{
    switch (category) {
    case Category::colors:
        return "colors";
    case Category::arithmetic:
        return "simple arithmetic";
    case Category::animals:
        return "animals";
    case Category::common_sense:
        return "common sense";
    }
    throw UnknownCategory(std::to_string(static_cast<int>(category)));
}

// End offset (exclusive) of the balanced {...} starting at `open`, honouring
// JSON string literals, or npos.
std::size_t match_object(std::string_view raw, std::size_t open)
{
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = open; i < raw.size(); ++i) {
        char c = raw[i];
        if (in_string) {
            if (escaped)
                escaped = false;
            else if (c == '\\')
                escaped = true;
            else if (c == '"')
                in_string = false;
            continue;
        }
        if (c == '"')
            in_string = true;
        else if (c == '{')
            ++depth;
        else if (c == '}' && --depth == 0)
            return i + 1;
    }
    return std::string_view::npos;
}

} // namespace

void ProviderConfig::validate() const
{
    if (endpoint_url.empty())
        throw ConfigError("provider endpoint_url is empty");
    if (timeout.count() <= 0)
        throw ConfigError("provider timeout must be positive");
    if (max_retries < 0)
        throw ConfigError("provider max_retries must be non-negative");
}

std::ostream& operator<<(std::ostream& os, const ProviderConfig& cfg)
{
    return os << "ProviderConfig{endpoint=" << cfg.endpoint_url << ", model=" << cfg.model
              << ", api_key=" << (cfg.api_key.empty() ? "<unset>" : "<redacted>")
              << ", timeout_ms=" << cfg.timeout.count() << ", max_retries=" << cfg.max_retries << "}";
}

PromptPair build_prompt(Category category, std::uint64_t seed)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(category)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<std::size_t> pick(0, kPhrasings.size() - 1);
    auto user = fill_placeholders(kPhrasings[pick(rng)], {{"topic", std::string(topic_of(category))}});
    return PromptPair{std::string(kSystemPrompt), std::move(user)};
}

QuestionAnswer parse_model_response(std::string_view raw)
{
    for (auto open = raw.find('{'); open != std::string_view::npos; open = raw.find('{', open + 1)) {
        auto end = match_object(raw, open);
        if (end == std::string_view::npos)
            break;
        auto doc = nlohmann::json::parse(raw.substr(open, end - open), nullptr, false);
        if (doc.is_discarded() || !doc.is_object())
            continue;

        auto q = doc.find("question");
        auto a = doc.find("answer");
        if (q == doc.end() || a == doc.end())
            throw MalformedResponse("model object lacks question/answer keys");
        if (!q->is_string() || !a->is_string())
            throw MalformedResponse("question/answer must be strings");

        QuestionAnswer qa{q->get<std::string>(), a->get<std::string>()};
        if (normalize_answer(qa.question).empty())
            throw MalformedResponse("empty question");
        auto answer = normalize_answer(qa.answer);
        if (answer.empty())
            throw MalformedResponse("empty answer");
        if (utf8_length(answer) > kMaxAnswerChars)
            throw MalformedResponse("answer longer than 32 characters");
        return qa;
    }
    throw MalformedResponse("no JSON object in model output");
}

Challenge TemplateProvider::fetch_challenge(Category category, std::uint64_t seed, std::int64_t ttl_ms,
                                            std::int64_t now_ms)
{
    auto qa = bank_->generate(seed, category);
    return make_challenge(qa.question, qa.answer, category, ttl_ms, now_ms);
}

LlmProvider::LlmProvider(ProviderConfig cfg, std::shared_ptr<ModelTransport> transport,
                         std::shared_ptr<const TemplateBank> fallback)
    : cfg_(std::move(cfg)), transport_(std::move(transport)), fallback_(std::move(fallback))
{
    if (cfg_.timeout.count() <= 0 || cfg_.max_retries < 0)
        throw ConfigError("invalid provider timeout/retry settings");
}

std::string LlmProvider::call_with_deadline(const PromptPair& prompt)
{
    // The transport runs on its own thread so a hung call cannot hold the
    // caller past the deadline; an abandoned call finishes in the background.
    auto result = std::make_shared<std::promise<std::string>>();
    auto future = result->get_future();
    std::thread([transport = transport_, prompt, timeout = cfg_.timeout, result] {
        try {
            result->set_value(transport->complete(prompt, timeout));
        } catch (...) {
            result->set_exception(std::current_exception());
        }
    }).detach();

    if (future.wait_for(cfg_.timeout) != std::future_status::ready)
        throw TransportError("provider call timed out");
    return future.get();
}

Challenge LlmProvider::fetch_challenge(Category category, std::uint64_t seed, std::int64_t ttl_ms,
                                       std::int64_t now_ms)
{
    auto prompt = build_prompt(category, seed);
    const int attempts = cfg_.max_retries + 1;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        try {
            auto qa = parse_model_response(call_with_deadline(prompt));
            return make_challenge(qa.question, qa.answer, category, ttl_ms, now_ms);
        } catch (const std::exception& e) {
            spdlog::warn("model provider attempt {}/{} failed: {}", attempt, attempts, e.what());
        }
    }

    fallbacks_.fetch_add(1);
    spdlog::warn("model provider unavailable; using template bank for category {}", to_string(category));
    auto qa = fallback_->generate(seed, category);
    return make_challenge(qa.question, qa.answer, category, ttl_ms, now_ms);
}

} // namespace cadence
