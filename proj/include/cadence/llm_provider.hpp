#pragma once

#include "cadence/challenge.hpp"
#include "cadence/template_bank.hpp"

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <ostream>
#include <string>

namespace cadence {

struct PromptPair {
    std::string system_prompt;
    std::string user_prompt;

    bool operator==(const PromptPair&) const = default;
};

struct ProviderConfig {
    std::string endpoint_url; // e.g. https://api.openai.com/v1/chat/completions
    std::string api_key;      // never logged or serialized
    std::string model;
    std::chrono::milliseconds timeout{5000};
    int max_retries = 2;

    /// Throws ConfigError.
    void validate() const;
};

/// Prints the config with the key redacted.
std::ostream& operator<<(std::ostream& os, const ProviderConfig& cfg);

/// One fixed system prompt; the user prompt is picked deterministically from a
/// small phrasing list for (category, seed).
PromptPair build_prompt(Category category, std::uint64_t seed);

/// Extracts "question" and "answer" from the first JSON object embedded in
/// `raw`. Extra keys are ignored. Throws MalformedResponse.
QuestionAnswer parse_model_response(std::string_view raw);

/// Narrow text-in/text-out boundary to the model vendor. Implementations throw
/// TransportError on failure.
class ModelTransport {
public:
    virtual ~ModelTransport() = default;
    virtual std::string complete(const PromptPair& prompt, std::chrono::milliseconds timeout) = 0;
};

/// OpenAI-compatible chat-completions transport over HTTPS.
class HttpChatTransport final : public ModelTransport {
public:
    explicit HttpChatTransport(ProviderConfig cfg);
    std::string complete(const PromptPair& prompt, std::chrono::milliseconds timeout) override;

private:
    ProviderConfig cfg_;
    std::string scheme_host_port_;
    std::string path_;
};

/// Where the session service gets challenges from.
class ChallengeProvider {
public:
    virtual ~ChallengeProvider() = default;
    virtual Challenge fetch_challenge(Category category, std::uint64_t seed, std::int64_t ttl_ms,
                                      std::int64_t now_ms) = 0;
};

class TemplateProvider final : public ChallengeProvider {
public:
    explicit TemplateProvider(std::shared_ptr<const TemplateBank> bank) : bank_(std::move(bank)) {}
    Challenge fetch_challenge(Category category, std::uint64_t seed, std::int64_t ttl_ms,
                              std::int64_t now_ms) override;

private:
    std::shared_ptr<const TemplateBank> bank_;
};

/// Asks the model for a question; on timeout, transport error or malformed
/// output it retries up to max_retries times, then falls back to the template
/// bank. Never throws for provider misbehaviour.
class LlmProvider final : public ChallengeProvider {
public:
    LlmProvider(ProviderConfig cfg, std::shared_ptr<ModelTransport> transport,
                std::shared_ptr<const TemplateBank> fallback);

    Challenge fetch_challenge(Category category, std::uint64_t seed, std::int64_t ttl_ms,
                              std::int64_t now_ms) override;

    std::uint64_t fallback_count() const { return fallbacks_.load(); }

private:
    std::string call_with_deadline(const PromptPair& prompt);

    ProviderConfig cfg_;
    std::shared_ptr<ModelTransport> transport_;
    std::shared_ptr<const TemplateBank> fallback_;
    std::atomic<std::uint64_t> fallbacks_{0};
};

} // namespace cadence
