#include "cadence/session.hpp"

#include "cadence/errors.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <vector>

namespace cadence {

ChallengeStore::ChallengeStore(std::size_t capacity) : capacity_(capacity)
{
    if (capacity_ == 0)
        throw ConfigError("store capacity must be positive");
}

void ChallengeStore::insert(Challenge challenge, std::int64_t now_ms)
{
    std::lock_guard lock(mu_);
    if (entries_.contains(challenge.id))
        throw std::invalid_argument("duplicate challenge id");

    if (entries_.size() >= capacity_) {
        std::erase_if(entries_, [&](const auto& kv) { return kv.second.challenge.expired_at(now_ms); });
        if (entries_.size() >= capacity_)
            evict_consumed_locked(entries_.size() - capacity_ + 1);
        if (entries_.size() >= capacity_)
            throw StoreFull();
    }
    auto id = challenge.id;
    entries_.emplace(std::move(id), StoredChallenge{std::move(challenge), 0});
}

std::size_t ChallengeStore::evict_consumed_locked(std::size_t wanted)
{
    std::vector<std::pair<std::int64_t, std::string>> consumed;
    for (const auto& [id, entry] : entries_) {
        if (entry.challenge.consumed)
            consumed.emplace_back(entry.challenge.issued_at_ms, id);
    }
    std::sort(consumed.begin(), consumed.end());
    std::size_t n = std::min(wanted, consumed.size());
    for (std::size_t i = 0; i < n; ++i)
        entries_.erase(consumed[i].second);
    return n;
}

ChallengeStore::Lookup ChallengeStore::with_live(const std::string& id, std::int64_t now_ms,
                                                 const std::function<void(StoredChallenge&)>& fn)
{
    std::lock_guard lock(mu_);
    auto it = entries_.find(id);
    if (it == entries_.end())
        return Lookup::unknown;
    if (it->second.challenge.expired_at(now_ms))
        return Lookup::expired;
    if (it->second.challenge.consumed)
        return Lookup::consumed;
    fn(it->second);
    return Lookup::live;
}

std::size_t ChallengeStore::purge_expired(std::int64_t now_ms)
{
    std::lock_guard lock(mu_);
    return std::erase_if(entries_, [&](const auto& kv) { return kv.second.challenge.expired_at(now_ms); });
}

std::size_t ChallengeStore::size() const
{
    std::lock_guard lock(mu_);
    return entries_.size();
}

bool ChallengeStore::contains(const std::string& id) const
{
    std::lock_guard lock(mu_);
    return entries_.contains(id);
}

std::string_view to_string(ResponseDecision decision)
{
    switch (decision) {
    case ResponseDecision::human:
        return "human";
    case ResponseDecision::bot:
        return "bot";
    case ResponseDecision::error:
        break;
    }
    return "error";
}

SessionService::SessionService(SessionOptions options, std::shared_ptr<ChallengeProvider> provider,
                               std::shared_ptr<const Clock> clock)
    : options_(options), provider_(std::move(provider)), clock_(std::move(clock)),
      store_(options.capacity), rng_(std::random_device{}())
{
    if (!provider_)
        throw ConfigError("session service needs a challenge provider");
    if (options_.ttl_ms <= 0)
        throw ConfigError("challenge ttl must be positive");
}

SessionService::~SessionService()
{
    stop_sweeper();
}

IssuedChallenge SessionService::issue_challenge(std::optional<Category> category)
{
    std::uint64_t seed;
    {
        std::lock_guard lock(rng_mu_);
        seed = rng_();
        if (!category) {
            std::uniform_int_distribution<std::size_t> pick(0, kAllCategories.size() - 1);
            category = kAllCategories[pick(rng_)];
        }
    }

    auto now = clock_->now_ms();
    auto challenge = provider_->fetch_challenge(*category, seed, options_.ttl_ms, now);
    IssuedChallenge issued{challenge.id, challenge.question, challenge.answer_hash, challenge.expires_at_ms()};
    for (;;) {
        try {
            store_.insert(challenge, now);
            break;
        } catch (const std::invalid_argument&) {
            challenge.id = new_challenge_id();
            issued.id = challenge.id;
        }
    }
    return issued;
}

VerifyResponse SessionService::verify(const VerifyRequest& req)
{
    VerifyResponse out;
    auto lookup = store_.with_live(req.challenge_id, clock_->now_ms(), [&](StoredChallenge& entry) {
        auto& challenge = entry.challenge;
        Verdict verdict;
        try {
            verdict = classify(req.typed_text, req.trace, challenge.answer_hash, options_.thresholds);
        } catch (const NonMonotonicTrace&) {
            challenge.consumed = true;
            out = {ResponseDecision::bot, "malformed_trace", false};
            return;
        }

        if (verdict.decision == Decision::human) {
            challenge.consumed = true;
            out = {ResponseDecision::human, "ok", false};
        } else if (verdict.reason == Reason::hash_mismatch && entry.hash_mismatches == 0) {
            entry.hash_mismatches = 1;
            out = {ResponseDecision::bot, "hash_mismatch", true};
        } else {
            challenge.consumed = true;
            out = {ResponseDecision::bot, std::string(reason_code(verdict.reason)), false};
        }
    });

    switch (lookup) {
    case ChallengeStore::Lookup::live:
        return out;
    case ChallengeStore::Lookup::consumed:
        return {ResponseDecision::error, "already_used", false};
    case ChallengeStore::Lookup::unknown:
    case ChallengeStore::Lookup::expired:
        break;
    }
    return {ResponseDecision::error, "unknown_challenge", false};
}

void SessionService::start_sweeper(std::chrono::milliseconds interval)
{
    stop_sweeper();
    {
        std::lock_guard lock(sweep_mu_);
        sweep_stop_ = false;
    }
    sweeper_ = std::thread([this, interval] {
        std::unique_lock lock(sweep_mu_);
        while (!sweep_cv_.wait_for(lock, interval, [this] { return sweep_stop_; })) {
            auto n = purge_expired();
            if (n > 0)
                spdlog::debug("purged {} expired challenges", n);
        }
    });
}

void SessionService::stop_sweeper()
{
    {
        std::lock_guard lock(sweep_mu_);
        sweep_stop_ = true;
    }
    sweep_cv_.notify_all();
    if (sweeper_.joinable())
        sweeper_.join();
}

} // namespace cadence
