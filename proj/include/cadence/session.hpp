#pragma once

#include "cadence/challenge.hpp"
#include "cadence/classifier.hpp"
#include "cadence/keystroke.hpp"
#include "cadence/llm_provider.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <unordered_map>

namespace cadence {

class Clock {
public:
    virtual ~Clock() = default;
    virtual std::int64_t now_ms() const = 0;
};

class SystemClock final : public Clock {
public:
    std::int64_t now_ms() const override { return wall_clock_ms(); }
};

/// Hand-driven clock for tests and simulations.
class ManualClock final : public Clock {
public:
    explicit ManualClock(std::int64_t start_ms = 0) : now_(start_ms) {}
    std::int64_t now_ms() const override { return now_.load(); }
    void set(std::int64_t ms) { now_.store(ms); }
    void advance(std::int64_t ms) { now_.fetch_add(ms); }

private:
    std::atomic<std::int64_t> now_;
};

struct StoredChallenge {
    Challenge challenge;
    int hash_mismatches = 0;
};

/// One-time challenge storage with TTL and a capacity bound. All access goes
/// through a single mutex, so check-and-consume is atomic per id.
class ChallengeStore {
public:
    enum class Lookup { live, unknown, expired, consumed };

    explicit ChallengeStore(std::size_t capacity);

    /// When full, expired entries are evicted first, then consumed ones
    /// (oldest first). Throws StoreFull if still full, std::invalid_argument on
    /// a duplicate id.
    void insert(Challenge challenge, std::int64_t now_ms);

    /// Runs `fn` on the entry under the store lock, only if it is live.
    Lookup with_live(const std::string& id, std::int64_t now_ms,
                     const std::function<void(StoredChallenge&)>& fn);

    /// Removes entries with issued_at + ttl < now.
    std::size_t purge_expired(std::int64_t now_ms);

    std::size_t size() const;
    std::size_t capacity() const { return capacity_; }
    bool contains(const std::string& id) const;

private:
    std::size_t evict_consumed_locked(std::size_t wanted);

    const std::size_t capacity_;
    mutable std::mutex mu_;
    std::unordered_map<std::string, StoredChallenge> entries_;
};

struct IssuedChallenge {
    std::string id;
    std::string question;
    std::string answer_hash;
    std::int64_t expires_at_ms = 0;
};

struct VerifyRequest {
    std::string challenge_id;
    std::string typed_text;
    KeystrokeTrace trace;
};

enum class ResponseDecision { human, bot, error };

struct VerifyResponse {
    ResponseDecision decision = ResponseDecision::error;
    std::string reason;
    bool retry_allowed = false;
};

std::string_view to_string(ResponseDecision decision);

struct SessionOptions {
    Thresholds thresholds;
    std::int64_t ttl_ms = kDefaultTtlMs;
    std::size_t capacity = 10000;
};

/// Issues challenges and verifies submissions against them.
class SessionService {
public:
    SessionService(SessionOptions options, std::shared_ptr<ChallengeProvider> provider,
                   std::shared_ptr<const Clock> clock = std::make_shared<SystemClock>());
    ~SessionService();

    SessionService(const SessionService&) = delete;
    SessionService& operator=(const SessionService&) = delete;

    /// Picks a random category when none is given. Throws StoreFull.
    IssuedChallenge issue_challenge(std::optional<Category> category = std::nullopt);

    /// Human verdicts consume the challenge. The first hash_mismatch leaves it
    /// open for one retry; every other failure consumes it.
    VerifyResponse verify(const VerifyRequest& req);

    std::size_t purge_expired() { return store_.purge_expired(clock_->now_ms()); }

    /// Periodic purge on a background thread until stop_sweeper() or destruction.
    void start_sweeper(std::chrono::milliseconds interval);
    void stop_sweeper();

    const ChallengeStore& store() const { return store_; }
    const SessionOptions& options() const { return options_; }

private:
    SessionOptions options_;
    std::shared_ptr<ChallengeProvider> provider_;
    std::shared_ptr<const Clock> clock_;
    ChallengeStore store_;

    std::mutex rng_mu_;
    std::mt19937_64 rng_;

    std::mutex sweep_mu_;
    std::condition_variable sweep_cv_;
    bool sweep_stop_ = false;
    std::thread sweeper_;
};

} // namespace cadence
