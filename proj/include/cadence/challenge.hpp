#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace cadence {

enum class Category { colors, arithmetic, animals, common_sense };

inline constexpr std::array<Category, 4> kAllCategories = {
    Category::colors, Category::arithmetic, Category::animals, Category::common_sense};

std::string_view to_string(Category category);

/// Parses the wire name of a category ("colors", "common_sense", ...).
/// Throws UnknownCategory.
Category parse_category(std::string_view name);

inline constexpr std::int64_t kDefaultTtlMs = 120000;

/// A one-time question. The plaintext answer is never stored here, only its
/// SHA-256 commitment.
struct Challenge {
    std::string id;
    std::string question;
    std::string answer_hash;
    Category category = Category::colors;
    std::int64_t issued_at_ms = 0;
    std::int64_t ttl_ms = kDefaultTtlMs;
    bool consumed = false;

    std::int64_t expires_at_ms() const { return issued_at_ms + ttl_ms; }
    // Expiry is strict: a challenge is still live at exactly issued_at + ttl.
    bool expired_at(std::int64_t now_ms) const { return now_ms > expires_at_ms(); }
};

/// Normalized plaintext answer paired with its digest.
struct AnswerKey {
    std::string plaintext;
    std::string hash;

    static AnswerKey from_raw(std::string_view raw);
};

/// Trims, collapses internal whitespace runs to a single space and lowercases
/// (Unicode-aware). Idempotent.
std::string normalize_answer(std::string_view raw);

/// Lowercase hex SHA-256 of the UTF-8 bytes of `normalized`.
std::string hash_answer(std::string_view normalized);

/// True when `s` is exactly 64 lowercase hex characters.
bool is_hex_digest(std::string_view s);

/// Number of Unicode code points in a UTF-8 string.
std::size_t utf8_length(std::string_view s);

/// 128 random bits from the OS CSPRNG, hex encoded. Thread-safe.
std::string new_challenge_id();

std::int64_t wall_clock_ms();

/// Builds a fresh challenge; the plaintext answer is hashed and dropped.
/// Throws EmptyAnswer if the answer normalizes to nothing and
/// std::invalid_argument for an empty question.
Challenge make_challenge(std::string_view question, std::string_view answer, Category category,
                         std::int64_t ttl_ms = kDefaultTtlMs,
                         std::int64_t issued_at_ms = wall_clock_ms());

} // namespace cadence
