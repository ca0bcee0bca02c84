#include "cadence/challenge.hpp"

#include "cadence/errors.hpp"

#include <openssl/evp.h>
#include <openssl/rand.h>
#include <unicode/locid.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf16.h>

#include <chrono>
#include <stdexcept>

namespace cadence {

namespace {

constexpr std::array<std::string_view, 4> kCategoryNames = {"colors", "arithmetic", "animals",
                                                            "common_sense"};

std::string to_hex(const unsigned char* data, std::size_t len)
{
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (std::size_t i = 0; i < len; ++i) {
        out.push_back(kDigits[data[i] >> 4]);
        out.push_back(kDigits[data[i] & 0x0f]);
    }
    return out;
}

} // namespace

std::string_view to_string(Category category)
{
    auto idx = static_cast<std::size_t>(category);
    if (idx >= kCategoryNames.size())
        throw UnknownCategory(std::to_string(idx));
    return kCategoryNames[idx];
}

Category parse_category(std::string_view name)
{
    for (std::size_t i = 0; i < kCategoryNames.size(); ++i) {
        if (kCategoryNames[i] == name)
            return static_cast<Category>(i);
    }
    throw UnknownCategory(std::string(name));
}

std::string normalize_answer(std::string_view raw)
{
    auto text = icu::UnicodeString::fromUTF8(icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
    text.toLower(icu::Locale::getRoot());

    icu::UnicodeString out;
    bool pending_space = false;
    for (int32_t i = 0; i < text.length();) {
        UChar32 c = text.char32At(i);
        i += U16_LENGTH(c);
        if (u_isUWhiteSpace(c)) {
            pending_space = !out.isEmpty();
            continue;
        }
        if (pending_space) {
            out.append(static_cast<UChar>(u' '));
            pending_space = false;
        }
        out.append(c);
    }

    std::string result;
    out.toUTF8String(result);
    return result;
}

std::string hash_answer(std::string_view normalized)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(normalized.data(), normalized.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 digest failed");
    return to_hex(digest, len);
}

bool is_hex_digest(std::string_view s)
{
    if (s.size() != 64)
        return false;
    for (char c : s) {
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f')))
            return false;
    }
    return true;
}

std::size_t utf8_length(std::string_view s)
{
    std::size_t n = 0;
    for (unsigned char c : s) {
        if ((c & 0xC0) != 0x80)
            ++n;
    }
    return n;
}

std::string new_challenge_id()
{
    unsigned char bytes[16];
    if (RAND_bytes(bytes, sizeof(bytes)) != 1)
        throw Error("CSPRNG failure while minting challenge id");
    return to_hex(bytes, sizeof(bytes));
}

std::int64_t wall_clock_ms()
{
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

AnswerKey AnswerKey::from_raw(std::string_view raw)
{
    AnswerKey key;
    key.plaintext = normalize_answer(raw);
    key.hash = hash_answer(key.plaintext);
    return key;
}

Challenge make_challenge(std::string_view question, std::string_view answer, Category category,
                         std::int64_t ttl_ms, std::int64_t issued_at_ms)
{
    if (normalize_answer(question).empty())
        throw std::invalid_argument("challenge question is empty");
    auto normalized = normalize_answer(answer);
    if (normalized.empty())
        throw EmptyAnswer();

    Challenge c;
    c.id = new_challenge_id();
    c.question = std::string(question);
    c.answer_hash = hash_answer(normalized);
    c.category = category;
    c.issued_at_ms = issued_at_ms;
    c.ttl_ms = ttl_ms;
    return c;
}

} // namespace cadence
