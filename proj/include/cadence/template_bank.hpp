#pragma once

#include "cadence/challenge.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace cadence {

struct QuestionAnswer {
    std::string question;
    std::string answer;

    bool operator==(const QuestionAnswer&) const = default;
};

// Answers shorter than this give too few inter-key gaps for the latency
// variance check to be passable by a human typist.
inline constexpr std::size_t kMinAnswerChars = 5;

using Placeholders = std::map<std::string, std::string>;

/// Replaces every `{name}` in `pattern` with its value. Unknown names are left
/// untouched.
std::string fill_placeholders(std::string_view pattern, const Placeholders& values);

/// English cardinal words, e.g. 13 -> "thirteen", 42 -> "forty two".
std::string number_to_words(std::int64_t value);

struct LiteralRule {
    std::string answer;
};

struct ChoiceRule {
    struct Option {
        Placeholders fills;
        std::string answer;
    };
    std::vector<Option> options;
};

enum class ArithmeticOp { sum, difference, product };
enum class NumberFormat { digits, words };

struct OperandRange {
    std::int64_t min = 0;
    std::int64_t max = 0;
};

struct ArithmeticRule {
    ArithmeticOp op = ArithmeticOp::sum;
    OperandRange a;
    OperandRange b;
    NumberFormat format = NumberFormat::digits;

    /// Difference is taken as |a - b| so answers never go negative.
    std::string evaluate(std::int64_t a, std::int64_t b) const;
};

struct Template {
    Category category = Category::colors;
    std::string question;
    std::variant<LiteralRule, ChoiceRule, ArithmeticRule> rule;

    QuestionAnswer instantiate(std::mt19937_64& rng) const;

    /// Every (question, answer) pair this template can produce.
    std::vector<QuestionAnswer> enumerate() const;
};

/// Offline question source. Loaded from a JSON document of the form
/// {"templates": [{"category", "question", "answer": {"rule", ...}}, ...]}.
class TemplateBank {
public:
    static TemplateBank from_json(const nlohmann::json& doc, std::size_t min_answer_chars = kMinAnswerChars);
    static TemplateBank from_file(const std::filesystem::path& path,
                                  std::size_t min_answer_chars = kMinAnswerChars);

    /// The bank compiled into the binary.
    static std::shared_ptr<const TemplateBank> builtin();

    /// Loads `path` if given, else $CADENCE_TEMPLATES if set, else the builtin bank.
    static std::shared_ptr<const TemplateBank> load(const std::optional<std::filesystem::path>& path);

    explicit TemplateBank(std::vector<Template> templates) : templates_(std::move(templates)) {}

    /// Deterministic for a fixed (seed, category). Throws UnknownCategory.
    QuestionAnswer generate(std::uint64_t seed, Category category) const;

    std::span<const Template> templates() const { return templates_; }
    std::vector<const Template*> by_category(Category category) const;

    /// Every normalized answer reachable in `category`.
    std::set<std::string> possible_answers(Category category) const;

private:
    std::vector<Template> templates_;
};

/// Generates from the builtin bank.
QuestionAnswer template_generate(std::uint64_t seed, Category category);

} // namespace cadence
