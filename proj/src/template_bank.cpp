#include "cadence/template_bank.hpp"

#include "cadence/builtin_templates.hpp"
#include "cadence/errors.hpp"

#include <cstdlib>
#include <fstream>

namespace cadence {

namespace {

constexpr std::size_t kMaxAnswerChars = 32;
constexpr std::int64_t kMaxEnumeration = 100000;

using nlohmann::json;

std::string words_below_thousand(std::int64_t n)
{
    static constexpr std::array<std::string_view, 20> kOnes = {
        "zero",    "one",     "two",       "three",    "four",     "five",    "six",
        "seven",   "eight",   "nine",      "ten",      "eleven",   "twelve",  "thirteen",
        "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen"};
    static constexpr std::array<std::string_view, 10> kTens = {
        "", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety"};

    std::string out;
    if (n >= 100) {
        out += kOnes[n / 100];
        out += " hundred";
        n %= 100;
        if (n == 0)
            return out;
        out += ' ';
    }
    if (n < 20) {
        out += kOnes[n];
    } else {
        out += kTens[n / 10];
        if (n % 10 != 0) {
            out += ' ';
            out += kOnes[n % 10];
        }
    }
    return out;
}

OperandRange parse_range(const json& j, std::string_view name)
{
    if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
        throw ConfigError("operand range '" + std::string(name) + "' must be [min, max]");
    OperandRange r{j[0].get<std::int64_t>(), j[1].get<std::int64_t>()};
    if (r.min > r.max)
        throw ConfigError("operand range '" + std::string(name) + "' has min > max");
    return r;
}

Template parse_template(const json& rec)
{
    if (!rec.is_object())
        throw ConfigError("template record must be an object");

    Template t;
    try {
        t.category = parse_category(rec.at("category").get<std::string>());
    } catch (const UnknownCategory& e) {
        throw ConfigError(e.what());
    }
    t.question = rec.at("question").get<std::string>();

    const auto& answer = rec.at("answer");
    auto rule = answer.at("rule").get<std::string>();
    if (rule == "literal") {
        t.rule = LiteralRule{answer.at("value").get<std::string>()};
    } else if (rule == "choice") {
        ChoiceRule choice;
        for (const auto& opt : answer.at("options")) {
            ChoiceRule::Option o;
            for (const auto& [key, value] : opt.items()) {
                if (key == "answer")
                    o.answer = value.get<std::string>();
                else
                    o.fills[key] = value.get<std::string>();
            }
            if (o.answer.empty())
                throw ConfigError("choice option without an answer in: " + t.question);
            choice.options.push_back(std::move(o));
        }
        if (choice.options.empty())
            throw ConfigError("choice rule has no options: " + t.question);
        t.rule = std::move(choice);
    } else if (rule == "sum" || rule == "difference" || rule == "product") {
        ArithmeticRule ar;
        ar.op = rule == "sum" ? ArithmeticOp::sum
                : rule == "difference" ? ArithmeticOp::difference
                                       : ArithmeticOp::product;
        ar.a = parse_range(answer.at("a"), "a");
        ar.b = parse_range(answer.at("b"), "b");
        auto format = answer.value("format", std::string("digits"));
        if (format == "digits")
            ar.format = NumberFormat::digits;
        else if (format == "words")
            ar.format = NumberFormat::words;
        else
            throw ConfigError("unknown number format: " + format);
        if ((ar.a.max - ar.a.min + 1) * (ar.b.max - ar.b.min + 1) > kMaxEnumeration)
            throw ConfigError("operand ranges too wide: " + t.question);
        t.rule = ar;
    } else {
        throw ConfigError("unknown answer rule: " + rule);
    }
    return t;
}

void validate(const std::vector<Template>& templates, std::size_t min_answer_chars)
{
    for (auto category : kAllCategories) {
        std::size_t count = 0;
        for (const auto& t : templates)
            count += t.category == category ? 1 : 0;
        if (count < 5)
            throw ConfigError("template bank needs at least 5 templates for category " +
                              std::string(to_string(category)));
    }

    for (const auto& t : templates) {
        for (const auto& qa : t.enumerate()) {
            if (qa.question.find('{') != std::string::npos)
                throw ConfigError("unfilled placeholder in: " + qa.question);
            auto answer = normalize_answer(qa.answer);
            auto len = utf8_length(answer);
            if (len < std::max<std::size_t>(min_answer_chars, 1) || len > kMaxAnswerChars)
                throw ConfigError("answer '" + answer + "' violates length bounds in: " + qa.question);
            if (normalize_answer(qa.question).find(answer) != std::string::npos)
                throw ConfigError("question reveals its answer: " + qa.question);
        }
    }
}

} // namespace

std::string fill_placeholders(std::string_view pattern, const Placeholders& values)
{
    std::string out;
    out.reserve(pattern.size());
    std::size_t i = 0;
    while (i < pattern.size()) {
        if (pattern[i] == '{') {
            auto close = pattern.find('}', i);
            if (close != std::string_view::npos) {
                auto it = values.find(std::string(pattern.substr(i + 1, close - i - 1)));
                if (it != values.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(pattern[i++]);
    }
    return out;
}

std::string number_to_words(std::int64_t value)
{
    if (value < 0)
        return "minus " + number_to_words(-value);
    if (value < 1000)
        return words_below_thousand(value);

    static constexpr std::array<std::pair<std::int64_t, std::string_view>, 3> kScales = {
        {{1000000000, "billion"}, {1000000, "million"}, {1000, "thousand"}}};
    std::string out;
    for (auto [scale, name] : kScales) {
        if (value >= scale) {
            if (!out.empty())
                out += ' ';
            out += number_to_words(value / scale);
            out += ' ';
            out += name;
            value %= scale;
        }
    }
    if (value > 0)
        out += ' ' + words_below_thousand(value);
    return out;
}

std::string ArithmeticRule::evaluate(std::int64_t a, std::int64_t b) const
{
    std::int64_t result = 0;
    switch (op) {
    case ArithmeticOp::sum:
        result = a + b;
        break;
    case ArithmeticOp::difference:
        result = a >= b ? a - b : b - a;
        break;
    case ArithmeticOp::product:
        result = a * b;
        break;
    }
    return format == NumberFormat::words ? number_to_words(result) : std::to_string(result);
}

QuestionAnswer Template::instantiate(std::mt19937_64& rng) const
{
    return std::visit(
        [&](const auto& r) -> QuestionAnswer {
            using R = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<R, LiteralRule>) {
                return {question, r.answer};
            } else if constexpr (std::is_same_v<R, ChoiceRule>) {
                std::uniform_int_distribution<std::size_t> pick(0, r.options.size() - 1);
                const auto& opt = r.options[pick(rng)];
                return {fill_placeholders(question, opt.fills), opt.answer};
            } else {
                std::uniform_int_distribution<std::int64_t> da(r.a.min, r.a.max);
                std::uniform_int_distribution<std::int64_t> db(r.b.min, r.b.max);
                auto a = da(rng);
                auto b = db(rng);
                Placeholders fills{{"a", std::to_string(a)}, {"b", std::to_string(b)}};
                return {fill_placeholders(question, fills), r.evaluate(a, b)};
            }
        },
        rule);
}

std::vector<QuestionAnswer> Template::enumerate() const
{
    std::vector<QuestionAnswer> out;
    std::visit(
        [&](const auto& r) {
            using R = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<R, LiteralRule>) {
                out.push_back({question, r.answer});
            } else if constexpr (std::is_same_v<R, ChoiceRule>) {
                for (const auto& opt : r.options)
                    out.push_back({fill_placeholders(question, opt.fills), opt.answer});
            } else {
                for (auto a = r.a.min; a <= r.a.max; ++a) {
                    for (auto b = r.b.min; b <= r.b.max; ++b) {
                        Placeholders fills{{"a", std::to_string(a)}, {"b", std::to_string(b)}};
                        out.push_back({fill_placeholders(question, fills), r.evaluate(a, b)});
                    }
                }
            }
        },
        rule);
    return out;
}

TemplateBank TemplateBank::from_json(const nlohmann::json& doc, std::size_t min_answer_chars)
{
    std::vector<Template> templates;
    try {
        const auto& list = doc.is_array() ? doc : doc.at("templates");
        for (const auto& rec : list)
            templates.push_back(parse_template(rec));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed template bank: ") + e.what());
    }
    validate(templates, min_answer_chars);
    return TemplateBank(std::move(templates));
}

TemplateBank TemplateBank::from_file(const std::filesystem::path& path, std::size_t min_answer_chars)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open template bank: " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError("template bank " + path.string() + " is not valid JSON: " + e.what());
    }
    return from_json(doc, min_answer_chars);
}

std::shared_ptr<const TemplateBank> TemplateBank::builtin()
{
    static const auto bank =
        std::make_shared<const TemplateBank>(from_json(json::parse(detail::kBuiltinTemplates)));
    return bank;
}

std::shared_ptr<const TemplateBank> TemplateBank::load(const std::optional<std::filesystem::path>& path)
{
    if (path)
        return std::make_shared<const TemplateBank>(from_file(*path));
    if (const char* env = std::getenv("CADENCE_TEMPLATES"); env && *env)
        return std::make_shared<const TemplateBank>(from_file(env));
    return builtin();
}

QuestionAnswer TemplateBank::generate(std::uint64_t seed, Category category) const
{
    auto candidates = by_category(category);
    if (candidates.empty())
        throw UnknownCategory(std::to_string(static_cast<int>(category)));

    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(category)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    return candidates[pick(rng)]->instantiate(rng);
}

std::vector<const Template*> TemplateBank::by_category(Category category) const
{
    std::vector<const Template*> out;
    for (const auto& t : templates_) {
        if (t.category == category)
            out.push_back(&t);
    }
    return out;
}

std::set<std::string> TemplateBank::possible_answers(Category category) const
{
    std::set<std::string> out;
    for (const auto* t : by_category(category)) {
        for (const auto& qa : t->enumerate())
            out.insert(normalize_answer(qa.answer));
    }
    return out;
}

QuestionAnswer template_generate(std::uint64_t seed, Category category)
{
    return TemplateBank::builtin()->generate(seed, category);
}

} // namespace cadence
