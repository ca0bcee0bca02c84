#include "cadence/config.hpp"

#include "cadence/errors.hpp"

#include <cstdlib>
#include <fstream>

namespace cadence {

namespace {

using nlohmann::json;

template <typename T>
T read(const json& j, const char* key, T fallback)
{
    auto it = j.find(key);
    if (it == j.end() || it->is_null())
        return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config key '") + key + "' has the wrong type");
    }
}

std::int64_t to_int(const std::string& value, const char* name)
{
    try {
        std::size_t used = 0;
        auto v = std::stoll(value, &used);
        if (used != value.size())
            throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(std::string(name) + " must be an integer");
    }
}

ProviderKind parse_provider_kind(const std::string& kind)
{
    if (kind == "templates" || kind == "template")
        return ProviderKind::templates;
    if (kind == "llm")
        return ProviderKind::llm;
    throw ConfigError("unknown provider kind: " + kind);
}

} // namespace

std::optional<std::string> process_env(const char* name)
{
    if (const char* v = std::getenv(name))
        return std::string(v);
    return std::nullopt;
}

Thresholds parse_thresholds(const json& j, Thresholds base)
{
    if (!j.is_object())
        throw ConfigError("thresholds must be an object");
    base.min_stddev_ms = read(j, "min_stddev_ms", base.min_stddev_ms);
    base.min_total_ms = read(j, "min_total_ms", base.min_total_ms);
    base.min_len_for_total_check = read(j, "min_len_for_total_check", base.min_len_for_total_check);
    base.min_keystrokes = read(j, "min_keystrokes", base.min_keystrokes);
    return base;
}

json thresholds_to_json(const Thresholds& th)
{
    return json{{"min_stddev_ms", th.min_stddev_ms},
                {"min_total_ms", th.min_total_ms},
                {"min_len_for_total_check", th.min_len_for_total_check},
                {"min_keystrokes", th.min_keystrokes}};
}

void ServiceConfig::validate() const
{
    if (port < 0 || port > 65535)
        throw ConfigError("port out of range");
    session.thresholds.validate();
    if (session.ttl_ms <= 0)
        throw ConfigError("challenge_ttl_ms must be positive");
    if (session.capacity == 0)
        throw ConfigError("store_capacity must be positive");
    if (sweep_interval.count() <= 0)
        throw ConfigError("sweep_interval_ms must be positive");
    if (provider == ProviderKind::llm)
        llm.validate();
}

ServiceConfig parse_service_config(const json& j)
{
    if (!j.is_object())
        throw ConfigError("service config must be a JSON object");
    ServiceConfig cfg;
    if (auto it = j.find("listen"); it != j.end()) {
        cfg.host = read(*it, "host", cfg.host);
        cfg.port = read(*it, "port", cfg.port);
    }
    if (auto it = j.find("thresholds"); it != j.end())
        cfg.session.thresholds = parse_thresholds(*it);
    cfg.session.ttl_ms = read(j, "challenge_ttl_ms", cfg.session.ttl_ms);
    cfg.session.capacity = read(j, "store_capacity", cfg.session.capacity);
    cfg.sweep_interval = std::chrono::milliseconds(read<std::int64_t>(j, "sweep_interval_ms", cfg.sweep_interval.count()));
    if (auto dir = read<std::string>(j, "static_dir", ""); !dir.empty())
        cfg.static_dir = dir;
    if (auto path = read<std::string>(j, "templates", ""); !path.empty())
        cfg.templates_path = path;
    if (auto it = j.find("provider"); it != j.end()) {
        cfg.provider = parse_provider_kind(read<std::string>(*it, "kind", "templates"));
        cfg.llm.endpoint_url = read(*it, "endpoint_url", cfg.llm.endpoint_url);
        cfg.llm.model = read(*it, "model", cfg.llm.model);
        cfg.llm.timeout = std::chrono::milliseconds(read<std::int64_t>(*it, "timeout_ms", cfg.llm.timeout.count()));
        cfg.llm.max_retries = read(*it, "max_retries", cfg.llm.max_retries);
    }
    return cfg;
}

void apply_env_overrides(ServiceConfig& cfg, const EnvLookup& env)
{
    if (auto v = env("CADENCE_HOST"))
        cfg.host = *v;
    if (auto v = env("CADENCE_PORT"))
        cfg.port = static_cast<int>(to_int(*v, "CADENCE_PORT"));
    if (auto v = env("CADENCE_TEMPLATES"); v && !v->empty())
        cfg.templates_path = *v;
    if (auto v = env("CADENCE_PROVIDER"))
        cfg.provider = parse_provider_kind(*v);
    if (auto v = env("CADENCE_LLM_ENDPOINT"))
        cfg.llm.endpoint_url = *v;
    if (auto v = env("CADENCE_LLM_MODEL"))
        cfg.llm.model = *v;
    if (auto v = env("CADENCE_LLM_API_KEY"))
        cfg.llm.api_key = *v;
    if (auto v = env("CADENCE_LLM_TIMEOUT_MS"))
        cfg.llm.timeout = std::chrono::milliseconds(to_int(*v, "CADENCE_LLM_TIMEOUT_MS"));
    if (auto v = env("CADENCE_LLM_MAX_RETRIES"))
        cfg.llm.max_retries = static_cast<int>(to_int(*v, "CADENCE_LLM_MAX_RETRIES"));
}

ServiceConfig load_service_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env)
{
    ServiceConfig cfg;
    if (file) {
        std::ifstream in(*file);
        if (!in)
            throw ConfigError("cannot open config file: " + file->string());
        json doc;
        try {
            in >> doc;
        } catch (const json::exception& e) {
            throw ConfigError("config file " + file->string() + " is not valid JSON: " + e.what());
        }
        cfg = parse_service_config(doc);
    }
    apply_env_overrides(cfg, env);
    return cfg;
}

std::shared_ptr<ChallengeProvider> make_provider(const ServiceConfig& cfg)
{
    auto bank = TemplateBank::load(cfg.templates_path);
    if (cfg.provider == ProviderKind::templates)
        return std::make_shared<TemplateProvider>(bank);
    auto transport = std::make_shared<HttpChatTransport>(cfg.llm);
    return std::make_shared<LlmProvider>(cfg.llm, transport, bank);
}

} // namespace cadence
