#pragma once

#include "cadence/classifier.hpp"
#include "cadence/llm_provider.hpp"
#include "cadence/session.hpp"

#include "json.hpp"

#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

namespace cadence {

enum class ProviderKind { templates, llm };

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    SessionOptions session;
    std::chrono::milliseconds sweep_interval{1000};
    std::optional<std::filesystem::path> static_dir;
    std::optional<std::filesystem::path> templates_path;
    ProviderKind provider = ProviderKind::templates;
    ProviderConfig llm;

    /// Throws ConfigError.
    void validate() const;
};

using EnvLookup = std::function<std::optional<std::string>(const char*)>;

/// Reads the process environment.
std::optional<std::string> process_env(const char* name);

/// Overlays known keys of `j` onto `base`.
Thresholds parse_thresholds(const nlohmann::json& j, Thresholds base = {});
nlohmann::json thresholds_to_json(const Thresholds& th);

/// Config file layout:
///   {"listen": {"host", "port"}, "thresholds": {...}, "challenge_ttl_ms",
///    "store_capacity", "sweep_interval_ms", "static_dir", "templates",
///    "provider": {"kind": "templates"|"llm", "endpoint_url", "model",
///                 "timeout_ms", "max_retries"}}
/// The API key is only read from CADENCE_LLM_API_KEY.
ServiceConfig parse_service_config(const nlohmann::json& j);

/// Applies CADENCE_* environment overrides.
void apply_env_overrides(ServiceConfig& cfg, const EnvLookup& env = process_env);

/// File (optional) then environment.
ServiceConfig load_service_config(const std::optional<std::filesystem::path>& file,
                                  const EnvLookup& env = process_env);

std::shared_ptr<ChallengeProvider> make_provider(const ServiceConfig& cfg);

} // namespace cadence
