#include "cadence/errors.hpp"
#include "cadence/llm_provider.hpp"

#include "httplib.h"

#include <regex>

namespace cadence {

HttpChatTransport::HttpChatTransport(ProviderConfig cfg) : cfg_(std::move(cfg))
{
    cfg_.validate();
    static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(cfg_.endpoint_url, m, kUrl))
        throw ConfigError("provider endpoint_url must be an http(s) URL");
    scheme_host_port_ = m[1].str();
    path_ = m[2].matched ? m[2].str() : "/";
}

std::string HttpChatTransport::complete(const PromptPair& prompt, std::chrono::milliseconds timeout)
{
    httplib::Client cli(scheme_host_port_);
    cli.set_connection_timeout(timeout);
    cli.set_read_timeout(timeout);
    cli.set_write_timeout(timeout);

    httplib::Headers headers;
    if (!cfg_.api_key.empty())
        headers.emplace("Authorization", "Bearer " + cfg_.api_key);

    nlohmann::json body = {
        {"model", cfg_.model},
        {"messages",
         nlohmann::json::array({{{"role", "system"}, {"content", prompt.system_prompt}},
                                {{"role", "user"}, {"content", prompt.user_prompt}}})},
    };

    auto res = cli.Post(path_, headers, body.dump(), "application/json");
    if (!res)
        throw TransportError("provider request failed: " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw TransportError("provider returned HTTP " + std::to_string(res->status));

    auto doc = nlohmann::json::parse(res->body, nullptr, false);
    if (doc.is_discarded())
        throw TransportError("provider reply is not JSON");
    try {
        return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
        throw TransportError("provider reply lacks choices[0].message.content");
    }
}

} // namespace cadence
