#pragma once

#include "cadence/session.hpp"

#include "json.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>

namespace httplib {
class Server;
}

namespace cadence::http {

class BadRequest : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Body of POST /api/challenge: {} or {"category": "..."}; empty body allowed.
std::optional<Category> parse_challenge_request(std::string_view body);

/// Body of POST /api/verify. The top-level typed_text is authoritative.
VerifyRequest parse_verify_request(std::string_view body);

nlohmann::json to_json(const IssuedChallenge& issued);
nlohmann::json to_json(const VerifyResponse& response);

/// Registers /api/challenge, /api/verify and /api/health, plus static files at
/// `/` when a directory is given.
void mount(httplib::Server& server, SessionService& service,
           const std::optional<std::filesystem::path>& static_dir = std::nullopt);

/// Owns an httplib server running on a background thread.
class ApiServer {
public:
    explicit ApiServer(SessionService& service,
                       const std::optional<std::filesystem::path>& static_dir = std::nullopt);
    ~ApiServer();

    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    /// Binds and starts serving; port 0 picks a free port. Returns the bound port.
    int start(const std::string& host, int port);

    /// Blocks serving on the calling thread.
    bool listen(const std::string& host, int port);

    void stop();
    int port() const { return port_; }

private:
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = 0;
};

} // namespace cadence::http
