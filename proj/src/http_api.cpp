#include "cadence/http_api.hpp"

#include "cadence/errors.hpp"

#include "httplib.h"

#include <spdlog/spdlog.h>

namespace cadence::http {

namespace {

using nlohmann::json;

constexpr const char* kJson = "application/json";

// Idle keep-alive connections each hold a worker, so the pool must be larger
// than the expected number of concurrently open browser connections.
constexpr std::size_t kWorkerThreads = 32;
constexpr time_t kKeepAliveSeconds = 2;

json parse_object(std::string_view body, bool allow_empty)
{
    if (allow_empty && body.find_first_not_of(" \t\r\n") == std::string_view::npos)
        return json::object();
    auto doc = json::parse(body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw BadRequest("body must be a JSON object");
    return doc;
}

void reply(httplib::Response& res, int status, const json& body)
{
    res.status = status;
    res.set_content(body.dump(), kJson);
}

} // namespace

std::optional<Category> parse_challenge_request(std::string_view body)
{
    auto doc = parse_object(body, true);
    auto it = doc.find("category");
    if (it == doc.end() || it->is_null())
        return std::nullopt;
    if (!it->is_string())
        throw BadRequest("category must be a string");
    try {
        return parse_category(it->get<std::string>());
    } catch (const UnknownCategory& e) {
        throw BadRequest(e.what());
    }
}

VerifyRequest parse_verify_request(std::string_view body)
{
    auto doc = parse_object(body, false);
    VerifyRequest req;
    try {
        req.challenge_id = doc.at("challenge_id").get<std::string>();
        req.typed_text = doc.at("typed_text").get<std::string>();
        req.trace = doc.at("trace").get<KeystrokeTrace>();
    } catch (const json::exception& e) {
        throw BadRequest(e.what());
    }
    req.trace.typed_text = req.typed_text;
    return req;
}

json to_json(const IssuedChallenge& issued)
{
    return json{{"id", issued.id},
                {"question", issued.question},
                {"answer_hash", issued.answer_hash},
                {"expires_at", issued.expires_at_ms}};
}

json to_json(const VerifyResponse& response)
{
    return json{{"decision", to_string(response.decision)},
                {"reason", response.reason},
                {"retry_allowed", response.retry_allowed}};
}

void mount(httplib::Server& server, SessionService& service,
           const std::optional<std::filesystem::path>& static_dir)
{
    server.Post("/api/challenge", [&service](const httplib::Request& req, httplib::Response& res) {
        std::optional<Category> category;
        try {
            category = parse_challenge_request(req.body);
        } catch (const BadRequest&) {
            reply(res, 400, {{"error", "bad_request"}});
            return;
        }
        try {
            reply(res, 200, to_json(service.issue_challenge(category)));
        } catch (const StoreFull&) {
            reply(res, 503, {{"error", "store_full"}});
        }
    });

    server.Post("/api/verify", [&service](const httplib::Request& req, httplib::Response& res) {
        VerifyRequest verify;
        try {
            verify = parse_verify_request(req.body);
        } catch (const BadRequest&) {
            reply(res, 400, to_json(VerifyResponse{ResponseDecision::error, "bad_request", false}));
            return;
        }
        reply(res, 200, to_json(service.verify(verify)));
    });

    server.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
        reply(res, 200, {{"status", "ok"}});
    });

    server.set_exception_handler([](const httplib::Request& req, httplib::Response& res, std::exception_ptr ep) {
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            spdlog::error("unhandled error on {} {}: {}", req.method, req.path, e.what());
        } catch (...) {
            spdlog::error("unhandled error on {} {}", req.method, req.path);
        }
        reply(res, 500, {{"error", "internal"}});
    });

    if (static_dir) {
        if (!server.set_mount_point("/", static_dir->string()))
            throw ConfigError("static directory not found: " + static_dir->string());
    }
}

ApiServer::ApiServer(SessionService& service, const std::optional<std::filesystem::path>& static_dir)
    : server_(std::make_unique<httplib::Server>())
{
    server_->new_task_queue = [] { return new httplib::ThreadPool(kWorkerThreads); };
    server_->set_keep_alive_timeout(kKeepAliveSeconds);
    mount(*server_, service, static_dir);
}

ApiServer::~ApiServer()
{
    stop();
}

int ApiServer::start(const std::string& host, int port)
{
    if (port == 0) {
        port_ = server_->bind_to_any_port(host);
    } else {
        if (!server_->bind_to_port(host, port))
            port_ = -1;
        else
            port_ = port;
    }
    if (port_ <= 0)
        throw ConfigError("cannot bind " + host + ":" + std::to_string(port));
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return port_;
}

bool ApiServer::listen(const std::string& host, int port)
{
    port_ = port;
    return server_->listen(host, port);
}

void ApiServer::stop()
{
    if (server_)
        server_->stop();
    if (thread_.joinable())
        thread_.join();
}

} // namespace cadence::http
