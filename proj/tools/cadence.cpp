// cadence: CAPTCHA service, experiment harness and trace utilities.

#include "cadence/config.hpp"
#include "cadence/errors.hpp"
#include "cadence/harness.hpp"
#include "cadence/http_api.hpp"

#include "CLI11.hpp"

#include <spdlog/spdlog.h>

#include <csignal>
#include <fstream>
#include <iostream>

namespace {

using namespace cadence;

cadence::http::ApiServer* g_server = nullptr;

void on_signal(int)
{
    if (g_server)
        g_server->stop();
}

struct ServeOptions {
    std::string config;
    std::optional<std::string> host;
    std::optional<int> port;
    std::optional<std::string> templates;
    std::optional<std::string> static_dir;
    std::optional<std::string> provider;
    std::optional<std::string> llm_endpoint;
    std::optional<std::string> llm_model;
    std::optional<std::int64_t> llm_timeout_ms;
    std::optional<int> llm_max_retries;
    std::optional<double> min_stddev_ms;
    std::optional<double> min_total_ms;
    std::optional<std::int64_t> ttl_ms;
};

int serve(const ServeOptions& opt)
{
    auto cfg = load_service_config(opt.config.empty() ? std::nullopt : std::optional<std::filesystem::path>(opt.config));
    if (opt.host)
        cfg.host = *opt.host;
    if (opt.port)
        cfg.port = *opt.port;
    if (opt.templates)
        cfg.templates_path = *opt.templates;
    if (opt.static_dir)
        cfg.static_dir = *opt.static_dir;
    if (opt.provider)
        cfg.provider = *opt.provider == "llm" ? ProviderKind::llm : ProviderKind::templates;
    if (opt.llm_endpoint)
        cfg.llm.endpoint_url = *opt.llm_endpoint;
    if (opt.llm_model)
        cfg.llm.model = *opt.llm_model;
    if (opt.llm_timeout_ms)
        cfg.llm.timeout = std::chrono::milliseconds(*opt.llm_timeout_ms);
    if (opt.llm_max_retries)
        cfg.llm.max_retries = *opt.llm_max_retries;
    if (opt.min_stddev_ms)
        cfg.session.thresholds.min_stddev_ms = *opt.min_stddev_ms;
    if (opt.min_total_ms)
        cfg.session.thresholds.min_total_ms = *opt.min_total_ms;
    if (opt.ttl_ms)
        cfg.session.ttl_ms = *opt.ttl_ms;
    cfg.validate();

    SessionService service(cfg.session, make_provider(cfg));
    service.start_sweeper(cfg.sweep_interval);

    cadence::http::ApiServer server(service, cfg.static_dir);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);

    spdlog::info("listening on {}:{} (provider: {})", cfg.host, cfg.port,
                 cfg.provider == ProviderKind::llm ? "llm" : "templates");
    bool ok = server.listen(cfg.host, cfg.port);
    g_server = nullptr;
    return ok ? 0 : 1;
}

int experiment_run(const std::string& config_path, std::optional<std::uint64_t> seed, const std::string& format,
                   const std::string& out_path, const std::string& live_url)
{
    auto cfg = harness::load_experiment_config(config_path);
    if (seed)
        cfg.seed = *seed;
    auto fmt = harness::parse_report_format(format);

    std::ofstream out;
    if (!out_path.empty()) {
        out.open(out_path);
        if (!out)
            throw ConfigError("cannot write " + out_path);
    }
    auto sink = [&](const harness::TrialRecord& r) {
        if (out.is_open())
            out << harness::to_json(r).dump() << '\n';
    };

    auto report = live_url.empty() ? harness::run_experiment(cfg, sink) : harness::run_experiment_live(cfg, live_url, sink);
    std::cout << harness::emit_report(report, fmt);
    return 0;
}

struct SynthOptions {
    std::string strategy = "fixed_delay";
    std::string answer;
    double delay_ms = 50.0;
    double mean_ms = 180.0;
    double stddev_ms = 60.0;
    std::uint64_t seed = 0;
    bool classify = false;
};

int trace_synth(const SynthOptions& opt)
{
    KeystrokeTrace trace;
    if (opt.strategy == "human") {
        trace = harness::synthesize_human_trace(opt.answer, opt.seed, {opt.mean_ms, opt.stddev_ms});
    } else {
        harness::BotStrategy s;
        if (opt.strategy == "paste")
            s.kind = harness::StrategyKind::paste;
        else if (opt.strategy == "fixed_delay")
            s.kind = harness::StrategyKind::fixed_delay;
        else if (opt.strategy == "random_delay")
            s.kind = harness::StrategyKind::random_delay;
        else
            throw ConfigError("unknown strategy: " + opt.strategy);
        s.delay_ms = opt.delay_ms;
        s.delay_mean_ms = opt.mean_ms;
        s.delay_stddev_ms = opt.stddev_ms;
        s.rng_seed = opt.seed;
        trace = harness::synthesize_bot_trace(s, opt.answer);
    }

    nlohmann::json out = trace;
    if (opt.classify) {
        auto verdict = classify(trace.typed_text, trace, hash_answer(normalize_answer(opt.answer)), Thresholds{});
        nlohmann::json features = verdict.features;
        out = {{"trace", out},
               {"verdict", {{"decision", decision_code(verdict.decision)},
                            {"reason", reason_code(verdict.reason)},
                            {"features", features}}}};
    }
    std::cout << out.dump() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"cadence: keystroke-aware CAPTCHA service and bot harness"};
    app.require_subcommand(1);

    ServeOptions serve_opt;
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP challenge/verify service");
    serve_cmd->add_option("--config", serve_opt.config, "Service config file (JSON)");
    serve_cmd->add_option("--host", serve_opt.host, "Listen address");
    serve_cmd->add_option("--port", serve_opt.port, "Listen port");
    serve_cmd->add_option("--templates", serve_opt.templates, "Template bank file");
    serve_cmd->add_option("--static-dir", serve_opt.static_dir, "Directory served at /");
    serve_cmd->add_option("--provider", serve_opt.provider, "templates or llm")->check(CLI::IsMember({"templates", "llm"}));
    serve_cmd->add_option("--llm-endpoint", serve_opt.llm_endpoint, "Chat-completions endpoint URL");
    serve_cmd->add_option("--llm-model", serve_opt.llm_model, "Model name");
    serve_cmd->add_option("--llm-timeout-ms", serve_opt.llm_timeout_ms, "Per-attempt provider timeout");
    serve_cmd->add_option("--llm-max-retries", serve_opt.llm_max_retries, "Retries before template fallback");
    serve_cmd->add_option("--min-stddev-ms", serve_opt.min_stddev_ms, "Latency std. deviation threshold");
    serve_cmd->add_option("--min-total-ms", serve_opt.min_total_ms, "Total typing time threshold");
    serve_cmd->add_option("--ttl-ms", serve_opt.ttl_ms, "Challenge lifetime");

    auto* experiment_cmd = app.add_subcommand("experiment", "Adversarial experiment harness");
    experiment_cmd->require_subcommand(1);
    auto* run_cmd = experiment_cmd->add_subcommand("run", "Run an experiment config");
    std::string exp_config;
    std::optional<std::uint64_t> exp_seed;
    std::string exp_format = "text";
    std::string exp_out;
    std::string exp_live;
    run_cmd->add_option("--config", exp_config, "Experiment config (JSON)")->required();
    run_cmd->add_option("--seed", exp_seed, "Override the config seed");
    run_cmd->add_option("--format", exp_format, "text or csv");
    run_cmd->add_option("--out", exp_out, "Write trial records (JSON lines) here");
    run_cmd->add_option("--live", exp_live, "Drive a running service at this base URL instead");

    auto* trace_cmd = app.add_subcommand("trace", "Keystroke trace utilities");
    trace_cmd->require_subcommand(1);
    auto* synth_cmd = trace_cmd->add_subcommand("synth", "Synthesize a keystroke trace");
    SynthOptions synth;
    synth_cmd->add_option("--strategy", synth.strategy, "paste, fixed_delay, random_delay or human")
        ->check(CLI::IsMember({"paste", "fixed_delay", "random_delay", "human"}));
    synth_cmd->add_option("--answer", synth.answer, "Text to type")->required();
    synth_cmd->add_option("--delay-ms", synth.delay_ms, "fixed_delay gap");
    synth_cmd->add_option("--mean-ms", synth.mean_ms, "random_delay/human mean gap");
    synth_cmd->add_option("--stddev-ms", synth.stddev_ms, "random_delay/human gap std. deviation");
    synth_cmd->add_option("--seed", synth.seed, "RNG seed");
    synth_cmd->add_flag("--classify", synth.classify, "Also classify the trace at default thresholds");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*serve_cmd)
            return serve(serve_opt);
        if (*run_cmd)
            return experiment_run(exp_config, exp_seed, exp_format, exp_out, exp_live);
        if (*synth_cmd)
            return trace_synth(synth);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
