// tmfix: serve, simulate, analyze, extract, evaluate.
//
// Exit codes: 0 ok, 2 input or configuration error, 3 empty corpus or no
// fixations, 4 unknown session.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tmfix/event_model.hpp"
#include "tmfix/ingest_service.hpp"
#include "tmfix/interest.hpp"
#include "tmfix/session_report.hpp"
#include "tmfix/session_store.hpp"
#include "tmfix/simulator.hpp"
#include "tmfix/stats/report.hpp"
#include "tmfix/textnorm.hpp"

namespace fs = std::filesystem;
using namespace tmfix;

namespace {

enum Exit { ok = 0, input_error = 2, empty = 3, not_found = 4 };

int exit_code_for(ErrorCode c) {
    switch (c) {
        case ErrorCode::empty_corpus:
        case ErrorCode::empty_input:
        case ErrorCode::no_fixations: return empty;
        case ErrorCode::unknown_session: return not_found;
        default: return input_error;
    }
}

struct NormOptions {
    std::string config_path;

    textnorm::NormalizationConfig load() const {
        return config_path.empty() ? textnorm::default_config() : textnorm::load_config(config_path);
    }
};

struct PolicyOptions {
    std::string kind = "median_factor";
    double factor = ThresholdPolicy{}.factor;
    Millis absolute_ms = 0;
    std::size_t k = ThresholdPolicy{}.k;
    Millis floor_ms = ThresholdPolicy{}.floor_ms;

    ThresholdPolicy policy() const {
        ThresholdPolicy p;
        p.kind = parse_policy_kind(kind);
        p.factor = factor;
        p.absolute_ms = absolute_ms;
        p.k = k;
        p.floor_ms = floor_ms;
        p.validate();
        return p;
    }

    void attach(CLI::App* app) {
        app->add_option("--policy", kind, "absolute | median_factor | top_k")
            ->check(CLI::IsMember({"absolute", "median_factor", "top_k"}));
        app->add_option("--factor", factor, "median_factor multiplier (> 1)");
        app->add_option("--absolute-ms", absolute_ms, "absolute threshold in ms");
        app->add_option("--k", k, "top_k count");
        app->add_option("--floor-ms", floor_ms, "minimum total fixation ms for any policy");
    }
};

Corpus load_corpus(const std::vector<std::string>& inputs, const textnorm::NormalizationConfig& cfg) {
    std::vector<SessionEvent> events;
    for (const auto& path : inputs) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error(ErrorCode::io_error, "cannot read " + path, "input");
        auto log = read_event_log(in);
        for (const auto& e : log.errors)
            std::cerr << path << ":" << e.line_no << ": " << error_name(e.code) << ": " << e.message << "\n";
        for (auto& e : log.events) events.push_back(std::move(e));
    }
    return build_sessions(events, cfg);
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string(), "out");
}

std::string fixed2(double v) {
    std::ostringstream o;
    o << std::fixed << std::setprecision(2) << v;
    return o.str();
}

IngestService* running_service = nullptr;

extern "C" void on_signal(int) {
    if (running_service) running_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"term-mouse-fixation analysis"};
    app.require_subcommand(1);
    NormOptions norm;
    app.add_option("--norm-config", norm.config_path, "normalization config JSON")->check(CLI::ExistingFile);

    // serve
    auto* serve = app.add_subcommand("serve", "run the ingestion service");
    ServiceConfig svc;
    std::string log_path = "events.jsonl";
    std::string token;
    PolicyOptions serve_policy;
    serve->add_option("--host", svc.host, "listen address");
    serve->add_option("--port", svc.port, "listen port (0 picks one)");
    serve->add_option("--log", log_path, "event log path");
    serve->add_option("--max-body", svc.max_body_bytes, "maximum batch size in bytes");
    serve->add_option("--cors", svc.cors_allowlist, "allowed origins (default: any)");
    serve->add_option("--token", token, "shared token required in X-Tmfix-Token")->envname("TMFIX_TOKEN");
    serve->add_option("--alpha", svc.alpha, "significance level");
    serve_policy.attach(serve);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "generate a synthetic corpus");
    std::string sim_config;
    std::string out_dir;
    simulate->add_option("--config", sim_config, "simulator config JSON")->required()->check(CLI::ExistingFile);
    simulate->add_option("--out-dir", out_dir, "output directory")->required();

    // analyze
    auto* analyze = app.add_subcommand("analyze", "corpus report from event logs");
    std::vector<std::string> inputs;
    std::string out_path;
    double alpha = 0.01;
    std::string session_id;
    analyze->add_option("--input", inputs, "event log(s)")->required();
    analyze->add_option("--out", out_path, "write JSON report here");
    analyze->add_option("--alpha", alpha, "significance level");
    analyze->add_option("--session", session_id, "report one session (JSON on stdout)");

    // extract
    auto* extract_cmd = app.add_subcommand("extract", "interest terms of one session");
    std::vector<std::string> extract_inputs;
    std::string extract_session;
    PolicyOptions extract_policy;
    extract_cmd->add_option("--input", extract_inputs, "event log(s)")->required();
    extract_cmd->add_option("--session", extract_session, "session id")->required();
    extract_policy.attach(extract_cmd);

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "extraction precision/recall against truth");
    std::vector<std::string> eval_inputs;
    std::string truth_path;
    std::string eval_out;
    PolicyOptions eval_policy;
    evaluate->add_option("--input", eval_inputs, "event log(s)")->required();
    evaluate->add_option("--truth", truth_path, "truth.json")->required();
    evaluate->add_option("--out", eval_out, "write JSON metrics here");
    eval_policy.attach(evaluate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? ok : input_error;
    }

    try {
        const auto cfg = norm.load();

        if (*serve) {
            svc.log_path = log_path;
            if (!token.empty()) svc.token = token;
            svc.policy = serve_policy.policy();
            IngestService service(svc, cfg);
            const int port = service.bind();
            if (port < 0) {
                std::cerr << "cannot bind " << svc.host << ":" << svc.port << "\n";
                return input_error;
            }
            std::cerr << "listening on " << svc.host << ":" << port << ", log " << log_path << "\n";
            running_service = &service;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            service.run();
            running_service = nullptr;
            return ok;
        }

        if (*simulate) {
            std::ifstream in(sim_config, std::ios::binary);
            const auto j = nlohmann::json::parse(in, nullptr, false);
            if (j.is_discarded()) throw Error(ErrorCode::invalid_config, "config is not valid JSON", "config");
            const auto sc = sim::config_from_json(j);
            const auto result = sim::generate(sc, cfg);
            fs::create_directories(out_dir);
            {
                std::ofstream log(fs::path(out_dir) / "log.jsonl", std::ios::binary);
                sim::write_log(log, sc, result);
                if (!log) throw Error(ErrorCode::io_error, "cannot write log.jsonl", "out-dir");
            }
            write_file(fs::path(out_dir) / "truth.json", sim::truth_to_json(sc, result.truth).dump(2) + "\n");
            const auto e = sim::analytic_expectations(sc);
            std::cout << "sessions " << sc.n_sessions << ", events " << result.events.size() << "\n"
                      << "expected sessions with any found " << fixed2(e.pct_sessions_with_any_found) << "%\n"
                      << "expected found mean " << fixed2(e.found_mean_ms / 1000.0) << " s, other mean "
                      << fixed2(e.other_mean_ms / 1000.0) << " s\n"
                      << "midpoint threshold " << fixed2(e.threshold_ms / 1000.0)
                      << " s: interest miss rate " << std::setprecision(4) << e.interest_miss_rate
                      << ", background false rate " << e.background_false_rate << "\n";
            return ok;
        }

        if (*analyze) {
            const auto corpus = load_corpus(inputs, cfg);
            if (!session_id.empty()) {
                const Session* s = corpus.find(session_id);
                if (!s) throw Error(ErrorCode::unknown_session, "no admitted session " + session_id, "session");
                const auto text = stats::dump(session_report(*s, cfg, alpha));
                if (!out_path.empty()) write_file(out_path, text);
                std::cout << text;
                return ok;
            }
            const auto report = stats::corpus_report(corpus, cfg, alpha);
            if (!out_path.empty()) write_file(out_path, stats::dump(stats::to_json(report)));
            std::cout << stats::to_table(report);
            return ok;
        }

        if (*extract_cmd) {
            const auto policy = extract_policy.policy();
            const auto corpus = load_corpus(extract_inputs, cfg);
            const Session* s = corpus.find(extract_session);
            if (!s) throw Error(ErrorCode::unknown_session, "no admitted session " + extract_session, "session");
            std::cout << stats::dump(extraction_to_json(s->session_id, policy, extract(*s, policy, cfg)));
            return ok;
        }

        if (*evaluate) {
            const auto policy = eval_policy.policy();
            const auto corpus = load_corpus(eval_inputs, cfg);
            std::ifstream in(truth_path, std::ios::binary);
            if (!in) throw Error(ErrorCode::io_error, "cannot read " + truth_path, "truth");
            const auto tj = nlohmann::json::parse(in, nullptr, false);
            if (tj.is_discarded()) throw Error(ErrorCode::invalid_config, "truth is not valid JSON", "truth");
            const auto truth = sim::interest_truth_from_json(tj);
            EvaluationResult r;
            try {
                r = evaluate_extraction(corpus, policy, truth, cfg);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::unknown_session) throw;
                std::cerr << "truth does not match the corpus: " << e.what() << "\n";
                return input_error;
            }
            std::cout << std::left << std::setw(28) << "session" << std::right << std::setw(10) << "precision"
                      << std::setw(10) << "recall" << std::setw(10) << "f1" << "\n";
            for (const auto& [id, sc] : r.per_session) {
                std::cout << std::left << std::setw(28) << (id + (sc.empty_truth ? " *" : "")) << std::right
                          << std::setw(10) << fixed2(sc.precision) << std::setw(10) << fixed2(sc.recall)
                          << std::setw(10) << fixed2(sc.f1) << "\n";
            }
            std::cout << std::left << std::setw(28) << "macro" << std::right << std::setw(10)
                      << fixed2(r.macro_precision) << std::setw(10) << fixed2(r.macro_recall) << std::setw(10)
                      << fixed2(r.macro_f1) << "\n";
            if (r.empty_truth_sessions > 0)
                std::cout << "* " << r.empty_truth_sessions << " session(s) with empty truth (recall taken as 1)\n";
            if (!eval_out.empty()) {
                nlohmann::ordered_json j;
                j["policy"] = policy_to_json(policy);
                j["macro"] = {{"precision", stats::real(r.macro_precision)},
                              {"recall", stats::real(r.macro_recall)},
                              {"f1", stats::real(r.macro_f1)}};
                j["empty_truth_sessions"] = r.empty_truth_sessions;
                nlohmann::ordered_json per;
                for (const auto& [id, sc] : r.per_session) {
                    per[id] = {{"precision", stats::real(sc.precision)},
                               {"recall", stats::real(sc.recall)},
                               {"f1", stats::real(sc.f1)},
                               {"empty_truth", sc.empty_truth}};
                }
                j["sessions"] = std::move(per);
                write_file(eval_out, stats::dump(j));
            }
            return ok;
        }
    } catch (const Error& e) {
        std::cerr << "tmfix: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "tmfix: " << e.what() << "\n";
        return input_error;
    }
    return ok;
}
