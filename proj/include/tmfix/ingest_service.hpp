#pragma once

// HTTP ingestion of event batches into an append-only JSONL log, and
// per-session reports served from that log.

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "tmfix/error.hpp"
#include "tmfix/event_model.hpp"
#include "tmfix/interest.hpp"
#include "tmfix/session_report.hpp"
#include "tmfix/session_store.hpp"
#include "tmfix/stats/report.hpp"

namespace tmfix {

struct IngestAck {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    struct FirstError {
        std::size_t line = 0;  // 1-based line in the request body
        std::string error;
    };
    std::optional<FirstError> first_error;
};

inline nlohmann::ordered_json to_json(const IngestAck& a) {
    nlohmann::ordered_json j;
    j["accepted"] = a.accepted;
    j["rejected"] = a.rejected;
    if (a.first_error) {
        j["first_error"] = {{"line", a.first_error->line}, {"error", a.first_error->error}};
    } else {
        j["first_error"] = nullptr;
    }
    return j;
}

/// The JSONL log plus an in-memory index of line offsets per session. One
/// writer at a time; readers see the state as of the last completed append.
class EventStore {
public:
    explicit EventStore(std::filesystem::path path) : path_(std::move(path)) { rebuild_index(); }

    const std::filesystem::path& path() const { return path_; }

    /// Validates each record line independently and appends the accepted
    /// ones, in order, with a single write. Throws IoError if the log cannot
    /// be written; nothing is indexed in that case.
    IngestAck append(std::string_view body) {
        IngestAck ack;
        std::vector<std::pair<std::string, std::string>> lines;  // session id, canonical line
        std::size_t line_no = 0;
        std::size_t pos = 0;
        while (pos <= body.size()) {
            auto nl = body.find('\n', pos);
            if (nl == std::string_view::npos) nl = body.size();
            std::string_view line = body.substr(pos, nl - pos);
            pos = nl + 1;
            ++line_no;
            if (!is_record_line(line)) continue;
            try {
                auto e = decode_event(line);
                lines.emplace_back(session_id_of(e), encode_event(e));
                ++ack.accepted;
            } catch (const Error& err) {
                ++ack.rejected;
                if (!ack.first_error) ack.first_error = IngestAck::FirstError{line_no, std::string(error_name(err.code()))};
            }
        }
        if (lines.empty()) return ack;

        std::unique_lock lock(mutex_);
        std::string chunk;
        if (needs_newline_) chunk += '\n';  // terminate a truncated last line
        std::vector<std::pair<std::string, Span>> spans;
        std::uint64_t offset = end_;
        for (auto& [sid, text] : lines) {
            spans.emplace_back(sid, Span{offset + chunk.size(), text.size()});
            chunk += text;
            chunk += '\n';
        }
        std::ofstream out(path_, std::ios::binary | std::ios::app);
        if (!out) throw Error(ErrorCode::io_error, "cannot open log " + path_.string());
        out.write(chunk.data(), static_cast<std::streamsize>(chunk.size()));
        out.flush();
        if (!out) throw Error(ErrorCode::io_error, "cannot write log " + path_.string());
        end_ += chunk.size();
        needs_newline_ = false;
        for (auto& [sid, span] : spans) index_[sid].push_back(span);
        return ack;
    }

    /// Events of one session in log order; empty if the id is unknown.
    std::vector<SessionEvent> session_events(const std::string& id) const {
        std::shared_lock lock(mutex_);
        std::vector<SessionEvent> out;
        auto it = index_.find(id);
        if (it == index_.end()) return out;
        std::ifstream in(path_, std::ios::binary);
        if (!in) throw Error(ErrorCode::io_error, "cannot read log " + path_.string());
        std::string buf;
        for (const auto& span : it->second) {
            buf.resize(span.length);
            in.seekg(static_cast<std::streamoff>(span.offset));
            in.read(buf.data(), static_cast<std::streamsize>(span.length));
            if (!in) throw Error(ErrorCode::io_error, "short read from log " + path_.string());
            out.push_back(decode_event(buf));
        }
        return out;
    }

    std::size_t session_count() const {
        std::shared_lock lock(mutex_);
        return index_.size();
    }

private:
    struct Span {
        std::uint64_t offset = 0;
        std::size_t length = 0;
    };

    void rebuild_index() {
        index_.clear();
        end_ = 0;
        std::ifstream in(path_, std::ios::binary);
        if (!in) return;  // created on first append
        std::string line;
        std::uint64_t offset = 0;
        while (std::getline(in, line)) {
            const std::uint64_t next = offset + line.size() + 1;
            if (is_record_line(line)) {
                try {
                    auto e = decode_event(line);
                    index_[session_id_of(e)].push_back({offset, line.size()});
                } catch (const Error&) {
                    // undecodable lines stay in the file but are never served
                }
            }
            offset = next;
        }
        end_ = std::filesystem::file_size(path_);
        if (end_ > 0) {
            in.clear();
            in.seekg(-1, std::ios::end);
            needs_newline_ = in.get() != '\n';
        }
    }

    std::filesystem::path path_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, std::vector<Span>> index_;
    std::uint64_t end_ = 0;
    bool needs_newline_ = false;
};

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::filesystem::path log_path = "events.jsonl";
    std::size_t max_body_bytes = 1 << 20;
    std::vector<std::string> cors_allowlist;  // empty: any origin
    std::optional<std::string> token;          // checked against X-Tmfix-Token
    double alpha = 0.01;
    ThresholdPolicy policy;
};

inline constexpr const char* token_header = "X-Tmfix-Token";

class IngestService {
public:
    IngestService(ServiceConfig cfg, textnorm::NormalizationConfig ncfg)
        : cfg_(std::move(cfg)), ncfg_(std::move(ncfg)), store_(cfg_.log_path) {
        server_.set_payload_max_length(cfg_.max_body_bytes);
        server_.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
            add_cors(req, res);
            if (req.method == "OPTIONS") return httplib::Server::HandlerResponse::Unhandled;
            if (cfg_.token && req.get_header_value(token_header) != *cfg_.token) {
                send_error(res, 401, "Unauthorized");
                return httplib::Server::HandlerResponse::Handled;
            }
            return httplib::Server::HandlerResponse::Unhandled;
        });
        server_.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
        server_.Post("/v1/events", [this](const httplib::Request& req, httplib::Response& res) { post_events(req, res); });
        server_.Get(R"(/v1/sessions/([^/]+)/report)",
                    [this](const httplib::Request& req, httplib::Response& res) { get_report(req, res); });
    }

    httplib::Server& server() { return server_; }
    EventStore& store() { return store_; }

    /// Binds to cfg.port (0 picks a free port) and returns the bound port, or -1.
    int bind() {
        if (cfg_.port == 0) return server_.bind_to_any_port(cfg_.host);
        return server_.bind_to_port(cfg_.host, cfg_.port) ? cfg_.port : -1;
    }
    bool run() { return server_.listen_after_bind(); }
    void stop() { server_.stop(); }

    /// The report body served for a session, or nullopt when not admitted.
    std::optional<std::string> report_for(const std::string& id) const {
        auto events = store_.session_events(id);
        if (events.empty()) return std::nullopt;
        Session s = assemble_session(id, std::move(events), ncfg_);
        if (s.query_events.empty()) return std::nullopt;
        return stats::dump(session_report(s, ncfg_, cfg_.alpha, cfg_.policy));
    }

private:
    static void send_error(httplib::Response& res, int status, std::string_view name) {
        res.status = status;
        res.set_content(nlohmann::ordered_json{{"error", std::string(name)}}.dump(), "application/json");
    }

    void add_cors(const httplib::Request& req, httplib::Response& res) const {
        if (!req.has_header("Origin")) return;
        const auto origin = req.get_header_value("Origin");
        if (cfg_.cors_allowlist.empty()) {
            res.set_header("Access-Control-Allow-Origin", "*");
        } else if (std::find(cfg_.cors_allowlist.begin(), cfg_.cors_allowlist.end(), origin) !=
                   cfg_.cors_allowlist.end()) {
            res.set_header("Access-Control-Allow-Origin", origin);
            res.set_header("Vary", "Origin");
        } else {
            return;
        }
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", std::string("Content-Type, ") + token_header);
    }

    void post_events(const httplib::Request& req, httplib::Response& res) {
        if (req.body.size() > cfg_.max_body_bytes) return send_error(res, 413, "PayloadTooLarge");
        IngestAck ack;
        try {
            ack = store_.append(req.body);
        } catch (const Error&) {
            return send_error(res, 503, "StorageUnavailable");
        }
        res.status = ack.accepted > 0 ? 202 : 400;
        auto j = to_json(ack);
        if (ack.accepted == 0 && ack.rejected == 0) j["error"] = "MalformedBatch";
        res.set_content(j.dump(), "application/json");
    }

    void get_report(const httplib::Request& req, httplib::Response& res) const {
        const std::string id = req.matches[1];
        std::optional<std::string> body;
        try {
            body = report_for(id);
        } catch (const Error&) {
            return send_error(res, 503, "StorageUnavailable");
        }
        if (!body) return send_error(res, 404, "UnknownSession");
        res.status = 200;
        res.set_content(*body, "application/json");
    }

    ServiceConfig cfg_;
    textnorm::NormalizationConfig ncfg_;
    EventStore store_;
    httplib::Server server_;
};

}  // namespace tmfix
