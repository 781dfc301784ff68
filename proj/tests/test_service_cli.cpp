#include <gtest/gtest.h>
#include <sys/wait.h>

#include <thread>

#include "support.hpp"
#include "tmfix/ingest_service.hpp"
#include "tmfix/simulator.hpp"

using namespace tmfix;
using testing_support::read_file;
using testing_support::source_path;
namespace fs = std::filesystem;

namespace {

const auto ncfg = textnorm::default_config();

struct Running {
    explicit Running(ServiceConfig cfg) : service(std::move(cfg), ncfg) {
        port = service.bind();
        thread = std::thread([this] { service.run(); });
        service.server().wait_until_ready();
    }
    ~Running() {
        service.stop();
        thread.join();
    }
    httplib::Client client() const {
        httplib::Client c("127.0.0.1", port);
        c.set_read_timeout(10, 0);
        return c;
    }

    IngestService service;
    int port = -1;
    std::thread thread;
};

ServiceConfig config_in(const fs::path& dir) {
    ServiceConfig c;
    c.port = 0;
    c.log_path = dir / "events.jsonl";
    return c;
}

std::string golden_body() {
    std::string body;
    std::istringstream in(read_file(source_path("tests/golden/session.jsonl")));
    std::string line;
    while (std::getline(in, line)) {
        if (is_record_line(line)) body += line + "\n";
    }
    return body;
}

struct CliResult {
    int code = -1;
    std::string out;
};

CliResult cli(const std::string& args, const fs::path& dir) {
    const auto out = dir / "cli.out";
    const std::string cmd = std::string(TMFIX_CLI) + " " + args + " > " + out.string() + " 2> " +
                            (dir / "cli.err").string();
    const int raw = std::system(cmd.c_str());
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, read_file(out)};
}

}  // namespace

TEST(Service, AcceptsBatchAndServesReport) {
    auto dir = testing_support::temp_dir("svc-basic");
    Running r(config_in(dir));
    auto c = r.client();
    auto res = c.Post("/v1/events", golden_body(), "application/x-ndjson");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 202);
    auto ack = nlohmann::json::parse(res->body);
    EXPECT_EQ(ack["accepted"], 5);
    EXPECT_EQ(ack["rejected"], 0);
    EXPECT_TRUE(ack["first_error"].is_null());

    auto rep = c.Get("/v1/sessions/golden-1/report");
    ASSERT_TRUE(rep);
    EXPECT_EQ(rep->status, 200);
    auto j = nlohmann::json::parse(rep->body);
    EXPECT_EQ(j["session_id"], "golden-1");
    EXPECT_EQ(j["counts"]["queries"], 3);
    EXPECT_EQ(j["match"]["found"].size(), 5u);

    auto missing = c.Get("/v1/sessions/nobody/report");
    ASSERT_TRUE(missing);
    EXPECT_EQ(missing->status, 404);
    EXPECT_EQ(nlohmann::json::parse(missing->body)["error"], "UnknownSession");
}

TEST(Service, PartialBatchReportsFirstError) {
    auto dir = testing_support::temp_dir("svc-partial");
    Running r(config_in(dir));
    auto c = r.client();
    const std::string good =
        R"({"type":"click","session_id":"p","ts_ms":1,"doc_id":"d","title":"Titel","keywords":[]})";
    auto res = c.Post("/v1/events", good + "\n{broken\n" + good + "\n", "application/x-ndjson");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 202);
    auto ack = nlohmann::json::parse(res->body);
    EXPECT_EQ(ack["accepted"], 2);
    EXPECT_EQ(ack["rejected"], 1);
    EXPECT_EQ(ack["first_error"]["line"], 2);
    EXPECT_EQ(ack["first_error"]["error"], "MalformedJson");

    auto bad = c.Post("/v1/events", "{broken\n", "application/x-ndjson");
    EXPECT_EQ(bad->status, 400);
    auto empty = c.Post("/v1/events", "", "application/x-ndjson");
    EXPECT_EQ(empty->status, 400);
    EXPECT_EQ(nlohmann::json::parse(empty->body)["error"], "MalformedBatch");

    // a click-only session has no report
    EXPECT_EQ(c.Get("/v1/sessions/p/report")->status, 404);
    std::size_t lines = 0;
    for (char ch : read_file(dir / "events.jsonl")) lines += ch == '\n';
    EXPECT_EQ(lines, 2u);
}

TEST(Service, LimitsTokenAndCors) {
    auto dir = testing_support::temp_dir("svc-limits");
    auto cfg = config_in(dir);
    cfg.max_body_bytes = 256;
    cfg.token = "s3cret";
    cfg.cors_allowlist = {"https://search.example.org"};
    Running r(cfg);
    auto c = r.client();

    auto denied = c.Post("/v1/events", golden_body(), "application/x-ndjson");
    ASSERT_TRUE(denied);
    EXPECT_EQ(denied->status, 401);

    httplib::Headers h{{"X-Tmfix-Token", "s3cret"}, {"Origin", "https://search.example.org"}};
    auto big = c.Post("/v1/events", h, std::string(1000, ' '), "application/x-ndjson");
    ASSERT_TRUE(big);
    EXPECT_EQ(big->status, 413);

    auto pre = c.Options("/v1/events", h);
    ASSERT_TRUE(pre);
    EXPECT_EQ(pre->status, 204);
    EXPECT_EQ(pre->get_header_value("Access-Control-Allow-Origin"), "https://search.example.org");

    httplib::Headers other{{"X-Tmfix-Token", "s3cret"}, {"Origin", "https://evil.example"}};
    auto res = c.Get("/v1/sessions/x/report", other);
    ASSERT_TRUE(res);
    EXPECT_FALSE(res->has_header("Access-Control-Allow-Origin"));
}

TEST(Service, StoreSurvivesRestartAndMissingNewline) {
    auto dir = testing_support::temp_dir("svc-restart");
    {
        std::ofstream(dir / "events.jsonl") << golden_body().substr(0, golden_body().size() - 1);
    }
    EventStore store(dir / "events.jsonl");
    EXPECT_EQ(store.session_count(), 1u);
    const std::string click =
        R"({"type":"click","session_id":"golden-1","ts_ms":95000,"doc_id":"D3","title":"Jugend","keywords":[]})";
    EXPECT_EQ(store.append(click + "\n").accepted, 1u);
    EXPECT_EQ(store.session_events("golden-1").size(), 6u);
    EventStore again(dir / "events.jsonl");
    EXPECT_EQ(again.session_events("golden-1").size(), 6u);
    std::istringstream in(read_file(dir / "events.jsonl"));
    EXPECT_TRUE(read_event_log(in).errors.empty());
}

TEST(Service, ConcurrentPostsAllLand) {
    auto dir = testing_support::temp_dir("svc-concurrent");
    Running r(config_in(dir));
    std::vector<std::thread> posters;
    for (int t = 0; t < 4; ++t) {
        posters.emplace_back([&, t] {
            auto c = r.client();
            for (int i = 0; i < 25; ++i) {
                std::string body;
                for (int k = 0; k < 4; ++k) {
                    body += encode_event(DocumentClick{"c" + std::to_string(t), i * 10 + k, "d", "Titel", {}}) + "\n";
                }
                auto res = c.Post("/v1/events", body, "application/x-ndjson");
                ASSERT_TRUE(res);
                ASSERT_EQ(res->status, 202);
            }
        });
    }
    for (auto& p : posters) p.join();
    std::istringstream in(read_file(dir / "events.jsonl"));
    auto log = read_event_log(in);
    EXPECT_TRUE(log.errors.empty());
    EXPECT_EQ(log.events.size(), 400u);
}

TEST(Cli, AnalyzeGoldenMatchesCommittedReport) {
    auto dir = testing_support::temp_dir("cli-analyze");
    const auto out = dir / "report.json";
    auto r = cli("analyze --input " + source_path("tests/golden/session.jsonl") + " --out " + out.string(), dir);
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(read_file(out), read_file(source_path("tests/golden/report.json")));
    EXPECT_NE(r.out.find("sessions 1, searches 3, clicks 2"), std::string::npos);
}

TEST(Cli, ExitCodes) {
    auto dir = testing_support::temp_dir("cli-codes");
    const auto golden = source_path("tests/golden/session.jsonl");
    std::ofstream(dir / "empty.jsonl") << "# nothing\n";
    std::ofstream(dir / "bad.json") << R"({"n_sessions": 0})";

    EXPECT_EQ(cli("--help", dir).code, 0);
    EXPECT_EQ(cli("", dir).code, 2);
    EXPECT_EQ(cli("analyze", dir).code, 2);
    EXPECT_EQ(cli("analyze --input " + (dir / "missing.jsonl").string(), dir).code, 2);
    EXPECT_EQ(cli("analyze --input " + (dir / "empty.jsonl").string(), dir).code, 3);
    EXPECT_EQ(cli("analyze --input " + golden + " --session nobody", dir).code, 4);
    EXPECT_EQ(cli("extract --input " + golden + " --session golden-1 --policy top_k --k 0", dir).code, 2);
    EXPECT_EQ(cli("simulate --config " + (dir / "bad.json").string() + " --out-dir " + dir.string(), dir).code, 2);
}

TEST(Cli, ExtractPrintsRankedTerms) {
    auto dir = testing_support::temp_dir("cli-extract");
    auto r = cli("extract --input " + source_path("tests/golden/session.jsonl") + " --session golden-1", dir);
    ASSERT_EQ(r.code, 0);
    auto j = nlohmann::json::parse(r.out);
    ASSERT_EQ(j["terms"].size(), 2u);
    EXPECT_EQ(j["terms"][0]["stem"], "arbeitsmarkt");
}

TEST(Cli, SimulateThenEvaluate) {
    auto dir = testing_support::temp_dir("cli-sim");
    std::ofstream(dir / "cfg.json") << R"({"seed": 5, "n_sessions": 40})";
    auto s = cli("simulate --config " + (dir / "cfg.json").string() + " --out-dir " + (dir / "out").string(), dir);
    ASSERT_EQ(s.code, 0);
    EXPECT_NE(s.out.find("sessions 40"), std::string::npos);
    const auto log = read_file(dir / "out/log.jsonl");
    EXPECT_EQ(log.rfind("# tmfix simulator", 0), 0u);

    auto e = cli("evaluate --input " + (dir / "out/log.jsonl").string() + " --truth " +
                     (dir / "out/truth.json").string() + " --out " + (dir / "eval.json").string(),
                 dir);
    ASSERT_EQ(e.code, 0);
    auto j = nlohmann::json::parse(read_file(dir / "eval.json"));
    EXPECT_EQ(j["sessions"].size(), 40u);
    EXPECT_GT(j["macro"]["f1"].get<double>(), 0.5);

    std::ofstream(dir / "wrong.json") << R"({"sessions": {"ghost": ["x"]}})";
    EXPECT_EQ(cli("evaluate --input " + (dir / "out/log.jsonl").string() + " --truth " + (dir / "wrong.json").string(),
                  dir)
                  .code,
              2);
}

TEST(Cli, SessionReportEqualsServiceReport) {
    auto dir = testing_support::temp_dir("cli-equiv");
    Running r(config_in(dir));
    auto c = r.client();
    ASSERT_EQ(c.Post("/v1/events", golden_body(), "application/x-ndjson")->status, 202);
    auto online = c.Get("/v1/sessions/golden-1/report");
    auto offline = cli("analyze --input " + source_path("tests/golden/session.jsonl") + " --session golden-1", dir);
    ASSERT_EQ(offline.code, 0);
    EXPECT_EQ(online->body, offline.out);
}
