// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <sys/wait.h>

#include <chrono>
#include <functional>
#include <iomanip>
#include <iostream>
#include <thread>

#include "../support.hpp"
#include "tmfix/ingest_service.hpp"
#include "tmfix/simulator.hpp"
#include "tmfix/stats/anova.hpp"
#include "tmfix/stats/report.hpp"

using namespace tmfix;
using namespace testing_support;
namespace fs = std::filesystem;

namespace {

const auto ncfg = textnorm::default_config();

struct Outcome {
    bool pass = true;
    std::string detail;
    std::string measured;

    void note(const std::string& what) { measured += (measured.empty() ? "" : ", ") + what; }

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

bool run(const std::string& name, double budget_s, const std::function<void(Outcome&)>& body) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(o);
    } catch (const std::exception& e) {
        o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream took;
    took << std::fixed << std::setprecision(2) << secs << " s";
    o.require(secs < budget_s, "runtime " + took.str() + " over budget");
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << " (" << took.str() << ")";
    if (!o.measured.empty()) std::cout << " [" << o.measured << "]";
    if (!o.detail.empty()) std::cout << ": " << o.detail;
    std::cout << std::endl;
    return o.pass;
}

std::string fmt(double v) {
    std::ostringstream o;
    o << std::setprecision(6) << v;
    return o.str();
}

void anova_oracle(Outcome& o) {
    using G = std::vector<std::vector<double>>;
    const auto ex = stats::anova_one_way(G{{1, 2, 3}, {4, 5, 6}});
    o.require(rel_err(ex.f_stat, 13.5) <= 1e-9, "F(1..3 vs 4..6) = " + fmt(ex.f_stat));
    o.require(stats::anova_one_way(G{{1, 3}, {2, 2}}).f_stat == 0.0, "equal means F != 0");
    std::mt19937_64 g(20240501);
    std::normal_distribution<double> d(5000, 1500);
    std::size_t bad = 0;
    for (int t = 0; t < 1000; ++t) {
        std::vector<double> a(2 + g() % 40), b(2 + g() % 40);
        for (auto& x : a) x = d(g);
        for (auto& x : b) x = d(g) + 300;
        const double tt = pooled_t(a, b);
        if (rel_err(stats::anova_one_way(G{a, b}).f_stat, tt * tt) > 1e-9) ++bad;
    }
    o.require(bad == 0, std::to_string(bad) + " of 1000 t^2 mismatches");
    const double crit = stats::f_critical(1, 4, 0.01);
    o.note("F=" + fmt(ex.f_stat) + ", Fcrit(1,4)=" + fmt(crit));
    o.require(std::round(crit * 100) / 100 == 21.20, "F crit(1,4,0.01) = " + fmt(crit));
}

void stemmer(Outcome& o) {
    std::ifstream in(source_path("tests/data/snowball_english.tsv"));
    std::size_t n = 0, bad = 0;
    std::string line;
    while (std::getline(in, line)) {
        const auto tab = line.find('\t');
        if (tab == std::string::npos) continue;
        ++n;
        if (stem::stem_english(line.substr(0, tab)) != line.substr(tab + 1)) ++bad;
    }
    o.note(std::to_string(n - bad) + "/" + std::to_string(n) + " entries");
    o.require(n >= 1000, "only " + std::to_string(n) + " fixture entries");
    o.require(bad == 0, std::to_string(bad) + " of " + std::to_string(n) + " entries differ");
}

void matching_oracle(Outcome& o) {
    sim::SimConfig sc;
    sc.n_sessions = 50;
    sc.seed = 1234;
    sc.compound_prob = 0.3;
    const auto c = build_sessions(sim::generate(sc, ncfg).events, ncfg);
    std::size_t bad = 0, hits = 0;
    for (const auto& s : c.sessions) {
        const auto engine = combined_report(s, ncfg);
        hits += engine.hits.size();
        if (!(as_naive(engine) == naive_report(s, ncfg))) ++bad;
    }
    o.note(std::to_string(hits) + " hits");
    o.require(c.sessions.size() == 50, "sessions " + std::to_string(c.sessions.size()));
    o.require(bad == 0, std::to_string(bad) + " sessions differ from the oracle");
    o.require(hits > 0, "no hits at all");
}

void calibration(Outcome& o) {
    sim::SimConfig sc;
    const auto corpus = build_sessions(sim::generate(sc, ncfg).events, ncfg);
    const auto r = stats::corpus_report(corpus, ncfg);
    const auto& t = r.combined.timing;
    o.note("found " + fmt(t.found.mean_ms) + " ms, other " + fmt(t.other.mean_ms) + " ms");
    if (t.anova) o.note("F=" + fmt(t.anova->f_stat));
    o.require(std::abs(t.found.mean_ms - sc.interest_mean_ms) <= 0.10 * sc.interest_mean_ms,
              "found mean " + fmt(t.found.mean_ms));
    o.require(std::abs(t.other.mean_ms - sc.background_mean_ms) <= 0.10 * sc.background_mean_ms,
              "other mean " + fmt(t.other.mean_ms));
    o.require(t.anova && t.anova->significant, "combined ANOVA not significant");
    for (std::size_t i = 0; i < corpus.sessions.size(); ++i) {
        const auto& rep = r.reports[i];
        std::set<Stem> all;
        for (const auto* f : stats::cleaned_fixations(corpus.sessions[i], ncfg)) all.insert(f->stem);
        std::set<Stem> joined = rep.found;
        bool disjoint = true;
        for (const auto& s : rep.other) disjoint = disjoint && joined.insert(s).second;
        if (!disjoint || joined != all) {
            o.require(false, "partition broken in " + rep.session_id);
            break;
        }
    }
    const double want = sim::analytic_expectations(sc).pct_sessions_with_any_found;
    o.note("any-found " + fmt(r.combined.pct_sessions_with_any_found) + "% (closed form " + fmt(want) + "%)");
    o.require(std::abs(r.combined.pct_sessions_with_any_found - want) <= 2.0,
              "any-found " + fmt(r.combined.pct_sessions_with_any_found) + "% vs " + fmt(want) + "%");

    std::size_t not_significant = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        sim::SimConfig null_cfg;
        null_cfg.seed = seed;
        null_cfg.interest_mean_ms = null_cfg.background_mean_ms;
        const auto nr = stats::corpus_report(build_sessions(sim::generate(null_cfg, ncfg).events, ncfg), ncfg);
        const auto& a = nr.combined.timing.anova;
        if (a && !a->significant) ++not_significant;
    }
    o.note("null not significant " + std::to_string(not_significant) + "/100");
    o.require(not_significant >= 95, "null config not significant in " + std::to_string(not_significant) + "/100");
}

void extraction(Outcome& o) {
    sim::SimConfig sc;
    const auto out = sim::generate(sc, ncfg);
    GroundTruthMap truth;
    for (const auto& [id, t] : out.truth.sessions) truth[id] = t.interest;
    const auto r = evaluate_extraction(build_sessions(out.events, ncfg), ThresholdPolicy{}, truth, ncfg);
    o.note("P=" + fmt(r.macro_precision) + " R=" + fmt(r.macro_recall) + " F1=" + fmt(r.macro_f1));
    o.require(r.macro_f1 >= 0.80, "macro-F1 " + fmt(r.macro_f1));
}

void overlap(Outcome& o) {
    sim::SimConfig sc;
    sc.overlap_effect_ms_per_doc = 1000;
    const auto ov = stats::overlap_timing(build_sessions(sim::generate(sc, ncfg).events, ncfg), ncfg);
    std::string means;
    double prev = -1;
    for (std::size_t k = 2; k <= 5; ++k) {
        const auto& t = ov.at(k);
        if (!t) {
            o.require(false, "bucket " + std::to_string(k) + " empty");
            return;
        }
        means += (means.empty() ? "" : " ") + fmt(t->found.mean_ms / 1000.0);
        o.require(t->found.mean_ms > prev, "bucket " + std::to_string(k) + " not above bucket " + std::to_string(k - 1));
        prev = t->found.mean_ms;
    }
    o.note("means " + means + " s");
}

int cli_to(const std::string& args, const fs::path& out) {
    const std::string cmd = std::string(TMFIX_CLI) + " " + args + " > " + out.string() + " 2>/dev/null";
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

void online_offline(Outcome& o) {
    const auto dir = temp_dir("acceptance-equiv");
    sim::SimConfig sc;
    sc.n_sessions = 200;
    sc.seed = 31;
    const auto out = sim::generate(sc, ncfg);
    {
        std::ofstream log(dir / "sim.jsonl", std::ios::binary);
        sim::write_log(log, sc, out);
    }

    ServiceConfig cfg;
    cfg.port = 0;
    cfg.log_path = dir / "service.jsonl";
    IngestService service(cfg, ncfg);
    const int port = service.bind();
    o.require(port > 0, "bind failed");
    if (port <= 0) return;
    std::thread th([&] { service.run(); });
    service.server().wait_until_ready();

    httplib::Client client("127.0.0.1", port);
    client.set_read_timeout(30, 0);
    std::string batch;
    std::size_t in_batch = 0;
    auto flush = [&] {
        if (batch.empty()) return;
        auto res = client.Post("/v1/events", batch, "application/x-ndjson");
        o.require(res && res->status == 202, "batch rejected");
        batch.clear();
        in_batch = 0;
    };
    for (const auto& e : out.events) {
        batch += encode_event(e) + "\n";
        if (++in_batch == 500) flush();
    }
    flush();

    std::vector<std::string> ids;
    for (const auto& [id, t] : out.truth.sessions) ids.push_back(id);
    std::mt19937_64 g(7);
    std::shuffle(ids.begin(), ids.end(), g);
    ids.resize(20);
    std::size_t differ = 0;
    for (const auto& id : ids) {
        auto res = client.Get("/v1/sessions/" + id + "/report");
        const auto path = dir / "offline.json";
        const int rc = cli_to("analyze --input " + (dir / "sim.jsonl").string() + " --session " + id, path);
        if (!res || res->status != 200 || rc != 0 || res->body != read_file(path)) ++differ;
    }
    service.stop();
    th.join();
    o.require(differ == 0, std::to_string(differ) + " of 20 sessions differ");
}

void round_trip_golden(Outcome& o) {
    EventGen gen(42);
    std::size_t bad = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto e = gen.event();
        if (!(decode_event(encode_event(e)) == e)) ++bad;
    }
    o.require(bad == 0, std::to_string(bad) + " of 10000 events did not round-trip");

    std::ifstream in(source_path("tests/golden/session.jsonl"));
    const auto log = read_event_log(in);
    o.require(log.errors.empty(), "golden log has errors");
    const auto report = stats::dump(stats::to_json(stats::corpus_report(build_sessions(log.events, ncfg), ncfg)));
    o.require(report == read_file(source_path("tests/golden/report.json")), "golden report differs");
}

}  // namespace

int main() {
    bool all = true;
    all &= run("anova-oracle", 1, anova_oracle);
    all &= run("stemmer-conformance", 5, stemmer);
    all &= run("matching-oracle", 10, matching_oracle);
    all &= run("calibration", 120, calibration);
    all &= run("extraction-quality", 60, extraction);
    all &= run("overlap-effect", 60, overlap);
    all &= run("online-offline-equivalence", 30, online_offline);
    all &= run("round-trip-and-golden", 60, round_trip_golden);
    return all ? 0 : 1;
}
