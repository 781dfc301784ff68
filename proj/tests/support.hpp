#pragma once

// Test-side oracles and helpers. Nothing here calls the code it checks
// except for shared normalization, which has its own fixtures.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <unistd.h>

#include "tmfix/event_model.hpp"
#include "tmfix/matching.hpp"
#include "tmfix/session_store.hpp"
#include "tmfix/textnorm.hpp"

namespace testing_support {

using namespace tmfix;

inline std::string source_path(const std::string& rel) { return std::string(TMFIX_SOURCE_DIR) + "/" + rel; }

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("tmfix-test-" + name + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

// ---- matching oracle: quadratic scan ---------------------------------------

struct NaiveHit {
    int kind;
    std::string doc;  // empty for search terms
    std::string needle;
    std::string fixation;
    auto operator<=>(const NaiveHit&) const = default;
};

struct NaiveReport {
    std::set<NaiveHit> hits;
    std::set<std::string> found;
    std::set<std::string> other;
    std::map<int, std::pair<std::size_t, std::size_t>> per_kind;  // searched, found
};

inline bool contains(const std::string& hay, const std::string& needle) {
    if (needle.size() > hay.size()) return false;
    for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) {
        if (hay.compare(i, needle.size(), needle) == 0) return true;
    }
    return false;
}

inline NaiveReport naive_report(const Session& s, const textnorm::NormalizationConfig& cfg) {
    NaiveReport r;
    std::vector<std::string> fx;
    for (const auto& [stem, f] : s.fixations) {
        if (!cfg.blacklist.contains(stem)) fx.push_back(stem.str());
    }
    auto hit_any = [&](const std::string& needle) {
        for (const auto& f : fx) {
            if (contains(f, needle)) return true;
        }
        return false;
    };

    std::set<std::string> search;
    for (const auto& q : s.query_events) {
        for (const auto& raw : q.raw_terms) {
            for (const auto& st : textnorm::normalize_text(raw, cfg, true)) search.insert(st.str());
        }
    }
    r.per_kind[0] = {0, 0};
    r.per_kind[1] = {0, 0};
    r.per_kind[2] = {0, 0};
    for (const auto& n : search) {
        ++r.per_kind[0].first;
        if (hit_any(n)) ++r.per_kind[0].second;
        for (const auto& f : fx) {
            if (contains(f, n)) r.hits.insert({0, "", n, f});
        }
    }

    std::set<std::string> titles, titles_found, keys, keys_found;
    for (const auto& d : s.clicks) {
        std::set<std::string> needles;
        for (const auto& st : textnorm::normalize_text(d.title, cfg, true)) needles.insert(st.str());
        for (const auto& n : needles) {
            titles.insert(n);
            if (hit_any(n)) titles_found.insert(n);
            for (const auto& f : fx) {
                if (contains(f, n)) r.hits.insert({1, d.doc_id, n, f});
            }
        }
        for (const auto& raw : d.keywords) {
            std::vector<std::string> toks;
            for (const auto& st : textnorm::normalize_text(raw, cfg, true)) toks.push_back(st.str());
            std::string key;
            if (toks.empty()) {
                key = "#" + unicode::fold(raw);
            } else {
                for (std::size_t i = 0; i < toks.size(); ++i) key += (i ? " " : "") + toks[i];
            }
            keys.insert(key);
            bool all = !toks.empty();
            for (const auto& t : toks) all = all && hit_any(t);
            if (!all) continue;
            keys_found.insert(key);
            for (const auto& t : toks) {
                for (const auto& f : fx) {
                    if (contains(f, t)) r.hits.insert({2, d.doc_id, t, f});
                }
            }
        }
    }
    r.per_kind[1] = {titles.size(), titles_found.size()};
    r.per_kind[2] = {keys.size(), keys_found.size()};
    for (const auto& h : r.hits) r.found.insert(h.fixation);
    for (const auto& f : fx) {
        if (!r.found.contains(f)) r.other.insert(f);
    }
    return r;
}

/// Engine report in the oracle's shape.
inline NaiveReport as_naive(const MatchReport& m) {
    NaiveReport r;
    for (const auto& h : m.hits) {
        r.hits.insert({static_cast<int>(h.kind), h.doc_id.value_or(""), h.needle.str(), h.fixation_stem.str()});
    }
    for (const auto& s : m.found) r.found.insert(s.str());
    for (const auto& s : m.other) r.other.insert(s.str());
    for (const auto& [k, c] : m.per_kind) r.per_kind[static_cast<int>(k)] = {c.searched, c.found};
    return r;
}

inline bool operator==(const NaiveReport& a, const NaiveReport& b) {
    return a.hits == b.hits && a.found == b.found && a.other == b.other && a.per_kind == b.per_kind;
}

// ---- ANOVA oracle: definitional sums in long double -------------------------

inline double anova_f_oracle(const std::vector<std::vector<double>>& groups) {
    long double total = 0;
    std::size_t n = 0;
    for (const auto& g : groups) {
        for (double x : g) total += x;
        n += g.size();
    }
    const long double grand = total / n;
    long double ssb = 0, ssw = 0;
    for (const auto& g : groups) {
        long double s = 0;
        for (double x : g) s += x;
        const long double m = s / g.size();
        ssb += g.size() * (m - grand) * (m - grand);
        for (double x : g) ssw += (x - m) * (x - m);
    }
    const auto k = groups.size();
    return static_cast<double>((ssb / (k - 1)) / (ssw / (n - k)));
}

/// Pooled-variance two-sample t statistic.
inline double pooled_t(const std::vector<double>& a, const std::vector<double>& b) {
    auto mean = [](const std::vector<double>& v) {
        long double s = 0;
        for (double x : v) s += x;
        return s / v.size();
    };
    const long double ma = mean(a), mb = mean(b);
    long double sa = 0, sb = 0;
    for (double x : a) sa += (x - ma) * (x - ma);
    for (double x : b) sb += (x - mb) * (x - mb);
    const long double sp2 = (sa + sb) / (a.size() + b.size() - 2);
    return static_cast<double>((ma - mb) / std::sqrt(sp2 * (1.0L / a.size() + 1.0L / b.size())));
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// ---- random valid events ---------------------------------------------------

class EventGen {
public:
    explicit EventGen(std::uint64_t seed) : g_(seed) {}

    std::string text(std::size_t max_len, bool allow_space) {
        static const std::vector<std::string> pieces{"a", "b", "z", "Q", "ä", "ß", "é", "ж", "日", "\"", "\\",
                                                     "\t", "/", "-", "{", "😀", "0", "9", "'", "<"};
        std::string s;
        const auto len = pick(max_len + 1);
        for (std::size_t i = 0; i < len; ++i) {
            s += pieces[pick(pieces.size())];
            if (allow_space && pick(5) == 0) s += ' ';
        }
        return s;
    }

    Stem stem() {
        std::string s;
        while (s.empty()) s = text(8, false);
        for (auto& c : s) {
            if (c == '\t') c = 'x';
        }
        return Stem(s);
    }

    TermFixation fixation() {
        TermFixation f;
        f.stem = stem();
        f.first_ms = static_cast<Millis>(pick(1'000'000));
        f.total_ms = 1 + static_cast<Millis>(pick(100'000));
        f.last_ms = std::max(f.first_ms, f.total_ms) + static_cast<Millis>(pick(100'000));
        f.first_aoi = all_aois[pick(all_aois.size())];
        f.first_field = all_fields[pick(all_fields.size())];
        return f;
    }

    SessionEvent event() {
        const std::string sid = "s" + std::to_string(pick(50)) + text(3, false);
        const Millis ts = static_cast<Millis>(pick(10'000'000));
        if (pick(2) == 0) {
            QueryEvent q;
            q.session_id = sid;
            q.ts_ms = ts;
            const auto nt = 1 + pick(4);
            for (std::size_t i = 0; i < nt; ++i) q.raw_terms.push_back(text(12, true));
            std::set<std::string> seen;
            const auto nf = pick(6);
            for (std::size_t i = 0; i < nf; ++i) {
                auto f = fixation();
                if (seen.insert(f.stem.str()).second) q.fixations.push_back(std::move(f));
            }
            return q;
        }
        DocumentClick c;
        c.session_id = sid;
        c.ts_ms = ts;
        c.doc_id = "d" + text(6, false);
        c.title = text(20, true);
        const auto nk = pick(4);
        for (std::size_t i = 0; i < nk; ++i) c.keywords.push_back(text(10, true));
        if (c.title.empty() && c.keywords.empty()) c.keywords.push_back("k");
        return c;
    }

    std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(g_); }

private:
    std::mt19937_64 g_;
};

}  // namespace testing_support
