#pragma once

// Deterministic generator of synthetic session corpora with planted interest
// terms, for calibrating the matching, statistics and extraction stages.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "tmfix/error.hpp"
#include "tmfix/event_model.hpp"
#include "tmfix/textnorm.hpp"

namespace tmfix::sim {

inline constexpr std::string_view rng_id = "mt19937_64+box-muller/v1";

/// Raw bits from std::mt19937_64 (fully specified by the standard); the
/// variates are derived here because std distributions differ by vendor.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : g_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(g_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n), n > 0.
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

    std::int64_t between(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(below(static_cast<std::size_t>(hi - lo + 1)));
    }

    bool bernoulli(double p) { return uniform() < p; }

    double normal() {
        if (spare_) {
            double v = *spare_;
            spare_.reset();
            return v;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(t);
        return r * std::cos(t);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

private:
    std::mt19937_64 g_;
    std::optional<double> spare_;
};

struct IntRange {
    std::int64_t min = 0;
    std::int64_t max = 0;

    double mean() const { return (static_cast<double>(min) + static_cast<double>(max)) / 2.0; }
};

struct SimConfig {
    std::uint64_t seed = 42;
    std::size_t n_sessions = 1000;
    std::size_t vocab_size = 5000;
    std::size_t interest_terms_per_session = 12;
    IntRange queries_per_session{1, 5};
    IntRange terms_per_query{1, 3};
    IntRange clicks_per_session{0, 9};
    std::size_t title_len = 6;
    std::size_t keywords_per_doc = 5;
    double interest_mean_ms = 7060.0;
    double interest_sd_ms = 1000.0;
    double background_mean_ms = 4430.0;
    double background_sd_ms = 1000.0;
    std::size_t fixations_per_session = 36;
    std::map<Aoi, double> aoi_mix{
        {Aoi::result_list, 0.58}, {Aoi::term_recommender, 0.06}, {Aoi::facets, 0.09},
        {Aoi::metadata_view, 0.21}, {Aoi::abstract, 0.03},        {Aoi::references, 0.01},
        {Aoi::citations, 0.01},     {Aoi::similar_entries, 0.01},
    };
    std::map<MetadataField, double> field_mix{
        {MetadataField::title, 0.35},    {MetadataField::person, 0.10},   {MetadataField::source, 0.05},
        {MetadataField::snippet, 0.20},  {MetadataField::category, 0.02}, {MetadataField::keywords, 0.08},
        {MetadataField::none, 0.20},
    };
    double overlap_effect_ms_per_doc = 0.0;
    double query_term_on_topic_prob = 0.7;
    double doc_on_topic_prob = 0.6;
    double ui_term_prob = 0.3;  // chance of one fixated blacklist term
    double compound_prob = 0.0;  // chance per interest term of an extra compound fixation

    std::int64_t background_min() const {
        const auto b = static_cast<std::int64_t>(fixations_per_session - interest_terms_per_session);
        return b - b / 2;
    }
    std::int64_t background_max() const {
        const auto b = static_cast<std::int64_t>(fixations_per_session - interest_terms_per_session);
        return b + b / 2;
    }

    void validate() const {
        auto bad = [](const char* field, const std::string& what) {
            throw Error(ErrorCode::invalid_config, std::string(field) + ": " + what, field);
        };
        if (n_sessions < 1) bad("n_sessions", "must be >= 1");
        if (interest_terms_per_session < 1) bad("interest_terms_per_session", "must be >= 1");
        if (fixations_per_session <= interest_terms_per_session)
            bad("fixations_per_session", "must exceed interest_terms_per_session");
        auto range = [&](const char* field, const IntRange& r, std::int64_t lo) {
            if (r.min < lo || r.max < r.min) bad(field, "need " + std::to_string(lo) + " <= min <= max");
        };
        range("queries_per_session", queries_per_session, 1);
        range("terms_per_query", terms_per_query, 1);
        range("clicks_per_session", clicks_per_session, 0);
        if (title_len < 1) bad("title_len", "must be >= 1");
        auto positive = [&](const char* field, double v) {
            if (!(v > 0.0) || !std::isfinite(v)) bad(field, "must be > 0");
        };
        positive("interest_mean_ms", interest_mean_ms);
        positive("interest_sd_ms", interest_sd_ms);
        positive("background_mean_ms", background_mean_ms);
        positive("background_sd_ms", background_sd_ms);
        auto prob = [&](const char* field, double p) {
            if (!(p >= 0.0 && p <= 1.0)) bad(field, "must be in [0,1]");
        };
        prob("query_term_on_topic_prob", query_term_on_topic_prob);
        prob("doc_on_topic_prob", doc_on_topic_prob);
        prob("ui_term_prob", ui_term_prob);
        prob("compound_prob", compound_prob);
        if (!(overlap_effect_ms_per_doc >= 0.0)) bad("overlap_effect_ms_per_doc", "must be >= 0");
        auto mix = [&](const char* field, const auto& m) {
            double sum = 0.0;
            for (const auto& [k, p] : m) {
                if (!(p >= 0.0)) bad(field, "probabilities must be >= 0");
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-9) bad(field, "probabilities must sum to 1");
        };
        mix("aoi_mix", aoi_mix);
        mix("field_mix", field_mix);
        if (vocab_size < min_vocab()) bad("vocab_size", "must be >= " + std::to_string(min_vocab()));
    }

    static constexpr std::size_t filler_pool = 64;

    std::size_t min_vocab() const {
        return interest_terms_per_session + static_cast<std::size_t>(std::max<std::int64_t>(background_max(), 0)) +
               filler_pool;
    }
};

// ---- config JSON --------------------------------------------------------

namespace detail {

using json = nlohmann::json;

[[noreturn]] inline void config_error(const std::string& field, const std::string& what) {
    throw Error(ErrorCode::invalid_config, field + ": " + what, field);
}

inline double get_real(const json& v, const std::string& field) {
    if (!v.is_number()) config_error(field, "expected number");
    return v.get<double>();
}

inline std::uint64_t get_count(const json& v, const std::string& field) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    config_error(field, "expected non-negative integer");
}

inline IntRange get_range(const json& v, const std::string& field) {
    if (!v.is_object() || !v.contains("min") || !v.contains("max")) config_error(field, "expected {min, max}");
    return {static_cast<std::int64_t>(get_count(v["min"], field + ".min")),
            static_cast<std::int64_t>(get_count(v["max"], field + ".max"))};
}

template <typename Key, typename Parse>
std::map<Key, double> get_mix(const json& v, const std::string& field, Parse parse) {
    if (!v.is_object()) config_error(field, "expected object");
    std::map<Key, double> out;
    for (const auto& [name, p] : v.items()) {
        auto key = parse(name);
        if (!key) config_error(field, "unknown name '" + name + "'");
        out[*key] = get_real(p, field + "." + name);
    }
    return out;
}

}  // namespace detail

/// Fields absent from `j` keep their defaults; unknown fields are rejected.
inline SimConfig config_from_json(const nlohmann::json& j) {
    using namespace detail;
    if (!j.is_object()) config_error("config", "expected object");
    SimConfig c;
    for (const auto& [key, v] : j.items()) {
        if (key == "seed") c.seed = get_count(v, key);
        else if (key == "n_sessions") c.n_sessions = get_count(v, key);
        else if (key == "vocab_size") c.vocab_size = get_count(v, key);
        else if (key == "interest_terms_per_session") c.interest_terms_per_session = get_count(v, key);
        else if (key == "queries_per_session") c.queries_per_session = get_range(v, key);
        else if (key == "terms_per_query") c.terms_per_query = get_range(v, key);
        else if (key == "clicks_per_session") c.clicks_per_session = get_range(v, key);
        else if (key == "title_len") c.title_len = get_count(v, key);
        else if (key == "keywords_per_doc") c.keywords_per_doc = get_count(v, key);
        else if (key == "interest_mean_ms") c.interest_mean_ms = get_real(v, key);
        else if (key == "interest_sd_ms") c.interest_sd_ms = get_real(v, key);
        else if (key == "background_mean_ms") c.background_mean_ms = get_real(v, key);
        else if (key == "background_sd_ms") c.background_sd_ms = get_real(v, key);
        else if (key == "fixations_per_session") c.fixations_per_session = get_count(v, key);
        else if (key == "aoi_mix") c.aoi_mix = get_mix<Aoi>(v, key, parse_aoi);
        else if (key == "field_mix") c.field_mix = get_mix<MetadataField>(v, key, parse_field);
        else if (key == "overlap_effect_ms_per_doc") c.overlap_effect_ms_per_doc = get_real(v, key);
        else if (key == "query_term_on_topic_prob") c.query_term_on_topic_prob = get_real(v, key);
        else if (key == "doc_on_topic_prob") c.doc_on_topic_prob = get_real(v, key);
        else if (key == "ui_term_prob") c.ui_term_prob = get_real(v, key);
        else if (key == "compound_prob") c.compound_prob = get_real(v, key);
        else config_error(key, "unknown field");
    }
    c.validate();
    return c;
}

inline nlohmann::ordered_json config_to_json(const SimConfig& c) {
    nlohmann::ordered_json j;
    j["seed"] = c.seed;
    j["n_sessions"] = c.n_sessions;
    j["vocab_size"] = c.vocab_size;
    j["interest_terms_per_session"] = c.interest_terms_per_session;
    auto range = [](const IntRange& r) { return nlohmann::ordered_json{{"min", r.min}, {"max", r.max}}; };
    j["queries_per_session"] = range(c.queries_per_session);
    j["terms_per_query"] = range(c.terms_per_query);
    j["clicks_per_session"] = range(c.clicks_per_session);
    j["title_len"] = c.title_len;
    j["keywords_per_doc"] = c.keywords_per_doc;
    j["interest_mean_ms"] = c.interest_mean_ms;
    j["interest_sd_ms"] = c.interest_sd_ms;
    j["background_mean_ms"] = c.background_mean_ms;
    j["background_sd_ms"] = c.background_sd_ms;
    j["fixations_per_session"] = c.fixations_per_session;
    nlohmann::ordered_json aoi;
    for (const auto& [k, p] : c.aoi_mix) aoi[std::string(to_string(k))] = p;
    j["aoi_mix"] = aoi;
    nlohmann::ordered_json field;
    for (const auto& [k, p] : c.field_mix) field[std::string(to_string(k))] = p;
    j["field_mix"] = field;
    j["overlap_effect_ms_per_doc"] = c.overlap_effect_ms_per_doc;
    j["query_term_on_topic_prob"] = c.query_term_on_topic_prob;
    j["doc_on_topic_prob"] = c.doc_on_topic_prob;
    j["ui_term_prob"] = c.ui_term_prob;
    j["compound_prob"] = c.compound_prob;
    return j;
}

// ---- generation -----------------------------------------------------------

struct SessionTruth {
    std::set<Stem> interest;
    std::map<std::string, std::set<Stem>> documents;  // doc_id -> topical keyword stems
};

struct GroundTruth {
    std::map<std::string, SessionTruth> sessions;
};

struct SimOutput {
    std::vector<SessionEvent> events;
    GroundTruth truth;
};

namespace detail {

inline constexpr std::string_view consonants = "bdfgklmnprtvz";
inline constexpr std::string_view vowels = "aiou";
inline constexpr std::size_t word_len = 7;

/// Random CVCVCVC words that normalize to themselves. Equal length keeps any
/// two distinct words from containing each other.
inline std::vector<std::string> vocabulary(Rng& rng, std::size_t n, const textnorm::NormalizationConfig& cfg) {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    std::size_t attempts = 0;
    while (out.size() < n) {
        if (++attempts > n * 100) throw Error(ErrorCode::invalid_config, "cannot build vocabulary", "vocab_size");
        std::string w;
        for (std::size_t i = 0; i < word_len; ++i) {
            const auto& set = (i % 2 == 0) ? consonants : vowels;
            w += set[rng.below(set.size())];
        }
        if (seen.contains(w)) continue;
        seen.insert(w);
        auto s = textnorm::normalize_term(w, cfg, true);
        if (!s || s->str() != w || cfg.blacklist.contains(*s)) continue;
        out.push_back(std::move(w));
    }
    return out;
}

template <typename Key>
Key categorical(Rng& rng, const std::map<Key, double>& mix) {
    const double u = rng.uniform();
    double acc = 0.0;
    Key last = mix.begin()->first;
    for (const auto& [k, p] : mix) {
        if (p <= 0.0) continue;
        acc += p;
        last = k;
        if (u < acc) return k;
    }
    return last;
}

inline std::string surface(Rng& rng, const std::string& w) {
    std::string s = w;
    if (rng.bernoulli(0.5)) s[0] = static_cast<char>(s[0] - 'a' + 'A');
    return s;
}

inline constexpr std::array<std::string_view, 6> glue_words{"und", "der", "die", "the", "of", "and"};

struct PlannedFixation {
    std::string stem;
    Millis total = 0;
    Millis first = 0;
    Millis last = 0;
    Aoi aoi = Aoi::result_list;
    MetadataField field = MetadataField::none;
};

/// The client's cumulative aggregate at time t: terms first fixated before t,
/// with totals grown in proportion to elapsed fixation span.
inline std::vector<TermFixation> snapshot_at(const std::vector<PlannedFixation>& plan, Millis t) {
    std::vector<TermFixation> out;
    for (const auto& p : plan) {
        if (p.first >= t) continue;
        TermFixation f;
        f.stem = Stem(p.stem);
        f.first_ms = p.first;
        f.first_aoi = p.aoi;
        f.first_field = p.field;
        if (t >= p.last) {
            f.total_ms = p.total;
            f.last_ms = p.last;
        } else {
            const double frac = static_cast<double>(t - p.first) / static_cast<double>(p.last - p.first);
            f.total_ms = std::max<Millis>(1, static_cast<Millis>(std::floor(static_cast<double>(p.total) * frac)));
            f.last_ms = t;
        }
        out.push_back(std::move(f));
    }
    std::sort(out.begin(), out.end(), [](const TermFixation& a, const TermFixation& b) { return a.stem < b.stem; });
    return out;
}

}  // namespace detail

inline std::string session_id_for(std::uint64_t seed, std::size_t index) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "sim-%llx-%06zu", static_cast<unsigned long long>(seed), index + 1);
    return buf;
}

inline SimOutput generate(const SimConfig& cfg, const textnorm::NormalizationConfig& ncfg) {
    using namespace detail;
    cfg.validate();
    Rng rng(cfg.seed);
    const auto vocab = vocabulary(rng, cfg.vocab_size, ncfg);
    const std::vector<Stem> ui_terms(ncfg.blacklist.begin(), ncfg.blacklist.end());

    SimOutput out;
    for (std::size_t si = 0; si < cfg.n_sessions; ++si) {
        const std::string sid = session_id_for(cfg.seed, si);
        const auto n_bg = static_cast<std::size_t>(rng.between(cfg.background_min(), cfg.background_max()));
        const std::size_t n_int = cfg.interest_terms_per_session;

        // disjoint draws: interest, background, filler
        std::vector<std::size_t> picks;
        std::set<std::size_t> used;
        const std::size_t need = n_int + n_bg + SimConfig::filler_pool;
        while (picks.size() < need) {
            auto i = rng.below(vocab.size());
            if (used.insert(i).second) picks.push_back(i);
        }
        std::vector<std::string> interest, background, filler;
        for (std::size_t i = 0; i < picks.size(); ++i) {
            const auto& w = vocab[picks[i]];
            (i < n_int ? interest : i < n_int + n_bg ? background : filler).push_back(w);
        }
        auto pick = [&](const std::vector<std::string>& v) -> const std::string& { return v[rng.below(v.size())]; };

        // queries
        const auto n_q = static_cast<std::size_t>(rng.between(cfg.queries_per_session.min, cfg.queries_per_session.max));
        std::vector<std::vector<std::string>> query_terms(n_q);
        std::set<std::string> mentioned;
        std::vector<std::size_t> on_topic_queries;
        for (std::size_t q = 0; q < n_q; ++q) {
            const auto n_t = rng.between(cfg.terms_per_query.min, cfg.terms_per_query.max);
            bool on_topic = false;
            for (std::int64_t t = 0; t < n_t; ++t) {
                if (t > 0 && rng.bernoulli(0.2)) query_terms[q].emplace_back(glue_words[rng.below(glue_words.size())]);
                if (rng.bernoulli(cfg.query_term_on_topic_prob)) {
                    const auto& w = pick(interest);
                    mentioned.insert(w);
                    on_topic = true;
                    query_terms[q].push_back(surface(rng, w));
                } else {
                    query_terms[q].push_back(surface(rng, pick(filler)));
                }
            }
            if (on_topic) on_topic_queries.push_back(q);
        }

        // clicked documents
        struct Doc {
            std::string id;
            std::vector<std::string> title;
            std::vector<std::string> keywords;
            std::set<std::string> topical;  // single-word interest keywords
            bool relevant = false;
        };
        const auto n_c = static_cast<std::size_t>(rng.between(cfg.clicks_per_session.min, cfg.clicks_per_session.max));
        std::vector<Doc> docs(n_c);
        std::vector<std::size_t> relevant_docs;
        const auto tl = static_cast<std::int64_t>(cfg.title_len);
        const auto kl = static_cast<std::int64_t>(cfg.keywords_per_doc);
        for (std::size_t d = 0; d < n_c; ++d) {
            Doc& doc = docs[d];
            char buf[32];
            std::snprintf(buf, sizeof buf, "doc-%06zu-%02zu", si + 1, d + 1);
            doc.id = buf;
            doc.relevant = rng.bernoulli(cfg.doc_on_topic_prob);
            const auto len = rng.between(std::max<std::int64_t>(1, tl - 2), tl + 2);
            std::int64_t n_topic = doc.relevant ? rng.between(1, std::min<std::int64_t>(3, len)) : 0;
            for (std::int64_t i = 0; i < len; ++i) {
                if (i < n_topic) {
                    const auto& w = pick(interest);
                    mentioned.insert(w);
                    doc.title.push_back(surface(rng, w));
                } else {
                    doc.title.push_back(surface(rng, pick(filler)));
                }
            }
            rng.shuffle(doc.title);
            if (len > 1 && rng.bernoulli(0.5))
                doc.title.insert(doc.title.begin() + 1, std::string(glue_words[rng.below(glue_words.size())]));
            const auto n_kw = rng.between(std::max<std::int64_t>(0, kl - 2), kl + 2);
            for (std::int64_t i = 0; i < n_kw; ++i) {
                if (doc.relevant && rng.bernoulli(0.75)) {
                    const auto& w = pick(interest);
                    mentioned.insert(w);
                    doc.topical.insert(w);
                    if (rng.bernoulli(0.2)) {
                        doc.keywords.push_back(std::string(glue_words[rng.below(3)]) + " " + surface(rng, w));
                    } else {
                        doc.keywords.push_back(surface(rng, w));
                    }
                } else if (rng.bernoulli(0.2)) {
                    doc.keywords.push_back(surface(rng, pick(filler)) + " " + surface(rng, pick(filler)));
                } else {
                    doc.keywords.push_back(surface(rng, pick(filler)));
                }
            }
            if (doc.relevant) relevant_docs.push_back(d);
        }

        // every interest term gets a needle when the session has any topic
        for (const auto& w : interest) {
            if (mentioned.contains(w)) continue;
            if (!relevant_docs.empty()) {
                Doc& doc = docs[relevant_docs[rng.below(relevant_docs.size())]];
                doc.keywords.push_back(surface(rng, w));
                doc.topical.insert(w);
            } else if (!on_topic_queries.empty()) {
                query_terms[on_topic_queries[rng.below(on_topic_queries.size())]].push_back(surface(rng, w));
            }
        }

        // fixations
        const Millis session_len = rng.between(10 * 60 * 1000, 120 * 60 * 1000);
        auto draw_ms = [&](double mean, double sd) {
            return std::max<Millis>(1, static_cast<Millis>(std::llround(mean + sd * rng.normal())));
        };
        std::vector<PlannedFixation> plan;
        auto plan_fixation = [&](const std::string& stem, Millis total) {
            PlannedFixation p;
            p.stem = stem;
            p.total = total;
            p.first = rng.between(1, session_len - total - 1);
            p.last = rng.between(p.first + total, session_len);
            p.aoi = categorical(rng, cfg.aoi_mix);
            p.field = categorical(rng, cfg.field_mix);
            plan.push_back(std::move(p));
        };
        for (const auto& w : interest) {
            std::size_t m = 0;
            for (const auto& d : docs) m += d.topical.contains(w) ? 1 : 0;
            const double bonus = m >= 2 ? static_cast<double>(m - 1) * cfg.overlap_effect_ms_per_doc : 0.0;
            plan_fixation(w, draw_ms(cfg.interest_mean_ms + bonus, cfg.interest_sd_ms));
            if (rng.bernoulli(cfg.compound_prob)) {
                std::string prefix;
                prefix += consonants[rng.below(consonants.size())];
                prefix += vowels[rng.below(vowels.size())];
                plan_fixation(prefix + w, draw_ms(cfg.interest_mean_ms, cfg.interest_sd_ms));
            }
        }
        for (const auto& w : background) plan_fixation(w, draw_ms(cfg.background_mean_ms, cfg.background_sd_ms));
        if (!ui_terms.empty() && rng.bernoulli(cfg.ui_term_prob))
            plan_fixation(ui_terms[rng.below(ui_terms.size())].str(), draw_ms(cfg.background_mean_ms, cfg.background_sd_ms));
        // a compound may coincide with a planned stem; keep the first
        {
            std::set<std::string> seen;
            std::erase_if(plan, [&](const PlannedFixation& p) { return !seen.insert(p.stem).second; });
        }

        // event times: last query closes the session
        std::vector<Millis> q_ts;
        for (std::size_t q = 0; q + 1 < n_q; ++q) q_ts.push_back(rng.between(0, session_len - 1));
        std::sort(q_ts.begin(), q_ts.end());
        q_ts.push_back(session_len);
        std::vector<SessionEvent> events;
        for (std::size_t q = 0; q < n_q; ++q) {
            QueryEvent e;
            e.session_id = sid;
            e.ts_ms = q_ts[q];
            e.raw_terms = query_terms[q];
            e.fixations = snapshot_at(plan, q_ts[q]);
            events.emplace_back(std::move(e));
        }
        SessionTruth truth;
        for (const auto& w : interest) truth.interest.insert(Stem(w));
        for (auto& doc : docs) {
            DocumentClick c;
            c.session_id = sid;
            c.ts_ms = rng.between(0, session_len - 1);
            c.doc_id = doc.id;
            for (std::size_t i = 0; i < doc.title.size(); ++i) {
                if (i) c.title += ' ';
                c.title += doc.title[i];
            }
            c.keywords = doc.keywords;
            auto& kw = truth.documents[doc.id];
            for (const auto& w : doc.topical) kw.insert(Stem(w));
            events.emplace_back(std::move(c));
        }
        std::stable_sort(events.begin(), events.end(),
                         [](const SessionEvent& a, const SessionEvent& b) { return ts_of(a) < ts_of(b); });
        for (auto& e : events) out.events.push_back(std::move(e));
        out.truth.sessions.emplace(sid, std::move(truth));
    }
    return out;
}

inline std::string log_header(const SimConfig& cfg) {
    return "# tmfix simulator rng=" + std::string(rng_id) + " seed=" + std::to_string(cfg.seed) +
           " sessions=" + std::to_string(cfg.n_sessions);
}

inline void write_log(std::ostream& os, const SimConfig& cfg, const SimOutput& out) {
    os << log_header(cfg) << '\n';
    for (const auto& e : out.events) os << encode_event(e) << '\n';
}

inline nlohmann::ordered_json truth_to_json(const SimConfig& cfg, const GroundTruth& t) {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["rng"] = std::string(rng_id);
    j["seed"] = cfg.seed;
    nlohmann::ordered_json sessions = nlohmann::ordered_json::object();
    for (const auto& [id, st] : t.sessions) {
        nlohmann::ordered_json s;
        auto interest = nlohmann::ordered_json::array();
        for (const auto& w : st.interest) interest.push_back(w.str());
        s["interest_stems"] = std::move(interest);
        nlohmann::ordered_json docs = nlohmann::ordered_json::object();
        for (const auto& [doc, kws] : st.documents) {
            auto arr = nlohmann::ordered_json::array();
            for (const auto& w : kws) arr.push_back(w.str());
            docs[doc] = std::move(arr);
        }
        s["documents"] = std::move(docs);
        sessions[id] = std::move(s);
    }
    j["sessions"] = std::move(sessions);
    return j;
}

/// Reads the per-session interest stems from a truth document. Accepts both
/// {"sessions": {id: {"interest_stems": [...]}}} and {"sessions": {id: [...]}}.
inline std::map<std::string, std::set<Stem>> interest_truth_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("sessions") || !j["sessions"].is_object())
        throw Error(ErrorCode::invalid_config, "truth: expected object with 'sessions'", "sessions");
    std::map<std::string, std::set<Stem>> out;
    for (const auto& [id, v] : j["sessions"].items()) {
        const auto& list = v.is_object() ? v.value("interest_stems", nlohmann::json::array()) : v;
        if (!list.is_array()) throw Error(ErrorCode::invalid_config, "truth: bad entry for " + id, "sessions");
        auto& set = out[id];
        for (const auto& s : list) {
            if (!s.is_string()) throw Error(ErrorCode::invalid_config, "truth: stems must be strings", "sessions");
            set.insert(Stem(s.get<std::string>()));
        }
    }
    return out;
}

// ---- closed-form expectations --------------------------------------------

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

struct Expectations {
    double pct_sessions_with_any_found = 0.0;
    double found_mean_ms = 0.0;
    double other_mean_ms = 0.0;
    double threshold_ms = 0.0;
    double interest_miss_rate = 0.0;       // interest term below threshold
    double background_false_rate = 0.0;    // background term at or above threshold
    double expected_recall = 0.0;
};

/// Expectations under the generator's distributions. A session has found
/// terms iff some query term or some clicked document is on topic.
inline Expectations analytic_expectations(const SimConfig& cfg, std::optional<double> threshold_ms = std::nullopt) {
    cfg.validate();
    Expectations e;
    const double q_off = 1.0 - cfg.query_term_on_topic_prob;
    const double d_off = 1.0 - cfg.doc_on_topic_prob;

    // E[q_off^T] for T terms in one query, uniform count
    double per_query = 0.0;
    for (auto t = cfg.terms_per_query.min; t <= cfg.terms_per_query.max; ++t)
        per_query += std::pow(q_off, static_cast<double>(t));
    per_query /= static_cast<double>(cfg.terms_per_query.max - cfg.terms_per_query.min + 1);
    double none_q = 0.0;
    for (auto q = cfg.queries_per_session.min; q <= cfg.queries_per_session.max; ++q)
        none_q += std::pow(per_query, static_cast<double>(q));
    none_q /= static_cast<double>(cfg.queries_per_session.max - cfg.queries_per_session.min + 1);
    double none_c = 0.0;
    for (auto c = cfg.clicks_per_session.min; c <= cfg.clicks_per_session.max; ++c)
        none_c += std::pow(d_off, static_cast<double>(c));
    none_c /= static_cast<double>(cfg.clicks_per_session.max - cfg.clicks_per_session.min + 1);
    e.pct_sessions_with_any_found = 100.0 * (1.0 - none_q * none_c);

    e.found_mean_ms = cfg.interest_mean_ms;
    e.other_mean_ms = cfg.background_mean_ms;
    e.threshold_ms = threshold_ms.value_or((cfg.interest_mean_ms + cfg.background_mean_ms) / 2.0);
    e.interest_miss_rate = normal_cdf((e.threshold_ms - cfg.interest_mean_ms) / cfg.interest_sd_ms);
    e.background_false_rate = 1.0 - normal_cdf((e.threshold_ms - cfg.background_mean_ms) / cfg.background_sd_ms);
    e.expected_recall = 1.0 - e.interest_miss_rate;
    return e;
}

}  // namespace tmfix::sim
