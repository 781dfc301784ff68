#pragma once

// Corpus-level statistics: found/other timing comparisons per match kind,
// found rates, first-fixation distributions, keyword-overlap timings, and
// their JSON and table renderings.

#include <cmath>
#include <cstddef>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "tmfix/error.hpp"
#include "tmfix/event_model.hpp"
#include "tmfix/matching.hpp"
#include "tmfix/session_store.hpp"
#include "tmfix/stats/anova.hpp"

namespace tmfix::stats {

using ojson = nlohmann::ordered_json;

inline constexpr int schema_version = 1;

/// Rounds to 6 decimals so serialized reals do not depend on the last bits
/// of libm results.
inline double round6(double x) {
    if (!std::isfinite(x)) return x;
    const double r = std::round(x * 1e6) / 1e6;
    return r == 0.0 ? 0.0 : r;
}

inline ojson real(double x) {
    if (!std::isfinite(x)) return nullptr;
    return round6(x);
}

inline ojson real(const std::optional<double>& x) { return x ? real(*x) : ojson(nullptr); }

struct GroupTiming {
    std::string label;
    std::size_t n = 0;
    double mean_ms = 0.0;
    std::vector<Millis> observations;
};

inline GroupTiming make_group(std::string label, std::vector<Millis> obs) {
    GroupTiming g;
    g.label = std::move(label);
    g.n = obs.size();
    double sum = 0.0;
    for (auto x : obs) sum += static_cast<double>(x);
    g.mean_ms = obs.empty() ? 0.0 : sum / static_cast<double>(obs.size());
    g.observations = std::move(obs);
    return g;
}

struct TimingComparison {
    GroupTiming found;
    GroupTiming other;
    std::optional<AnovaResult> anova;
    std::optional<ErrorCode> anova_error;  // set iff anova is empty
};

/// Found versus other at the term level. ANOVA failures caused by empty or
/// too-small groups become InsufficientData instead of propagating.
inline TimingComparison compare_groups(std::vector<Millis> found, std::vector<Millis> other, double alpha = 0.01) {
    TimingComparison t;
    t.found = make_group("found", std::move(found));
    t.other = make_group("other", std::move(other));
    if (t.found.n == 0 || t.other.n == 0 || t.found.n + t.other.n <= 2) {
        t.anova_error = ErrorCode::insufficient_data;
        return t;
    }
    std::vector<std::vector<Millis>> groups{t.found.observations, t.other.observations};
    t.anova = anova_one_way(groups, alpha);
    return t;
}

/// Splits `fixations` (already blacklist-cleaned) into found and other.
inline TimingComparison timing_comparison(const std::set<Stem>& found, const std::vector<const TermFixation*>& fixations,
                                          double alpha = 0.01) {
    std::vector<Millis> f;
    std::vector<Millis> o;
    for (const auto* x : fixations) (found.contains(x->stem) ? f : o).push_back(x->total_ms);
    return compare_groups(std::move(f), std::move(o), alpha);
}

inline std::vector<const TermFixation*> cleaned_fixations(const Session& s, const textnorm::NormalizationConfig& cfg) {
    std::vector<const TermFixation*> out;
    for (const auto& [stem, f] : s.fixations) {
        if (!cfg.blacklist.contains(stem)) out.push_back(&f);
    }
    return out;
}

/// Per-kind found rates and timing. A session is considered for a kind when
/// it carries at least one needle of that kind.
struct KindStats {
    std::size_t sessions_considered = 0;
    std::size_t needles_searched = 0;
    std::size_t needles_found = 0;
    std::optional<double> pct_needles_found;               // term-weighted
    std::optional<double> pct_needles_found_session_mean;  // session-weighted
    std::optional<double> pct_sessions_with_any_found;
    TimingComparison timing;
    // title_term and keyword only
    std::size_t documents = 0;
    std::optional<double> pct_documents_with_any_found;
    std::optional<double> mean_needles_per_document;
    std::optional<double> mean_found_per_document;
};

struct CombinedStats {
    double pct_sessions_with_any_found = 0.0;
    std::optional<double> mean_found_terms_per_session;  // over sessions with any found
    double mean_found_terms_all_sessions = 0.0;
    TimingComparison timing;
};

using OverlapTiming = std::map<std::size_t, std::optional<TimingComparison>>;

inline constexpr std::size_t overlap_min_docs = 2;
inline constexpr std::size_t overlap_max_docs = 5;

/// Fixations hit by found keywords, bucketed by how many distinct clicked
/// documents of the session share the keyword (largest count wins when
/// several found keywords hit one fixation). Each bucket's other group holds
/// the fixations not hit by any found keyword, from the sessions that
/// contribute to that bucket. Empty buckets are nullopt.
inline OverlapTiming overlap_timing(const Corpus& c, const textnorm::NormalizationConfig& cfg, double alpha = 0.01) {
    std::map<std::size_t, std::vector<Millis>> found;
    std::map<std::size_t, std::vector<Millis>> other;
    for (const auto& s : c.sessions) {
        SessionMatcher m(s, cfg);
        std::map<Stem, std::size_t> bucket;  // 0 = hit by a found keyword outside 2..5
        for (const auto& [tokens, count] : keyword_overlap(s, cfg)) {
            NormalizedKeyword kw{{}, tokens};
            if (!m.keyword_found(kw)) continue;
            for (const auto& t : tokens) {
                for (const Stem* f : m.index().containing(t.view())) {
                    auto& b = bucket[*f];
                    b = std::max(b, count);
                }
            }
        }
        std::set<std::size_t> contributes;
        for (const auto& [stem, k] : bucket) {
            if (k < overlap_min_docs || k > overlap_max_docs) continue;
            found[k].push_back(s.fixations.at(stem).total_ms);
            contributes.insert(k);
        }
        for (auto k : contributes) {
            for (const auto* f : cleaned_fixations(s, cfg)) {
                if (!bucket.contains(f->stem)) other[k].push_back(f->total_ms);
            }
        }
    }
    OverlapTiming out;
    for (std::size_t k = overlap_min_docs; k <= overlap_max_docs; ++k) {
        if (found[k].empty()) {
            out[k] = std::nullopt;
        } else {
            out[k] = compare_groups(std::move(found[k]), std::move(other[k]), alpha);
        }
    }
    return out;
}

struct CorpusReport {
    CorpusCounts counts;
    double alpha = 0.01;
    double mean_session_duration_ms = 0.0;
    double mean_fixated_terms_per_session = 0.0;
    std::size_t fixations_total = 0;
    std::optional<FirstFixationDistribution> first_fixation;
    std::optional<FirstFixationDistribution> found_source_search;
    std::optional<FirstFixationDistribution> found_source_combined;
    std::map<MatchKind, KindStats> kinds;
    CombinedStats combined;
    OverlapTiming overlap;
    std::vector<MatchReport> reports;  // combined, one per session, corpus order
};

inline double pct(std::size_t num, std::size_t den) {
    return 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

inline std::optional<double> pct_opt(std::size_t num, std::size_t den) {
    if (den == 0) return std::nullopt;
    return pct(num, den);
}

inline CorpusReport corpus_report(const Corpus& c, const textnorm::NormalizationConfig& cfg, double alpha = 0.01) {
    if (c.sessions.empty()) throw Error(ErrorCode::empty_corpus, "corpus has no sessions");
    CorpusReport r;
    r.counts = c.counts;
    r.alpha = alpha;

    struct KindAcc {
        std::size_t sessions = 0, searched = 0, found = 0, sessions_any = 0;
        double session_rate_sum = 0.0;
        std::vector<Millis> found_obs, other_obs;
        std::size_t docs = 0, docs_any = 0, doc_total = 0, doc_found = 0;
    };
    std::map<MatchKind, KindAcc> acc;
    std::vector<Millis> comb_found, comb_other;
    std::size_t sessions_any = 0, found_terms_sum = 0;
    double duration_sum = 0.0;
    std::vector<const TermFixation*> search_found_fx;

    for (const auto& s : c.sessions) {
        duration_sum += static_cast<double>(s.duration_ms());
        r.fixations_total += s.fixations.size();
        SessionMatcher m(s, cfg);
        MatchReport rep = m.report(true, true);
        const auto fx = cleaned_fixations(s, cfg);

        for (MatchKind k : all_match_kinds) {
            const auto counts = rep.per_kind.at(k);
            if (counts.searched == 0) continue;
            auto& a = acc[k];
            ++a.sessions;
            a.searched += counts.searched;
            a.found += counts.found;
            a.session_rate_sum += pct(counts.found, counts.searched);
            const auto hit = rep.found_by(k);
            if (!hit.empty()) ++a.sessions_any;
            for (const auto* f : fx) (hit.contains(f->stem) ? a.found_obs : a.other_obs).push_back(f->total_ms);
            if (k == MatchKind::search_term) {
                for (const auto* f : fx) {
                    if (hit.contains(f->stem)) search_found_fx.push_back(f);
                }
            }
        }
        for (const auto& d : s.clicks) {
            const auto dm = m.match_document(d, nullptr);
            auto& t = acc[MatchKind::title_term];
            auto& kw = acc[MatchKind::keyword];
            ++t.docs;
            ++kw.docs;
            t.doc_total += dm.title_terms_total;
            t.doc_found += dm.title_terms_found;
            kw.doc_total += dm.keywords_total;
            kw.doc_found += dm.keywords_found;
            if (dm.title_terms_found > 0) ++t.docs_any;
            if (dm.keywords_found > 0) ++kw.docs_any;
        }

        if (!rep.found.empty()) {
            ++sessions_any;
            found_terms_sum += rep.found.size();
        }
        for (const auto* f : fx) (rep.found.contains(f->stem) ? comb_found : comb_other).push_back(f->total_ms);
        r.reports.push_back(std::move(rep));
    }

    const auto n = c.sessions.size();
    r.mean_session_duration_ms = duration_sum / static_cast<double>(n);
    r.mean_fixated_terms_per_session = static_cast<double>(r.fixations_total) / static_cast<double>(n);

    if (r.fixations_total > 0) r.first_fixation = first_fixation_distribution(c);
    if (!search_found_fx.empty()) r.found_source_search = detail::tally(search_found_fx);
    if (sessions_any > 0) r.found_source_combined = found_source_distribution(r.reports, c);

    for (MatchKind k : all_match_kinds) {
        auto& a = acc[k];
        KindStats ks;
        ks.sessions_considered = a.sessions;
        ks.needles_searched = a.searched;
        ks.needles_found = a.found;
        ks.pct_needles_found = pct_opt(a.found, a.searched);
        if (a.sessions > 0) ks.pct_needles_found_session_mean = a.session_rate_sum / static_cast<double>(a.sessions);
        ks.pct_sessions_with_any_found = pct_opt(a.sessions_any, a.sessions);
        ks.timing = compare_groups(std::move(a.found_obs), std::move(a.other_obs), alpha);
        ks.documents = a.docs;
        if (k != MatchKind::search_term && a.docs > 0) {
            const auto d = static_cast<double>(a.docs);
            ks.pct_documents_with_any_found = pct(a.docs_any, a.docs);
            ks.mean_needles_per_document = static_cast<double>(a.doc_total) / d;
            ks.mean_found_per_document = static_cast<double>(a.doc_found) / d;
        }
        r.kinds[k] = std::move(ks);
    }

    r.combined.pct_sessions_with_any_found = pct(sessions_any, n);
    if (sessions_any > 0)
        r.combined.mean_found_terms_per_session =
            static_cast<double>(found_terms_sum) / static_cast<double>(sessions_any);
    r.combined.mean_found_terms_all_sessions = static_cast<double>(found_terms_sum) / static_cast<double>(n);
    r.combined.timing = compare_groups(std::move(comb_found), std::move(comb_other), alpha);

    r.overlap = overlap_timing(c, cfg, alpha);
    return r;
}

// ---- JSON -------------------------------------------------------------

inline ojson to_json(const AnovaResult& a) {
    ojson j;
    j["f_stat"] = real(a.f_stat);
    j["df_between"] = a.df_between;
    j["df_within"] = a.df_within;
    j["alpha"] = real(a.alpha);
    j["critical_value"] = real(a.critical_value);
    j["p_value"] = real(a.p_value);
    j["significant"] = a.significant;
    j["status"] = std::string(to_string(a.status));
    return j;
}

inline ojson to_json(const GroupTiming& g) {
    ojson j;
    j["label"] = g.label;
    j["n"] = g.n;
    j["mean_ms"] = g.n ? real(g.mean_ms) : ojson(nullptr);
    return j;
}

inline ojson to_json(const TimingComparison& t) {
    ojson j;
    j["found"] = to_json(t.found);
    j["other"] = to_json(t.other);
    if (t.anova) {
        j["anova"] = to_json(*t.anova);
    } else {
        j["anova"] = ojson{{"error", std::string(error_name(t.anova_error.value_or(ErrorCode::insufficient_data)))}};
    }
    return j;
}

template <typename Key>
ojson to_json(const Distribution<Key>& d) {
    ojson fr;
    for (const auto& [k, v] : d.fractions) fr[std::string(to_string(k))] = real(v);
    return ojson{{"n", d.n}, {"fractions", fr}};
}

inline ojson to_json(const std::optional<FirstFixationDistribution>& d) {
    if (!d) return ojson{{"error", std::string(error_name(ErrorCode::empty_input))}};
    return ojson{{"aoi", to_json(d->aoi)}, {"field", to_json(d->field)}};
}

inline ojson to_json(const KindStats& k, MatchKind kind) {
    ojson j;
    j["sessions_considered"] = k.sessions_considered;
    j["needles_searched"] = k.needles_searched;
    j["needles_found"] = k.needles_found;
    j["pct_needles_found"] = real(k.pct_needles_found);
    j["pct_needles_found_session_mean"] = real(k.pct_needles_found_session_mean);
    j["pct_sessions_with_any_found"] = real(k.pct_sessions_with_any_found);
    if (kind != MatchKind::search_term) {
        j["documents"] = k.documents;
        j["pct_documents_with_any_found"] = real(k.pct_documents_with_any_found);
        j["mean_needles_per_document"] = real(k.mean_needles_per_document);
        j["mean_found_per_document"] = real(k.mean_found_per_document);
    }
    j["timing"] = to_json(k.timing);
    return j;
}

inline ojson to_json(const CorpusReport& r) {
    ojson j;
    j["schema_version"] = schema_version;
    j["counts"] = ojson{{"sessions", r.counts.sessions}, {"searches", r.counts.searches}, {"clicks", r.counts.clicks}};
    j["alpha"] = real(r.alpha);
    j["mean_session_duration_ms"] = real(r.mean_session_duration_ms);
    j["fixations_total"] = r.fixations_total;
    j["mean_fixated_terms_per_session"] = real(r.mean_fixated_terms_per_session);
    j["first_fixation"] = to_json(r.first_fixation);
    ojson kinds;
    for (MatchKind k : all_match_kinds) {
        auto kj = to_json(r.kinds.at(k), k);
        if (k == MatchKind::search_term) kj["found_source"] = to_json(r.found_source_search);
        kinds[std::string(to_string(k))] = std::move(kj);
    }
    j["kinds"] = std::move(kinds);
    ojson comb;
    comb["pct_sessions_with_any_found"] = real(r.combined.pct_sessions_with_any_found);
    comb["mean_found_terms_per_session"] = real(r.combined.mean_found_terms_per_session);
    comb["mean_found_terms_all_sessions"] = real(r.combined.mean_found_terms_all_sessions);
    comb["found_source"] = to_json(r.found_source_combined);
    comb["timing"] = to_json(r.combined.timing);
    j["combined"] = std::move(comb);
    ojson ov;
    for (const auto& [k, t] : r.overlap) {
        ov[std::to_string(k)] = t ? to_json(*t) : ojson{{"empty", true}};
    }
    j["overlap_timing"] = std::move(ov);
    return j;
}

/// Canonical serialized form: 2-space indent, trailing newline.
inline std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

// ---- human table ------------------------------------------------------

namespace detail {

inline std::string secs(double ms) {
    std::ostringstream o;
    o << std::fixed << std::setprecision(2) << ms / 1000.0 << " s";
    return o.str();
}

inline std::string percent(const std::optional<double>& p) {
    if (!p) return "n/a";
    std::ostringstream o;
    o << std::fixed << std::setprecision(2) << *p << "%";
    return o.str();
}

inline std::string timing_line(const TimingComparison& t) {
    std::ostringstream o;
    o << "found " << (t.found.n ? secs(t.found.mean_ms) : "n/a") << " (n=" << t.found.n << ")  other "
      << (t.other.n ? secs(t.other.mean_ms) : "n/a") << " (n=" << t.other.n << ")  ";
    if (t.anova) {
        o << "F(" << t.anova->df_between << "," << t.anova->df_within << ")=";
        if (std::isinf(t.anova->f_stat)) {
            o << "inf";
        } else {
            o << std::fixed << std::setprecision(2) << t.anova->f_stat;
        }
        o << (t.anova->significant ? " significant" : " not significant") << " at alpha=" << std::defaultfloat
          << t.anova->alpha;
    } else {
        o << "ANOVA: " << error_name(t.anova_error.value_or(ErrorCode::insufficient_data));
    }
    return o.str();
}

template <typename Key>
void distribution_lines(std::ostringstream& o, const Distribution<Key>& d) {
    for (const auto& [k, v] : d.fractions) {
        o << "    " << std::left << std::setw(18) << to_string(k) << std::right << percent(100.0 * v) << "\n";
    }
}

}  // namespace detail

inline std::string to_table(const CorpusReport& r) {
    using detail::percent;
    using detail::secs;
    std::ostringstream o;
    o << "sessions " << r.counts.sessions << ", searches " << r.counts.searches << ", clicks " << r.counts.clicks
      << "\n";
    o << "mean session duration " << secs(r.mean_session_duration_ms) << ", mean fixated terms per session "
      << std::fixed << std::setprecision(2) << r.mean_fixated_terms_per_session << "\n";
    if (r.first_fixation) {
        o << "first fixation by AOI:\n";
        detail::distribution_lines(o, r.first_fixation->aoi);
        o << "first fixation by metadata field:\n";
        detail::distribution_lines(o, r.first_fixation->field);
    }
    for (MatchKind k : all_match_kinds) {
        const auto& ks = r.kinds.at(k);
        o << "\n[" << to_string(k) << "] found " << ks.needles_found << " of " << ks.needles_searched << " ("
          << percent(ks.pct_needles_found) << " term-weighted, " << percent(ks.pct_needles_found_session_mean)
          << " session-weighted); sessions with any found " << percent(ks.pct_sessions_with_any_found) << "\n";
        if (k != MatchKind::search_term && ks.documents > 0) {
            o << "  per document: " << std::fixed << std::setprecision(2) << ks.mean_found_per_document.value_or(0)
              << " of " << ks.mean_needles_per_document.value_or(0) << " found; documents with any found "
              << percent(ks.pct_documents_with_any_found) << "\n";
        }
        o << "  " << detail::timing_line(ks.timing) << "\n";
    }
    if (r.found_source_search) {
        o << "\nsource of found search terms by AOI:\n";
        detail::distribution_lines(o, r.found_source_search->aoi);
        o << "source of found search terms by metadata field:\n";
        detail::distribution_lines(o, r.found_source_search->field);
    }
    o << "\n[combined] sessions with any found " << percent(r.combined.pct_sessions_with_any_found)
      << ", mean found terms " << std::fixed << std::setprecision(2)
      << r.combined.mean_found_terms_per_session.value_or(0) << "\n";
    o << "  " << detail::timing_line(r.combined.timing) << "\n";
    o << "\nkeyword overlap timing:\n";
    for (const auto& [k, t] : r.overlap) {
        o << "  " << k << " docs: ";
        if (!t) {
            o << "empty\n";
        } else {
            o << detail::timing_line(*t) << "\n";
        }
    }
    return o.str();
}

}  // namespace tmfix::stats
