#pragma once

// Analysis of a single session: match summary, per-document results, timing
// comparison and interest terms. Shared by the ingest service and the CLI so
// both render identical bytes.

#include <string>

#include "json.hpp"
#include "tmfix/interest.hpp"
#include "tmfix/matching.hpp"
#include "tmfix/session_store.hpp"
#include "tmfix/stats/report.hpp"

namespace tmfix {

inline nlohmann::ordered_json session_report(const Session& s, const textnorm::NormalizationConfig& cfg,
                                             double alpha = 0.01, const ThresholdPolicy& policy = {}) {
    using stats::ojson;
    SessionMatcher m(s, cfg);
    const MatchReport rep = m.report(true, true);
    const auto fx = stats::cleaned_fixations(s, cfg);

    ojson j;
    j["schema_version"] = stats::schema_version;
    j["session_id"] = s.session_id;
    j["counts"] = ojson{{"queries", s.query_events.size()},
                        {"clicks", s.clicks.size()},
                        {"fixations", s.fixations.size()},
                        {"fixations_cleaned", fx.size()}};
    j["duration_ms"] = s.duration_ms();

    auto search = ojson::array();
    for (const auto& st : s.distinct_search_stems) search.push_back(st.str());
    j["distinct_search_stems"] = std::move(search);

    ojson match;
    auto found = ojson::array();
    for (const auto& st : rep.found) found.push_back(st.str());
    match["found"] = std::move(found);
    match["other_count"] = rep.other.size();
    match["hits"] = rep.hits.size();
    ojson per_kind;
    for (MatchKind k : all_match_kinds) {
        const auto& c = rep.per_kind.at(k);
        per_kind[std::string(to_string(k))] =
            ojson{{"searched", c.searched}, {"found", c.found}, {"fixations_found", rep.found_by(k).size()}};
    }
    match["per_kind"] = std::move(per_kind);
    j["match"] = std::move(match);

    auto docs = ojson::array();
    for (const auto& d : s.clicks) {
        const auto r = m.match_document(d, nullptr);
        docs.push_back(ojson{{"doc_id", r.doc_id},
                             {"title_terms_total", r.title_terms_total},
                             {"title_terms_found", r.title_terms_found},
                             {"keywords_total", r.keywords_total},
                             {"keywords_found", r.keywords_found}});
    }
    j["documents"] = std::move(docs);
    j["timing"] = stats::to_json(stats::timing_comparison(rep.found, fx, alpha));

    std::vector<InterestTerm> terms;
    std::optional<ErrorCode> interest_error;
    try {
        terms = extract(s, policy, cfg);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::no_fixations) throw;
        interest_error = e.code();
    }
    auto interest = extraction_to_json(s.session_id, policy, terms);
    interest.erase("session_id");
    if (interest_error) interest["error"] = std::string(error_name(*interest_error));
    j["interest"] = std::move(interest);
    return j;
}

}  // namespace tmfix
