#pragma once

// Extraction of topical-interest terms from a session's fixations alone, by
// accumulated fixation time, plus a precision/recall harness against known
// interest terms.

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tmfix/error.hpp"
#include "tmfix/matching.hpp"
#include "tmfix/session_store.hpp"

namespace tmfix {

enum class PolicyKind { absolute, median_factor, top_k };

inline std::string_view to_string(PolicyKind k) {
    switch (k) {
        case PolicyKind::absolute: return "absolute";
        case PolicyKind::median_factor: return "median_factor";
        case PolicyKind::top_k: return "top_k";
    }
    return "median_factor";
}

inline PolicyKind parse_policy_kind(std::string_view s) {
    if (s == "absolute") return PolicyKind::absolute;
    if (s == "median_factor") return PolicyKind::median_factor;
    if (s == "top_k") return PolicyKind::top_k;
    throw Error(ErrorCode::invalid_config, "unknown policy '" + std::string(s) + "'", "policy");
}

struct ThresholdPolicy {
    PolicyKind kind = PolicyKind::median_factor;
    Millis absolute_ms = 0;
    double factor = 1.15;
    std::size_t k = 10;
    Millis floor_ms = 5000;

    void validate() const {
        if (floor_ms < 0) throw Error(ErrorCode::invalid_config, "floor_ms must be >= 0", "floor_ms");
        switch (kind) {
            case PolicyKind::absolute:
                if (absolute_ms < 0)
                    throw Error(ErrorCode::invalid_config, "absolute_ms must be >= 0", "absolute_ms");
                break;
            case PolicyKind::median_factor:
                if (!(factor > 1.0)) throw Error(ErrorCode::invalid_config, "factor must be > 1", "factor");
                break;
            case PolicyKind::top_k:
                if (k < 1) throw Error(ErrorCode::invalid_config, "k must be >= 1", "k");
                break;
        }
    }
};

struct InterestTerm {
    Stem stem;
    Millis total_ms = 0;
    std::size_t rank = 0;  // 1-based
    double score = 0.0;    // currently total_ms

    friend bool operator==(const InterestTerm&, const InterestTerm&) = default;
};

inline double median_of(std::vector<Millis> v) {
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    if (n == 0) return 0.0;
    if (n % 2 == 1) return static_cast<double>(v[n / 2]);
    return (static_cast<double>(v[n / 2 - 1]) + static_cast<double>(v[n / 2])) / 2.0;
}

/// Ranks the blacklist-cleaned fixations by total time (desc), first
/// fixation (asc), then stem, and keeps those passing floor and policy.
inline std::vector<InterestTerm> extract(const Session& s, const ThresholdPolicy& p,
                                         const textnorm::NormalizationConfig& cfg) {
    p.validate();
    std::vector<const TermFixation*> candidates;
    for (const auto& [stem, f] : s.fixations) {
        if (!cfg.blacklist.contains(stem)) candidates.push_back(&f);
    }
    if (candidates.empty()) throw Error(ErrorCode::no_fixations, "session " + s.session_id + " has no fixations");

    std::sort(candidates.begin(), candidates.end(), [](const TermFixation* a, const TermFixation* b) {
        if (a->total_ms != b->total_ms) return a->total_ms > b->total_ms;
        if (a->first_ms != b->first_ms) return a->first_ms < b->first_ms;
        return a->stem < b->stem;
    });

    double threshold = 0.0;
    if (p.kind == PolicyKind::absolute) {
        threshold = static_cast<double>(p.absolute_ms);
    } else if (p.kind == PolicyKind::median_factor) {
        std::vector<Millis> totals;
        totals.reserve(candidates.size());
        for (const auto* f : candidates) totals.push_back(f->total_ms);
        threshold = p.factor * median_of(std::move(totals));
    }

    std::vector<InterestTerm> out;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto* f = candidates[i];
        if (p.kind == PolicyKind::top_k && i >= p.k) break;
        if (f->total_ms < p.floor_ms) continue;
        if (p.kind != PolicyKind::top_k && static_cast<double>(f->total_ms) < threshold) continue;
        out.push_back({f->stem, f->total_ms, out.size() + 1, static_cast<double>(f->total_ms)});
    }
    return out;
}

inline nlohmann::ordered_json policy_to_json(const ThresholdPolicy& p) {
    nlohmann::ordered_json j;
    j["kind"] = std::string(to_string(p.kind));
    switch (p.kind) {
        case PolicyKind::absolute: j["absolute_ms"] = p.absolute_ms; break;
        case PolicyKind::median_factor: j["factor"] = p.factor; break;
        case PolicyKind::top_k: j["k"] = p.k; break;
    }
    j["floor_ms"] = p.floor_ms;
    return j;
}

inline nlohmann::ordered_json extraction_to_json(std::string_view session_id, const ThresholdPolicy& p,
                                                 const std::vector<InterestTerm>& terms) {
    nlohmann::ordered_json j;
    j["session_id"] = std::string(session_id);
    j["policy"] = policy_to_json(p);
    auto arr = nlohmann::ordered_json::array();
    for (const auto& t : terms) {
        nlohmann::ordered_json e;
        e["stem"] = t.stem.str();
        e["total_ms"] = t.total_ms;
        e["rank"] = t.rank;
        arr.push_back(std::move(e));
    }
    j["terms"] = std::move(arr);
    return j;
}

struct ExtractionScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t extracted = 0;
    std::size_t truth = 0;
    std::size_t true_positives = 0;
    bool empty_truth = false;  // recall taken as 1 by convention
};

/// Set-based precision/recall. An empty extraction has precision 1 (no
/// false positives); an empty truth has recall 1 and is flagged.
inline ExtractionScore score_extraction(const std::set<Stem>& extracted, const std::set<Stem>& truth) {
    ExtractionScore s;
    s.extracted = extracted.size();
    s.truth = truth.size();
    for (const auto& e : extracted) {
        if (truth.contains(e)) ++s.true_positives;
    }
    s.precision = extracted.empty() ? 1.0 : static_cast<double>(s.true_positives) / static_cast<double>(s.extracted);
    s.empty_truth = truth.empty();
    s.recall = truth.empty() ? 1.0 : static_cast<double>(s.true_positives) / static_cast<double>(s.truth);
    s.f1 = (s.precision + s.recall) > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    return s;
}

struct EvaluationResult {
    std::map<std::string, ExtractionScore> per_session;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    std::size_t empty_truth_sessions = 0;
};

using GroundTruthMap = std::map<std::string, std::set<Stem>>;

inline EvaluationResult evaluate_extraction(const Corpus& c, const ThresholdPolicy& p, const GroundTruthMap& truth,
                                            const textnorm::NormalizationConfig& cfg) {
    for (const auto& [id, stems] : truth) {
        if (!c.find(id)) throw Error(ErrorCode::unknown_session, "truth names unknown session " + id, "truth");
    }
    EvaluationResult r;
    for (const auto& [id, stems] : truth) {
        const Session& s = *c.find(id);
        std::set<Stem> extracted;
        try {
            for (auto& t : extract(s, p, cfg)) extracted.insert(std::move(t.stem));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::no_fixations) throw;
        }
        auto score = score_extraction(extracted, stems);
        if (score.empty_truth) ++r.empty_truth_sessions;
        r.macro_precision += score.precision;
        r.macro_recall += score.recall;
        r.macro_f1 += score.f1;
        r.per_session.emplace(id, score);
    }
    if (!r.per_session.empty()) {
        const auto n = static_cast<double>(r.per_session.size());
        r.macro_precision /= n;
        r.macro_recall /= n;
        r.macro_f1 /= n;
    }
    return r;
}

}  // namespace tmfix
