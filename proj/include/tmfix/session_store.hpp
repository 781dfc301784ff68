#pragma once

// Reconstructs sessions from event streams: grouping by session id, merging
// cumulative fixation snapshots, collecting search stems and clicks.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tmfix/error.hpp"
#include "tmfix/event_model.hpp"
#include "tmfix/textnorm.hpp"

namespace tmfix {

struct Session {
    std::string session_id;
    std::vector<QueryEvent> query_events;  // ts order
    std::vector<DocumentClick> clicks;     // ts order
    std::map<Stem, TermFixation> fixations;
    std::set<Stem> distinct_search_stems;

    /// Last event ts minus first event ts.
    Millis duration_ms() const {
        Millis lo = INT64_MAX;
        Millis hi = 0;
        for (const auto& q : query_events) {
            lo = std::min(lo, q.ts_ms);
            hi = std::max(hi, q.ts_ms);
        }
        for (const auto& c : clicks) {
            lo = std::min(lo, c.ts_ms);
            hi = std::max(hi, c.ts_ms);
        }
        return lo == INT64_MAX ? 0 : hi - lo;
    }

    friend bool operator==(const Session&, const Session&) = default;
};

struct CorpusCounts {
    std::size_t sessions = 0;
    std::size_t searches = 0;
    std::size_t clicks = 0;

    friend bool operator==(const CorpusCounts&, const CorpusCounts&) = default;
};

struct Corpus {
    std::vector<Session> sessions;  // ordered by session_id
    CorpusCounts counts;

    const Session* find(std::string_view id) const {
        auto it = std::lower_bound(sessions.begin(), sessions.end(), id,
                                   [](const Session& s, std::string_view v) { return s.session_id < v; });
        return (it != sessions.end() && it->session_id == id) ? &*it : nullptr;
    }
};

/// Folds a time-ordered list of cumulative snapshots into one fixation per
/// stem. The latest snapshot wins for totals; first_* come from the earliest
/// first_ms ever reported.
inline void merge_snapshot(std::map<Stem, TermFixation>& merged, const std::vector<TermFixation>& snapshot) {
    for (const auto& f : snapshot) {
        auto [it, inserted] = merged.try_emplace(f.stem, f);
        if (inserted) continue;
        TermFixation& m = it->second;
        m.total_ms = f.total_ms;
        m.last_ms = f.last_ms;
        if (f.first_ms < m.first_ms) {
            m.first_ms = f.first_ms;
            m.first_aoi = f.first_aoi;
            m.first_field = f.first_field;
        }
        if (m.last_ms < m.first_ms) m.last_ms = m.first_ms;
    }
}

inline std::set<Stem> search_stems(const std::vector<QueryEvent>& queries,
                                   const textnorm::NormalizationConfig& cfg) {
    std::set<Stem> out;
    for (const auto& q : queries) {
        for (const auto& raw : q.raw_terms) {
            for (auto& s : textnorm::normalize_text(raw, cfg, /*apply_len_filter=*/true))
                out.insert(std::move(s));
        }
    }
    return out;
}

/// Builds one session from its events (any order). Returns a session with no
/// query events if none were present; callers decide admission.
inline Session assemble_session(std::string session_id, std::vector<SessionEvent> events,
                                const textnorm::NormalizationConfig& cfg) {
    std::stable_sort(events.begin(), events.end(),
                     [](const SessionEvent& a, const SessionEvent& b) { return ts_of(a) < ts_of(b); });
    Session s;
    s.session_id = std::move(session_id);
    for (auto& e : events) {
        if (auto* q = std::get_if<QueryEvent>(&e)) {
            merge_snapshot(s.fixations, q->fixations);
            s.query_events.push_back(std::move(*q));
        } else {
            s.clicks.push_back(std::move(std::get<DocumentClick>(e)));
        }
    }
    s.distinct_search_stems = search_stems(s.query_events, cfg);
    return s;
}

/// Groups events by session id and keeps sessions with at least one
/// submitted query.
inline Corpus build_sessions(std::span<const SessionEvent> events, const textnorm::NormalizationConfig& cfg) {
    std::map<std::string, std::vector<SessionEvent>> groups;
    for (const auto& e : events) groups[session_id_of(e)].push_back(e);

    Corpus c;
    for (auto& [id, evs] : groups) {
        Session s = assemble_session(id, std::move(evs), cfg);
        if (s.query_events.empty()) continue;
        c.counts.searches += s.query_events.size();
        c.counts.clicks += s.clicks.size();
        c.sessions.push_back(std::move(s));
    }
    c.counts.sessions = c.sessions.size();
    return c;
}

template <typename Key>
struct Distribution {
    std::map<Key, double> fractions;
    std::size_t n = 0;
};

struct FirstFixationDistribution {
    Distribution<Aoi> aoi;
    Distribution<MetadataField> field;
};

namespace detail {

inline FirstFixationDistribution tally(const std::vector<const TermFixation*>& fixations) {
    FirstFixationDistribution d;
    for (Aoi a : all_aois) d.aoi.fractions[a] = 0.0;
    for (MetadataField f : all_fields) d.field.fractions[f] = 0.0;
    std::map<Aoi, std::size_t> aoi_counts;
    std::map<MetadataField, std::size_t> field_counts;
    for (const auto* f : fixations) {
        ++aoi_counts[f->first_aoi];
        ++field_counts[f->first_field];
    }
    const auto n = fixations.size();
    d.aoi.n = d.field.n = n;
    for (auto [k, v] : aoi_counts) d.aoi.fractions[k] = static_cast<double>(v) / static_cast<double>(n);
    for (auto [k, v] : field_counts) d.field.fractions[k] = static_cast<double>(v) / static_cast<double>(n);
    return d;
}

}  // namespace detail

/// Share of all fixated terms by the AOI and metadata field of their first
/// fixation. Every enum value is present as a key.
inline FirstFixationDistribution first_fixation_distribution(const Corpus& c) {
    if (c.sessions.empty()) throw Error(ErrorCode::empty_corpus, "corpus has no sessions");
    std::vector<const TermFixation*> all;
    for (const auto& s : c.sessions) {
        for (const auto& [stem, f] : s.fixations) all.push_back(&f);
    }
    if (all.empty()) throw Error(ErrorCode::empty_input, "corpus has no fixations");
    return detail::tally(all);
}

}  // namespace tmfix
