#pragma once

// Locates query terms, clicked-document title terms and keywords inside a
// session's term-mouse-fixations by in-word inclusion (the needle is a
// contiguous substring of the fixated stem), and partitions the fixations
// into found and other.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "tmfix/error.hpp"
#include "tmfix/event_model.hpp"
#include "tmfix/session_store.hpp"
#include "tmfix/textnorm.hpp"

namespace tmfix {

enum class MatchKind { search_term, title_term, keyword };

inline constexpr std::array<MatchKind, 3> all_match_kinds{MatchKind::search_term, MatchKind::title_term,
                                                          MatchKind::keyword};

inline std::string_view to_string(MatchKind k) {
    switch (k) {
        case MatchKind::search_term: return "search_term";
        case MatchKind::title_term: return "title_term";
        case MatchKind::keyword: return "keyword";
    }
    return "search_term";
}

struct MatchHit {
    Stem needle;
    Stem fixation_stem;
    MatchKind kind = MatchKind::search_term;
    std::optional<std::string> doc_id;  // set for title_term and keyword

    friend bool operator==(const MatchHit&, const MatchHit&) = default;
    friend bool operator<(const MatchHit& a, const MatchHit& b) {
        return std::tie(a.kind, a.doc_id, a.needle, a.fixation_stem) <
               std::tie(b.kind, b.doc_id, b.needle, b.fixation_stem);
    }
};

struct KindCounts {
    std::size_t searched = 0;
    std::size_t found = 0;

    friend bool operator==(const KindCounts&, const KindCounts&) = default;
};

struct MatchReport {
    std::string session_id;
    std::vector<MatchHit> hits;  // sorted, unique
    std::set<Stem> found;
    std::set<Stem> other;
    std::map<MatchKind, KindCounts> per_kind;

    /// Fixation stems hit by at least one needle of the given kind.
    std::set<Stem> found_by(MatchKind kind) const {
        std::set<Stem> out;
        for (const auto& h : hits) {
            if (h.kind == kind) out.insert(h.fixation_stem);
        }
        return out;
    }

    friend bool operator==(const MatchReport&, const MatchReport&) = default;
};

struct DocMatchResult {
    std::string doc_id;
    std::size_t title_terms_total = 0;
    std::size_t title_terms_found = 0;
    std::size_t keywords_total = 0;
    std::size_t keywords_found = 0;

    friend bool operator==(const DocMatchResult&, const DocMatchResult&) = default;
};

using KeywordTuple = std::vector<Stem>;

/// A keyword after tokenization and normalization. `tokens` is empty when
/// every token was removed; such a keyword is counted but can never match.
struct NormalizedKeyword {
    std::string key;
    KeywordTuple tokens;
};

/// Substring lookup over a session's blacklist-cleaned fixation stems. Needles
/// of three or more bytes go through a byte-trigram index; shorter needles scan.
class FixationIndex {
public:
    explicit FixationIndex(std::vector<Stem> stems) : stems_(std::move(stems)) {
        std::sort(stems_.begin(), stems_.end());
        stems_.erase(std::unique(stems_.begin(), stems_.end()), stems_.end());
        for (std::uint32_t i = 0; i < stems_.size(); ++i) {
            const auto& s = stems_[i].str();
            for (std::size_t p = 0; p + 3 <= s.size(); ++p) {
                auto& list = postings_[trigram(s, p)];
                if (list.empty() || list.back() != i) list.push_back(i);
            }
        }
    }

    const std::vector<Stem>& stems() const { return stems_; }

    /// Stems containing `needle`, in ascending order.
    std::vector<const Stem*> containing(std::string_view needle) const {
        std::vector<const Stem*> out;
        if (needle.empty()) return out;
        if (needle.size() < 3) {
            for (const auto& s : stems_) {
                if (s.view().find(needle) != std::string_view::npos) out.push_back(&s);
            }
            return out;
        }
        // the rarest trigram of the needle bounds the candidate set
        const std::vector<std::uint32_t>* best = nullptr;
        for (std::size_t p = 0; p + 3 <= needle.size(); ++p) {
            auto it = postings_.find(trigram(needle, p));
            if (it == postings_.end()) return out;
            if (!best || it->second.size() < best->size()) best = &it->second;
        }
        for (auto i : *best) {
            if (stems_[i].view().find(needle) != std::string_view::npos) out.push_back(&stems_[i]);
        }
        return out;
    }

private:
    static std::uint32_t trigram(std::string_view s, std::size_t p) {
        return (static_cast<std::uint32_t>(static_cast<unsigned char>(s[p])) << 16) |
               (static_cast<std::uint32_t>(static_cast<unsigned char>(s[p + 1])) << 8) |
               static_cast<std::uint32_t>(static_cast<unsigned char>(s[p + 2]));
    }

    std::vector<Stem> stems_;
    std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> postings_;
};

inline std::vector<Stem> cleaned_fixation_stems(const Session& s, const textnorm::NormalizationConfig& cfg) {
    std::vector<Stem> stems;
    stems.reserve(s.fixations.size());
    for (const auto& [stem, f] : s.fixations) stems.push_back(stem);
    return textnorm::apply_blacklist(stems, cfg);
}

inline std::set<Stem> title_needles(std::string_view title, const textnorm::NormalizationConfig& cfg) {
    auto stems = textnorm::normalize_text(title, cfg, /*apply_len_filter=*/true);
    return {stems.begin(), stems.end()};
}

inline NormalizedKeyword normalize_keyword(std::string_view raw, const textnorm::NormalizationConfig& cfg) {
    NormalizedKeyword k;
    k.tokens = textnorm::normalize_text(raw, cfg, /*apply_len_filter=*/true);
    if (k.tokens.empty()) {
        k.key = "#" + unicode::fold(raw);
    } else {
        for (std::size_t i = 0; i < k.tokens.size(); ++i) {
            if (i) k.key += ' ';
            k.key += k.tokens[i].str();
        }
    }
    return k;
}

/// Distinct keywords of one document, in first-occurrence order.
inline std::vector<NormalizedKeyword> document_keywords(const DocumentClick& d,
                                                        const textnorm::NormalizationConfig& cfg) {
    std::vector<NormalizedKeyword> out;
    std::set<std::string> seen;
    for (const auto& raw : d.keywords) {
        auto k = normalize_keyword(raw, cfg);
        if (seen.insert(k.key).second) out.push_back(std::move(k));
    }
    return out;
}

class SessionMatcher {
public:
    SessionMatcher(const Session& s, const textnorm::NormalizationConfig& cfg)
        : session_(s), cfg_(cfg), index_(cleaned_fixation_stems(s, cfg)) {}

    const FixationIndex& index() const { return index_; }

    /// True iff every token of the keyword is contained in some fixation.
    bool keyword_found(const NormalizedKeyword& k) const {
        if (k.tokens.empty()) return false;
        return std::all_of(k.tokens.begin(), k.tokens.end(),
                           [&](const Stem& t) { return !index_.containing(t.view()).empty(); });
    }

    void add_search_hits(std::vector<MatchHit>& hits, KindCounts& counts) const {
        for (const auto& needle : session_.distinct_search_stems) {
            ++counts.searched;
            auto matches = index_.containing(needle.view());
            if (!matches.empty()) ++counts.found;
            for (const Stem* f : matches) hits.push_back({needle, *f, MatchKind::search_term, std::nullopt});
        }
    }

    DocMatchResult match_document(const DocumentClick& d, std::vector<MatchHit>* hits) const {
        DocMatchResult r;
        r.doc_id = d.doc_id;
        for (const auto& needle : title_needles(d.title, cfg_)) {
            ++r.title_terms_total;
            auto matches = index_.containing(needle.view());
            if (!matches.empty()) ++r.title_terms_found;
            if (hits) {
                for (const Stem* f : matches) hits->push_back({needle, *f, MatchKind::title_term, d.doc_id});
            }
        }
        for (const auto& kw : document_keywords(d, cfg_)) {
            ++r.keywords_total;
            if (!keyword_found(kw)) continue;
            ++r.keywords_found;
            if (!hits) continue;
            for (const auto& token : kw.tokens) {
                for (const Stem* f : index_.containing(token.view()))
                    hits->push_back({token, *f, MatchKind::keyword, d.doc_id});
            }
        }
        return r;
    }

    MatchReport report(bool search, bool documents) const {
        MatchReport rep;
        rep.session_id = session_.session_id;
        for (MatchKind k : all_match_kinds) rep.per_kind[k] = {};
        if (search) add_search_hits(rep.hits, rep.per_kind[MatchKind::search_term]);
        if (documents) {
            std::set<Stem> titles_searched;
            std::set<Stem> titles_found;
            std::set<std::string> keywords_searched;
            std::set<std::string> keywords_found;
            for (const auto& d : session_.clicks) {
                for (const auto& needle : title_needles(d.title, cfg_)) {
                    titles_searched.insert(needle);
                    if (!index_.containing(needle.view()).empty()) titles_found.insert(needle);
                }
                for (const auto& kw : document_keywords(d, cfg_)) {
                    keywords_searched.insert(kw.key);
                    if (keyword_found(kw)) keywords_found.insert(kw.key);
                }
                match_document(d, &rep.hits);
            }
            rep.per_kind[MatchKind::title_term] = {titles_searched.size(), titles_found.size()};
            rep.per_kind[MatchKind::keyword] = {keywords_searched.size(), keywords_found.size()};
        }
        std::sort(rep.hits.begin(), rep.hits.end());
        rep.hits.erase(std::unique(rep.hits.begin(), rep.hits.end()), rep.hits.end());
        for (const auto& h : rep.hits) rep.found.insert(h.fixation_stem);
        for (const auto& s : index_.stems()) {
            if (!rep.found.contains(s)) rep.other.insert(s);
        }
        return rep;
    }

private:
    const Session& session_;
    const textnorm::NormalizationConfig& cfg_;
    FixationIndex index_;
};

inline MatchReport match_search_terms(const Session& s, const textnorm::NormalizationConfig& cfg) {
    return SessionMatcher(s, cfg).report(/*search=*/true, /*documents=*/false);
}

inline DocMatchResult match_document(const Session& s, const DocumentClick& d,
                                     const textnorm::NormalizationConfig& cfg) {
    return SessionMatcher(s, cfg).match_document(d, nullptr);
}

/// Search terms, title terms and keywords together; a fixation matched by
/// any of them is found.
inline MatchReport combined_report(const Session& s, const textnorm::NormalizationConfig& cfg) {
    return SessionMatcher(s, cfg).report(/*search=*/true, /*documents=*/true);
}

/// Number of distinct clicked documents (by doc_id) whose keyword list
/// contains each normalized keyword. Keywords removed entirely by
/// normalization are not listed.
inline std::map<KeywordTuple, std::size_t> keyword_overlap(const Session& s,
                                                           const textnorm::NormalizationConfig& cfg) {
    std::map<KeywordTuple, std::set<std::string>> docs;
    for (const auto& d : s.clicks) {
        for (const auto& kw : document_keywords(d, cfg)) {
            if (!kw.tokens.empty()) docs[kw.tokens].insert(d.doc_id);
        }
    }
    std::map<KeywordTuple, std::size_t> out;
    for (const auto& [k, ids] : docs) out[k] = ids.size();
    return out;
}

/// Where found fixations were first fixated, over a set of reports.
inline FirstFixationDistribution found_source_distribution(const std::vector<MatchReport>& reports,
                                                           const Corpus& c) {
    std::vector<const TermFixation*> found;
    for (const auto& r : reports) {
        const Session* s = c.find(r.session_id);
        if (!s) throw Error(ErrorCode::unknown_session, "report for unknown session " + r.session_id);
        for (const auto& stem : r.found) {
            auto it = s->fixations.find(stem);
            if (it != s->fixations.end()) found.push_back(&it->second);
        }
    }
    if (found.empty()) throw Error(ErrorCode::empty_input, "no found fixations");
    return detail::tally(found);
}

}  // namespace tmfix
