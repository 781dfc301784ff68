#pragma once

// Text normalization shared by ingestion, matching and the simulator:
// tokenization, case folding, stop-word removal, stemming, length and
// blacklist filtering.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "tmfix/error.hpp"
#include "tmfix/textnorm/builtin_stopwords.hpp"
#include "tmfix/textnorm/english_stemmer.hpp"
#include "tmfix/textnorm/german_stemmer.hpp"
#include "tmfix/textnorm/unicode.hpp"

namespace tmfix {

/// A normalized (case-folded, stemmed) term. Never empty, never contains
/// whitespace.
class Stem {
public:
    Stem() = default;
    explicit Stem(std::string value) : value_(std::move(value)) {
        if (value_.empty()) throw Error(ErrorCode::invariant_violation, "empty stem", "stem");
        for (char c : value_) {
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r')
                throw Error(ErrorCode::invariant_violation, "stem contains whitespace", "stem");
        }
    }

    const std::string& str() const noexcept { return value_; }
    std::string_view view() const noexcept { return value_; }

    friend bool operator==(const Stem&, const Stem&) = default;
    friend auto operator<=>(const Stem& a, const Stem& b) { return a.value_.compare(b.value_) <=> 0; }

private:
    std::string value_;
};

}  // namespace tmfix

template <>
struct std::hash<tmfix::Stem> {
    std::size_t operator()(const tmfix::Stem& s) const noexcept {
        return std::hash<std::string>{}(s.str());
    }
};

namespace tmfix::textnorm {

enum class StemmerId { snowball_german, snowball_english, none };

inline std::string_view stemmer_name(StemmerId id) {
    switch (id) {
        case StemmerId::snowball_german: return "snowball_german";
        case StemmerId::snowball_english: return "snowball_english";
        case StemmerId::none: return "none";
    }
    return "none";
}

inline std::string stem_with(StemmerId id, std::string_view folded) {
    switch (id) {
        case StemmerId::snowball_german: return stem::stem_german(folded);
        case StemmerId::snowball_english: return stem::stem_english(std::string(folded));
        case StemmerId::none: return std::string(folded);
    }
    return std::string(folded);
}

struct LanguageProfile {
    std::string id;
    std::unordered_set<std::string> stopwords;
    StemmerId stemmer = StemmerId::none;
};

struct NormalizationConfig {
    /// Stop-word removal uses the union of all profiles; stemming the first.
    std::vector<LanguageProfile> profiles;
    std::size_t min_search_term_len = 3;
    std::set<Stem> blacklist;

    bool is_stopword(std::string_view folded) const {
        const std::string key(folded);
        return std::any_of(profiles.begin(), profiles.end(),
                           [&](const LanguageProfile& p) { return p.stopwords.contains(key); });
    }

    StemmerId stemmer() const { return profiles.empty() ? StemmerId::none : profiles.front().stemmer; }

    void validate() const {
        if (min_search_term_len < 1)
            throw Error(ErrorCode::invalid_config, "min_search_term_len must be >= 1",
                        "min_search_term_len");
        for (const auto& b : blacklist) {
            if (unicode::fold(b.str()) != b.str())
                throw Error(ErrorCode::invalid_config, "blacklist entry not case-folded: " + b.str(),
                            "blacklist");
        }
    }
};

/// Parses the plain-text list format: one entry per line, `#` comments,
/// surrounding whitespace trimmed, blank lines skipped.
inline std::vector<std::string> parse_word_list(std::string_view text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(pos, end - pos);
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
            line.remove_suffix(1);
        while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
        if (!line.empty() && line.front() != '#') out.emplace_back(line);
        pos = end + 1;
    }
    return out;
}

inline std::vector<std::string> load_word_list(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_error, "cannot read word list " + path.string(), "path");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_word_list(ss.str());
}

inline std::unordered_set<std::string> folded_set(const std::vector<std::string>& words) {
    std::unordered_set<std::string> out;
    for (const auto& w : words) out.insert(unicode::fold(w));
    return out;
}

inline LanguageProfile german_profile() {
    return {"de", folded_set(parse_word_list(builtin::german_stopwords)), StemmerId::snowball_german};
}

inline LanguageProfile english_profile() {
    return {"en", folded_set(parse_word_list(builtin::english_stopwords)),
            StemmerId::snowball_english};
}

inline LanguageProfile builtin_profile(std::string_view id) {
    if (id == "de") return german_profile();
    if (id == "en") return english_profile();
    throw Error(ErrorCode::invalid_config, "unknown language profile '" + std::string(id) + "'",
                "profiles");
}

/// Stemmed user-interface labels of the result list and detail view.
inline constexpr std::string_view default_blacklist_text = R"(
abstract
ahnlich
author
autor
detail
eintrag
ergebnis
export
kategori
keyword
klassifikation
merklist
person
quell
referenz
schlagwort
search
seit
sourc
titel
treff
volltext
zitation
)";

inline std::set<Stem> make_blacklist(const std::vector<std::string>& entries) {
    std::set<Stem> out;
    for (const auto& e : entries) out.insert(Stem(unicode::fold(e)));
    return out;
}

/// German first (the stemming profile), English second, built-in UI blacklist.
inline NormalizationConfig default_config() {
    NormalizationConfig cfg;
    cfg.profiles = {german_profile(), english_profile()};
    cfg.min_search_term_len = 3;
    cfg.blacklist = make_blacklist(parse_word_list(default_blacklist_text));
    return cfg;
}

inline StemmerId parse_stemmer(std::string_view name) {
    if (name == "snowball_german") return StemmerId::snowball_german;
    if (name == "snowball_english") return StemmerId::snowball_english;
    if (name == "none") return StemmerId::none;
    throw Error(ErrorCode::invalid_config, "unknown stemmer '" + std::string(name) + "'", "stemmer");
}

/// Reads a normalization config file:
///   {"profiles": ["de", {"id": "en", "stopwords": "en.txt", "stemmer": "snowball_english"}],
///    "min_search_term_len": 3, "blacklist": "blacklist.txt"}
/// A profile given by id alone is the built-in one. Relative paths resolve
/// against the config file's directory. Absent keys keep default_config().
inline NormalizationConfig load_config(const std::filesystem::path& path);

/// Splits on whitespace and punctuation (including hyphens and apostrophes).
/// Letters outside ASCII, umlauts and ß included, stay inside their word.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char32_t cp : unicode::decode_utf8(text)) {
        if (unicode::is_word_char(cp)) {
            unicode::append_utf8(current, cp);
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

inline std::optional<Stem> normalize_term(std::string_view token, const NormalizationConfig& cfg,
                                          bool apply_len_filter) {
    const std::string folded = unicode::fold(token);
    if (folded.empty() || cfg.is_stopword(folded)) return std::nullopt;
    if (apply_len_filter && unicode::codepoint_count(folded) < cfg.min_search_term_len)
        return std::nullopt;
    std::string stemmed = stem_with(cfg.stemmer(), folded);
    if (stemmed.empty() || cfg.is_stopword(stemmed)) return std::nullopt;
    return Stem(std::move(stemmed));
}

inline std::vector<Stem> apply_blacklist(std::span<const Stem> terms, const NormalizationConfig& cfg) {
    std::vector<Stem> out;
    out.reserve(terms.size());
    std::copy_if(terms.begin(), terms.end(), std::back_inserter(out),
                 [&](const Stem& s) { return !cfg.blacklist.contains(s); });
    return out;
}

/// tokenize + normalize_term over a whole string, document order, duplicates kept.
inline std::vector<Stem> normalize_text(std::string_view text, const NormalizationConfig& cfg,
                                        bool apply_len_filter) {
    std::vector<Stem> out;
    for (const auto& tok : tokenize(text)) {
        if (auto s = normalize_term(tok, cfg, apply_len_filter)) out.push_back(std::move(*s));
    }
    return out;
}

inline NormalizationConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_error, "cannot read config " + path.string(), "path");
    const auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw Error(ErrorCode::invalid_config, "config is not a JSON object", "config");
    const auto base = path.parent_path();
    auto resolve = [&](const nlohmann::json& v, const char* field) {
        if (!v.is_string()) throw Error(ErrorCode::invalid_config, "expected path string", field);
        std::filesystem::path p = v.get<std::string>();
        return p.is_absolute() ? p : base / p;
    };

    NormalizationConfig cfg = default_config();
    if (j.contains("profiles")) {
        const auto& ps = j["profiles"];
        if (!ps.is_array() || ps.empty())
            throw Error(ErrorCode::invalid_config, "profiles must be a nonempty array", "profiles");
        cfg.profiles.clear();
        for (const auto& p : ps) {
            if (p.is_string()) {
                cfg.profiles.push_back(builtin_profile(p.get<std::string>()));
                continue;
            }
            if (!p.is_object() || !p.contains("id") || !p["id"].is_string())
                throw Error(ErrorCode::invalid_config, "profile needs an id", "profiles");
            const auto id = p["id"].get<std::string>();
            LanguageProfile lp;
            if (id == "de" || id == "en") lp = builtin_profile(id);
            lp.id = id;
            if (p.contains("stopwords")) lp.stopwords = folded_set(load_word_list(resolve(p["stopwords"], "stopwords")));
            if (p.contains("stemmer")) {
                if (!p["stemmer"].is_string())
                    throw Error(ErrorCode::invalid_config, "stemmer must be a string", "stemmer");
                lp.stemmer = parse_stemmer(p["stemmer"].get<std::string>());
            }
            if (lp.stopwords.empty())
                throw Error(ErrorCode::invalid_config, "profile " + id + " has no stopwords", "stopwords");
            cfg.profiles.push_back(std::move(lp));
        }
    }
    if (j.contains("min_search_term_len")) {
        const auto& v = j["min_search_term_len"];
        if (!v.is_number_integer() || v.get<std::int64_t>() < 1)
            throw Error(ErrorCode::invalid_config, "min_search_term_len must be >= 1", "min_search_term_len");
        cfg.min_search_term_len = v.get<std::size_t>();
    }
    if (j.contains("blacklist")) cfg.blacklist = make_blacklist(load_word_list(resolve(j["blacklist"], "blacklist")));
    cfg.validate();
    return cfg;
}

}  // namespace tmfix::textnorm
