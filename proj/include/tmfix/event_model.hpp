#pragma once

// Domain events and their JSONL wire format. One event per line; key order is
// type, session_id, ts_ms, then the payload fields in declaration order.

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "tmfix/error.hpp"
#include "tmfix/textnorm.hpp"

namespace tmfix {

using Millis = std::int64_t;

enum class Aoi {
    result_list,
    term_recommender,
    facets,
    metadata_view,
    abstract,
    references,
    citations,
    similar_entries,
};

enum class MetadataField { title, person, source, snippet, category, keywords, none };

inline constexpr std::array<std::string_view, 8> aoi_names{
    "result_list", "term_recommender", "facets",    "metadata_view",
    "abstract",    "references",       "citations", "similar_entries"};

inline constexpr std::array<std::string_view, 7> field_names{
    "title", "person", "source", "snippet", "category", "keywords", "none"};

inline constexpr std::array<Aoi, 8> all_aois{
    Aoi::result_list, Aoi::term_recommender, Aoi::facets,    Aoi::metadata_view,
    Aoi::abstract,    Aoi::references,       Aoi::citations, Aoi::similar_entries};

inline constexpr std::array<MetadataField, 7> all_fields{
    MetadataField::title,    MetadataField::person,   MetadataField::source, MetadataField::snippet,
    MetadataField::category, MetadataField::keywords, MetadataField::none};

inline std::string_view to_string(Aoi a) { return aoi_names[static_cast<std::size_t>(a)]; }
inline std::string_view to_string(MetadataField f) { return field_names[static_cast<std::size_t>(f)]; }

inline std::optional<Aoi> parse_aoi(std::string_view s) {
    for (std::size_t i = 0; i < aoi_names.size(); ++i) {
        if (aoi_names[i] == s) return static_cast<Aoi>(i);
    }
    return std::nullopt;
}

inline std::optional<MetadataField> parse_field(std::string_view s) {
    for (std::size_t i = 0; i < field_names.size(); ++i) {
        if (field_names[i] == s) return static_cast<MetadataField>(i);
    }
    return std::nullopt;
}

/// One stem's accumulated fixation state within a session. Times are
/// session-relative milliseconds.
struct TermFixation {
    Stem stem;
    Millis total_ms = 0;
    Millis first_ms = 0;
    Millis last_ms = 0;
    Aoi first_aoi = Aoi::result_list;
    MetadataField first_field = MetadataField::none;

    friend bool operator==(const TermFixation&, const TermFixation&) = default;
};

/// A search submit carrying the client's cumulative fixation snapshot.
struct QueryEvent {
    std::string session_id;
    Millis ts_ms = 0;
    std::vector<std::string> raw_terms;
    std::vector<TermFixation> fixations;

    friend bool operator==(const QueryEvent&, const QueryEvent&) = default;
};

struct DocumentClick {
    std::string session_id;
    Millis ts_ms = 0;
    std::string doc_id;
    std::string title;
    std::vector<std::string> keywords;

    friend bool operator==(const DocumentClick&, const DocumentClick&) = default;
};

using SessionEvent = std::variant<QueryEvent, DocumentClick>;

inline const std::string& session_id_of(const SessionEvent& e) {
    return std::visit([](const auto& v) -> const std::string& { return v.session_id; }, e);
}

inline Millis ts_of(const SessionEvent& e) {
    return std::visit([](const auto& v) { return v.ts_ms; }, e);
}

namespace detail {

[[noreturn]] inline void violation(const std::string& field, const std::string& what) {
    throw Error(ErrorCode::invariant_violation, field + ": " + what, field);
}

inline void validate_fixation(const TermFixation& f, const std::string& where) {
    if (f.stem.str().empty()) violation(where + "stem", "empty");
    if (f.total_ms <= 0) violation(where + "total_ms", "must be > 0");
    if (f.first_ms < 0) violation(where + "first_ms", "must be >= 0");
    if (f.last_ms < f.first_ms) violation(where + "last_ms", "must be >= first_ms");
    if (f.total_ms > f.last_ms) violation(where + "total_ms", "exceeds last_ms");
}

}  // namespace detail

inline void validate(const QueryEvent& q) {
    if (q.session_id.empty()) detail::violation("session_id", "empty");
    if (q.ts_ms < 0) detail::violation("ts_ms", "must be >= 0");
    if (q.raw_terms.empty()) detail::violation("raw_terms", "a query carries at least one term");
    std::set<std::string_view> seen;
    for (const auto& f : q.fixations) {
        detail::validate_fixation(f, "fixations.");
        if (!seen.insert(f.stem.view()).second) detail::violation("fixations.stem", "duplicate stem");
    }
}

inline void validate(const DocumentClick& c) {
    if (c.session_id.empty()) detail::violation("session_id", "empty");
    if (c.ts_ms < 0) detail::violation("ts_ms", "must be >= 0");
    if (c.doc_id.empty()) detail::violation("doc_id", "empty");
    if (c.title.empty() && c.keywords.empty())
        detail::violation("title", "empty title requires keywords");
}

inline void validate(const SessionEvent& e) {
    std::visit([](const auto& v) { validate(v); }, e);
}

inline nlohmann::ordered_json to_json(const TermFixation& f) {
    nlohmann::ordered_json j;
    j["stem"] = f.stem.str();
    j["total_ms"] = f.total_ms;
    j["first_ms"] = f.first_ms;
    j["last_ms"] = f.last_ms;
    j["first_aoi"] = std::string(to_string(f.first_aoi));
    j["first_field"] = std::string(to_string(f.first_field));
    return j;
}

inline std::string encode_event(const SessionEvent& e) {
    nlohmann::ordered_json j;
    if (const auto* q = std::get_if<QueryEvent>(&e)) {
        j["type"] = "query";
        j["session_id"] = q->session_id;
        j["ts_ms"] = q->ts_ms;
        j["raw_terms"] = q->raw_terms;
        auto fx = nlohmann::ordered_json::array();
        for (const auto& f : q->fixations) fx.push_back(to_json(f));
        j["fixations"] = std::move(fx);
    } else {
        const auto& c = std::get<DocumentClick>(e);
        j["type"] = "click";
        j["session_id"] = c.session_id;
        j["ts_ms"] = c.ts_ms;
        j["doc_id"] = c.doc_id;
        j["title"] = c.title;
        j["keywords"] = c.keywords;
    }
    // replace keeps dump total on invalid UTF-8 in raw strings
    return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

namespace detail {

using json = nlohmann::json;

inline const json& require(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) violation(key, "missing");
    return *it;
}

inline std::string get_string(const json& obj, const char* key) {
    const auto& v = require(obj, key);
    if (!v.is_string()) violation(key, "expected string");
    return v.get<std::string>();
}

inline Millis get_millis(const json& obj, const char* key) {
    const auto& v = require(obj, key);
    if (v.is_number_unsigned()) {
        const auto u = v.get<std::uint64_t>();
        if (u > static_cast<std::uint64_t>(INT64_MAX)) violation(key, "out of range");
        return static_cast<Millis>(u);
    }
    if (v.is_number_integer()) {
        const auto i = v.get<std::int64_t>();
        if (i < 0) violation(key, "must be >= 0");
        return i;
    }
    violation(key, "expected non-negative integer");
}

inline std::vector<std::string> get_string_list(const json& obj, const char* key) {
    const auto& v = require(obj, key);
    if (!v.is_array()) violation(key, "expected array");
    std::vector<std::string> out;
    for (const auto& s : v) {
        if (!s.is_string()) violation(key, "expected array of strings");
        out.push_back(s.get<std::string>());
    }
    return out;
}

inline TermFixation parse_fixation(const json& j) {
    if (!j.is_object()) violation("fixations", "expected object");
    TermFixation f;
    auto stem = get_string(j, "stem");
    if (stem.empty()) violation("stem", "empty");
    try {
        f.stem = Stem(std::move(stem));
    } catch (const Error&) {
        violation("stem", "not a valid stem");
    }
    f.total_ms = get_millis(j, "total_ms");
    f.first_ms = get_millis(j, "first_ms");
    f.last_ms = get_millis(j, "last_ms");
    auto aoi = parse_aoi(get_string(j, "first_aoi"));
    if (!aoi) violation("first_aoi", "unknown AOI");
    f.first_aoi = *aoi;
    auto field = parse_field(get_string(j, "first_field"));
    if (!field) violation("first_field", "unknown metadata field");
    f.first_field = *field;
    return f;
}

}  // namespace detail

/// Parses one wire line. Unknown keys are ignored. Throws Error with
/// MalformedJson, UnknownType or InvariantViolation (field() names the key).
inline SessionEvent decode_event(std::string_view line) {
    using detail::json;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::malformed_json, "line is not valid JSON");
    if (!j.is_object()) throw Error(ErrorCode::malformed_json, "line is not a JSON object");

    const auto type = detail::get_string(j, "type");
    if (type == "query") {
        QueryEvent q;
        q.session_id = detail::get_string(j, "session_id");
        q.ts_ms = detail::get_millis(j, "ts_ms");
        q.raw_terms = detail::get_string_list(j, "raw_terms");
        const auto& fx = detail::require(j, "fixations");
        if (!fx.is_array()) detail::violation("fixations", "expected array");
        for (const auto& f : fx) q.fixations.push_back(detail::parse_fixation(f));
        validate(q);
        return q;
    }
    if (type == "click") {
        DocumentClick c;
        c.session_id = detail::get_string(j, "session_id");
        c.ts_ms = detail::get_millis(j, "ts_ms");
        c.doc_id = detail::get_string(j, "doc_id");
        c.title = detail::get_string(j, "title");
        c.keywords = detail::get_string_list(j, "keywords");
        validate(c);
        return c;
    }
    throw Error(ErrorCode::unknown_type, "unknown event type '" + type + "'", "type");
}

/// Blank lines and lines starting with '#' carry no record.
inline bool is_record_line(std::string_view line) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
    return !line.empty() && line.front() != '#';
}

struct LineError {
    std::size_t line_no = 0;  // 1-based
    ErrorCode code = ErrorCode::malformed_json;
    std::string message;
};

struct EventLog {
    std::vector<SessionEvent> events;
    std::vector<LineError> errors;
};

/// Reads a whole JSONL log. Undecodable lines are collected with their line
/// numbers; every other line is still returned.
inline EventLog read_event_log(std::istream& in) {
    EventLog log;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!is_record_line(line)) continue;
        try {
            log.events.push_back(decode_event(line));
        } catch (const Error& e) {
            log.errors.push_back({line_no, e.code(), e.what()});
        }
    }
    return log;
}

}  // namespace tmfix
