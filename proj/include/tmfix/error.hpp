#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace tmfix {

enum class ErrorCode {
    malformed_json,
    unknown_type,
    invariant_violation,
    empty_corpus,
    empty_input,
    too_few_groups,
    degenerate_df,
    empty_group,
    insufficient_data,
    no_fixations,
    unknown_session,
    invalid_config,
    io_error,
};

inline std::string_view error_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::malformed_json: return "MalformedJson";
        case ErrorCode::unknown_type: return "UnknownType";
        case ErrorCode::invariant_violation: return "InvariantViolation";
        case ErrorCode::empty_corpus: return "EmptyCorpus";
        case ErrorCode::empty_input: return "EmptyInput";
        case ErrorCode::too_few_groups: return "TooFewGroups";
        case ErrorCode::degenerate_df: return "DegenerateDf";
        case ErrorCode::empty_group: return "EmptyGroup";
        case ErrorCode::insufficient_data: return "InsufficientData";
        case ErrorCode::no_fixations: return "NoFixations";
        case ErrorCode::unknown_session: return "UnknownSession";
        case ErrorCode::invalid_config: return "InvalidConfig";
        case ErrorCode::io_error: return "IoError";
    }
    return "Unknown";
}

/// Typed failure carrying an error code and, where one applies, the name of
/// the offending field.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message, std::string field = {})
        : std::runtime_error(std::string(error_name(code)) + ": " + message),
          code_(code),
          field_(std::move(field)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& field() const noexcept { return field_; }

private:
    ErrorCode code_;
    std::string field_;
};

}  // namespace tmfix
