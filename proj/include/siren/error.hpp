#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace siren {

enum class ErrorCode {
    InvalidArgument,
    IoError,
    ParseError,
    MissingCellEntry,
    OutOfRangeScore,
    InconsistentItems,
    DuplicateEntry,
    DegenerateSplit,
    NonFiniteScore,
    IndexOutOfRange,
    MissingInfluence,
    UnknownCell,
    MismatchedCells,
};

std::string_view to_string(ErrorCode code) noexcept;

// All library failures surface as this type; code() tells callers (and the
// CLI exit-code mapping) which contract was violated.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace siren
