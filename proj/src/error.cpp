#include "siren/error.hpp"

namespace siren {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::MissingCellEntry: return "MissingCellEntry";
        case ErrorCode::OutOfRangeScore: return "OutOfRangeScore";
        case ErrorCode::InconsistentItems: return "InconsistentItems";
        case ErrorCode::DuplicateEntry: return "DuplicateEntry";
        case ErrorCode::DegenerateSplit: return "DegenerateSplit";
        case ErrorCode::NonFiniteScore: return "NonFiniteScore";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::MissingInfluence: return "MissingInfluence";
        case ErrorCode::UnknownCell: return "UnknownCell";
        case ErrorCode::MismatchedCells: return "MismatchedCells";
    }
    return "Unknown";
}

}  // namespace siren
