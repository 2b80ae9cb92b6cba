#include "podkit/errors.hpp"

namespace podkit {

const char* to_string(Err code) {
    switch (code) {
    case Err::MalformedFile: return "MalformedFile";
    case Err::UnsupportedFormat: return "UnsupportedFormat";
    case Err::DanglingNoteOn: return "DanglingNoteOn";
    case Err::AmbiguousTrackName: return "AmbiguousTrackName";
    case Err::UnknownTrackName: return "UnknownTrackName";
    case Err::NonIntegerQuantum: return "NonIntegerQuantum";
    case Err::LengthMismatch: return "LengthMismatch";
    case Err::DimensionMismatch: return "DimensionMismatch";
    case Err::EmptyTestSet: return "EmptyTestSet";
    case Err::OrderTooLarge: return "OrderTooLarge";
    case Err::MissingFile: return "MissingFile";
    case Err::MalformedMetadata: return "MalformedMetadata";
    case Err::WriteFailure: return "WriteFailure";
    case Err::InvalidArgument: return "InvalidArgument";
    }
    return "UnknownError";
}

} // namespace podkit
