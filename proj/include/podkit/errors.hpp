#pragma once

#include <stdexcept>
#include <string>

namespace podkit {

// Every failure the toolkit reports, so callers can branch on the cause
// without parsing messages.
enum class Err {
    MalformedFile,
    UnsupportedFormat,
    DanglingNoteOn,
    AmbiguousTrackName,
    UnknownTrackName,
    NonIntegerQuantum,
    LengthMismatch,
    DimensionMismatch,
    EmptyTestSet,
    OrderTooLarge,
    MissingFile,
    MalformedMetadata,
    WriteFailure,
    InvalidArgument,
};

const char* to_string(Err code);

class PodError : public std::runtime_error {
public:
    PodError(Err code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    Err code() const { return code_; }

private:
    Err code_;
};

} // namespace podkit
