#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace accforge {

// Input-data and contract failures carry a stable code so the CLI can emit
// machine-parsable error lines. Programming errors still assert/throw the
// standard way.
enum class ErrorCode {
    IoError,
    UnsupportedFormat,
    CorruptFile,
    EmptyClip,
    SilentInput,
    SampleRateMismatch,
    OffsetOutOfRange,
    ParseError,
    MissingField,
    DuplicateId,
    UnknownCategory,
    InsufficientEvents,
    ArityMismatch,
    MisalignedInputs,
    EmptyCorpus,
    CorpusTooSmall,
    MissingComponent,
    MissingPrediction,
    EmptyInput,
    EndpointUnreachable,
    MalformedResponse,
    InvalidRecord,
    InvalidArgument,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
        case ErrorCode::CorruptFile: return "CorruptFile";
        case ErrorCode::EmptyClip: return "EmptyClip";
        case ErrorCode::SilentInput: return "SilentInput";
        case ErrorCode::SampleRateMismatch: return "SampleRateMismatch";
        case ErrorCode::OffsetOutOfRange: return "OffsetOutOfRange";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::MissingField: return "MissingField";
        case ErrorCode::DuplicateId: return "DuplicateId";
        case ErrorCode::UnknownCategory: return "UnknownCategory";
        case ErrorCode::InsufficientEvents: return "InsufficientEvents";
        case ErrorCode::ArityMismatch: return "ArityMismatch";
        case ErrorCode::MisalignedInputs: return "MisalignedInputs";
        case ErrorCode::EmptyCorpus: return "EmptyCorpus";
        case ErrorCode::CorpusTooSmall: return "CorpusTooSmall";
        case ErrorCode::MissingComponent: return "MissingComponent";
        case ErrorCode::MissingPrediction: return "MissingPrediction";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::EndpointUnreachable: return "EndpointUnreachable";
        case ErrorCode::MalformedResponse: return "MalformedResponse";
        case ErrorCode::InvalidRecord: return "InvalidRecord";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "UnknownError";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message),
          code_(code),
          message_(message) {}

    [[nodiscard]] ErrorCode code() const { return code_; }
    [[nodiscard]] const std::string& message() const { return message_; }

private:
    ErrorCode code_;
    std::string message_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace accforge
