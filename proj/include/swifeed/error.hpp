#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace swifeed {

enum class ErrorCode {
    UndecodableText,
    RowOutsideSection,
    MissingSection,
    DuplicateId,
    DanglingEndpoint,
    MissingCoordinates,
    SelfLoop,
    MalformedRow,
    TooFewNodes,
    UnknownId,
    NonMonotoneTimestamps,
    SchemaMismatch,
    NoSource,
    InvalidSf,
    InvalidConfig,
    NoDevices,
    NoGateways,
    InvalidK,
    DegenerateBBox,
    KExceedsN,
    AllZeroWeights,
    EmptySweep,
    InvalidPredicate,
    Io,
};

std::string_view to_string(ErrorCode code);

// Every domain failure carries a stable category so callers (and the CLI)
// can report it in machine-parsable form.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    std::string_view category() const noexcept { return to_string(code_); }

private:
    ErrorCode code_;
};

}  // namespace swifeed
