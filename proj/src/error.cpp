#include "swifeed/error.hpp"

namespace swifeed {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::UndecodableText: return "UndecodableText";
    case ErrorCode::RowOutsideSection: return "RowOutsideSection";
    case ErrorCode::MissingSection: return "MissingSection";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::DanglingEndpoint: return "DanglingEndpoint";
    case ErrorCode::MissingCoordinates: return "MissingCoordinates";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::TooFewNodes: return "TooFewNodes";
    case ErrorCode::UnknownId: return "UnknownId";
    case ErrorCode::NonMonotoneTimestamps: return "NonMonotoneTimestamps";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::NoSource: return "NoSource";
    case ErrorCode::InvalidSf: return "InvalidSf";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::NoDevices: return "NoDevices";
    case ErrorCode::NoGateways: return "NoGateways";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::DegenerateBBox: return "DegenerateBBox";
    case ErrorCode::KExceedsN: return "KExceedsN";
    case ErrorCode::AllZeroWeights: return "AllZeroWeights";
    case ErrorCode::EmptySweep: return "EmptySweep";
    case ErrorCode::InvalidPredicate: return "InvalidPredicate";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace swifeed
