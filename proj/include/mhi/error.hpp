#ifndef MHI_ERROR_HPP
#define MHI_ERROR_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mhi {

enum class ErrorKind {
    MalformedHeader,
    TruncatedData,
    UnsupportedMaxval,
    ParseError,
    RangeError,
    MissingFrame,
    DimensionMismatch,
    TooFewFrames,
    ZeroMass,
    NoMotion,
    StratificationError,
    EmptySplit,
    EmptyTraining,
    SingleClass,
    NonFiniteLoss,
    UnknownLabel,
    InvalidArgument,
    IoError,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::MalformedHeader: return "MalformedHeader";
    case ErrorKind::TruncatedData: return "TruncatedData";
    case ErrorKind::UnsupportedMaxval: return "UnsupportedMaxval";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::RangeError: return "RangeError";
    case ErrorKind::MissingFrame: return "MissingFrame";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::TooFewFrames: return "TooFewFrames";
    case ErrorKind::ZeroMass: return "ZeroMass";
    case ErrorKind::NoMotion: return "NoMotion";
    case ErrorKind::StratificationError: return "StratificationError";
    case ErrorKind::EmptySplit: return "EmptySplit";
    case ErrorKind::EmptyTraining: return "EmptyTraining";
    case ErrorKind::SingleClass: return "SingleClass";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::UnknownLabel: return "UnknownLabel";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

/// Library-wide exception. `index()` carries the frame index or manifest
/// line number for the kinds that have one.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what, std::optional<std::int64_t> index = std::nullopt)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what),
          index_(index) {}

    ErrorKind kind() const noexcept { return kind_; }
    std::optional<std::int64_t> index() const noexcept { return index_; }
    /// Message without the kind prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    std::string detail_;
    std::optional<std::int64_t> index_;
};

} // namespace mhi

#endif // MHI_ERROR_HPP
