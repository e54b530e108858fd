#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace convexiwave {

enum class ErrorKind {
    InvalidArgument,
    SingularSystem,
    OffGridObservation,
    HorizonTooShort,
    FloorViolation,
    DivergedObjective,
    NonConvergence,
    ZeroSignal,
    AmbiguousExtrema,
    FixtureMissing,
    Io,
};

constexpr std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::SingularSystem: return "SingularSystem";
        case ErrorKind::OffGridObservation: return "OffGridObservation";
        case ErrorKind::HorizonTooShort: return "HorizonTooShort";
        case ErrorKind::FloorViolation: return "FloorViolation";
        case ErrorKind::DivergedObjective: return "DivergedObjective";
        case ErrorKind::NonConvergence: return "NonConvergence";
        case ErrorKind::ZeroSignal: return "ZeroSignal";
        case ErrorKind::AmbiguousExtrema: return "AmbiguousExtrema";
        case ErrorKind::FixtureMissing: return "FixtureMissing";
        case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw Error(ErrorKind::InvalidArgument, message);
}

}  // namespace convexiwave
