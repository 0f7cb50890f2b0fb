#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fjq {

/// Failure categories shared by every module. The CLI maps these to exit
/// codes: InvalidParameter / ConfigError are configuration faults (1), the
/// rest are domain or statistical outcomes (2).
enum class Errc {
    InvalidParameter,
    ConfigError,
    Unstable,
    NoRoot,
    BoundaryRoot,
    OutsideDomain,
    AssumptionViolated,
    KindMismatch,
    AmbiguousMinimum,
    HorizonTooShort,
    EmptySample,
    DegenerateDesign,
    OutOfRange,
};

constexpr std::string_view to_string(Errc code) noexcept {
    switch (code) {
    case Errc::InvalidParameter: return "InvalidParameter";
    case Errc::ConfigError: return "ConfigError";
    case Errc::Unstable: return "Unstable";
    case Errc::NoRoot: return "NoRoot";
    case Errc::BoundaryRoot: return "BoundaryRoot";
    case Errc::OutsideDomain: return "OutsideDomain";
    case Errc::AssumptionViolated: return "AssumptionViolated";
    case Errc::KindMismatch: return "KindMismatch";
    case Errc::AmbiguousMinimum: return "AmbiguousMinimum";
    case Errc::HorizonTooShort: return "HorizonTooShort";
    case Errc::EmptySample: return "EmptySample";
    case Errc::DegenerateDesign: return "DegenerateDesign";
    case Errc::OutOfRange: return "OutOfRange";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, std::string message, std::string field = {})
        : std::runtime_error(std::string(to_string(code)) + ": " + message),
          code_(code), field_(std::move(field)) {}

    Errc code() const noexcept { return code_; }
    /// Offending field name for InvalidParameter, empty otherwise.
    const std::string& field() const noexcept { return field_; }

private:
    Errc code_;
    std::string field_;
};

}  // namespace fjq
