// errors.hpp: error codes and exception types shared by every module.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qze {

enum class ErrorCode {
    NonPositiveRate,
    OddExponent,
    BadWindow,
    BadParameter,
    NoDetector,
    QuadratureFailure,
    BandEdge,
    WindowTooNarrow,
    RevivalGuardViolated,
    ToleranceNotMet,
    NoResponse,
    EdgeProximity,
    HorizonExceeded,
    UnderResolvedOscillation,
    ConfigError,
    IoError,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::NonPositiveRate: return "NonPositiveRate";
    case ErrorCode::OddExponent: return "OddExponent";
    case ErrorCode::BadWindow: return "BadWindow";
    case ErrorCode::BadParameter: return "BadParameter";
    case ErrorCode::NoDetector: return "NoDetector";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::BandEdge: return "BandEdge";
    case ErrorCode::WindowTooNarrow: return "WindowTooNarrow";
    case ErrorCode::RevivalGuardViolated: return "RevivalGuardViolated";
    case ErrorCode::ToleranceNotMet: return "ToleranceNotMet";
    case ErrorCode::NoResponse: return "NoResponse";
    case ErrorCode::EdgeProximity: return "EdgeProximity";
    case ErrorCode::HorizonExceeded: return "HorizonExceeded";
    case ErrorCode::UnderResolvedOscillation: return "UnderResolvedOscillation";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

/// Config and IO problems map to exit status 1, everything numerical to 2.
inline bool is_config_error(ErrorCode code) {
    switch (code) {
    case ErrorCode::NonPositiveRate:
    case ErrorCode::OddExponent:
    case ErrorCode::BadWindow:
    case ErrorCode::BadParameter:
    case ErrorCode::ConfigError:
    case ErrorCode::IoError:
        return true;
    default:
        return false;
    }
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

    ErrorCode code() const noexcept { return code_; }
    /// The message without the code prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

struct Violation {
    ErrorCode code;
    std::string message;
};

/// Thrown by validation with every violated invariant, not just the first.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<Violation> violations)
        : Error(violations.front().code, join(violations)), violations_(std::move(violations)) {}

    const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    static std::string join(const std::vector<Violation>& vs) {
        std::string out;
        for (const auto& v : vs) {
            if (!out.empty()) out += "; ";
            out += std::string(to_string(v.code)) + " (" + v.message + ")";
        }
        return out;
    }

    std::vector<Violation> violations_;
};

/// Thrown at an exact flat-band edge, where the strict limit is two-valued.
class BandEdgeError : public Error {
public:
    BandEdgeError(double inside, double outside)
        : Error(ErrorCode::BandEdge, "value at the flat band edge is two-valued"),
          inside_(inside), outside_(outside) {}

    double inside_value() const noexcept { return inside_; }
    double outside_value() const noexcept { return outside_; }

private:
    double inside_;
    double outside_;
};

} // namespace qze
