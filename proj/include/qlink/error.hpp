#pragma once
#include <stdexcept>
#include <string>

namespace qlink {

enum class ErrorCode {
    InvalidBase,
    InvalidContext,
    PoleHit,
    MaxTermsExceeded,
    NegativeRadicand,
    WindowTooSmall,
    SignatureMismatch,
    InvalidIndex,
    PrecisionExhausted,
    UsageError,
    IOError,
};

inline const char* to_string(ErrorCode c) {
    switch (c) {
        case ErrorCode::InvalidBase: return "InvalidBase";
        case ErrorCode::InvalidContext: return "InvalidContext";
        case ErrorCode::PoleHit: return "PoleHit";
        case ErrorCode::MaxTermsExceeded: return "MaxTermsExceeded";
        case ErrorCode::NegativeRadicand: return "NegativeRadicand";
        case ErrorCode::WindowTooSmall: return "WindowTooSmall";
        case ErrorCode::SignatureMismatch: return "SignatureMismatch";
        case ErrorCode::InvalidIndex: return "InvalidIndex";
        case ErrorCode::PrecisionExhausted: return "PrecisionExhausted";
        case ErrorCode::UsageError: return "UsageError";
        case ErrorCode::IOError: return "IOError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& msg)
        : std::runtime_error(std::string(to_string(code)) + ": " + msg), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace qlink
