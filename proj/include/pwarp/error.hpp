#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pwarp {

// Every failure the engine can signal.  The CLI maps kinds onto exit codes
// (parse 2, math-domain 3, degenerate 4), so keep the grouping stable.
enum class ErrorKind {
    Syntax,
    UnknownIdentifier,
    Load,
    NameCollision,
    NonPositiveWarp,
    Usage,
    Domain,
    NonFinite,
    SingularCometric,
    CoframeConstruction,
    DegeneratePlane,
    NotNull,
    DegenerateDirection,
};

class Error : public std::runtime_error {
  public:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    Error(ErrorKind kind, std::string message, std::size_t offset = npos)
        : std::runtime_error(std::move(message)), kind_(kind), offset_(offset) {}

    ErrorKind kind() const { return kind_; }

    // Byte offset into the offending source text, when one exists.
    std::size_t offset() const { return offset_; }

    // Process exit code for this failure class.
    int exit_code() const {
        switch (kind_) {
            case ErrorKind::Syntax:
            case ErrorKind::UnknownIdentifier:
            case ErrorKind::Load:
            case ErrorKind::NameCollision:
            case ErrorKind::NonPositiveWarp:
            case ErrorKind::Usage:
                return 2;
            case ErrorKind::Domain:
            case ErrorKind::NonFinite:
            case ErrorKind::SingularCometric:
            case ErrorKind::CoframeConstruction:
                return 3;
            case ErrorKind::DegeneratePlane:
            case ErrorKind::NotNull:
            case ErrorKind::DegenerateDirection:
                return 4;
        }
        return 1;
    }

  private:
    ErrorKind kind_;
    std::size_t offset_;
};

} // namespace pwarp
