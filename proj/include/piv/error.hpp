#pragma once

#include <stdexcept>
#include <string>

namespace piv {

enum class ErrorKind {
    InvalidArgument,
    DegenerateSpread,
    SignMismatch,
    SingularDesign,
    CapExceeded,
    EmptyRegion,
};

const char* to_string(ErrorKind kind) noexcept;

// Every failure raised by the library carries a kind so front ends can map it
// to an exit status without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace piv
