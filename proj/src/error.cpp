#include "piv/error.hpp"

namespace piv {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DegenerateSpread: return "DegenerateSpread";
    case ErrorKind::SignMismatch: return "SignMismatch";
    case ErrorKind::SingularDesign: return "SingularDesign";
    case ErrorKind::CapExceeded: return "CapExceeded";
    case ErrorKind::EmptyRegion: return "EmptyRegion";
    }
    return "Unknown";
}

} // namespace piv
