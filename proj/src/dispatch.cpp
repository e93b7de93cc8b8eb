#include "piv/error.hpp"
#include "piv/kernels.hpp"

#include <atomic>

namespace piv::kernels {

namespace {

constexpr int kNoOverride = -1;
std::atomic<int> g_override{kNoOverride};

bool cpu_has_avx2() noexcept {
#if defined(PIV_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
    static const bool has = __builtin_cpu_supports("avx2") != 0;
    return has;
#else
    return false;
#endif
}

} // namespace

const char* to_string(Isa isa) noexcept {
    switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    }
    return "unknown";
}

Isa detected_isa() noexcept { return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar; }

Isa active_isa() noexcept {
    const int forced = g_override.load(std::memory_order_relaxed);
    return forced == kNoOverride ? detected_isa() : static_cast<Isa>(forced);
}

void force_isa(std::optional<Isa> isa) {
    if (!isa) {
        g_override.store(kNoOverride, std::memory_order_relaxed);
        return;
    }
    if (*isa == Isa::Avx2 && !cpu_has_avx2()) {
        throw Error(ErrorKind::InvalidArgument, "AVX2 kernels are not supported on this CPU");
    }
    g_override.store(static_cast<int>(*isa), std::memory_order_relaxed);
}

void probit_row(const ProbitParams& p, double y_t_un, std::span<const double> y_c_un,
                std::span<double> out) {
    if (out.size() != y_c_un.size()) {
        throw Error(ErrorKind::InvalidArgument, "probit_row: output span length mismatch");
    }
#if defined(PIV_HAVE_AVX2_KERNELS)
    if (active_isa() == Isa::Avx2) {
        avx2::probit_row(p, y_t_un, y_c_un, out);
        return;
    }
#endif
    scalar::probit_row(p, y_t_un, y_c_un, out);
}

Moments moments(std::span<const double> x, double shift) noexcept {
#if defined(PIV_HAVE_AVX2_KERNELS)
    if (active_isa() == Isa::Avx2) {
        return avx2::moments(x, shift);
    }
#endif
    return scalar::moments(x, shift);
}

} // namespace piv::kernels
