#pragma once

// Data-parallel inner loops. Each kernel has a scalar reference in
// piv::kernels::scalar and, on x86-64, an AVX2 variant in piv::kernels::avx2.
// The dispatching entry points pick the variant once per process from the
// CPU's feature bits; force_isa() pins a variant for equivalence tests.
//
// probit_row variants perform the same IEEE operations in the same order and
// never contract to FMA, so their outputs are bit-identical. The moments
// variants reassociate the sums and agree only to rounding.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

namespace piv::kernels {

enum class ProbitMode : std::uint8_t {
    StatisticalPositive, // k*r - C
    StatisticalNegative, // C - k*r
    FixedPositive,       // k*(r - b)
    FixedNegative,       // k*(b - r)
};

// Everything the ideal-sample probit needs, with the belief-independent
// products folded once.
struct ProbitParams {
    double pi = 0.0;
    double one_minus_pi = 0.0;
    double y_t_ob = 0.0;
    double y_c_ob = 0.0;
    double pi_y_t_ob = 0.0;          // pi * y_t_ob
    double one_minus_pi_y_c_ob = 0.0; // (1 - pi) * y_c_ob
    double spread_base = 0.0;        // 2 var_t + 2 var_c
    double mix_weight = 0.0;         // 2 pi (1 - pi)
    double prefactor = 0.0;          // sqrt(2 n) / sqrt(1 - R^2)
    ProbitMode mode = ProbitMode::StatisticalPositive;
    double offset = 0.0;             // signed C, or beta_sharp
};

// Point-biserial correlation of the ideal sample at one belief. NaN when the
// ideal outcome spread is zero.
inline double correlation_at(const ProbitParams& p, double y_t_un, double y_c_un) noexcept {
    const double y_t_id = p.one_minus_pi * y_t_un + p.pi_y_t_ob;
    const double dt = y_t_un - p.y_t_ob;
    const double dt2 = dt * dt;
    const double y_c_id = p.pi * y_c_un + p.one_minus_pi_y_c_ob;
    const double dc = y_c_un - p.y_c_ob;
    const double diff = y_t_id - y_c_id;
    const double spread = dt2 + dc * dc;
    const double denom2 = (p.spread_base + p.mix_weight * spread) + diff * diff;
    return diff / std::sqrt(denom2);
}

inline double probit_from_correlation(const ProbitParams& p, double r) noexcept {
    switch (p.mode) {
    case ProbitMode::StatisticalPositive: return p.prefactor * r - p.offset;
    case ProbitMode::StatisticalNegative: return p.offset - p.prefactor * r;
    case ProbitMode::FixedPositive: return p.prefactor * (r - p.offset);
    case ProbitMode::FixedNegative: return p.prefactor * (p.offset - r);
    }
    return std::nan("");
}

inline double probit_at(const ProbitParams& p, double y_t_un, double y_c_un) noexcept {
    return probit_from_correlation(p, correlation_at(p, y_t_un, y_c_un));
}

// Sums of (x - shift) and (x - shift)^2.
struct Moments {
    double sum = 0.0;
    double sum_sq = 0.0;
};

enum class Isa { Scalar, Avx2 };

const char* to_string(Isa isa) noexcept;

// Best variant the running CPU supports.
Isa detected_isa() noexcept;

// Variant the dispatching entry points currently use.
Isa active_isa() noexcept;

// Pin a variant (std::nullopt restores detection). Throws Error if the CPU
// cannot run the requested variant.
void force_isa(std::optional<Isa> isa);

// out[j] = probit at (y_t_un, y_c_un[j]). Spans must have equal length.
void probit_row(const ProbitParams& p, double y_t_un, std::span<const double> y_c_un,
                std::span<double> out);

Moments moments(std::span<const double> x, double shift) noexcept;

namespace scalar {
void probit_row(const ProbitParams& p, double y_t_un, std::span<const double> y_c_un,
                std::span<double> out) noexcept;
Moments moments(std::span<const double> x, double shift) noexcept;
} // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define PIV_HAVE_AVX2_KERNELS 1
namespace avx2 {
void probit_row(const ProbitParams& p, double y_t_un, std::span<const double> y_c_un,
                std::span<double> out) noexcept;
Moments moments(std::span<const double> x, double shift) noexcept;
} // namespace avx2
#endif

} // namespace piv::kernels
