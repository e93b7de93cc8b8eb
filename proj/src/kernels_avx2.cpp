#include "piv/kernels.hpp"

#if defined(PIV_HAVE_AVX2_KERNELS)

#include <immintrin.h>

#define PIV_AVX2 __attribute__((target("avx2")))

namespace piv::kernels::avx2 {

namespace {

PIV_AVX2 inline __m256d finish_probit(const ProbitParams& p, __m256d r) {
    const __m256d k = _mm256_set1_pd(p.prefactor);
    const __m256d off = _mm256_set1_pd(p.offset);
    switch (p.mode) {
    case ProbitMode::StatisticalPositive: return _mm256_sub_pd(_mm256_mul_pd(k, r), off);
    case ProbitMode::StatisticalNegative: return _mm256_sub_pd(off, _mm256_mul_pd(k, r));
    case ProbitMode::FixedPositive: return _mm256_mul_pd(k, _mm256_sub_pd(r, off));
    case ProbitMode::FixedNegative: return _mm256_mul_pd(k, _mm256_sub_pd(off, r));
    }
    return _mm256_set1_pd(std::nan(""));
}

} // namespace

PIV_AVX2 void probit_row(const ProbitParams& p, double y_t_un, std::span<const double> y_c_un,
                         std::span<double> out) noexcept {
    // Row-constant terms, computed exactly as correlation_at does.
    const double y_t_id = p.one_minus_pi * y_t_un + p.pi_y_t_ob;
    const double dt = y_t_un - p.y_t_ob;
    const double dt2 = dt * dt;

    const __m256d v_y_t_id = _mm256_set1_pd(y_t_id);
    const __m256d v_dt2 = _mm256_set1_pd(dt2);
    const __m256d v_pi = _mm256_set1_pd(p.pi);
    const __m256d v_c_anchor = _mm256_set1_pd(p.one_minus_pi_y_c_ob);
    const __m256d v_y_c_ob = _mm256_set1_pd(p.y_c_ob);
    const __m256d v_base = _mm256_set1_pd(p.spread_base);
    const __m256d v_mix = _mm256_set1_pd(p.mix_weight);

    const std::size_t n = y_c_un.size();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const __m256d c = _mm256_loadu_pd(y_c_un.data() + j);
        const __m256d y_c_id = _mm256_add_pd(_mm256_mul_pd(v_pi, c), v_c_anchor);
        const __m256d dc = _mm256_sub_pd(c, v_y_c_ob);
        const __m256d diff = _mm256_sub_pd(v_y_t_id, y_c_id);
        const __m256d spread = _mm256_add_pd(v_dt2, _mm256_mul_pd(dc, dc));
        const __m256d denom2 = _mm256_add_pd(_mm256_add_pd(v_base, _mm256_mul_pd(v_mix, spread)),
                                             _mm256_mul_pd(diff, diff));
        const __m256d r = _mm256_div_pd(diff, _mm256_sqrt_pd(denom2));
        _mm256_storeu_pd(out.data() + j, finish_probit(p, r));
    }
    for (; j < n; ++j) {
        out[j] = probit_at(p, y_t_un, y_c_un[j]);
    }
}

PIV_AVX2 Moments moments(std::span<const double> x, double shift) noexcept {
    const __m256d v_shift = _mm256_set1_pd(shift);
    __m256d acc = _mm256_setzero_pd();
    __m256d acc_sq = _mm256_setzero_pd();
    const std::size_t n = x.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x.data() + i), v_shift);
        acc = _mm256_add_pd(acc, d);
        acc_sq = _mm256_add_pd(acc_sq, _mm256_mul_pd(d, d));
    }
    alignas(32) double lanes[4];
    alignas(32) double lanes_sq[4];
    _mm256_store_pd(lanes, acc);
    _mm256_store_pd(lanes_sq, acc_sq);
    Moments m;
    m.sum = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    m.sum_sq = (lanes_sq[0] + lanes_sq[1]) + (lanes_sq[2] + lanes_sq[3]);
    for (; i < n; ++i) {
        const double d = x[i] - shift;
        m.sum += d;
        m.sum_sq += d * d;
    }
    return m;
}

} // namespace piv::kernels::avx2

#endif
