#include "piv/kernels.hpp"

namespace piv::kernels::scalar {

void probit_row(const ProbitParams& p, double y_t_un, std::span<const double> y_c_un,
                std::span<double> out) noexcept {
    for (std::size_t j = 0; j < y_c_un.size(); ++j) {
        out[j] = probit_at(p, y_t_un, y_c_un[j]);
    }
}

Moments moments(std::span<const double> x, double shift) noexcept {
    Moments m;
    for (double v : x) {
        const double d = v - shift;
        m.sum += d;
        m.sum_sq += d * d;
    }
    return m;
}

} // namespace piv::kernels::scalar
