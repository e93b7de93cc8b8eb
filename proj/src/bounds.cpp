#include "piv/bounds.hpp"

#include "piv/error.hpp"
#include "piv/normal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

namespace piv {

namespace {

std::vector<double> axis_values(const Interval& axis, std::size_t n) {
    if (axis.lo == axis.hi) {
        return {axis.lo};
    }
    if (n < 2) {
        throw Error(ErrorKind::InvalidArgument, "grid resolution must be at least 2 per axis");
    }
    std::vector<double> v(n);
    const double span = axis.hi - axis.lo;
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = axis.lo + span * (static_cast<double>(i) / static_cast<double>(n - 1));
    }
    v.front() = axis.lo;
    v.back() = axis.hi;
    return v;
}

// Probit values on a grid, row-major. Rows are independent so they may be
// split across threads; each row runs the same kernel either way.
std::vector<double> probit_grid(const kernels::ProbitParams& p, const std::vector<double>& t,
                                const std::vector<double>& c, unsigned threads) {
    std::vector<double> out(t.size() * c.size());
    const auto rows = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            kernels::probit_row(p, t[i], c, std::span<double>(out).subspan(i * c.size(), c.size()));
        }
    };
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, t.size()));
    if (threads <= 1) {
        rows(0, t.size());
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (t.size() + threads - 1) / threads;
        for (std::size_t begin = 0; begin < t.size(); begin += chunk) {
            pool.emplace_back(rows, begin, std::min(t.size(), begin + chunk));
        }
    }
    if (std::any_of(out.begin(), out.end(), [](double x) { return std::isnan(x); })) {
        throw Error(ErrorKind::DegenerateSpread,
                    "ideal-sample outcome spread is zero somewhere in the region");
    }
    return out;
}

Interval clamp_axis(const Interval& axis, double anchor, double width) {
    Interval out = axis;
    if (std::isinf(axis.lo)) {
        out.lo = std::min(anchor, axis.hi) - width;
    }
    if (std::isinf(axis.hi)) {
        out.hi = std::max(anchor, axis.lo) + width;
    }
    return out;
}

// Golden-section search for the minimum of f on [a, b]; endpoints included.
template <typename F>
std::pair<double, double> golden_minimize(F&& f, double a, double b, int iters) {
    constexpr double kInvPhi = 0.61803398874989484820;
    double best_x = a;
    double best_f = f(a);
    const auto consider = [&](double x, double fx) {
        if (fx < best_f) {
            best_x = x;
            best_f = fx;
        }
    };
    consider(b, f(b));
    if (!(b > a)) {
        return {best_x, best_f};
    }
    double x1 = b - kInvPhi * (b - a);
    double x2 = a + kInvPhi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int k = 0; k < iters; ++k) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kInvPhi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kInvPhi * (b - a);
            f2 = f(x2);
        }
    }
    consider(x1, f1);
    consider(x2, f2);
    return {best_x, best_f};
}

struct Extremum {
    double t = 0.0;
    double c = 0.0;
    double value = 0.0; // objective: probit, negated when maximizing
};

Extremum refine(const kernels::ProbitParams& p, Extremum start, const Interval& t_axis,
                const Interval& c_axis, double t_step, double c_step, double direction,
                const BoundOptions& options) {
    const auto objective = [&](double t, double c) {
        const double v = kernels::probit_at(p, t, c);
        if (std::isnan(v)) {
            throw Error(ErrorKind::DegenerateSpread,
                        "ideal-sample outcome spread is zero somewhere in the region");
        }
        return direction * v;
    };
    Extremum cur = start;
    for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
        const double before = cur.value;
        if (t_step > 0.0) {
            const double a = std::max(t_axis.lo, cur.t - t_step);
            const double b = std::min(t_axis.hi, cur.t + t_step);
            const auto [x, fx] = golden_minimize([&](double t) { return objective(t, cur.c); }, a, b,
                                                 options.refine_iters);
            if (fx < cur.value) {
                cur.t = x;
                cur.value = fx;
            }
        }
        if (c_step > 0.0) {
            const double a = std::max(c_axis.lo, cur.c - c_step);
            const double b = std::min(c_axis.hi, cur.c + c_step);
            const auto [x, fx] = golden_minimize([&](double c) { return objective(cur.t, c); }, a, b,
                                                 options.refine_iters);
            if (fx < cur.value) {
                cur.c = x;
                cur.value = fx;
            }
        }
        if (!(before - cur.value > 1e-15)) {
            break;
        }
    }
    return cur;
}

} // namespace

bool Interval::finite() const noexcept { return std::isfinite(lo) && std::isfinite(hi); }

BeliefRegion::BeliefRegion(Interval t, Interval c) : t_(t), c_(c) {
    for (const auto& [name, axis] : {std::pair{"y_t_un", t}, std::pair{"y_c_un", c}}) {
        if (std::isnan(axis.lo) || std::isnan(axis.hi)) {
            throw Error(ErrorKind::InvalidArgument, std::string(name) + " interval contains NaN");
        }
        if (axis.lo > axis.hi) {
            std::ostringstream os;
            os << name << " interval is empty: lo " << axis.lo << " > hi " << axis.hi;
            throw Error(ErrorKind::EmptyRegion, os.str());
        }
        if (axis.lo == axis.hi && std::isinf(axis.lo)) {
            throw Error(ErrorKind::InvalidArgument,
                        std::string(name) + " interval contains no finite point");
        }
    }
}

BeliefRegion BeliefRegion::point(const CounterfactualBelief& belief) {
    return BeliefRegion({belief.y_t_un, belief.y_t_un}, {belief.y_c_un, belief.y_c_un});
}

ContourGrid evaluate_grid(const BeliefRegion& region, const ObservedStats& stats,
                          EstimateSign sign, const Threshold& threshold,
                          const GridOptions& options) {
    if (!region.finite()) {
        throw Error(ErrorKind::InvalidArgument, "contour grids need a finite region");
    }
    ContourGrid grid;
    grid.t_values = axis_values(region.t(), options.nt);
    grid.c_values = axis_values(region.c(), options.nc);
    if (grid.t_values.size() * grid.c_values.size() > options.cell_cap) {
        std::ostringstream os;
        os << "grid of " << grid.t_values.size() << "x" << grid.c_values.size()
           << " exceeds the cap of " << options.cell_cap << " cells";
        throw Error(ErrorKind::CapExceeded, os.str());
    }
    const kernels::ProbitParams p = make_probit_params(stats, sign, threshold);
    grid.piv = probit_grid(p, grid.t_values, grid.c_values, options.threads);
    for (double& v : grid.piv) {
        v = std_normal_cdf(v);
    }
    return grid;
}

const char* to_string(Side side) noexcept {
    switch (side) {
    case Side::TLo: return "y_t_un_lo";
    case Side::THi: return "y_t_un_hi";
    case Side::CLo: return "y_c_un_lo";
    case Side::CHi: return "y_c_un_hi";
    }
    return "unknown";
}

double default_clamp_width(const ObservedStats& stats) noexcept {
    const double sd = std::sqrt(std::max(stats.var_t(), stats.var_c()));
    if (sd > 0.0) {
        return 10.0 * sd;
    }
    // No within-group spread to scale by; fall back to the observed gap.
    return 10.0 * std::max(1.0, std::fabs(stats.y_t_ob() - stats.y_c_ob()));
}

BoundResult bound_piv(const BeliefRegion& region, const ObservedStats& stats, EstimateSign sign,
                      const Threshold& threshold, const BoundOptions& options) {
    const double width = options.clamp_width > 0.0 ? options.clamp_width : default_clamp_width(stats);
    const double anchor = stats.grand_mean();

    BoundResult result;
    result.t_searched = clamp_axis(region.t(), anchor, width);
    result.c_searched = clamp_axis(region.c(), anchor, width);
    result.clamped = {std::isinf(region.t().lo), std::isinf(region.t().hi),
                      std::isinf(region.c().lo), std::isinf(region.c().hi)};

    const SaturationLimits lim = saturation_limits(stats);
    const std::array<double, 4> limit_r = {-lim.treated, lim.treated, lim.control, -lim.control};
    for (std::size_t s = 0; s < 4; ++s) {
        if (result.clamped[s]) {
            result.asymptotic[s] = piv_from_correlation(limit_r[s], stats, sign, threshold);
        }
    }

    const kernels::ProbitParams p = make_probit_params(stats, sign, threshold);
    const std::vector<double> t = axis_values(result.t_searched, options.coarse_nt);
    const std::vector<double> c = axis_values(result.c_searched, options.coarse_nc);
    const std::vector<double> probit = probit_grid(p, t, c, 1);

    // Row-major scan; a later cell wins only when it beats the incumbent by
    // more than 1e-12 in PIV, so ties go to the smallest (t, c) index.
    std::size_t imin = 0;
    std::size_t imax = 0;
    double vmin = std_normal_cdf(probit[0]);
    double vmax = vmin;
    for (std::size_t k = 1; k < probit.size(); ++k) {
        const double v = std_normal_cdf(probit[k]);
        if (v < vmin - 1e-12) {
            vmin = v;
            imin = k;
        }
        if (v > vmax + 1e-12) {
            vmax = v;
            imax = k;
        }
    }
    result.coarse_min = vmin;
    result.coarse_max = vmax;

    const double t_step = t.size() > 1 ? t[1] - t[0] : 0.0;
    const double c_step = c.size() > 1 ? c[1] - c[0] : 0.0;
    const auto start = [&](std::size_t k, double direction) {
        return Extremum{t[k / c.size()], c[k % c.size()], direction * probit[k]};
    };
    const Extremum lo = refine(p, start(imin, 1.0), result.t_searched, result.c_searched, t_step,
                               c_step, 1.0, options);
    const Extremum hi = refine(p, start(imax, -1.0), result.t_searched, result.c_searched, t_step,
                               c_step, -1.0, options);

    result.piv_min = std_normal_cdf(lo.value);
    result.argmin = CounterfactualBelief(lo.t, lo.c);
    result.piv_max = std_normal_cdf(-hi.value);
    result.argmax = CounterfactualBelief(hi.t, hi.c);
    return result;
}

const char* to_string(Verdict verdict) noexcept {
    switch (verdict) {
    case Verdict::Robust: return "Robust";
    case Verdict::NotRobust: return "NotRobust";
    case Verdict::Indeterminate: return "Indeterminate";
    }
    return "unknown";
}

Verdict robustness_verdict(const BoundResult& bound, double piv_threshold) {
    if (!(piv_threshold > 0.0 && piv_threshold < 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "piv_threshold must lie in (0, 1)");
    }
    if (bound.piv_min >= piv_threshold) {
        return Verdict::Robust;
    }
    if (bound.piv_max < piv_threshold) {
        return Verdict::NotRobust;
    }
    return Verdict::Indeterminate;
}

} // namespace piv
