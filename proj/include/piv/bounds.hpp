#pragma once

// Bounding the PIV over rectangular beliefs about the two mean counterfactual
// outcomes, plus uniform grids for contour plots.

#include "piv/core.hpp"

#include <array>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace piv {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Interval {
    double lo = -kInfinity;
    double hi = kInfinity;

    bool finite() const noexcept;
    bool operator==(const Interval&) const = default;
};

// Ranges for y_t_un and y_c_un. Either end may be infinite.
class BeliefRegion {
public:
    // Throws Error(EmptyRegion) if lo > hi on an axis, Error(InvalidArgument)
    // on NaN or an interval collapsed at infinity.
    BeliefRegion(Interval t, Interval c);

    static BeliefRegion point(const CounterfactualBelief& belief);

    const Interval& t() const noexcept { return t_; }
    const Interval& c() const noexcept { return c_; }
    bool finite() const noexcept { return t_.finite() && c_.finite(); }

    bool operator==(const BeliefRegion&) const = default;

private:
    Interval t_;
    Interval c_;
};

struct ContourGrid {
    std::vector<double> t_values;
    std::vector<double> c_values;
    std::vector<double> piv; // row-major: piv[i * c_values.size() + j]

    double at(std::size_t i, std::size_t j) const { return piv[i * c_values.size() + j]; }
};

struct GridOptions {
    std::size_t nt = 101;
    std::size_t nc = 101;
    std::size_t cell_cap = 10'000'000;
    // 0 picks std::thread::hardware_concurrency(). Output is identical for
    // every thread count.
    unsigned threads = 1;
};

// Uniform grid over a finite region including both endpoints on each axis.
// An axis with lo == hi collapses to a single value.
ContourGrid evaluate_grid(const BeliefRegion& region, const ObservedStats& stats,
                          EstimateSign sign, const Threshold& threshold,
                          const GridOptions& options = {});

// Sides of a region, used to index clamp flags and asymptotes.
enum class Side { TLo = 0, THi = 1, CLo = 2, CHi = 3 };

const char* to_string(Side side) noexcept;

struct BoundOptions {
    std::size_t coarse_nt = 101;
    std::size_t coarse_nc = 101;
    int refine_iters = 60;
    int max_sweeps = 50;
    // Distance from the grand mean at which infinite sides are cut. Zero or
    // negative selects 10 * sqrt(max(var_t, var_c)).
    double clamp_width = 0.0;
};

struct BoundResult {
    double piv_min = 0.0;
    CounterfactualBelief argmin;
    double piv_max = 0.0;
    CounterfactualBelief argmax;
    double coarse_min = 0.0; // grid-scan extremes before refinement
    double coarse_max = 0.0;
    Interval t_searched;     // clamped region actually searched
    Interval c_searched;
    std::array<bool, 4> clamped{};                   // indexed by Side
    std::array<std::optional<double>, 4> asymptotic{}; // PIV in the limit along a clamped side

    bool is_clamped(Side s) const { return clamped[static_cast<std::size_t>(s)]; }
    const std::optional<double>& asymptote(Side s) const {
        return asymptotic[static_cast<std::size_t>(s)];
    }
};

double default_clamp_width(const ObservedStats& stats) noexcept;

// Minimum and maximum PIV over the region: a coarse grid scan followed by
// per-axis golden-section coordinate descent from the best and worst cells.
BoundResult bound_piv(const BeliefRegion& region, const ObservedStats& stats, EstimateSign sign,
                      const Threshold& threshold, const BoundOptions& options = {});

enum class Verdict { Robust, NotRobust, Indeterminate };

const char* to_string(Verdict verdict) noexcept;

Verdict robustness_verdict(const BoundResult& bound, double piv_threshold = 0.8);

// Contour serialization. CSV: header row holds the y_c_un values, the first
// column the y_t_un values, the body PIV to 6 decimals.
std::string contour_to_csv(const ContourGrid& grid);
// JSON object {"t_values": [...], "c_values": [...], "piv": [[...], ...]}.
std::string contour_to_json(const ContourGrid& grid);

} // namespace piv
