#include "doctest.h"

#include "piv/bounds.hpp"
#include "piv/error.hpp"
#include "piv/normal.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

using namespace piv;

namespace {

ObservedStats retention() { return ObservedStats(0.36, 7639, 36.77, 45.78, 143.26, 138.83, 0.0617); }

const Threshold kC196 = statistical_threshold(1.96);
const BeliefRegion kPlausible({36.77, 45.78}, {36.77, 45.78});

BoundResult bound_neg(const BeliefRegion& region) {
    return bound_piv(region, retention(), EstimateSign::Negative, kC196);
}

} // namespace

TEST_CASE("region validation") {
    CHECK_THROWS_AS(BeliefRegion({2.0, 1.0}, {0.0, 1.0}), Error);
    try {
        BeliefRegion({0.0, 1.0}, {5.0, 4.0});
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::EmptyRegion);
    }
    CHECK_THROWS_AS(BeliefRegion({std::nan(""), 1.0}, {0.0, 1.0}), Error);
    CHECK_THROWS_AS(BeliefRegion({kInfinity, kInfinity}, {0.0, 1.0}), Error);
    CHECK_NOTHROW(BeliefRegion({-kInfinity, 1.0}, {0.0, kInfinity}));
    CHECK(BeliefRegion::point({1.0, 2.0}).finite());
}

TEST_CASE("2x2 grid corners match pointwise piv") {
    const auto stats = retention();
    GridOptions opts;
    opts.nt = 2;
    opts.nc = 2;
    const auto g = evaluate_grid(kPlausible, stats, EstimateSign::Negative, kC196, opts);
    REQUIRE(g.piv.size() == 4);
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            const double p = piv::piv({g.t_values[i], g.c_values[j]}, stats, EstimateSign::Negative, kC196).piv;
            CHECK(g.at(i, j) == doctest::Approx(p).epsilon(1e-15));
        }
    }
    CHECK(g.t_values.front() == 36.77);
    CHECK(g.t_values.back() == 45.78);
}

TEST_CASE("single point region collapses to one value") {
    GridOptions opts;
    opts.nt = 5;
    opts.nc = 7;
    const auto g = evaluate_grid(BeliefRegion::point({40.0, 41.0}), retention(), EstimateSign::Negative, kC196, opts);
    CHECK(g.piv.size() == 1);
    CHECK(g.piv[0] == doctest::Approx(piv::piv({40.0, 41.0}, retention(), EstimateSign::Negative, kC196).piv));
}

TEST_CASE("grid errors") {
    const auto stats = retention();
    GridOptions opts;
    opts.nt = 1;
    CHECK_THROWS_AS(evaluate_grid(kPlausible, stats, EstimateSign::Negative, kC196, opts), Error);
    opts.nt = 1000;
    opts.nc = 1000;
    opts.cell_cap = 999'999;
    try {
        evaluate_grid(kPlausible, stats, EstimateSign::Negative, kC196, opts);
        FAIL("expected cap error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::CapExceeded);
    }
    CHECK_THROWS_AS(evaluate_grid(BeliefRegion({-kInfinity, 1.0}, {0.0, 1.0}), stats,
                                  EstimateSign::Negative, kC196),
                    Error);
}

TEST_CASE("plausible region at 200x200: shape, monotonicity, and bound agreement") {
    const auto stats = retention();
    GridOptions opts;
    opts.nt = 200;
    opts.nc = 200;
    const auto g = evaluate_grid(kPlausible, stats, EstimateSign::Negative, kC196, opts);
    REQUIRE(g.piv.size() == 40'000);

    // Lower retained-outcome beliefs and higher promoted-outcome beliefs both raise the PIV here.
    for (std::size_t i = 0; i + 1 < 200; ++i) {
        for (std::size_t j = 0; j < 200; ++j) {
            CHECK_MESSAGE(g.at(i + 1, j) <= g.at(i, j), i, " ", j);
        }
    }
    for (std::size_t i = 0; i < 200; ++i) {
        for (std::size_t j = 0; j + 1 < 200; ++j) {
            CHECK_MESSAGE(g.at(i, j + 1) >= g.at(i, j), i, " ", j);
        }
    }

    const double grid_min = *std::min_element(g.piv.begin(), g.piv.end());
    const double grid_max = *std::max_element(g.piv.begin(), g.piv.end());
    const auto b = bound_piv(kPlausible, stats, EstimateSign::Negative, kC196);
    CHECK(b.piv_min <= grid_min + 1e-12);
    CHECK(b.piv_min == doctest::Approx(grid_min).epsilon(1e-9));
    CHECK(b.piv_max >= grid_max - 1e-12);
    CHECK(b.piv_max == doctest::Approx(grid_max).epsilon(1e-9));
    CHECK(std::fabs(b.argmin.y_t_un - 45.78) < 1e-6);
    CHECK(std::fabs(b.argmin.y_c_un - 36.77) < 1e-6);
    // The maximum saturates at 1 along the low edge, so only its value is pinned.
    CHECK(std::fabs(b.argmax.y_t_un - 36.77) < 1e-6);
    CHECK(piv::piv(b.argmax, stats, EstimateSign::Negative, kC196).piv == b.piv_max);

    const std::string csv = contour_to_csv(g);
    std::istringstream in(csv);
    std::string line;
    std::size_t rows = 0;
    std::getline(in, line);
    CHECK(std::count(line.begin(), line.end(), ',') == 200);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 200);
    }
    CHECK(rows == 200);
}

TEST_CASE("published bounds") {
    const auto b1 = bound_neg(BeliefRegion({-kInfinity, 45.78}, {45.2, 45.2}));
    CHECK(std::fabs(b1.piv_min - 0.92) <= 0.005);
    CHECK(std::fabs(b1.argmin.y_t_un - 45.78) < 1e-6);
    CHECK(b1.is_clamped(Side::TLo));
    CHECK_FALSE(b1.is_clamped(Side::THi));
    REQUIRE(b1.asymptote(Side::TLo).has_value());
    CHECK_FALSE(b1.asymptote(Side::THi).has_value());
    CHECK(robustness_verdict(b1) == Verdict::Robust);

    const auto b1v = bound_neg(BeliefRegion({-kInfinity, 45.78}, {44.0, kInfinity}));
    CHECK(std::fabs(b1v.piv_min - 0.82) <= 0.005);

    const auto b2 = bound_neg(BeliefRegion({-kInfinity, 45.2}, {36.77, 45.78}));
    CHECK(std::fabs(b2.piv_min - 0.936) <= 0.005);
    CHECK(std::fabs(b2.argmin.y_t_un - 45.2) < 1e-6);
    CHECK(std::fabs(b2.argmin.y_c_un - 36.77) < 1e-6);
    CHECK(robustness_verdict(b2) == Verdict::Robust);

    const auto b3 = bound_neg(BeliefRegion({45.2, 45.78}, {43.77, kInfinity}));
    CHECK(std::fabs(b3.piv_min - 0.795) <= 0.005);
    CHECK(std::fabs(b3.argmin.y_t_un - 45.78) < 1e-6);
    CHECK(std::fabs(b3.argmin.y_c_un - 43.77) < 1e-6);
}

TEST_CASE("refinement never loses to the coarse scan") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> coord(20.0, 60.0);
    const auto stats = retention();
    for (int i = 0; i < 30; ++i) {
        double a = coord(rng), b = coord(rng), c = coord(rng), d = coord(rng);
        const BeliefRegion region({std::min(a, b), std::max(a, b)}, {std::min(c, d), std::max(c, d)});
        for (auto sign : {EstimateSign::Positive, EstimateSign::Negative}) {
            const auto r = bound_piv(region, stats, sign, kC196);
            CHECK(r.piv_min <= r.coarse_min);
            CHECK(r.piv_max >= r.coarse_max);
            CHECK(r.piv_min <= r.piv_max);
            const double at_min = piv::piv(r.argmin, stats, sign, kC196).piv;
            CHECK(at_min == doctest::Approx(r.piv_min).epsilon(1e-12));
            CHECK(r.argmin.y_t_un >= region.t().lo);
            CHECK(r.argmin.y_t_un <= region.t().hi);
        }
    }
}

TEST_CASE("clamping and asymptotes") {
    const auto stats = retention();
    const double w = default_clamp_width(stats);
    CHECK(w == doctest::Approx(10.0 * std::sqrt(143.26)));
    const auto b = bound_neg(BeliefRegion({-kInfinity, kInfinity}, {-kInfinity, kInfinity}));
    CHECK(b.t_searched.lo == doctest::Approx(stats.grand_mean() - w));
    CHECK(b.t_searched.hi == doctest::Approx(stats.grand_mean() + w));
    for (auto s : {Side::TLo, Side::THi, Side::CLo, Side::CHi}) {
        REQUIRE(b.asymptote(s).has_value());
        CHECK(*b.asymptote(s) >= 0.0);
        CHECK(*b.asymptote(s) <= 1.0);
    }
    const auto lim = saturation_limits(stats);
    CHECK(*b.asymptote(Side::TLo) ==
          doctest::Approx(piv_from_correlation(-lim.treated, stats, EstimateSign::Negative, kC196)));
    CHECK(*b.asymptote(Side::TLo) > 0.999);
    CHECK(*b.asymptote(Side::THi) < 1e-6);

    BoundOptions narrow;
    narrow.clamp_width = 1.0;
    const auto n = bound_piv(BeliefRegion({-kInfinity, 50.0}, {40.0, 41.0}), stats,
                             EstimateSign::Negative, kC196, narrow);
    CHECK(n.t_searched.lo == doctest::Approx(stats.grand_mean() - 1.0));

    // Anchor above the finite end: cut below the finite end instead.
    const auto m = bound_piv(BeliefRegion({-kInfinity, 10.0}, {40.0, 41.0}), stats,
                             EstimateSign::Negative, kC196, narrow);
    CHECK(m.t_searched.lo == doctest::Approx(9.0));
    CHECK(m.t_searched.hi == 10.0);

    const ObservedStats flat(0.1, 100, 3.0, 5.0, 0.0, 0.0, 0.5);
    CHECK(default_clamp_width(flat) == doctest::Approx(20.0));
}

TEST_CASE("verdicts") {
    BoundResult b;
    b.piv_min = 0.92;
    b.piv_max = 0.99;
    CHECK(robustness_verdict(b) == Verdict::Robust);
    b.piv_min = 0.1;
    b.piv_max = 0.5;
    CHECK(robustness_verdict(b) == Verdict::NotRobust);
    b.piv_min = 0.4;
    b.piv_max = 0.95;
    CHECK(robustness_verdict(b) == Verdict::Indeterminate);
    CHECK(robustness_verdict(b, 0.3) == Verdict::Robust);
    CHECK_THROWS_AS(robustness_verdict(b, 1.0), Error);
    CHECK(std::string(to_string(Verdict::Robust)) == "Robust");
}

TEST_CASE("contour json") {
    GridOptions opts;
    opts.nt = 3;
    opts.nc = 2;
    const auto g = evaluate_grid(kPlausible, retention(), EstimateSign::Negative, kC196, opts);
    const std::string json = contour_to_json(g);
    CHECK(json.find("\"t_values\"") != std::string::npos);
    CHECK(json.find("\"c_values\"") != std::string::npos);
    CHECK(json.find("\"piv\"") != std::string::npos);
}
