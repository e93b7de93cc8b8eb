#pragma once

// Built-in worked example: kindergarten retention and reading achievement
// (Hong & Raudenbush, 2005), run through the full six-step procedure.

#include "piv/bounds.hpp"
#include "piv/core.hpp"

#include <string>
#include <vector>

namespace piv::replication {

inline constexpr double kGrandMean = 45.2;
inline constexpr double kCriticalMagnitude = 1.96;
inline constexpr double kPivThreshold = 0.8;
inline constexpr double kBoundTolerance = 0.005;
// Probit coefficient printed in the published worked example. It equals
// sqrt(n_ob) / sqrt(1 - R^2), a factor sqrt(2) short of the one the
// published bounds require.
inline constexpr double kPrintedPrefactor = 109.25;

ObservedStats retention_stats();

struct Case {
    std::string label;
    BeliefRegion region;
    double published_min = 0.0;
    BoundResult bound;
    Verdict verdict = Verdict::Indeterminate;
    bool reproduced = false; // |piv_min - published_min| <= kBoundTolerance
};

// The four published lower bounds.
std::vector<Case> published_cases();

struct PrefactorCheck {
    double prefactor = 0.0;           // sqrt(2 n_ob) / sqrt(1 - R^2)
    double printed_prefactor = kPrintedPrefactor;
    double sqrt_n_prefactor = 0.0;    // sqrt(n_ob) / sqrt(1 - R^2)
    CounterfactualBelief corner;      // belief-1 corner (45.78, 45.2)
    double corner_piv = 0.0;          // with prefactor
    double corner_piv_printed = 0.0;  // with printed_prefactor
    bool all_cases_reproduced = false;
    bool printed_reproduces = false;  // printed coefficient within tolerance of 0.92
    bool resolved() const { return all_cases_reproduced && !printed_reproduces; }
};

struct Report {
    ObservedStats stats = retention_stats();
    double se = 0.0;
    double beta_sharp = 0.0;
    std::vector<Case> cases;
    PrefactorCheck prefactor;
    ContourGrid plausible_grid; // [36.77, 45.78] on both axes
};

Report run(std::size_t grid_nt = 200, std::size_t grid_nc = 200);

std::string render_text(const Report& report);

} // namespace piv::replication
