#include "piv/replication.hpp"

#include "piv/json_writer.hpp"
#include "piv/normal.hpp"

#include <cmath>
#include <sstream>

namespace piv::replication {

namespace {

constexpr double kTObserved = 36.77;
constexpr double kCObserved = 45.78;

std::string fx(double v, int d = 6) { return format_fixed(v, d); }

std::string interval_text(const Interval& iv) {
    const auto end = [](double v) {
        return std::isinf(v) ? std::string(v < 0 ? "-inf" : "+inf") : format_fixed(v, 2);
    };
    return "[" + end(iv.lo) + ", " + end(iv.hi) + "]";
}

} // namespace

ObservedStats retention_stats() {
    return ObservedStats(0.36, 7639, kTObserved, kCObserved, 143.26, 138.83, 0.0617);
}

std::vector<Case> published_cases() {
    std::vector<Case> out;
    const auto add = [&](std::string label, Interval t, Interval c, double published) {
        Case k{std::move(label), BeliefRegion(t, c), published, {}, Verdict::Indeterminate, false};
        out.push_back(std::move(k));
    };
    add("belief 1: y_t_un <= 45.78, y_c_un = 45.2", {-kInfinity, kCObserved},
        {kGrandMean, kGrandMean}, 0.92);
    add("belief 1 variant: y_t_un <= 45.78, y_c_un >= 44", {-kInfinity, kCObserved},
        {44.0, kInfinity}, 0.82);
    add("belief 2: y_t_un <= 45.2, 36.77 <= y_c_un <= 45.78", {-kInfinity, kGrandMean},
        {kTObserved, kCObserved}, 0.936);
    add("effect on retained at least -7: 45.2 <= y_t_un <= 45.78, y_c_un >= 43.77",
        {kGrandMean, kCObserved}, {43.77, kInfinity}, 0.795);
    return out;
}

Report run(std::size_t grid_nt, std::size_t grid_nc) {
    Report rep;
    const ObservedStats& stats = rep.stats;
    const EstimateSign sign = EstimateSign::Negative;
    const Threshold threshold = statistical_threshold(kCriticalMagnitude);
    rep.se = se_ideal(stats);
    rep.beta_sharp = resolve_threshold(threshold, sign, stats);

    rep.cases = published_cases();
    bool all = true;
    for (Case& k : rep.cases) {
        k.bound = bound_piv(k.region, stats, sign, threshold);
        k.verdict = robustness_verdict(k.bound, kPivThreshold);
        k.reproduced = std::fabs(k.bound.piv_min - k.published_min) <= kBoundTolerance;
        all = all && k.reproduced;
    }

    PrefactorCheck& pc = rep.prefactor;
    const kernels::ProbitParams params = make_probit_params(stats, sign, threshold);
    pc.prefactor = params.prefactor;
    pc.sqrt_n_prefactor =
        std::sqrt(static_cast<double>(stats.n_ob())) / std::sqrt(1.0 - stats.r_squared());
    pc.corner = CounterfactualBelief(kCObserved, kGrandMean);
    pc.corner_piv = std_normal_cdf(kernels::probit_at(params, pc.corner.y_t_un, pc.corner.y_c_un));
    kernels::ProbitParams printed = params;
    printed.prefactor = pc.printed_prefactor;
    pc.corner_piv_printed =
        std_normal_cdf(kernels::probit_at(printed, pc.corner.y_t_un, pc.corner.y_c_un));
    pc.all_cases_reproduced = all;
    pc.printed_reproduces =
        std::fabs(pc.corner_piv_printed - rep.cases.front().published_min) <= kBoundTolerance;

    GridOptions grid;
    grid.nt = grid_nt;
    grid.nc = grid_nc;
    grid.threads = 0;
    rep.plausible_grid = evaluate_grid(BeliefRegion({kTObserved, kCObserved}, {kTObserved, kCObserved}),
                                       stats, sign, threshold, grid);
    return rep;
}

std::string render_text(const Report& rep) {
    const ObservedStats& s = rep.stats;
    const double pi = s.pi();
    std::ostringstream os;
    os << "Kindergarten retention and reading achievement (Hong & Raudenbush, 2005)\n\n";

    os << "Step 1. Observed sample statistics\n"
       << "  R^2 = " << fx(s.r_squared(), 2) << ", n_ob = " << s.n_ob()
       << ", y_t_ob = " << fx(s.y_t_ob(), 2) << ", y_c_ob = " << fx(s.y_c_ob(), 2)
       << ", var_t = " << fx(s.var_t(), 2) << ", var_c = " << fx(s.var_c(), 2)
       << ", pi = " << fx(pi, 4) << "\n\n";

    os << "Step 2. Critical value\n"
       << "  significant negative estimate: C = " << fx(-kCriticalMagnitude, 2)
       << ", se(ideal) = " << fx(rep.se) << ", beta_w# = C * se = " << fx(rep.beta_sharp)
       << "\n\n";

    const double slope_t = 1.0 - pi;
    const double offset = (1.0 - pi) * s.y_c_ob() - pi * s.y_t_ob();
    os << "Step 3. PIV as a function of the mean counterfactual outcomes\n"
       << "  probit(PIV) = " << fx(-kCriticalMagnitude, 2) << " - " << fx(rep.prefactor.prefactor, 4)
       << " * (" << fx(slope_t, 4) << " y_t_un - " << fx(pi, 4) << " y_c_un - " << fx(offset, 4)
       << ")\n"
       << "                / sqrt(" << fx(2.0 * s.var_t() + 2.0 * s.var_c(), 2) << " + "
       << fx(2.0 * pi * (1.0 - pi), 4) << " * [(y_t_un - " << fx(s.y_t_ob(), 2)
       << ")^2 + (y_c_un - " << fx(s.y_c_ob(), 2) << ")^2] + (" << fx(slope_t, 4) << " y_t_un - "
       << fx(pi, 4) << " y_c_un - " << fx(offset, 4) << ")^2)\n\n";

    os << "Step 4. Beliefs about the mean counterfactual outcomes\n";
    for (const Case& k : rep.cases) {
        os << "  " << k.label << "\n";
    }
    os << "\n";

    os << "Step 5. Bounds on the PIV (searched region, argmin, lower bound, published)\n";
    for (const Case& k : rep.cases) {
        os << "  " << k.label << "\n"
           << "    y_t_un in " << interval_text(k.bound.t_searched) << ", y_c_un in "
           << interval_text(k.bound.c_searched) << "\n"
           << "    min PIV " << fx(k.bound.piv_min) << " at (" << fx(k.bound.argmin.y_t_un) << ", "
           << fx(k.bound.argmin.y_c_un) << "); published " << fx(k.published_min, 3) << " -> "
           << (k.reproduced ? "reproduced" : "NOT reproduced") << "\n";
        for (std::size_t side = 0; side < 4; ++side) {
            if (k.bound.asymptotic[side]) {
                os << "    " << to_string(static_cast<Side>(side))
                   << " unbounded: clamped; limiting PIV " << fx(*k.bound.asymptotic[side]) << "\n";
            }
        }
    }
    os << "\n";

    os << "Step 6. Conclusion at PIV threshold " << fx(kPivThreshold, 2) << "\n";
    for (const Case& k : rep.cases) {
        os << "  " << k.label << ": " << to_string(k.verdict) << " (min " << fx(k.bound.piv_min)
           << ", max " << fx(k.bound.piv_max) << ")\n";
    }
    os << "\n";

    const PrefactorCheck& pc = rep.prefactor;
    os << "Prefactor check\n"
       << "  sqrt(2 n_ob)/sqrt(1-R^2) = " << fx(pc.prefactor, 4) << ": corner ("
       << fx(pc.corner.y_t_un, 2) << ", " << fx(pc.corner.y_c_un, 2) << ") PIV "
       << fx(pc.corner_piv) << "; all published bounds "
       << (pc.all_cases_reproduced ? "reproduced" : "NOT reproduced") << "\n"
       << "  printed coefficient " << fx(pc.printed_prefactor, 2) << " (sqrt(n_ob)/sqrt(1-R^2) = "
       << fx(pc.sqrt_n_prefactor, 4) << "): corner PIV " << fx(pc.corner_piv_printed)
       << " vs published " << fx(rep.cases.front().published_min, 2) << " -> "
       << (pc.printed_reproduces ? "reproduced" : "not reproduced") << "\n"
       << "  resolution: " << (pc.resolved() ? "use sqrt(2 n_ob)/sqrt(1-R^2); the printed coefficient is inconsistent with the published bounds"
                                              : "UNRESOLVED")
       << "\n";
    return os.str();
}

} // namespace piv::replication
