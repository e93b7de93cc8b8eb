#pragma once

// Ideal-sample statistics and the probability that a significant regression
// estimate would be significant again once counterfactual outcomes are added.
//
// The ideal sample stacks every observed row with its counterfactual twin
// (same covariates, flipped treatment). Counterfactual rows are assumed to
// share the within-group variance of the observed group they mirror. Only the
// normal approximation is provided; n_ob >= 30 is the recommended regime.

#include "piv/kernels.hpp"

#include <cstdint>
#include <variant>

namespace piv {

// Observed summary statistics. Means should be the covariate-adjusted group
// means of the fitted model; producing them is the caller's job.
class ObservedStats {
public:
    // Throws Error(InvalidArgument) naming the offending field.
    ObservedStats(double r_squared, std::int64_t n_ob, double y_t_ob, double y_c_ob, double var_t,
                  double var_c, double pi);

    double r_squared() const noexcept { return r_squared_; }
    std::int64_t n_ob() const noexcept { return n_ob_; }
    double y_t_ob() const noexcept { return y_t_ob_; }
    double y_c_ob() const noexcept { return y_c_ob_; }
    double var_t() const noexcept { return var_t_; }
    double var_c() const noexcept { return var_c_; }
    double pi() const noexcept { return pi_; }

    // Pooled observed mean, pi * y_t_ob + (1 - pi) * y_c_ob.
    double grand_mean() const noexcept { return pi_ * y_t_ob_ + (1.0 - pi_) * y_c_ob_; }

    bool operator==(const ObservedStats&) const = default;

private:
    double r_squared_;
    std::int64_t n_ob_;
    double y_t_ob_;
    double y_c_ob_;
    double var_t_;
    double var_c_;
    double pi_;
};

// Mean counterfactual outcomes: y_t_un for the observed controls had they been
// treated, y_c_un for the observed treated had they been controls.
struct CounterfactualBelief {
    double y_t_un = 0.0;
    double y_c_un = 0.0;

    CounterfactualBelief() = default;
    // Throws Error(InvalidArgument) on non-finite input.
    CounterfactualBelief(double t, double c);

    bool operator==(const CounterfactualBelief&) const = default;
};

enum class EstimateSign { Positive, Negative };

const char* to_string(EstimateSign sign) noexcept;

struct StatisticalThreshold {
    double critical_magnitude = 1.96; // |C|
    bool operator==(const StatisticalThreshold&) const = default;
};

struct FixedThreshold {
    double beta_sharp = 0.0; // standardized units
    bool operator==(const FixedThreshold&) const = default;
};

using Threshold = std::variant<StatisticalThreshold, FixedThreshold>;

// Validating constructors for the two threshold kinds.
Threshold statistical_threshold(double critical_magnitude);
Threshold fixed_threshold(double beta_sharp);

// +|C| for a positive estimate, -|C| for a negative one.
double signed_critical(double critical_magnitude, EstimateSign sign) noexcept;

struct IdealMeans {
    double y_t_id = 0.0;
    double y_c_id = 0.0;
};

struct IdealStats {
    double y_t_id = 0.0;
    double y_c_id = 0.0;
    double sigma_y_id = 0.0;
    double r_wy_id = 0.0;
};

struct PosteriorNormal {
    double mean = 0.0;
    double variance = 0.0;
};

struct PivResult {
    double piv = 0.0;
    double probit_piv = 0.0;
    double threshold_value = 0.0; // resolved beta_w^#
    double t_ratio = 0.0;         // r_wy_id / se
};

IdealMeans ideal_means(const CounterfactualBelief& belief, const ObservedStats& stats) noexcept;

// Standard deviation of the pooled ideal-sample outcome. Returns 0 when every
// variance is zero and all means coincide; the correlation is then undefined.
double ideal_sd(const CounterfactualBelief& belief, const ObservedStats& stats) noexcept;

// Point-biserial correlation between treatment and outcome in the ideal
// sample. Throws Error(DegenerateSpread) when ideal_sd is zero.
double ideal_correlation(const CounterfactualBelief& belief, const ObservedStats& stats);

IdealStats ideal_stats(const CounterfactualBelief& belief, const ObservedStats& stats);

// Distribution of the standardized treatment coefficient given the ideal
// sample: N(r_wy_id, (1 - R^2) / (2 n_ob)).
PosteriorNormal posterior(const CounterfactualBelief& belief, const ObservedStats& stats);

// sqrt((1 - R^2) / (2 n_ob)).
double se_ideal(const ObservedStats& stats) noexcept;

// sqrt(2 n_ob) / sqrt(1 - R^2), the factor turning a standardized effect into
// a z score.
double probit_prefactor(const ObservedStats& stats) noexcept;

// beta_w^#. Fixed thresholds pass through; statistical ones become signed
// C * se. Throws Error(SignMismatch) when a fixed threshold lies on the wrong
// side of zero for the declared sign.
double resolve_threshold(const Threshold& threshold, EstimateSign sign, const ObservedStats& stats);

// Folds stats, sign and threshold into the kernel parameter block.
kernels::ProbitParams make_probit_params(const ObservedStats& stats, EstimateSign sign,
                                         const Threshold& threshold);

double probit_piv(const CounterfactualBelief& belief, const ObservedStats& stats,
                  EstimateSign sign, const Threshold& threshold);

PivResult piv(const CounterfactualBelief& belief, const ObservedStats& stats, EstimateSign sign,
              const Threshold& threshold);

// PIV as a function of the ideal correlation alone.
double piv_from_correlation(double r_wy_id, const ObservedStats& stats, EstimateSign sign,
                            const Threshold& threshold);

// Power of the one-sided z test {Z beyond signed C} when Z ~ N(effect / se, 1).
double power_of_ideal_test(double effect, const ObservedStats& stats, EstimateSign sign,
                           double critical_magnitude);

// |r_wy_id| tends to these as one counterfactual mean runs off to infinity:
// treated = sqrt((1 - pi) / (1 + pi)), control = sqrt(pi / (2 - pi)).
struct SaturationLimits {
    double treated = 0.0;
    double control = 0.0;
};

SaturationLimits saturation_limits(const ObservedStats& stats) noexcept;

} // namespace piv
