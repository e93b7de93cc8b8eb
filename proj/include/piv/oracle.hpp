#pragma once

// Brute-force checks of the closed forms in piv/core.hpp. Ideal samples are
// materialized row by row, least squares is solved from the normal equations,
// and each block-matrix identity behind the closed forms is recomputed from
// sample moments. Variances use the 1/n convention throughout.

#include "piv/core.hpp"
#include "piv/linalg.hpp"

#include <cstdint>
#include <vector>

namespace piv::oracle {

// Recipe for an exactly moment-matched ideal sample.
struct SyntheticSpec {
    std::int64_t n_ob = 0;
    std::int64_t n_treated = 0; // pi = n_treated / n_ob
    double y_t_ob = 0.0;
    double y_c_ob = 0.0;
    double y_t_un = 0.0;
    double y_c_un = 0.0;
    double var_t = 0.0;
    double var_c = 0.0;
    int covariates = 0;
    std::uint64_t seed = 0; // covariate draws only

    double pi() const noexcept {
        return static_cast<double>(n_treated) / static_cast<double>(n_ob);
    }

    // Throws Error(InvalidArgument) unless both group counts are positive and even.
    void validate() const;

    CounterfactualBelief belief() const { return {y_t_un, y_c_un}; }
    ObservedStats observed_stats(double r_squared) const;
};

enum class Provenance : std::uint8_t { Observed, Counterfactual };

// 2 n_ob rows: each subject once as observed and once as its counterfactual
// twin with the treatment flipped and covariates copied.
struct IdealDataset {
    std::vector<double> outcome;
    std::vector<double> w;
    linalg::Matrix z; // rows x covariates
    std::vector<Provenance> provenance;

    std::size_t rows() const noexcept { return outcome.size(); }
    std::size_t covariates() const noexcept { return z.cols(); }
};

// Places each (arm, provenance) cell at mean +/- sd so its sample mean and
// 1/n variance hit the targets exactly. Throws Error(InvalidArgument) on an
// infeasible spec.
IdealDataset build_exact_dataset(const SyntheticSpec& spec);

struct OlsFit {
    std::vector<double> coefficients; // intercept, covariates..., w
    linalg::Matrix xtx_inverse;
    double coefficient_variance_w = 0.0; // residual variance * (X'X)^-1 at w
    double normal_equation_residual = 0.0; // max |X'X b - X'y| / max |X'y|
};

// Design matrix [1, Z, W].
linalg::Matrix design_matrix(const IdealDataset& data);

// Throws Error(SingularDesign) when X'X is singular.
OlsFit ols_fit(const IdealDataset& data);

// The treatment coefficient from sample covariances: partial covariance of W
// with Y over partial variance of W, both net of Z.
double partial_covariance_coefficient(const IdealDataset& data);

// w coefficient rescaled by sd(W) / sd(Y).
double standardized_w_coefficient(const OlsFit& fit, const IdealDataset& data);

struct MatrixCheck {
    double max_abs_error = 0.0;
    double max_rel_error = 0.0; // max_abs_error / largest reference entry
};

// (X'X)^-1 assembled blockwise from sample means and the Schur complement of
// the covariate covariance, against direct inversion.
MatrixCheck block_inverse_check(const IdealDataset& data);

// Coefficients from summed observed and counterfactual cross-products (the
// conjugate prior/likelihood combination) against OLS on the stacked rows.
// Requires both halves to be present.
MatrixCheck bayes_combination_check(const IdealDataset& data);

// Relative gap between sigma2 * (X'X)^-1 at w and
// sigma2 / (N * (var_w - S_wz S_zz^-1 S_zw)).
double coefficient_variance_check(const IdealDataset& data, double sigma2);

struct MonteCarloOptions {
    std::int64_t reps = 10'000;
    std::uint64_t seed = 1;
    unsigned threads = 0; // 0 = hardware concurrency
};

struct MonteCarloResult {
    double rate = 0.0;
    std::int64_t rejections = 0;
    std::int64_t reps = 0;
};

// Empirical rate at which a simulated ideal sample rejects again. Each cell is
// drawn from a normal with its target mean and variance, the standardized
// two-group regression is refitted, and the z statistic uses
// se = sqrt((1 - r^2) / (2 n_ob)) with the replication's own r^2. Replication
// k draws from a stream seeded by (seed, k), so the result does not depend on
// the thread count.
MonteCarloResult monte_carlo_piv(const SyntheticSpec& spec, const ObservedStats& stats,
                                 EstimateSign sign, const Threshold& threshold,
                                 const MonteCarloOptions& options = {});

} // namespace piv::oracle
