#include "doctest.h"

#include "piv/core.hpp"
#include "piv/error.hpp"
#include "piv/linalg.hpp"
#include "piv/normal.hpp"
#include "piv/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace piv;
using namespace piv::oracle;

namespace {

double rel(double a, double b) { return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-300}); }

SyntheticSpec random_spec(std::mt19937_64& rng, int covariates) {
    std::uniform_int_distribution<int> half_n(4, 256);
    std::uniform_real_distribution<double> mean(20.0, 60.0);
    std::uniform_real_distribution<double> var(1.0, 200.0);
    SyntheticSpec s;
    s.n_ob = 2 * half_n(rng);
    std::uniform_int_distribution<std::int64_t> treated_half(1, s.n_ob / 2 - 1);
    s.n_treated = 2 * treated_half(rng);
    s.y_t_ob = mean(rng);
    s.y_c_ob = mean(rng);
    s.y_t_un = mean(rng);
    s.y_c_un = mean(rng);
    s.var_t = var(rng);
    s.var_c = var(rng);
    s.covariates = covariates;
    s.seed = rng();
    return s;
}

struct CellMoments {
    double mean = 0.0;
    double var = 0.0;
    std::size_t count = 0;
};

CellMoments cell(const IdealDataset& d, double w, Provenance p) {
    CellMoments m;
    for (std::size_t i = 0; i < d.rows(); ++i) {
        if (d.w[i] == w && d.provenance[i] == p) {
            m.mean += d.outcome[i];
            ++m.count;
        }
    }
    m.mean /= static_cast<double>(m.count);
    for (std::size_t i = 0; i < d.rows(); ++i) {
        if (d.w[i] == w && d.provenance[i] == p) m.var += (d.outcome[i] - m.mean) * (d.outcome[i] - m.mean);
    }
    m.var /= static_cast<double>(m.count);
    return m;
}

} // namespace

TEST_CASE("linear algebra") {
    linalg::Matrix a(3, 3);
    const double v[3][3] = {{4, 1, 2}, {1, 5, 3}, {2, 3, 6}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a(i, j) = v[i][j];
    const auto inv = linalg::inverse(a);
    CHECK(linalg::max_abs_diff(linalg::multiply(a, inv), linalg::Matrix::identity(3)) < 1e-14);
    const auto x = linalg::solve(a, {1.0, 2.0, 3.0});
    const auto back = linalg::multiply(a, x);
    CHECK(back[0] == doctest::Approx(1.0));
    CHECK(back[2] == doctest::Approx(3.0));
    linalg::Matrix s(2, 2, 1.0);
    CHECK_THROWS_AS(linalg::inverse(s), Error);
    CHECK_THROWS_AS(linalg::solve(s, {1.0, 1.0}), Error);
}

TEST_CASE("spec validation") {
    SyntheticSpec s;
    s.n_ob = 10;
    s.n_treated = 3;
    s.var_t = s.var_c = 1.0;
    CHECK_THROWS_AS(s.validate(), Error);
    s.n_treated = 10;
    CHECK_THROWS_AS(s.validate(), Error);
    s.n_treated = 4;
    CHECK_NOTHROW(s.validate());
    s.covariates = -1;
    CHECK_THROWS_AS(s.validate(), Error);
}

TEST_CASE("exact dataset hits cell moments") {
    SyntheticSpec unit;
    unit.n_ob = 20;
    unit.n_treated = 10;
    unit.var_t = unit.var_c = 1.0;
    unit.seed = 4;
    const auto d0 = build_exact_dataset(unit);
    for (double w : {0.0, 1.0}) {
        for (auto p : {Provenance::Observed, Provenance::Counterfactual}) {
            const auto m = cell(d0, w, p);
            CHECK(std::fabs(m.mean) < 1e-15);
            CHECK(m.var == doctest::Approx(1.0).epsilon(1e-14));
        }
    }

    SyntheticSpec hr;
    hr.n_ob = 200;
    hr.n_treated = 10;
    hr.y_t_ob = 36.77;
    hr.y_c_ob = 45.78;
    hr.y_t_un = 45.78;
    hr.y_c_un = 45.2;
    hr.var_t = 143.26;
    hr.var_c = 138.83;
    hr.seed = 9;
    CHECK(hr.pi() == doctest::Approx(0.05));
    const auto d = build_exact_dataset(hr);
    CHECK(d.rows() == 400);
    const auto tob = cell(d, 1.0, Provenance::Observed);
    const auto tun = cell(d, 1.0, Provenance::Counterfactual);
    const auto cob = cell(d, 0.0, Provenance::Observed);
    const auto cun = cell(d, 0.0, Provenance::Counterfactual);
    CHECK(tob.count == 10);
    CHECK(tun.count == 190);
    CHECK(cob.count == 190);
    CHECK(cun.count == 10);
    CHECK(std::fabs(tob.mean - 36.77) < 1e-12);
    CHECK(std::fabs(tun.mean - 45.78) < 1e-12);
    CHECK(std::fabs(cob.mean - 45.78) < 1e-12);
    CHECK(std::fabs(cun.mean - 45.2) < 1e-12);
    CHECK(std::fabs(tob.var - 143.26) < 1e-10);
    CHECK(std::fabs(tun.var - 143.26) < 1e-10);
    CHECK(std::fabs(cob.var - 138.83) < 1e-10);
    CHECK(std::fabs(cun.var - 138.83) < 1e-10);
}

TEST_CASE("mirrored covariates balance the arms") {
    std::mt19937_64 rng(21);
    const auto spec = random_spec(rng, 3);
    const auto d = build_exact_dataset(spec);
    for (std::size_t j = 0; j < 3; ++j) {
        double m1 = 0.0, m0 = 0.0;
        for (std::size_t i = 0; i < d.rows(); ++i) (d.w[i] == 1.0 ? m1 : m0) += d.z(i, j);
        CHECK(std::fabs(m1 - m0) <= 1e-12 * (1.0 + std::fabs(m1)));
    }
}

TEST_CASE("two-group fit recovers the ideal mean difference") {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 20; ++i) {
        const auto spec = random_spec(rng, 0);
        const auto d = build_exact_dataset(spec);
        const auto fit = ols_fit(d);
        const auto m = ideal_means(spec.belief(), spec.observed_stats(0.0));
        CHECK(fit.coefficients.back() == doctest::Approx(m.y_t_id - m.y_c_id).epsilon(1e-10));
        CHECK(standardized_w_coefficient(fit, d) ==
              doctest::Approx(ideal_correlation(spec.belief(), spec.observed_stats(0.0))).epsilon(1e-10));
        CHECK(block_inverse_check(d).max_rel_error <= 1e-12);
        CHECK(bayes_combination_check(d).max_rel_error <= 1e-10);
    }
}

TEST_CASE("closed forms agree with brute force on seeded datasets") {
    std::mt19937_64 rng(20050101);
    for (int k = 0; k < 140; ++k) {
        const auto spec = random_spec(rng, k % 7);
        CAPTURE(k);
        const auto d = build_exact_dataset(spec);
        const auto fit = ols_fit(d);
        const double closed = ideal_correlation(spec.belief(), spec.observed_stats(0.2));
        CHECK(rel(standardized_w_coefficient(fit, d), closed) <= 1e-10);
        CHECK(rel(partial_covariance_coefficient(d), fit.coefficients.back()) <= 1e-10);
        CHECK(block_inverse_check(d).max_abs_error <= 1e-9);
        CHECK(bayes_combination_check(d).max_abs_error <= 1e-9);
        CHECK(coefficient_variance_check(d, 3.0) <= 1e-10);
        CHECK(fit.normal_equation_residual <= 1e-9);
    }
}

TEST_CASE("duplicated covariate is singular") {
    SyntheticSpec s;
    s.n_ob = 32;
    s.n_treated = 8;
    s.y_t_ob = 1.0;
    s.y_c_ob = 2.0;
    s.y_t_un = 3.0;
    s.y_c_un = 4.0;
    s.var_t = s.var_c = 1.0;
    s.covariates = 3;
    s.seed = 1;
    auto d = build_exact_dataset(s);
    CHECK(block_inverse_check(d).max_abs_error <= 1e-9);
    for (std::size_t i = 0; i < d.rows(); ++i) d.z(i, 2) = d.z(i, 0);
    for (auto f : {+[](const IdealDataset& x) { (void)ols_fit(x); },
                   +[](const IdealDataset& x) { (void)block_inverse_check(x); }}) {
        try {
            f(d);
            FAIL("expected SingularDesign");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::SingularDesign);
        }
    }
}

TEST_CASE("bayes combination needs both halves") {
    std::mt19937_64 rng(2);
    auto d = build_exact_dataset(random_spec(rng, 1));
    for (auto& p : d.provenance) p = Provenance::Observed;
    CHECK_THROWS_AS(bayes_combination_check(d), Error);
}

TEST_CASE("monte carlo: null size, seed stability, thread independence") {
    SyntheticSpec null_spec;
    null_spec.n_ob = 1000;
    null_spec.n_treated = 100;
    null_spec.y_t_ob = null_spec.y_c_ob = null_spec.y_t_un = null_spec.y_c_un = 40.0;
    null_spec.var_t = null_spec.var_c = 140.0;
    const auto stats = null_spec.observed_stats(0.0);
    MonteCarloOptions mc;
    mc.reps = 4000;
    mc.seed = 77;
    mc.threads = 1;
    const auto a = monte_carlo_piv(null_spec, stats, EstimateSign::Negative, statistical_threshold(1.96), mc);
    const double p0 = std_normal_cdf(-1.96);
    const double sd = std::sqrt(p0 * (1 - p0) / 4000.0);
    CHECK(std::fabs(a.rate - p0) <= 3.0 * sd);
    CHECK(a.reps == 4000);

    mc.threads = 3;
    const auto b = monte_carlo_piv(null_spec, stats, EstimateSign::Negative, statistical_threshold(1.96), mc);
    CHECK(b.rejections == a.rejections);

    mc.seed = 78;
    const auto c = monte_carlo_piv(null_spec, stats, EstimateSign::Negative, statistical_threshold(1.96), mc);
    CHECK(std::fabs(c.rate - a.rate) <= 4.0 * std::sqrt(2.0) * sd);

    mc.reps = 999;
    CHECK_THROWS_AS(monte_carlo_piv(null_spec, stats, EstimateSign::Negative, statistical_threshold(1.96), mc),
                    Error);
    mc.reps = 1000;
    const ObservedStats wrong(0.0, 999, 40, 40, 140, 140, 0.1);
    CHECK_THROWS_AS(monte_carlo_piv(null_spec, wrong, EstimateSign::Negative, statistical_threshold(1.96), mc),
                    Error);
}

TEST_CASE("monte carlo tracks the closed form under an effect") {
    SyntheticSpec s;
    s.n_ob = 600;
    s.n_treated = 60;
    s.y_t_ob = 36.77;
    s.y_c_ob = 45.78;
    s.y_t_un = 44.0;
    s.y_c_un = 45.2;
    s.var_t = 143.26;
    s.var_c = 138.83;
    const double r = ideal_correlation(s.belief(), s.observed_stats(0.0));
    const auto stats = s.observed_stats(r * r);
    const double expected = piv::piv(s.belief(), stats, EstimateSign::Negative, statistical_threshold(1.96)).piv;
    MonteCarloOptions mc;
    mc.reps = 4000;
    mc.seed = 5;
    const auto res = monte_carlo_piv(s, stats, EstimateSign::Negative, statistical_threshold(1.96), mc);
    const double sd = std::sqrt(expected * (1 - expected) / 4000.0);
    CHECK(std::fabs(res.rate - expected) <= 3.0 * sd + 0.02);

    const double b = -0.05;
    const double expected_fixed = piv::piv(s.belief(), stats, EstimateSign::Negative, fixed_threshold(b)).piv;
    const auto fixed = monte_carlo_piv(s, stats, EstimateSign::Negative, fixed_threshold(b), mc);
    CHECK(std::fabs(fixed.rate - expected_fixed) <=
          3.0 * std::sqrt(expected_fixed * (1 - expected_fixed) / 4000.0) + 0.02);
}
