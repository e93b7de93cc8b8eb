#include "piv/oracle.hpp"

#include "piv/error.hpp"
#include "piv/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace piv::oracle {

using linalg::Matrix;

namespace {

double mean_of(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) {
        s += v;
    }
    return s / static_cast<double>(x.size());
}

double cov_of(std::span<const double> x, std::span<const double> y) {
    const double mx = mean_of(x);
    const double my = mean_of(y);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += (x[i] - mx) * (y[i] - my);
    }
    return s / static_cast<double>(x.size());
}

std::vector<double> column(const Matrix& m, std::size_t j) {
    std::vector<double> c(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        c[i] = m(i, j);
    }
    return c;
}

// Sample moments of the ideal sample: S_ZZ, S_ZW, S_ZY, var(W), cov(W, Y),
// and the covariate means.
struct Moments {
    Matrix s_zz;
    std::vector<double> s_zw;
    std::vector<double> s_zy;
    std::vector<double> z_mean;
    double w_mean = 0.0;
    double s_ww = 0.0;
    double s_wy = 0.0;
    double s_yy = 0.0;
};

Moments moments_of(const IdealDataset& d) {
    const std::size_t p = d.covariates();
    Moments m;
    m.s_zz = Matrix(p, p);
    std::vector<std::vector<double>> cols(p);
    for (std::size_t j = 0; j < p; ++j) {
        cols[j] = column(d.z, j);
        m.z_mean.push_back(mean_of(cols[j]));
        m.s_zw.push_back(cov_of(cols[j], d.w));
        m.s_zy.push_back(cov_of(cols[j], d.outcome));
    }
    for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = 0; b < p; ++b) {
            m.s_zz(a, b) = cov_of(cols[a], cols[b]);
        }
    }
    m.w_mean = mean_of(d.w);
    m.s_ww = cov_of(d.w, d.w);
    m.s_wy = cov_of(d.w, d.outcome);
    m.s_yy = cov_of(d.outcome, d.outcome);
    return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

// S_ZZ^-1 S_ZW, empty without covariates.
std::vector<double> zz_solve(const Moments& m, const std::vector<double>& rhs) {
    if (rhs.empty()) {
        return {};
    }
    return linalg::solve(m.s_zz, rhs);
}

// var(W) - S_WZ S_ZZ^-1 S_ZW.
double partial_w_variance(const Moments& m) {
    const double schur = m.s_ww - dot(m.s_zw, zz_solve(m, m.s_zw));
    if (!(schur > linalg::kPivotTolerance * m.s_ww)) {
        throw Error(ErrorKind::SingularDesign, "treatment is collinear with the covariates");
    }
    return schur;
}

struct CrossProducts {
    Matrix xtx;
    std::vector<double> xty;
};

CrossProducts cross_products(const Matrix& x, std::span<const double> y) {
    const Matrix xt = linalg::transpose(x);
    return {linalg::multiply(xt, x), linalg::multiply(xt, y)};
}

} // namespace

void SyntheticSpec::validate() const {
    const auto fail = [](const std::string& msg) {
        throw Error(ErrorKind::InvalidArgument, "synthetic spec: " + msg);
    };
    const std::int64_t n_control = n_ob - n_treated;
    if (n_treated <= 0 || n_control <= 0 || n_treated % 2 != 0 || n_control % 2 != 0) {
        std::ostringstream os;
        os << "treated (" << n_treated << ") and control (" << n_control
           << ") counts must be positive and even";
        fail(os.str());
    }
    for (double v : {y_t_ob, y_c_ob, y_t_un, y_c_un}) {
        if (!std::isfinite(v)) {
            fail("group means must be finite");
        }
    }
    if (!(var_t >= 0.0 && var_c >= 0.0 && std::isfinite(var_t) && std::isfinite(var_c))) {
        fail("group variances must be finite and non-negative");
    }
    if (covariates < 0 || covariates > 14) {
        fail("covariate count must lie in [0, 14]");
    }
}

ObservedStats SyntheticSpec::observed_stats(double r_squared) const {
    validate();
    return ObservedStats(r_squared, n_ob, y_t_ob, y_c_ob, var_t, var_c, pi());
}

IdealDataset build_exact_dataset(const SyntheticSpec& spec) {
    spec.validate();
    const auto n = static_cast<std::size_t>(spec.n_ob);
    const auto n_treated = static_cast<std::size_t>(spec.n_treated);
    const auto p = static_cast<std::size_t>(spec.covariates);

    IdealDataset d;
    d.outcome.resize(2 * n);
    d.w.resize(2 * n);
    d.provenance.resize(2 * n);
    d.z = Matrix(2 * n, p);

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            const double v = normal(rng);
            d.z(i, j) = v;
            d.z(n + i, j) = v;
        }
    }

    const double sd_t = std::sqrt(spec.var_t);
    const double sd_c = std::sqrt(spec.var_c);
    // Alternating +sd / -sd within a cell keeps its mean and 1/n variance exact.
    std::size_t cell_count[2][2] = {{0, 0}, {0, 0}}; // [provenance][w]
    const auto place = [&](std::size_t row, bool treated_arm, Provenance prov, double mean) {
        const double sd = treated_arm ? sd_t : sd_c;
        std::size_t& k = cell_count[static_cast<int>(prov)][treated_arm ? 1 : 0];
        d.outcome[row] = (k % 2 == 0) ? mean + sd : mean - sd;
        ++k;
        d.w[row] = treated_arm ? 1.0 : 0.0;
        d.provenance[row] = prov;
    };
    for (std::size_t i = 0; i < n; ++i) {
        const bool treated = i < n_treated;
        place(i, treated, Provenance::Observed, treated ? spec.y_t_ob : spec.y_c_ob);
        place(n + i, !treated, Provenance::Counterfactual, treated ? spec.y_c_un : spec.y_t_un);
    }

    // Each subject sits once in each arm.
    if (mean_of(d.w) != 0.5 || cov_of(d.w, d.w) != 0.25) {
        throw std::logic_error("ideal sample arms are not balanced");
    }
    return d;
}

Matrix design_matrix(const IdealDataset& data) {
    const std::size_t p = data.covariates();
    Matrix x(data.rows(), p + 2);
    for (std::size_t i = 0; i < data.rows(); ++i) {
        x(i, 0) = 1.0;
        for (std::size_t j = 0; j < p; ++j) {
            x(i, j + 1) = data.z(i, j);
        }
        x(i, p + 1) = data.w[i];
    }
    return x;
}

OlsFit ols_fit(const IdealDataset& data) {
    const Matrix x = design_matrix(data);
    const auto [xtx, xty] = cross_products(x, data.outcome);

    OlsFit fit;
    fit.coefficients = linalg::solve(xtx, xty);
    fit.xtx_inverse = linalg::inverse(xtx);

    const std::vector<double> lhs = linalg::multiply(xtx, fit.coefficients);
    double worst = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < lhs.size(); ++i) {
        worst = std::max(worst, std::fabs(lhs[i] - xty[i]));
        scale = std::max(scale, std::fabs(xty[i]));
    }
    fit.normal_equation_residual = scale > 0.0 ? worst / scale : worst;

    const std::vector<double> fitted = linalg::multiply(x, fit.coefficients);
    double rss = 0.0;
    for (std::size_t i = 0; i < fitted.size(); ++i) {
        const double e = data.outcome[i] - fitted[i];
        rss += e * e;
    }
    const auto dof = static_cast<double>(data.rows() - x.cols());
    const std::size_t w = x.cols() - 1;
    fit.coefficient_variance_w = (rss / dof) * fit.xtx_inverse(w, w);
    return fit;
}

double partial_covariance_coefficient(const IdealDataset& data) {
    const Moments m = moments_of(data);
    const std::vector<double> a = zz_solve(m, m.s_zw);
    return (m.s_wy - dot(a, m.s_zy)) / partial_w_variance(m);
}

double standardized_w_coefficient(const OlsFit& fit, const IdealDataset& data) {
    return fit.coefficients.back() * std::sqrt(cov_of(data.w, data.w)) /
           std::sqrt(cov_of(data.outcome, data.outcome));
}

MatrixCheck block_inverse_check(const IdealDataset& data) {
    const std::size_t p = data.covariates();
    const auto total = static_cast<double>(data.rows());
    const Moments m = moments_of(data);

    // Inverse covariance of V = [Z, W] via the Schur complement of S_ZZ.
    const double schur = partial_w_variance(m);
    const Matrix zz_inv = p > 0 ? linalg::inverse(m.s_zz) : Matrix();
    const std::vector<double> a = zz_solve(m, m.s_zw);
    Matrix vv_inv(p + 1, p + 1);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            vv_inv(i, j) = zz_inv(i, j) + a[i] * a[j] / schur;
        }
        vv_inv(i, p) = -a[i] / schur;
        vv_inv(p, i) = -a[i] / schur;
    }
    vv_inv(p, p) = 1.0 / schur;

    std::vector<double> v_mean = m.z_mean;
    v_mean.push_back(m.w_mean);
    const std::vector<double> m_v = linalg::multiply(vv_inv, v_mean); // symmetric

    Matrix blocks(p + 2, p + 2);
    blocks(0, 0) = 1.0 / total + dot(v_mean, m_v) / total;
    for (std::size_t i = 0; i <= p; ++i) {
        blocks(0, i + 1) = -m_v[i] / total;
        blocks(i + 1, 0) = -m_v[i] / total;
        for (std::size_t j = 0; j <= p; ++j) {
            blocks(i + 1, j + 1) = vv_inv(i, j) / total;
        }
    }

    const Matrix x = design_matrix(data);
    const Matrix direct = linalg::inverse(cross_products(x, data.outcome).xtx);
    MatrixCheck check;
    check.max_abs_error = linalg::max_abs_diff(blocks, direct);
    check.max_rel_error = check.max_abs_error / linalg::max_abs(direct);
    return check;
}

MatrixCheck bayes_combination_check(const IdealDataset& data) {
    const std::size_t cols = data.covariates() + 2;
    const Matrix x = design_matrix(data);
    std::vector<std::size_t> rows[2];
    for (std::size_t i = 0; i < data.rows(); ++i) {
        rows[static_cast<int>(data.provenance[i])].push_back(i);
    }
    if (rows[0].empty() || rows[1].empty()) {
        throw Error(ErrorKind::InvalidArgument,
                    "combination check needs both observed and counterfactual rows");
    }

    Matrix precision(cols, cols);
    std::vector<double> score(cols, 0.0);
    for (const auto& half : rows) {
        Matrix xh(half.size(), cols);
        std::vector<double> yh(half.size());
        for (std::size_t k = 0; k < half.size(); ++k) {
            for (std::size_t j = 0; j < cols; ++j) {
                xh(k, j) = x(half[k], j);
            }
            yh[k] = data.outcome[half[k]];
        }
        const auto cp = cross_products(xh, yh);
        precision = linalg::add(precision, cp.xtx);
        for (std::size_t j = 0; j < cols; ++j) {
            score[j] += cp.xty[j];
        }
    }
    const std::vector<double> theta = linalg::solve(precision, score);

    const auto stacked = cross_products(x, data.outcome);
    const OlsFit fit = ols_fit(data);

    MatrixCheck check;
    double coef_scale = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
        check.max_abs_error =
            std::max(check.max_abs_error, std::fabs(theta[j] - fit.coefficients[j]));
        coef_scale = std::max(coef_scale, std::fabs(fit.coefficients[j]));
    }
    check.max_rel_error = coef_scale > 0.0 ? check.max_abs_error / coef_scale : check.max_abs_error;
    // The cross-products of the stacked rows must equal the summed halves.
    const double xtx_gap = linalg::max_abs_diff(precision, stacked.xtx) / linalg::max_abs(stacked.xtx);
    check.max_rel_error = std::max(check.max_rel_error, xtx_gap);
    return check;
}

double coefficient_variance_check(const IdealDataset& data, double sigma2) {
    if (!(sigma2 > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "residual variance must be positive");
    }
    const Matrix x = design_matrix(data);
    const Matrix inv = linalg::inverse(cross_products(x, data.outcome).xtx);
    const std::size_t w = x.cols() - 1;
    const double direct = sigma2 * inv(w, w);
    const double closed =
        sigma2 / (static_cast<double>(data.rows()) * partial_w_variance(moments_of(data)));
    return std::fabs(direct - closed) / std::fabs(closed);
}

MonteCarloResult monte_carlo_piv(const SyntheticSpec& spec, const ObservedStats& stats,
                                 EstimateSign sign, const Threshold& threshold,
                                 const MonteCarloOptions& options) {
    spec.validate();
    if (options.reps < 1000) {
        throw Error(ErrorKind::InvalidArgument, "Monte Carlo needs at least 1000 replications");
    }
    if (stats.n_ob() != spec.n_ob || std::fabs(stats.pi() - spec.pi()) > 1e-12) {
        throw Error(ErrorKind::InvalidArgument,
                    "observed statistics do not describe the synthetic spec");
    }
    const double beta_sharp = resolve_threshold(threshold, sign, stats);
    const bool statistical = std::holds_alternative<StatisticalThreshold>(threshold);
    const double critical =
        statistical ? signed_critical(std::get<StatisticalThreshold>(threshold).critical_magnitude,
                                      sign)
                    : 0.0;

    const auto n = static_cast<std::size_t>(spec.n_ob);
    const auto n_treated = static_cast<std::size_t>(spec.n_treated);
    const std::size_t n_control = n - n_treated;
    const double sd_t = std::sqrt(spec.var_t);
    const double sd_c = std::sqrt(spec.var_c);
    const double two_n = 2.0 * static_cast<double>(n);
    const double shift_t = spec.pi() * spec.y_t_ob + (1.0 - spec.pi()) * spec.y_t_un;
    const double shift_c = (1.0 - spec.pi()) * spec.y_c_ob + spec.pi() * spec.y_c_un;

    const auto replicate = [&](std::int64_t k, std::vector<double>& arm_t,
                               std::vector<double>& arm_c) {
        std::seed_seq seq{static_cast<std::uint32_t>(options.seed),
                          static_cast<std::uint32_t>(options.seed >> 32),
                          static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> normal(0.0, 1.0);
        const auto fill = [&](double* out, std::size_t count, double mean, double sd) {
            for (std::size_t i = 0; i < count; ++i) {
                out[i] = mean + sd * normal(rng);
            }
        };
        fill(arm_t.data(), n_treated, spec.y_t_ob, sd_t);
        fill(arm_t.data() + n_treated, n_control, spec.y_t_un, sd_t);
        fill(arm_c.data(), n_control, spec.y_c_ob, sd_c);
        fill(arm_c.data() + n_control, n_treated, spec.y_c_un, sd_c);

        const auto mt = kernels::moments(arm_t, shift_t);
        const auto mc = kernels::moments(arm_c, shift_c);
        const double dn = static_cast<double>(n);
        const double mean_t = shift_t + mt.sum / dn;
        const double mean_c = shift_c + mc.sum / dn;
        const double var_t = std::max(0.0, mt.sum_sq / dn - (mt.sum / dn) * (mt.sum / dn));
        const double var_c = std::max(0.0, mc.sum_sq / dn - (mc.sum / dn) * (mc.sum / dn));
        const double diff = mean_t - mean_c;
        // Pooled 1/n variance of two equal-sized arms.
        const double var_y = 0.5 * var_t + 0.5 * var_c + 0.25 * diff * diff;
        if (!(var_y > 0.0)) {
            return false;
        }
        // Two-group OLS slope is the mean difference; sd(W) = 1/2.
        const double r = 0.5 * diff / std::sqrt(var_y);
        if (!statistical) {
            return sign == EstimateSign::Positive ? r > beta_sharp : r < beta_sharp;
        }
        const double z = r / std::sqrt((1.0 - r * r) / two_n);
        return sign == EstimateSign::Positive ? z > critical : z < critical;
    };

    unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                            : options.threads;
    threads = static_cast<unsigned>(std::min<std::int64_t>(threads, options.reps));
    std::vector<std::int64_t> counts(threads, 0);
    const auto worker = [&](unsigned id) {
        std::vector<double> arm_t(n);
        std::vector<double> arm_c(n);
        for (std::int64_t k = id; k < options.reps; k += threads) {
            counts[id] += replicate(k, arm_t, arm_c) ? 1 : 0;
        }
    };
    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned id = 0; id < threads; ++id) {
            pool.emplace_back(worker, id);
        }
    }

    MonteCarloResult result;
    result.reps = options.reps;
    for (std::int64_t c : counts) {
        result.rejections += c;
    }
    result.rate = static_cast<double>(result.rejections) / static_cast<double>(result.reps);
    return result;
}

} // namespace piv::oracle
