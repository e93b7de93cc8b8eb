#include "piv/core.hpp"

#include "piv/error.hpp"
#include "piv/normal.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace piv {

namespace {

[[noreturn]] void reject(const char* field, const std::string& rule, double value) {
    std::ostringstream os;
    os << field << " must satisfy " << rule << ", got " << value;
    throw Error(ErrorKind::InvalidArgument, os.str());
}

void require_finite(const char* field, double value) {
    if (!std::isfinite(value)) {
        reject(field, "finite", value);
    }
}

double checked_correlation(const kernels::ProbitParams& p, const CounterfactualBelief& belief) {
    const double r = kernels::correlation_at(p, belief.y_t_un, belief.y_c_un);
    if (std::isnan(r)) {
        throw Error(ErrorKind::DegenerateSpread,
                    "ideal-sample outcome spread is zero; correlation is undefined");
    }
    return r;
}

} // namespace

ObservedStats::ObservedStats(double r_squared, std::int64_t n_ob, double y_t_ob, double y_c_ob,
                             double var_t, double var_c, double pi)
    : r_squared_(r_squared), n_ob_(n_ob), y_t_ob_(y_t_ob), y_c_ob_(y_c_ob), var_t_(var_t),
      var_c_(var_c), pi_(pi) {
    if (!(r_squared >= 0.0 && r_squared < 1.0)) {
        reject("r_squared", "0 <= r_squared < 1", r_squared);
    }
    if (n_ob < 2) {
        reject("n_ob", "n_ob >= 2", static_cast<double>(n_ob));
    }
    require_finite("y_t_ob", y_t_ob);
    require_finite("y_c_ob", y_c_ob);
    if (!(var_t >= 0.0 && std::isfinite(var_t))) {
        reject("var_t", "finite var_t >= 0", var_t);
    }
    if (!(var_c >= 0.0 && std::isfinite(var_c))) {
        reject("var_c", "finite var_c >= 0", var_c);
    }
    if (!(pi > 0.0 && pi < 1.0)) {
        reject("pi", "0 < pi < 1", pi);
    }
}

CounterfactualBelief::CounterfactualBelief(double t, double c) : y_t_un(t), y_c_un(c) {
    require_finite("y_t_un", t);
    require_finite("y_c_un", c);
}

const char* to_string(EstimateSign sign) noexcept {
    return sign == EstimateSign::Positive ? "positive" : "negative";
}

Threshold statistical_threshold(double critical_magnitude) {
    if (!(critical_magnitude > 0.0 && std::isfinite(critical_magnitude))) {
        reject("critical_magnitude", "finite critical_magnitude > 0", critical_magnitude);
    }
    return StatisticalThreshold{critical_magnitude};
}

Threshold fixed_threshold(double beta_sharp) {
    require_finite("beta_sharp", beta_sharp);
    return FixedThreshold{beta_sharp};
}

double signed_critical(double critical_magnitude, EstimateSign sign) noexcept {
    return sign == EstimateSign::Positive ? critical_magnitude : -critical_magnitude;
}

IdealMeans ideal_means(const CounterfactualBelief& belief, const ObservedStats& stats) noexcept {
    const double pi = stats.pi();
    return {(1.0 - pi) * belief.y_t_un + pi * stats.y_t_ob(),
            pi * belief.y_c_un + (1.0 - pi) * stats.y_c_ob()};
}

double ideal_sd(const CounterfactualBelief& belief, const ObservedStats& stats) noexcept {
    const double pi = stats.pi();
    const IdealMeans m = ideal_means(belief, stats);
    const double dt = belief.y_t_un - stats.y_t_ob();
    const double dc = belief.y_c_un - stats.y_c_ob();
    const double diff = m.y_t_id - m.y_c_id;
    return std::sqrt(0.5 * stats.var_t() + 0.5 * pi * (1.0 - pi) * (dt * dt + dc * dc) +
                     0.5 * stats.var_c() + 0.25 * diff * diff);
}

double ideal_correlation(const CounterfactualBelief& belief, const ObservedStats& stats) {
    return checked_correlation(
        make_probit_params(stats, EstimateSign::Positive, StatisticalThreshold{}), belief);
}

IdealStats ideal_stats(const CounterfactualBelief& belief, const ObservedStats& stats) {
    const IdealMeans m = ideal_means(belief, stats);
    return {m.y_t_id, m.y_c_id, ideal_sd(belief, stats), ideal_correlation(belief, stats)};
}

PosteriorNormal posterior(const CounterfactualBelief& belief, const ObservedStats& stats) {
    return {ideal_correlation(belief, stats),
            (1.0 - stats.r_squared()) / (2.0 * static_cast<double>(stats.n_ob()))};
}

double se_ideal(const ObservedStats& stats) noexcept {
    return std::sqrt((1.0 - stats.r_squared()) / (2.0 * static_cast<double>(stats.n_ob())));
}

double probit_prefactor(const ObservedStats& stats) noexcept {
    return std::sqrt(2.0 * static_cast<double>(stats.n_ob())) / std::sqrt(1.0 - stats.r_squared());
}

double resolve_threshold(const Threshold& threshold, EstimateSign sign,
                         const ObservedStats& stats) {
    if (const auto* fixed = std::get_if<FixedThreshold>(&threshold)) {
        const bool wrong_side = sign == EstimateSign::Positive ? fixed->beta_sharp < 0.0
                                                               : fixed->beta_sharp > 0.0;
        if (wrong_side) {
            std::ostringstream os;
            os << "fixed threshold " << fixed->beta_sharp << " lies on the wrong side of zero for a "
               << to_string(sign) << " estimate";
            throw Error(ErrorKind::SignMismatch, os.str());
        }
        return fixed->beta_sharp;
    }
    const auto& stat = std::get<StatisticalThreshold>(threshold);
    return signed_critical(stat.critical_magnitude, sign) * se_ideal(stats);
}

kernels::ProbitParams make_probit_params(const ObservedStats& stats, EstimateSign sign,
                                         const Threshold& threshold) {
    using kernels::ProbitMode;
    kernels::ProbitParams p;
    p.pi = stats.pi();
    p.one_minus_pi = 1.0 - stats.pi();
    p.y_t_ob = stats.y_t_ob();
    p.y_c_ob = stats.y_c_ob();
    p.pi_y_t_ob = p.pi * p.y_t_ob;
    p.one_minus_pi_y_c_ob = p.one_minus_pi * p.y_c_ob;
    p.spread_base = 2.0 * stats.var_t() + 2.0 * stats.var_c();
    p.mix_weight = 2.0 * p.pi * p.one_minus_pi;
    p.prefactor = probit_prefactor(stats);
    if (const auto* stat = std::get_if<StatisticalThreshold>(&threshold)) {
        if (!(stat->critical_magnitude > 0.0)) {
            reject("critical_magnitude", "critical_magnitude > 0", stat->critical_magnitude);
        }
        p.mode = sign == EstimateSign::Positive ? ProbitMode::StatisticalPositive
                                                : ProbitMode::StatisticalNegative;
        p.offset = signed_critical(stat->critical_magnitude, sign);
    } else {
        p.mode = sign == EstimateSign::Positive ? ProbitMode::FixedPositive
                                                : ProbitMode::FixedNegative;
        p.offset = resolve_threshold(threshold, sign, stats);
    }
    return p;
}

double probit_piv(const CounterfactualBelief& belief, const ObservedStats& stats,
                  EstimateSign sign, const Threshold& threshold) {
    const kernels::ProbitParams p = make_probit_params(stats, sign, threshold);
    return kernels::probit_from_correlation(p, checked_correlation(p, belief));
}

PivResult piv(const CounterfactualBelief& belief, const ObservedStats& stats, EstimateSign sign,
              const Threshold& threshold) {
    const kernels::ProbitParams p = make_probit_params(stats, sign, threshold);
    const double r = checked_correlation(p, belief);
    PivResult out;
    out.probit_piv = kernels::probit_from_correlation(p, r);
    out.piv = std_normal_cdf(out.probit_piv);
    out.threshold_value = resolve_threshold(threshold, sign, stats);
    out.t_ratio = p.prefactor * r;
    return out;
}

double piv_from_correlation(double r_wy_id, const ObservedStats& stats, EstimateSign sign,
                            const Threshold& threshold) {
    const kernels::ProbitParams p = make_probit_params(stats, sign, threshold);
    return std_normal_cdf(kernels::probit_from_correlation(p, r_wy_id));
}

double power_of_ideal_test(double effect, const ObservedStats& stats, EstimateSign sign,
                           double critical_magnitude) {
    if (!(critical_magnitude > 0.0)) {
        reject("critical_magnitude", "critical_magnitude > 0", critical_magnitude);
    }
    const double shift = effect / se_ideal(stats);
    const double boundary = signed_critical(critical_magnitude, sign);
    // Rejection region lies above +|C| for a positive estimate, below -|C| otherwise.
    return sign == EstimateSign::Positive ? std_normal_ccdf(boundary - shift)
                                          : std_normal_cdf(boundary - shift);
}

SaturationLimits saturation_limits(const ObservedStats& stats) noexcept {
    const double pi = stats.pi();
    return {std::sqrt((1.0 - pi) / (1.0 + pi)), std::sqrt(pi / (2.0 - pi))};
}

} // namespace piv
