#include "commands.hpp"

#include "piv/bounds.hpp"
#include "piv/config.hpp"
#include "piv/core.hpp"
#include "piv/error.hpp"
#include "piv/json_writer.hpp"
#include "piv/normal.hpp"
#include "piv/oracle.hpp"
#include "piv/replication.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <random>

namespace piv::cli {

namespace {

using nlohmann::json;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fx(double v) { return format_fixed(v, 6); }

// Runs a command body and turns failures into exit statuses.
int guarded(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kIoError;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.kind() == ErrorKind::DegenerateSpread ? kDegenerate : kConfigError;
    }
}

enum class Format { Text, Json, Csv };

Format output_format(const Options& opts, Format fallback, bool allow_csv) {
    if (!opts.format) {
        return fallback;
    }
    if (*opts.format == "json") {
        return Format::Json;
    }
    if (*opts.format == "text" && !allow_csv) {
        return Format::Text;
    }
    if (*opts.format == "csv" && allow_csv) {
        return Format::Csv;
    }
    throw Error(ErrorKind::InvalidArgument, "unsupported --format '" + *opts.format + "'");
}

const NamedBelief& pick_belief(const AnalysisConfig& cfg, const Options& opts, bool want_point) {
    const NamedBelief* chosen = nullptr;
    if (!opts.belief.empty()) {
        chosen = &cfg.belief(opts.belief);
    } else if (cfg.beliefs.size() == 1) {
        chosen = &cfg.beliefs.front();
    } else {
        throw Error(ErrorKind::InvalidArgument, "--belief is required when the config has "
                                                "several beliefs");
    }
    if (chosen->is_point() != want_point) {
        throw Error(ErrorKind::InvalidArgument, "belief '" + chosen->name + "' must be a " +
                                                    (want_point ? "point" : "region"));
    }
    return *chosen;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    f << content;
    f.flush();
    if (!f) {
        throw IoError("failed writing '" + path + "'");
    }
}

json belief_json(const CounterfactualBelief& b) {
    return {{"y_t_un", b.y_t_un}, {"y_c_un", b.y_c_un}};
}

json nullable(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// Loads the config; with --dump-config prints it canonically and stops.
std::optional<AnalysisConfig> load(const Options& opts, std::ostream& out) {
    if (!std::ifstream(opts.config_path)) {
        throw IoError("cannot read config '" + opts.config_path + "'");
    }
    AnalysisConfig cfg = load_config(opts.config_path);
    if (opts.dump_config) {
        out << dump_json(to_json(cfg)) << "\n";
        return std::nullopt;
    }
    return cfg;
}

} // namespace

int compute(const Options& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto cfg = load(opts, out);
        if (!cfg) {
            return int{kOk};
        }
        const Format fmt = output_format(opts, Format::Text, false);
        const NamedBelief& nb = pick_belief(*cfg, opts, true);
        const auto& b = std::get<CounterfactualBelief>(nb.belief);
        const PivResult r = piv(b, cfg->observed, cfg->sign, cfg->threshold);
        const IdealStats id = ideal_stats(b, cfg->observed);
        if (fmt == Format::Json) {
            json doc = {{"belief", nb.name},
                        {"point", belief_json(b)},
                        {"piv", r.piv},
                        {"probit_piv", r.probit_piv},
                        {"t_ratio", r.t_ratio},
                        {"threshold_value", r.threshold_value},
                        {"r_wy_id", id.r_wy_id},
                        {"sigma_y_id", id.sigma_y_id},
                        {"y_t_id", id.y_t_id},
                        {"y_c_id", id.y_c_id},
                        {"se", se_ideal(cfg->observed)}};
            out << dump_json(doc) << "\n";
        } else {
            out << "belief     " << nb.name << " (" << fx(b.y_t_un) << ", " << fx(b.y_c_un) << ")\n"
                << "piv        " << fx(r.piv) << "\n"
                << "probit     " << fx(r.probit_piv) << "\n"
                << "t_ratio    " << fx(r.t_ratio) << "\n"
                << "threshold  " << fx(r.threshold_value) << "\n"
                << "r_wy_id    " << fx(id.r_wy_id) << "\n";
        }
        return int{kOk};
    });
}

int bound(const Options& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto cfg = load(opts, out);
        if (!cfg) {
            return int{kOk};
        }
        const Format fmt = output_format(opts, Format::Text, false);
        const NamedBelief& nb = pick_belief(*cfg, opts, false);
        const auto& region = std::get<BeliefRegion>(nb.belief);
        const BoundResult br = bound_piv(region, cfg->observed, cfg->sign, cfg->threshold);
        const Verdict v = robustness_verdict(br, cfg->piv_threshold);
        if (fmt == Format::Json) {
            json clamped = json::object();
            json asym = json::object();
            for (std::size_t s = 0; s < 4; ++s) {
                clamped[to_string(static_cast<Side>(s))] = br.clamped[s];
                asym[to_string(static_cast<Side>(s))] = nullable(br.asymptotic[s]);
            }
            json doc = {{"belief", nb.name},
                        {"piv_min", br.piv_min},
                        {"argmin", belief_json(br.argmin)},
                        {"piv_max", br.piv_max},
                        {"argmax", belief_json(br.argmax)},
                        {"clamped", clamped},
                        {"asymptotic_piv", asym},
                        {"searched", {{"y_t_un", {br.t_searched.lo, br.t_searched.hi}},
                                      {"y_c_un", {br.c_searched.lo, br.c_searched.hi}}}},
                        {"piv_threshold", cfg->piv_threshold},
                        {"verdict", to_string(v)}};
            out << dump_json(doc) << "\n";
        } else {
            out << "belief     " << nb.name << "\n"
                << "piv_min    " << fx(br.piv_min) << " at (" << fx(br.argmin.y_t_un) << ", "
                << fx(br.argmin.y_c_un) << ")\n"
                << "piv_max    " << fx(br.piv_max) << " at (" << fx(br.argmax.y_t_un) << ", "
                << fx(br.argmax.y_c_un) << ")\n";
            for (std::size_t s = 0; s < 4; ++s) {
                if (br.clamped[s]) {
                    out << "clamped    " << to_string(static_cast<Side>(s)) << " (limiting PIV "
                        << fx(*br.asymptotic[s]) << ")\n";
                }
            }
            out << "verdict    " << to_string(v) << " at threshold " << fx(cfg->piv_threshold)
                << "\n";
        }
        return int{kOk};
    });
}

int contour(const Options& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto cfg = load(opts, out);
        if (!cfg) {
            return int{kOk};
        }
        const Format fmt = output_format(opts, Format::Csv, true);
        if (!opts.out) {
            throw Error(ErrorKind::InvalidArgument, "contour needs --out PATH");
        }
        const NamedBelief& nb = pick_belief(*cfg, opts, false);
        const GridSize size = opts.grid ? parse_grid_size(*opts.grid)
                                        : cfg->grid.value_or(GridSize{200, 200});
        GridOptions go;
        go.nt = size.nt;
        go.nc = size.nc;
        go.threads = 0;
        const ContourGrid grid = evaluate_grid(std::get<BeliefRegion>(nb.belief), cfg->observed,
                                               cfg->sign, cfg->threshold, go);
        write_file(*opts.out, fmt == Format::Json ? contour_to_json(grid) : contour_to_csv(grid));
        const auto [lo, hi] = std::minmax_element(grid.piv.begin(), grid.piv.end());
        out << "wrote " << *opts.out << ": " << grid.t_values.size() << "x" << grid.c_values.size()
            << " grid, min " << fx(*lo) << ", max " << fx(*hi) << "\n";
        return int{kOk};
    });
}

int power(const Options& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto cfg = load(opts, out);
        if (!cfg) {
            return int{kOk};
        }
        const Format fmt = output_format(opts, Format::Text, false);
        const auto* stat = std::get_if<StatisticalThreshold>(&cfg->threshold);
        if (stat == nullptr) {
            throw Error(ErrorKind::InvalidArgument, "power needs a statistical threshold");
        }
        const NamedBelief& nb = pick_belief(*cfg, opts, true);
        const auto& b = std::get<CounterfactualBelief>(nb.belief);
        const ObservedStats& s = cfg->observed;
        const double effect = ideal_correlation(b, s);
        const double se = se_ideal(s);
        const double c = signed_critical(stat->critical_magnitude, cfg->sign);
        const double pw = power_of_ideal_test(effect, s, cfg->sign, stat->critical_magnitude);
        const double pv = piv(b, s, cfg->sign, cfg->threshold).piv;
        if (fmt == Format::Json) {
            json doc = {{"belief", nb.name},
                        {"point", belief_json(b)},
                        {"null_mean", 0.0},
                        {"alternative_mean", effect},
                        {"se", se},
                        {"critical_value", c},
                        {"critical_boundary", c * se},
                        {"power", pw},
                        {"piv", pv}};
            out << dump_json(doc) << "\n";
        } else {
            out << "effect,power\n" << fx(effect) << "," << fx(pw) << "\n\n"
                << "null       N(0, " << fx(se) << "^2)\n"
                << "alternative N(" << fx(effect) << ", " << fx(se) << "^2)\n"
                << "boundary   " << fx(c * se) << " (C = " << fx(c) << ")\n"
                << "power      " << fx(pw) << "\n"
                << "piv        " << fx(pv) << "\n";
        }
        return int{kOk};
    });
}

int replicate(const Options& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Format fmt = output_format(opts, Format::Csv, true);
        const GridSize size = opts.grid ? parse_grid_size(*opts.grid) : GridSize{200, 200};
        const replication::Report rep = replication::run(size.nt, size.nc);
        out << replication::render_text(rep);
        const std::string path = opts.out.value_or(fmt == Format::Json ? "plausible_region.json"
                                                                        : "plausible_region.csv");
        write_file(path, fmt == Format::Json ? contour_to_json(rep.plausible_grid)
                                             : contour_to_csv(rep.plausible_grid));
        out << "\nwrote plausible-region grid (" << rep.plausible_grid.t_values.size() << "x"
            << rep.plausible_grid.c_values.size() << ") to " << path << "\n";
        return int{kOk};
    });
}

int verify(const Options& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (opts.seeds < 1) {
            throw Error(ErrorKind::InvalidArgument, "--seeds must be at least 1");
        }
        using namespace piv::oracle;
        std::mt19937_64 rng(opts.seed);
        std::uniform_int_distribution<int> half_n(4, 256);
        std::uniform_real_distribution<double> mean(20.0, 60.0);
        std::uniform_real_distribution<double> var(1.0, 200.0);

        double worst_theorem = 0.0;
        double worst_partial = 0.0;
        double worst_block = 0.0;
        double worst_bayes = 0.0;
        double worst_variance = 0.0;
        double worst_residual = 0.0;
        for (int k = 0; k < opts.seeds; ++k) {
            SyntheticSpec spec;
            spec.n_ob = 2 * half_n(rng);
            std::uniform_int_distribution<std::int64_t> treated_half(1, spec.n_ob / 2 - 1);
            spec.n_treated = 2 * treated_half(rng);
            spec.y_t_ob = mean(rng);
            spec.y_c_ob = mean(rng);
            spec.y_t_un = mean(rng);
            spec.y_c_un = mean(rng);
            spec.var_t = var(rng);
            spec.var_c = var(rng);
            spec.covariates = k % 7;
            spec.seed = rng();
            const IdealDataset data = build_exact_dataset(spec);
            const OlsFit fit = ols_fit(data);
            const double closed = ideal_correlation(spec.belief(), spec.observed_stats(0.0));
            const double brute = standardized_w_coefficient(fit, data);
            const auto rel = [](double a, double b) {
                return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-300});
            };
            worst_theorem = std::max(worst_theorem, rel(brute, closed));
            worst_partial = std::max(worst_partial,
                                     rel(partial_covariance_coefficient(data), fit.coefficients.back()));
            worst_block = std::max(worst_block, block_inverse_check(data).max_rel_error);
            worst_bayes = std::max(worst_bayes, bayes_combination_check(data).max_rel_error);
            worst_variance = std::max(worst_variance, coefficient_variance_check(data, 2.5));
            worst_residual = std::max(worst_residual, fit.normal_equation_residual);
        }

        bool ok = true;
        const auto line = [&](const char* name, double value, double tol) {
            const bool pass = value <= tol;
            ok = ok && pass;
            out << (pass ? "PASS " : "FAIL ") << std::left << std::setw(40) << name << " max "
                << std::scientific << std::setprecision(3) << value << " (tol " << tol << ")\n"
                << std::defaultfloat;
        };
        out << opts.seeds << " exact-moment ideal samples\n";
        line("standardized OLS vs closed-form r_wy_id", worst_theorem, 1e-10);
        line("partial-covariance ratio vs direct solve", worst_partial, 1e-10);
        line("block inverse of X'X", worst_block, 1e-9);
        line("prior+likelihood combination", worst_bayes, 1e-9);
        line("coefficient variance closed form", worst_variance, 1e-10);
        line("normal-equation residual", worst_residual, 1e-9);

        // Size of the retest when the ideal sample carries no effect.
        SyntheticSpec null_spec;
        null_spec.n_ob = 1000;
        null_spec.n_treated = 100;
        null_spec.y_t_ob = null_spec.y_c_ob = null_spec.y_t_un = null_spec.y_c_un = 40.0;
        null_spec.var_t = 140.0;
        null_spec.var_c = 140.0;
        MonteCarloOptions mc;
        mc.reps = opts.reps;
        mc.seed = opts.seed;
        const double expected = std_normal_cdf(-1.96);
        const MonteCarloResult size =
            monte_carlo_piv(null_spec, null_spec.observed_stats(0.0), EstimateSign::Negative,
                            statistical_threshold(1.96), mc);
        const double tol = 3.0 * std::sqrt(expected * (1.0 - expected) / static_cast<double>(mc.reps));
        line("Monte Carlo size |rate - 0.025|", std::fabs(size.rate - expected), tol);

        // A duplicated covariate must be rejected as singular.
        SyntheticSpec dup;
        dup.n_ob = 64;
        dup.n_treated = 8;
        dup.y_t_ob = 30.0;
        dup.y_c_ob = 40.0;
        dup.y_t_un = 35.0;
        dup.y_c_un = 38.0;
        dup.var_t = dup.var_c = 10.0;
        dup.covariates = 2;
        dup.seed = opts.seed;
        IdealDataset bad = build_exact_dataset(dup);
        for (std::size_t i = 0; i < bad.rows(); ++i) {
            bad.z(i, 1) = bad.z(i, 0);
        }
        bool singular = false;
        try {
            (void)ols_fit(bad);
        } catch (const Error& e) {
            singular = e.kind() == ErrorKind::SingularDesign;
        }
        ok = ok && singular;
        out << (singular ? "PASS " : "FAIL ")
            << "duplicated covariate rejected as SingularDesign (expected failure case)\n";

        out << (ok ? "all oracle checks passed\n" : "oracle checks FAILED\n");
        return ok ? int{kOk} : int{kVerifyFailed};
    });
}

} // namespace piv::cli
