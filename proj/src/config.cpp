#include "piv/config.hpp"

#include "piv/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace piv {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg,
                       ErrorKind kind = ErrorKind::InvalidArgument) {
    throw Error(kind, "config: " + path + ": " + msg);
}

void require_object(const json& j, const std::string& path, std::set<std::string> allowed) {
    if (!j.is_object()) {
        fail(path, "expected an object");
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key())) {
            fail(path, "unknown key '" + it.key() + "'");
        }
    }
}

const json& member(const json& j, const std::string& path, const std::string& key) {
    const auto it = j.find(key);
    if (it == j.end()) {
        fail(path, "missing key '" + key + "'");
    }
    return *it;
}

double number(const json& j, const std::string& path) {
    if (!j.is_number()) {
        fail(path, "expected a number");
    }
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
        fail(path, "expected a finite number");
    }
    return v;
}

std::int64_t integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) {
        fail(path, "expected an integer");
    }
    return j.get<std::int64_t>();
}

std::string text(const json& j, const std::string& path) {
    if (!j.is_string()) {
        fail(path, "expected a string");
    }
    return j.get<std::string>();
}

// Re-raises a domain validation error under a config path.
template <typename F>
auto at_path(const std::string& path, F&& build) {
    try {
        return build();
    } catch (const Error& e) {
        fail(path, e.what(), e.kind());
    }
}

ObservedStats parse_observed(const json& j) {
    const std::string path = "observed";
    require_object(j, path, {"r_squared", "n_ob", "y_t_ob", "y_c_ob", "var_t", "var_c", "pi"});
    const auto num = [&](const char* key) { return number(member(j, path, key), path + "." + key); };
    const double r2 = num("r_squared");
    const std::int64_t n = integer(member(j, path, "n_ob"), path + ".n_ob");
    const double yt = num("y_t_ob");
    const double yc = num("y_c_ob");
    const double vt = num("var_t");
    const double vc = num("var_c");
    const double pi = num("pi");
    try {
        return ObservedStats(r2, n, yt, yc, vt, vc, pi);
    } catch (const Error& e) {
        // Messages lead with the field name; move it into the path.
        const std::string msg = e.what();
        const auto space = msg.find(' ');
        fail(path + "." + msg.substr(0, space), msg.substr(space + 1), e.kind());
    }
}

EstimateSign parse_sign(const json& j) {
    const std::string s = text(j, "sign");
    if (s == "positive") {
        return EstimateSign::Positive;
    }
    if (s == "negative") {
        return EstimateSign::Negative;
    }
    fail("sign", "expected \"positive\" or \"negative\", got \"" + s + "\"");
}

Threshold parse_threshold(const json& j) {
    const std::string path = "threshold";
    if (!j.is_object()) {
        fail(path, "expected an object");
    }
    const std::string kind = text(member(j, path, "kind"), path + ".kind");
    if (kind == "statistical") {
        require_object(j, path, {"kind", "critical"});
        const double c = number(member(j, path, "critical"), path + ".critical");
        return at_path(path + ".critical", [&] { return statistical_threshold(c); });
    }
    if (kind == "fixed") {
        require_object(j, path, {"kind", "beta_sharp"});
        const double b = number(member(j, path, "beta_sharp"), path + ".beta_sharp");
        return at_path(path + ".beta_sharp", [&] { return fixed_threshold(b); });
    }
    fail(path + ".kind", "expected \"statistical\" or \"fixed\", got \"" + kind + "\"");
}

Interval parse_interval(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) {
        fail(path, "expected [lo, hi] with null for an unbounded end");
    }
    Interval iv;
    iv.lo = j[0].is_null() ? -kInfinity : number(j[0], path + "[0]");
    iv.hi = j[1].is_null() ? kInfinity : number(j[1], path + "[1]");
    return iv;
}

NamedBelief parse_belief(const json& j, const std::string& path) {
    if (!j.is_object()) {
        fail(path, "expected an object");
    }
    NamedBelief b;
    b.name = text(member(j, path, "name"), path + ".name");
    if (b.name.empty()) {
        fail(path + ".name", "must not be empty");
    }
    if (j.contains("point")) {
        require_object(j, path, {"name", "point"});
        const std::string pp = path + ".point";
        const json& p = j["point"];
        require_object(p, pp, {"y_t_un", "y_c_un"});
        const double t = number(member(p, pp, "y_t_un"), pp + ".y_t_un");
        const double c = number(member(p, pp, "y_c_un"), pp + ".y_c_un");
        b.belief = CounterfactualBelief(t, c);
    } else if (j.contains("region")) {
        require_object(j, path, {"name", "region"});
        const std::string rp = path + ".region";
        const json& r = j["region"];
        require_object(r, rp, {"y_t_un", "y_c_un"});
        const Interval t = parse_interval(member(r, rp, "y_t_un"), rp + ".y_t_un");
        const Interval c = parse_interval(member(r, rp, "y_c_un"), rp + ".y_c_un");
        b.belief = at_path(rp, [&] { return BeliefRegion(t, c); });
    } else {
        fail(path, "expected a 'point' or a 'region'");
    }
    return b;
}

json interval_json(const Interval& iv) {
    return json::array({std::isinf(iv.lo) ? json(nullptr) : json(iv.lo),
                        std::isinf(iv.hi) ? json(nullptr) : json(iv.hi)});
}

} // namespace

const NamedBelief& AnalysisConfig::belief(const std::string& name) const {
    for (const auto& b : beliefs) {
        if (b.name == name) {
            return b;
        }
    }
    throw Error(ErrorKind::InvalidArgument, "config: no belief named '" + name + "'");
}

AnalysisConfig parse_config(const json& doc) {
    require_object(doc, "<root>",
                   {"observed", "sign", "threshold", "beliefs", "piv_threshold", "grid"});
    AnalysisConfig cfg(parse_observed(member(doc, "<root>", "observed")));
    cfg.sign = parse_sign(member(doc, "<root>", "sign"));
    cfg.threshold = parse_threshold(member(doc, "<root>", "threshold"));
    at_path("threshold", [&] { return resolve_threshold(cfg.threshold, cfg.sign, cfg.observed); });

    const json& beliefs = member(doc, "<root>", "beliefs");
    if (!beliefs.is_array()) {
        fail("beliefs", "expected an array");
    }
    std::set<std::string> names;
    for (std::size_t i = 0; i < beliefs.size(); ++i) {
        NamedBelief b = parse_belief(beliefs[i], "beliefs[" + std::to_string(i) + "]");
        if (!names.insert(b.name).second) {
            fail("beliefs[" + std::to_string(i) + "].name", "duplicate name '" + b.name + "'");
        }
        cfg.beliefs.push_back(std::move(b));
    }

    if (doc.contains("piv_threshold")) {
        cfg.piv_threshold = number(doc["piv_threshold"], "piv_threshold");
        if (!(cfg.piv_threshold > 0.0 && cfg.piv_threshold < 1.0)) {
            fail("piv_threshold", "must lie in (0, 1)");
        }
    }
    if (doc.contains("grid")) {
        const json& g = doc["grid"];
        require_object(g, "grid", {"nt", "nc"});
        const std::int64_t nt = integer(member(g, "grid", "nt"), "grid.nt");
        const std::int64_t nc = integer(member(g, "grid", "nc"), "grid.nc");
        if (nt < 2 || nc < 2) {
            fail("grid", "nt and nc must be at least 2");
        }
        cfg.grid = GridSize{static_cast<std::size_t>(nt), static_cast<std::size_t>(nc)};
    }
    return cfg;
}

AnalysisConfig parse_config_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::InvalidArgument, std::string("config: malformed JSON: ") + e.what());
    }
    return parse_config(doc);
}

AnalysisConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::InvalidArgument, "config: cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

nlohmann::json to_json(const AnalysisConfig& config) {
    json doc;
    const ObservedStats& o = config.observed;
    doc["observed"] = {{"r_squared", o.r_squared()}, {"n_ob", o.n_ob()},   {"y_t_ob", o.y_t_ob()},
                       {"y_c_ob", o.y_c_ob()},       {"var_t", o.var_t()}, {"var_c", o.var_c()},
                       {"pi", o.pi()}};
    doc["sign"] = to_string(config.sign);
    if (const auto* s = std::get_if<StatisticalThreshold>(&config.threshold)) {
        doc["threshold"] = {{"kind", "statistical"}, {"critical", s->critical_magnitude}};
    } else {
        doc["threshold"] = {{"kind", "fixed"},
                            {"beta_sharp", std::get<FixedThreshold>(config.threshold).beta_sharp}};
    }
    json beliefs = json::array();
    for (const auto& b : config.beliefs) {
        json entry = {{"name", b.name}};
        if (const auto* p = std::get_if<CounterfactualBelief>(&b.belief)) {
            entry["point"] = {{"y_t_un", p->y_t_un}, {"y_c_un", p->y_c_un}};
        } else {
            const auto& r = std::get<BeliefRegion>(b.belief);
            entry["region"] = {{"y_t_un", interval_json(r.t())}, {"y_c_un", interval_json(r.c())}};
        }
        beliefs.push_back(std::move(entry));
    }
    doc["beliefs"] = std::move(beliefs);
    doc["piv_threshold"] = config.piv_threshold;
    if (config.grid) {
        doc["grid"] = {{"nt", config.grid->nt}, {"nc", config.grid->nc}};
    }
    return doc;
}

GridSize parse_grid_size(const std::string& spec) {
    const auto x = spec.find('x');
    const auto bad = [&] {
        throw Error(ErrorKind::InvalidArgument, "grid must look like NTxNC, got '" + spec + "'");
    };
    if (x == std::string::npos) {
        bad();
    }
    GridSize g;
    const char* b = spec.data();
    const char* e = spec.data() + spec.size();
    auto r1 = std::from_chars(b, b + x, g.nt);
    auto r2 = std::from_chars(b + x + 1, e, g.nc);
    if (r1.ec != std::errc{} || r1.ptr != b + x || r2.ec != std::errc{} || r2.ptr != e) {
        bad();
    }
    if (g.nt < 2 || g.nc < 2) {
        throw Error(ErrorKind::InvalidArgument, "grid needs at least 2 points per axis");
    }
    return g;
}

} // namespace piv
