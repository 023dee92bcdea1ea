#include "kinex/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string_view>
#include <utility>

#include "kinex/error.hpp"

namespace kinex {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) {
    throw error(errc::config_error, msg);
}

// ---------------------------------------------------------------------------
// Text parser
// ---------------------------------------------------------------------------

struct ValueParser {
    std::string_view s;
    std::size_t pos = 0;
    int line = 0;

    [[noreturn]] void die(const std::string& msg) const {
        fail("line " + std::to_string(line) + ": " + msg);
    }

    void ws() {
        while (pos < s.size() &&
               std::isspace(static_cast<unsigned char>(s[pos]))) {
            ++pos;
        }
    }

    bool eof() {
        ws();
        return pos >= s.size();
    }

    char peek() const { return pos < s.size() ? s[pos] : '\0'; }

    void expect(char c) {
        if (peek() != c) {
            die(std::string("expected '") + c + "'");
        }
        ++pos;
    }

    std::string bare_key() {
        ws();
        std::size_t start = pos;
        while (pos < s.size() &&
               (std::isalnum(static_cast<unsigned char>(s[pos])) ||
                s[pos] == '_' || s[pos] == '-')) {
            ++pos;
        }
        if (pos == start) die("expected a key");
        return std::string(s.substr(start, pos - start));
    }

    json string_lit() {
        expect('"');
        std::string out;
        while (pos < s.size() && s[pos] != '"') {
            char c = s[pos++];
            if (c == '\\') {
                if (pos >= s.size()) die("unterminated escape");
                char e = s[pos++];
                switch (e) {
                    case '"': out.push_back('"'); break;
                    case '\\': out.push_back('\\'); break;
                    case 'n': out.push_back('\n'); break;
                    case 't': out.push_back('\t'); break;
                    default: die("unsupported escape sequence");
                }
            } else {
                out.push_back(c);
            }
        }
        if (pos >= s.size()) die("unterminated string");
        ++pos;
        return json(out);
    }

    json number() {
        const char* b = s.data() + pos;
        const char* e = s.data() + s.size();
        double d = 0.0;
        auto res = std::from_chars(b, e, d);
        if (res.ec != std::errc()) die("expected a value");
        const std::size_t len = static_cast<std::size_t>(res.ptr - b);
        const std::string_view tok = s.substr(pos, len);
        pos += len;
        const bool integral =
            tok.find_first_not_of("+-0123456789") == std::string_view::npos;
        if (integral) {
            if (!tok.empty() && tok.front() == '-') {
                long long v = 0;
                auto ri = std::from_chars(tok.data(), tok.data() + tok.size(), v);
                if (ri.ec == std::errc() && ri.ptr == tok.data() + tok.size()) {
                    return json(v);
                }
            } else {
                unsigned long long v = 0;
                const char* tb = tok.front() == '+' ? tok.data() + 1 : tok.data();
                auto ri = std::from_chars(tb, tok.data() + tok.size(), v);
                if (ri.ec == std::errc() && ri.ptr == tok.data() + tok.size()) {
                    return json(v);
                }
            }
        }
        return json(d);
    }

    json array() {
        expect('[');
        json out = json::array();
        ws();
        if (peek() == ']') {
            ++pos;
            return out;
        }
        while (true) {
            out.push_back(value());
            ws();
            if (peek() == ',') {
                ++pos;
                continue;
            }
            expect(']');
            return out;
        }
    }

    json table() {
        expect('{');
        json out = json::object();
        ws();
        if (peek() == '}') {
            ++pos;
            return out;
        }
        while (true) {
            const std::string key = bare_key();
            if (out.contains(key)) die("duplicate key '" + key + "'");
            ws();
            expect('=');
            out[key] = value();
            ws();
            if (peek() == ',') {
                ++pos;
                continue;
            }
            expect('}');
            return out;
        }
    }

    json value() {
        ws();
        const char c = peek();
        if (c == '"') return string_lit();
        if (c == '[') return array();
        if (c == '{') return table();
        if (s.compare(pos, 4, "true") == 0) {
            pos += 4;
            return json(true);
        }
        if (s.compare(pos, 5, "false") == 0) {
            pos += 5;
            return json(false);
        }
        return number();
    }
};

// Strips the comment part (a '#' outside any string literal) from a line.
std::string_view strip_comment(std::string_view line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_string) {
            if (c == '\\') {
                ++i;
            } else if (c == '"') {
                in_string = false;
            }
        } else if (c == '"') {
            in_string = true;
        } else if (c == '#') {
            return line.substr(0, i);
        }
    }
    return line;
}

std::string_view trim(std::string_view v) {
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) {
        v.remove_prefix(1);
    }
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) {
        v.remove_suffix(1);
    }
    return v;
}

// ---------------------------------------------------------------------------
// Schema helpers
// ---------------------------------------------------------------------------

// Typed access to one table with named diagnostics; finish() rejects any key
// that was never requested.
class KeyReader {
  public:
    KeyReader(const json& table, std::string where)
        : t_(table), where_(std::move(where)) {
        if (!t_.is_object()) {
            fail(label_self() + " must be a table");
        }
    }

    bool has(const std::string& key) const { return t_.contains(key); }

    double num(const std::string& key) {
        const json* v = find(key);
        if (!v) fail("missing " + label(key));
        return as_num(key, *v);
    }

    double num(const std::string& key, double def) {
        const json* v = find(key);
        return v ? as_num(key, *v) : def;
    }

    long integer(const std::string& key) {
        const json* v = find(key);
        if (!v) fail("missing " + label(key));
        return as_int(key, *v);
    }

    long integer(const std::string& key, long def) {
        const json* v = find(key);
        return v ? as_int(key, *v) : def;
    }

    std::uint64_t uint(const std::string& key, std::uint64_t def) {
        const json* v = find(key);
        if (!v) return def;
        if (v->is_number_unsigned()) return v->get<std::uint64_t>();
        if (v->is_number_integer()) {
            const long long i = v->get<long long>();
            if (i < 0) fail(label(key) + " must be nonnegative");
            return static_cast<std::uint64_t>(i);
        }
        fail(label(key) + " must be a nonnegative integer");
    }

    std::string str(const std::string& key) {
        const json* v = find(key);
        if (!v) fail("missing " + label(key));
        if (!v->is_string()) fail(label(key) + " must be a string");
        return v->get<std::string>();
    }

    std::string str(const std::string& key, const std::string& def) {
        const json* v = find(key);
        if (!v) return def;
        if (!v->is_string()) fail(label(key) + " must be a string");
        return v->get<std::string>();
    }

    const json& raw(const std::string& key) {
        const json* v = find(key);
        if (!v) fail("missing " + label(key));
        return *v;
    }

    json table_or_empty(const std::string& key) {
        const json* v = find(key);
        if (!v) return json::object();
        if (!v->is_object()) fail(label(key) + " must be a table");
        return *v;
    }

    std::vector<double> num_array(const std::string& key,
                                  std::vector<double> def) {
        const json* v = find(key);
        if (!v) return def;
        if (!v->is_array()) fail(label(key) + " must be an array of numbers");
        std::vector<double> out;
        out.reserve(v->size());
        for (const json& e : *v) {
            out.push_back(as_num(key, e));
        }
        return out;
    }

    void finish() const {
        for (auto it = t_.begin(); it != t_.end(); ++it) {
            if (!seen_.count(it.key())) {
                fail("unknown key " + label(it.key()));
            }
        }
    }

    std::string label(const std::string& key) const {
        return where_.empty() ? "'" + key + "'" : "'" + where_ + "." + key + "'";
    }

  private:
    std::string label_self() const {
        return where_.empty() ? "config" : "'" + where_ + "'";
    }

    const json* find(const std::string& key) {
        seen_.insert(key);
        auto it = t_.find(key);
        return it == t_.end() ? nullptr : &*it;
    }

    double as_num(const std::string& key, const json& v) const {
        if (!v.is_number()) fail(label(key) + " must be a number");
        return v.get<double>();
    }

    long as_int(const std::string& key, const json& v) const {
        if (v.is_number_integer() || v.is_number_unsigned()) {
            return v.get<long>();
        }
        if (v.is_number_float()) {
            const double d = v.get<double>();
            if (std::floor(d) == d && std::abs(d) < 9.0e15) {
                return static_cast<long>(d);
            }
        }
        fail(label(key) + " must be an integer");
    }

    const json& t_;
    std::string where_;
    std::set<std::string> seen_;
};

void check_range(double v, double lo, double hi, bool lo_open, bool hi_open,
                 const std::string& what) {
    const bool lo_ok = lo_open ? v > lo : v >= lo;
    const bool hi_ok = hi_open ? v < hi : v <= hi;
    if (!lo_ok || !hi_ok) {
        std::ostringstream os;
        os << what << " must lie in " << (lo_open ? "(" : "[") << lo << ", "
           << hi << (hi_open ? ")" : "]");
        fail(os.str());
    }
}

double lambda_value(KeyReader& r, const std::string& key) {
    const double v = r.num(key);
    check_range(v, 0.0, 1.0, false, true, r.label(key));
    return v;
}

long resolve_trials(const std::optional<long>& eff, long min_v) {
    if (!eff) fail("missing 'trials'");
    if (*eff < min_v) {
        fail("'trials' must be at least " + std::to_string(min_v));
    }
    return *eff;
}

std::vector<double> times_array(KeyReader& r, const std::string& key,
                                std::vector<double> def) {
    std::vector<double> v = r.num_array(key, std::move(def));
    if (v.empty()) fail(r.label(key) + " must not be empty");
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] >= 0.0)) fail(r.label(key) + " entries must be nonnegative");
        if (i > 0 && v[i] < v[i - 1]) {
            fail(r.label(key) + " must be ascending");
        }
    }
    return v;
}

// ---------------------------------------------------------------------------
// Measure / marginal blocks
// ---------------------------------------------------------------------------

Density1D build_density(const std::string& family, const json& params,
                        const std::string& where, json* echo) {
    KeyReader r(params, where);
    json out;
    Density1D d = Density1D::Exponential(1.0);
    if (family == "exponential") {
        const double rate = r.num("rate", 1.0);
        check_range(rate, 0.0, 1e300, true, false, r.label("rate"));
        d = Density1D::Exponential(rate);
        out["rate"] = rate;
    } else if (family == "gamma") {
        const double shape = r.num("shape");
        const double rate = r.num("rate", 1.0);
        check_range(shape, 0.0, 1e300, true, false, r.label("shape"));
        check_range(rate, 0.0, 1e300, true, false, r.label("rate"));
        d = Density1D::Gamma(shape, rate);
        out["shape"] = shape;
        out["rate"] = rate;
    } else if (family == "pareto1") {
        const double alpha = r.num("alpha");
        check_range(alpha, 0.0, 1e300, true, false, r.label("alpha"));
        d = Density1D::Pareto1(alpha);
        out["alpha"] = alpha;
    } else {
        fail("marginal family '" + family +
             "' is not one of exponential|gamma|pareto1");
    }
    r.finish();
    if (echo) *echo = out;
    return d;
}

RedistributionMeasure build_measure(const json& block, json* echo) {
    KeyReader r(block, "measure");
    const std::string family = r.str("family");
    json out;
    out["family"] = family;
    RedistributionMeasure m = RedistributionMeasure::Uniform();
    if (family == "uniform") {
        // no parameters
    } else if (family == "beta") {
        const double a = r.num("a");
        const double b = r.num("b");
        m = RedistributionMeasure::Beta(a, b);
        out["a"] = a;
        out["b"] = b;
    } else if (family == "pareto") {
        const double alpha = r.num("alpha");
        m = RedistributionMeasure::ParetoType(alpha);
        out["alpha"] = alpha;
    } else if (family == "induced") {
        const std::string mu = r.str("mu");
        const json mu_params = r.table_or_empty("mu_params");
        json mu_echo;
        const Density1D d =
            build_density(mu, mu_params, "measure.mu_params", &mu_echo);
        m = RedistributionMeasure::Induced(d);
        out["mu"] = mu;
        out["mu_params"] = mu_echo;
    } else {
        fail("'measure.family' must be one of uniform|beta|pareto|induced");
    }
    r.finish();
    if (echo) *echo = out;
    return m;
}

// ---------------------------------------------------------------------------
// Per-experiment validation (fills cfg.params with resolved values)
// ---------------------------------------------------------------------------

void validate_canonical(KeyReader& top, const std::optional<long>& trials,
                        ExperimentConfig& cfg) {
    json& p = cfg.params;
    RedistributionMeasure measure = build_measure(top.raw("measure"),
                                                  &p["measure"]);
    cfg.trials = resolve_trials(trials, 2);

    const std::string check = top.str("check", "none");
    if (check != "none" && check != "product_exponential" &&
        check != "pareto_marginal") {
        fail("'check' must be one of none|product_exponential|pareto_marginal");
    }
    p["check"] = check;

    double s = 1.0;
    bool fixed_s = true;
    if (top.has("s_law")) {
        if (top.has("s")) fail("'s' and 's_law' are mutually exclusive");
        KeyReader sl(top.raw("s_law"), "s_law");
        const std::string law = sl.str("law");
        json slr;
        slr["law"] = law;
        if (law == "point") {
            const double sv = sl.num("s");
            check_range(sv, 0.0, 1e300, true, false, sl.label("s"));
            slr["s"] = sv;
            s = sv;
        } else if (law == "gamma") {
            const double shape = sl.num("shape");
            const double rate = sl.num("rate", 1.0);
            check_range(shape, 0.0, 1e300, true, false, sl.label("shape"));
            check_range(rate, 0.0, 1e300, true, false, sl.label("rate"));
            slr["shape"] = shape;
            slr["rate"] = rate;
            fixed_s = false;
        } else {
            fail("'s_law.law' must be one of point|gamma");
        }
        sl.finish();
        p["s_law"] = slr;
    } else {
        s = top.num("s", 1.0);
        check_range(s, 0.0, 1e300, true, false, "'s'");
        p["s"] = s;
    }

    if (check == "pareto_marginal") {
        if (!fixed_s) {
            fail("check 'pareto_marginal' requires a fixed 's', not 's_law'");
        }
        if (!(s > 2.0)) {
            fail("check 'pareto_marginal' requires s > 2 (nonempty support)");
        }
        if (measure.family() != RedistributionMeasure::family_t::induced ||
            p["measure"]["mu"] != "pareto1") {
            fail("check 'pareto_marginal' requires measure = { family = "
                 "\"induced\", mu = \"pareto1\", ... }");
        }
    }
    if (check == "product_exponential") {
        const double rate = top.num("marginal_rate", 1.0);
        check_range(rate, 0.0, 1e300, true, false, "'marginal_rate'");
        p["marginal_rate"] = rate;
    } else if (top.has("marginal_rate")) {
        fail("'marginal_rate' is only valid with check = "
             "\"product_exponential\"");
    }

    const double tol_def = check == "pareto_marginal" ? 0.02 : 0.01;
    const double tol = top.num("tol", tol_def);
    check_range(tol, 0.0, 1.0, true, true, "'tol'");
    p["tol"] = tol;

    const long bins = top.integer("bins", 64);
    if (bins < 1 || bins > 100000) fail("'bins' must lie in [1, 100000]");
    p["bins"] = bins;
}

void validate_wealth_stationary(KeyReader& top,
                                const std::optional<long>& trials,
                                ExperimentConfig& cfg) {
    json& p = cfg.params;
    build_measure(top.raw("measure"), &p["measure"]);
    cfg.trials = resolve_trials(trials, 2);
    p["lambda"] = lambda_value(top, "lambda");
    const double s = top.num("s", 1.0);
    check_range(s, 0.0, 1e300, true, false, "'s'");
    p["s"] = s;
    const double t_end = top.num("t_end", 5.0);
    check_range(t_end, 0.0, 1e300, false, false, "'t_end'");
    p["t_end"] = t_end;
    const long max_order = top.integer("max_order", 3);
    if (max_order < 1 || max_order > 8) {
        fail("'max_order' must lie in [1, 8]");
    }
    p["max_order"] = max_order;
    const double tol = top.num("tol", 1e-12);
    check_range(tol, 0.0, 1.0, true, true, "'tol'");
    p["tol"] = tol;
}

void validate_product_check(KeyReader& top, const std::optional<long>& trials,
                            ExperimentConfig& cfg) {
    json& p = cfg.params;
    build_measure(top.raw("measure"), &p["measure"]);
    const std::string mu = top.str("mu");
    json mu_echo;
    build_density(mu, top.table_or_empty("mu_params"), "mu_params", &mu_echo);
    p["mu"] = mu;
    p["mu_params"] = mu_echo;
    const double tol = top.num("tol", 1e-8);
    check_range(tol, 0.0, 1.0, true, true, "'tol'");
    p["tol"] = tol;
    std::vector<double> s_grid = top.num_array("s_grid", {});
    for (double s : s_grid) {
        check_range(s, 0.0, 1e300, true, false, "'s_grid' entries");
    }
    std::vector<double> a_grid = top.num_array("a_grid", {});
    for (double a : a_grid) {
        check_range(a, 0.0, 1.0, true, true, "'a_grid' entries");
    }
    if (!s_grid.empty()) p["s_grid"] = s_grid;
    if (!a_grid.empty()) p["a_grid"] = a_grid;
    cfg.trials = trials ? resolve_trials(trials, 1) : 0;
}

void validate_duality_energy(KeyReader& top, const std::optional<long>& trials,
                             ExperimentConfig& cfg) {
    json& p = cfg.params;
    build_measure(top.raw("measure"), &p["measure"]);

    const std::string mode = top.str("mode", "check");
    if (mode != "rates" && mode != "check" && mode != "profile") {
        fail("'mode' must be one of rates|check|profile");
    }
    p["mode"] = mode;

    const std::string reference = top.str("reference", "exponential");
    p["reference"] = reference;
    if (reference == "gamma") {
        const double shape = top.num("ref_shape");
        check_range(shape, 0.0, 1e300, true, false, "'ref_shape'");
        p["ref_shape"] = shape;
    } else if (reference == "exponential") {
        if (top.has("ref_shape")) {
            fail("'ref_shape' is only valid with reference = \"gamma\"");
        }
    } else {
        fail("'reference' must be one of exponential|gamma");
    }

    const long max_level = top.integer("max_level", mode == "rates" ? 6 : 4);
    if (max_level < 1 || max_level > 12) {
        fail("'max_level' must lie in [1, 12]");
    }
    p["max_level"] = max_level;

    if (mode == "rates") {
        const double tol = top.num("tol", 1e-12);
        check_range(tol, 0.0, 1.0, true, true, "'tol'");
        p["tol"] = tol;
        cfg.trials = trials ? resolve_trials(trials, 1) : 0;
    } else if (mode == "check") {
        p["times"] = times_array(top, "times", {0.5, 1.0, 2.0});
        const double x0 = top.num("x0", 1.0);
        const double y0 = top.num("y0", 1.0);
        if (!(x0 >= 0.0) || !(y0 >= 0.0) || !(x0 + y0 > 0.0)) {
            fail("'x0'/'y0' must be nonnegative with a positive total");
        }
        p["x0"] = x0;
        p["y0"] = y0;
        cfg.trials = resolve_trials(trials, 2);
    } else {
        const double s = top.num("s", 1.0);
        check_range(s, 0.0, 1e300, true, false, "'s'");
        p["s"] = s;
        cfg.trials = resolve_trials(trials, 2);
    }
}

void validate_duality_wealth(KeyReader& top, const std::optional<long>& trials,
                             ExperimentConfig& cfg) {
    json& p = cfg.params;
    RedistributionMeasure measure = build_measure(top.raw("measure"),
                                                  &p["measure"]);
    if (measure.s_dependent()) {
        fail("experiment duality_wealth requires an s-independent measure");
    }
    p["lambda"] = lambda_value(top, "lambda");
    const long max_level = top.integer("max_level", 3);
    if (max_level < 1 || max_level > 10) {
        fail("'max_level' must lie in [1, 10]");
    }
    p["max_level"] = max_level;
    p["times"] = times_array(top, "times", {0.5, 1.0, 2.0});
    const double x0 = top.num("x0", 0.3);
    check_range(x0, 0.0, 1.0, true, true, "'x0'");
    p["x0"] = x0;
    cfg.trials = resolve_trials(trials, 2);
}

void validate_diffusion(KeyReader& top, const std::optional<long>& trials,
                        ExperimentConfig& cfg) {
    json& p = cfg.params;
    KeyReader d(top.raw("diffusion"), "diffusion");
    json dp;

    const std::string drift = d.str("drift");
    dp["drift"] = drift;
    if (drift == "linear") {
        const double alpha = d.num("alpha");
        check_range(alpha, 0.0, 1e300, true, false, d.label("alpha"));
        dp["alpha"] = alpha;
    } else if (drift == "from_measure") {
        build_measure(top.raw("measure"), &p["measure"]);
    } else {
        fail("'diffusion.drift' must be one of linear|from_measure");
    }

    const double dt = d.num("dt", 1e-3);
    check_range(dt, 0.0, 1e-2, true, false, d.label("dt"));
    dp["dt"] = dt;
    const double t_end = d.num("t_end", 50.0);
    check_range(t_end, 0.0, 1e300, false, false, d.label("t_end"));
    dp["t_end"] = t_end;
    const double r0 = d.num("r0", 0.5);
    check_range(r0, 0.0, 1.0, true, true, d.label("r0"));
    dp["r0"] = r0;
    const double s = d.num("s", 1.0);
    check_range(s, 0.0, 1e300, true, false, d.label("s"));
    dp["s"] = s;

    std::optional<long> paths;
    if (d.has("paths")) paths = d.integer("paths");
    d.finish();

    std::optional<long> eff = trials;
    if (paths) {
        if (trials && *trials != *paths) {
            fail("give either 'trials' or 'diffusion.paths', not both");
        }
        if (!eff) eff = paths;
    }
    cfg.trials = resolve_trials(eff, 2);
    p["diffusion"] = dp;

    const double tol = top.num("tol", drift == "linear" ? 0.015 : 0.02);
    check_range(tol, 0.0, 1.0, true, true, "'tol'");
    p["tol"] = tol;
    const long bins = top.integer("bins", 64);
    if (bins < 1 || bins > 100000) fail("'bins' must lie in [1, 100000]");
    p["bins"] = bins;
}

void validate_nagent(KeyReader& top, const std::optional<long>& trials,
                     ExperimentConfig& cfg) {
    json& p = cfg.params;
    KeyReader na(top.raw("nagent"), "nagent");
    json np;

    const std::string topology = na.str("topology");
    np["topology"] = topology;
    long n = 0;
    if (topology == "ring" || topology == "complete") {
        n = na.integer("n");
        if (n < 2 || n > 10000) fail("'nagent.n' must lie in [2, 10000]");
        np["n"] = n;
    } else if (topology == "matrix") {
        const json& m = na.raw("matrix");
        if (!m.is_array() || m.empty()) {
            fail("'nagent.matrix' must be a nonempty array of rows");
        }
        n = static_cast<long>(m.size());
        for (const json& row : m) {
            if (!row.is_array() || row.size() != m.size()) {
                fail("'nagent.matrix' must be square");
            }
            for (const json& v : row) {
                if (!v.is_number()) {
                    fail("'nagent.matrix' entries must be numbers");
                }
            }
        }
        np["matrix"] = m;
    } else {
        fail("'nagent.topology' must be one of ring|complete|matrix");
    }

    const double lambda = lambda_value(na, "lambda");
    np["lambda"] = lambda;

    const std::string mode = na.str("mode", "mc");
    if (mode != "mc" && mode != "analytic") {
        fail("'nagent.mode' must be one of mc|analytic");
    }
    np["mode"] = mode;

    if (na.has("times")) {
        if (na.has("t_end")) {
            fail("give either 'nagent.t_end' or 'nagent.times', not both");
        }
        np["times"] = times_array(na, "times", {});
    } else {
        const double t_end = na.num("t_end");
        check_range(t_end, 0.0, 1e300, false, false, na.label("t_end"));
        np["times"] = std::vector<double>{t_end};
    }

    if (na.has("lambda_alt")) {
        np["lambda_alt"] = lambda_value(na, "lambda_alt");
    }

    if (na.has("x0")) {
        const json& x0 = na.raw("x0");
        if (x0.is_string()) {
            const std::string sx = x0.get<std::string>();
            if (sx != "unit" && sx != "equal") {
                fail("'nagent.x0' must be \"unit\", \"equal\", or an array");
            }
            np["x0"] = sx;
        } else if (x0.is_array()) {
            if (x0.size() != static_cast<std::size_t>(n)) {
                fail("'nagent.x0' must have one entry per agent");
            }
            double total = 0.0;
            for (const json& v : x0) {
                if (!v.is_number() || !(v.get<double>() >= 0.0)) {
                    fail("'nagent.x0' entries must be nonnegative numbers");
                }
                total += v.get<double>();
            }
            if (!(total > 0.0)) fail("'nagent.x0' must have a positive total");
            np["x0"] = x0;
        } else {
            fail("'nagent.x0' must be \"unit\", \"equal\", or an array");
        }
    } else {
        np["x0"] = "unit";
    }

    std::optional<long> block_trials;
    if (na.has("trials")) block_trials = na.integer("trials");
    na.finish();

    std::optional<long> eff = trials ? trials : block_trials;
    if (mode == "mc") {
        build_measure(top.raw("measure"), &p["measure"]);
        cfg.trials = resolve_trials(eff, 2);
    } else {
        cfg.trials = eff ? resolve_trials(eff, 1) : 0;
    }
    p["nagent"] = np;

    const double tol = top.num("tol", 1e-12);
    check_range(tol, 0.0, 1.0, true, true, "'tol'");
    p["tol"] = tol;
}

void validate_eps_infinity(KeyReader& top, const std::optional<long>& trials,
                           ExperimentConfig& cfg) {
    json& p = cfg.params;
    build_measure(top.raw("measure"), &p["measure"]);
    p["lambda"] = lambda_value(top, "lambda");
    cfg.trials = resolve_trials(trials, 2);

    const std::string check = top.str("check", "beta_distance");
    if (check != "beta_distance" && check != "moments" && check != "none") {
        fail("'check' must be one of beta_distance|moments|none");
    }
    p["check"] = check;

    if (check == "moments") {
        const long max_moment = top.integer("max_moment", 6);
        if (max_moment < 1 || max_moment > 12) {
            fail("'max_moment' must lie in [1, 12]");
        }
        p["max_moment"] = max_moment;
    } else if (top.has("max_moment")) {
        fail("'max_moment' is only valid with check = \"moments\"");
    }

    const double tol = top.num("tol", check == "beta_distance" ? 0.02 : 1e-12);
    check_range(tol, 0.0, 1.0, true, true, "'tol'");
    p["tol"] = tol;

    const double trunc_tol = top.num("trunc_tol", 1e-12);
    check_range(trunc_tol, 0.0, 1.0, true, true, "'trunc_tol'");
    p["trunc_tol"] = trunc_tol;

    const long bins = top.integer("bins", 64);
    if (bins < 1 || bins > 100000) fail("'bins' must lie in [1, 100000]");
    p["bins"] = bins;
}

} // namespace

// ---------------------------------------------------------------------------
// Public interface
// ---------------------------------------------------------------------------

std::string experiment_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::canonical: return "canonical";
        case ExperimentKind::wealth_stationary: return "wealth_stationary";
        case ExperimentKind::product_check: return "product_check";
        case ExperimentKind::duality_energy: return "duality_energy";
        case ExperimentKind::duality_wealth: return "duality_wealth";
        case ExperimentKind::diffusion: return "diffusion";
        case ExperimentKind::nagent: return "nagent";
        case ExperimentKind::eps_infinity: return "eps_infinity";
    }
    return "unknown";
}

const std::vector<std::pair<ExperimentKind, std::string>>&
experiment_catalogue() {
    static const std::vector<std::pair<ExperimentKind, std::string>> cat = {
        {ExperimentKind::canonical,
         "fixed- or random-total stationary pair sampling with marginal "
         "checks"},
        {ExperimentKind::wealth_stationary,
         "stationary wealth pairs evolved in time; joint-moment preservation"},
        {ExperimentKind::product_check,
         "product-invariance defect of a marginal/measure pair on an (s, a) "
         "grid"},
        {ExperimentKind::duality_energy,
         "energy-model dual rates, two-sided duality sweep, or harmonic "
         "profile"},
        {ExperimentKind::duality_wealth,
         "wealth-model two-sided duality sweep on the unit simplex"},
        {ExperimentKind::diffusion,
         "Euler-Maruyama fraction diffusion; stationary law and "
         "thermalization checks"},
        {ExperimentKind::nagent,
         "graph exchange model; expected-wealth and timescale identities"},
        {ExperimentKind::eps_infinity,
         "stationary-fraction sampling; Beta-distance or moment-recursion "
         "checks"},
    };
    return cat;
}

ExperimentKind experiment_from_name(const std::string& name) {
    for (const auto& [kind, desc] : experiment_catalogue()) {
        (void)desc;
        if (experiment_name(kind) == name) return kind;
    }
    std::string valid;
    for (const auto& [kind, desc] : experiment_catalogue()) {
        (void)desc;
        if (!valid.empty()) valid += "|";
        valid += experiment_name(kind);
    }
    fail("unknown experiment '" + name + "' (expected one of " + valid + ")");
}

nlohmann::json parse_config_text(const std::string& text) {
    json root = json::object();
    json* current = &root;
    std::istringstream in(text);
    std::string raw_line;
    int line_no = 0;
    while (std::getline(in, raw_line)) {
        ++line_no;
        const std::string_view body = trim(strip_comment(raw_line));
        if (body.empty()) continue;
        if (body.front() == '[') {
            if (body.back() != ']') {
                fail("line " + std::to_string(line_no) +
                     ": malformed section header");
            }
            ValueParser vp{body.substr(1, body.size() - 2), 0, line_no};
            const std::string name = vp.bare_key();
            if (!vp.eof()) vp.die("malformed section header");
            if (root.contains(name)) {
                fail("line " + std::to_string(line_no) +
                     ": duplicate section '" + name + "'");
            }
            root[name] = json::object();
            current = &root[name];
            continue;
        }
        ValueParser vp{body, 0, line_no};
        const std::string key = vp.bare_key();
        vp.ws();
        vp.expect('=');
        json value = vp.value();
        if (!vp.eof()) vp.die("trailing characters after value");
        if (current->contains(key)) {
            fail("line " + std::to_string(line_no) + ": duplicate key '" + key +
                 "'");
        }
        (*current)[key] = std::move(value);
    }
    return root;
}

nlohmann::json load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw error(errc::config_error,
                    "cannot read config file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

ExperimentConfig validate_config(const nlohmann::json& tree,
                                 const CliOverrides& overrides) {
    KeyReader top(tree, "");
    ExperimentConfig cfg;
    cfg.experiment = experiment_from_name(top.str("experiment"));
    cfg.params = json::object();

    const std::uint64_t file_seed = top.uint("seed", 12345);
    cfg.seed = overrides.seed.value_or(file_seed);

    const long file_threads = top.integer("threads", 1);
    cfg.threads = overrides.threads.value_or(static_cast<int>(file_threads));
    if (cfg.threads < 1 || cfg.threads > 1024) {
        fail("'threads' must lie in [1, 1024]");
    }

    cfg.out = overrides.out.value_or(top.str("out", "out"));
    if (cfg.out.empty()) fail("'out' must not be empty");

    std::optional<long> trials;
    if (top.has("trials")) trials = top.integer("trials");
    if (overrides.trials) trials = overrides.trials;

    switch (cfg.experiment) {
        case ExperimentKind::canonical:
            validate_canonical(top, trials, cfg);
            break;
        case ExperimentKind::wealth_stationary:
            validate_wealth_stationary(top, trials, cfg);
            break;
        case ExperimentKind::product_check:
            validate_product_check(top, trials, cfg);
            break;
        case ExperimentKind::duality_energy:
            validate_duality_energy(top, trials, cfg);
            break;
        case ExperimentKind::duality_wealth:
            validate_duality_wealth(top, trials, cfg);
            break;
        case ExperimentKind::diffusion:
            validate_diffusion(top, trials, cfg);
            break;
        case ExperimentKind::nagent:
            validate_nagent(top, trials, cfg);
            break;
        case ExperimentKind::eps_infinity:
            validate_eps_infinity(top, trials, cfg);
            break;
    }
    top.finish();
    return cfg;
}

RedistributionMeasure measure_from_config(const nlohmann::json& block) {
    return build_measure(block, nullptr);
}

Density1D density1d_from_config(const std::string& family,
                                const nlohmann::json& params,
                                const std::string& where) {
    return build_density(family, params, where, nullptr);
}

} // namespace kinex
