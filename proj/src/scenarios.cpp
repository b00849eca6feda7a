#include "mmst/scenarios.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mmst/errors.hpp"
#include "mmst/quantum_cis.hpp"

#ifndef MMST_VERSION
#define MMST_VERSION "0.0.0"
#endif

namespace mmst {

namespace {

constexpr double kTwoPi = 2.0 * kPi;

double wavelength(double omega0) { return kTwoPi / omega0; }

SystemConfig single_tls(double r, bool excited) {
    SystemConfig c;
    c.positions = {r};
    c.initially_excited = {excited};
    return c;
}

// N TLSs spaced by `spacing`, centred on `center`.
std::vector<double> chain_positions(std::size_t n, double spacing, double center) {
    std::vector<double> r(n);
    const double half = 0.5 * static_cast<double>(n - 1);
    for (std::size_t a = 0; a < n; ++a) r[a] = center + (static_cast<double>(a) - half) * spacing;
    return r;
}

SystemConfig chain(std::size_t n, double spacing, bool all_excited) {
    SystemConfig c;
    c.positions = chain_positions(n, spacing, 0.5 * c.length);
    c.initially_excited.assign(n, all_excited);
    if (!all_excited) c.initially_excited[n / 2] = true;
    return c;
}

std::vector<double> intensity_times() {
    std::vector<double> t;
    for (int i = 0; i <= 10; ++i) t.push_back(0.3 * kPi * i);
    return t;
}

ScenarioVariant variant(std::string label, SystemConfig config) {
    ScenarioVariant v;
    v.label = std::move(label);
    v.config = std::move(config);
    v.sampling.gamma = v.config.gamma;
    return v;
}

std::vector<std::string> sampling_variants() { return {"both", "electronic", "photonic"}; }

}  // namespace

std::vector<std::string> scenario_names() {
    return {"fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11", "fig12", "figA1"};
}

Scenario catalog_scenario(const std::string& name) {
    // fig8a / fig8b / fig8c pick one spacing of the chain scenario
    if (name.size() == 5 && name.starts_with("fig8") && name[4] >= 'a' && name[4] <= 'c') {
        Scenario s = catalog_scenario("fig8");
        ScenarioVariant v = s.variants[static_cast<std::size_t>(name[4] - 'a')];
        v.label.clear();
        s.name = name;
        s.variants = {std::move(v)};
        return s;
    }
    Scenario s;
    s.name = name;
    const double lambda = wavelength(100.0);

    if (name == "fig2") {
        s.description = "ground-state stability under the three sampling choices";
        for (const auto& mode : sampling_variants()) {
            auto v = variant(mode, single_tls(kPi, false));
            v.config.t_final = kPi;
            v.sampling = SamplingOptions::from_name(mode, v.config.gamma);
            v.trajectories = 12800;
            v.desk_trajectories = 4000;
            s.variants.push_back(std::move(v));
        }
    } else if (name == "fig3") {
        s.description = "electronic action phase-space points for a ground-state TLS";
        auto v = variant("", single_tls(kPi, false));
        v.config.t_final = kPi;
        v.phase_space_times = {0.0, kPi / 3.0, kPi};
        v.trajectories = 12800;
        s.variants.push_back(std::move(v));
    } else if (name == "fig4") {
        s.description = "single-TLS spontaneous emission with the quantum reference";
        auto v = variant("", single_tls(kPi, true));
        v.quantum = true;
        v.analysis.fit_window = {{0.3, 1.5}};
        v.analysis.quantum_fit_window = {{0.5, 2.5}};
        s.variants.push_back(std::move(v));
    } else if (name == "fig5") {
        s.description = "spontaneous emission split into self-interaction and vacuum-fluctuation parts";
        for (const auto& mode : sampling_variants()) {
            auto v = variant(mode, single_tls(kPi, true));
            v.sampling = SamplingOptions::from_name(mode, v.config.gamma);
            s.variants.push_back(std::move(v));
        }
    } else if (name == "fig6") {
        s.description = "field intensity profiles during spontaneous emission";
        auto v = variant("", single_tls(kPi, true));
        v.quantum = true;
        v.snapshot_times = intensity_times();
        v.analysis.coarse_grain = 50;
        v.trajectories = 1280000;
        v.desk_trajectories = 200000;
        s.variants.push_back(std::move(v));
    } else if (name == "fig7") {
        s.description = "emission near a mirror, r = lambda/2 and lambda/4";
        for (const auto& [label, r] : {std::pair{"r_half_lambda", 0.5 * lambda}, std::pair{"r_quarter_lambda", 0.25 * lambda}}) {
            auto v = variant(label, single_tls(r, true));
            v.quantum = true;
            v.analysis.fit_window = {{lambda, 1.0}};
            v.analysis.quantum_fit_window = {{lambda, 1.0}};
            s.variants.push_back(std::move(v));
        }
    } else if (name == "fig8") {
        s.description = "middle TLS of a 101-TLS chain, spacing lambda/2, lambda/4 and 0";
        for (const auto& [label, a] :
             {std::pair{"a_half_lambda", 0.5 * lambda}, std::pair{"a_quarter_lambda", 0.25 * lambda}, std::pair{"a_zero", 0.0}}) {
            auto v = variant(label, chain(101, a, false));
            v.config.t_final = kPi;
            v.quantum = true;
            v.analysis.fit_window = {{0.1, 1.0}};
            v.analysis.quantum_fit_window = {{0.1, 1.0}};
            s.variants.push_back(std::move(v));
        }
    } else if (name == "fig9" || name == "fig10") {
        const bool derivative = name == "fig10";
        s.description = derivative ? "superradiant emission rate with the mean-field overlay"
                                   : "superradiance of N co-located excited TLSs";
        for (const std::size_t n : {1, 7, 35}) {
            auto v = variant("N" + std::to_string(n), chain(n, 0.0, true));
            v.config.dt_divisor = 10.0;
            if (derivative) v.config.t_final = 1.0;
            v.analysis.fit_window = {{0.0, 3.0 / (static_cast<double>(n) * kPi)}};
            v.analysis.fit_fixed_intercept = true;
            v.analysis.derivative = derivative;
            s.variants.push_back(std::move(v));
        }
    } else if (name == "fig11") {
        s.description = "superradiant delay-time statistics";
        for (const std::size_t n : {7, 35}) {
            auto v = variant("N" + std::to_string(n), chain(n, 0.0, true));
            v.config.dt_divisor = 10.0;
            v.config.t_final = n == 7 ? 0.8 : 0.3;
            v.analysis.delays = true;
            v.trajectories = 1000;
            v.desk_trajectories = 500;
            s.variants.push_back(std::move(v));
        }
    } else if (name == "fig12") {
        s.description = "subradiance of a lambda/4 chain with all TLSs excited";
        for (const std::size_t n : {1, 7, 35}) {
            auto v = variant("N" + std::to_string(n), chain(n, 0.25 * lambda, true));
            v.config.dt_divisor = 10.0;
            v.config.t_final = 1.8 * kPi;
            v.analysis.biexponential = true;
            s.variants.push_back(std::move(v));
        }
    } else if (name == "figA1") {
        s.description = "intensity from FDTD and mode propagation with 400 or 100 centred modes";
        for (const auto prop : {Propagator::fdtd, Propagator::modes}) {
            for (const std::size_t m : {400, 100}) {
                SystemConfig c = single_tls(kPi, true);
                c.mode_count = m;
                c.first_mode = m == 400 ? 1 : centered_first_mode(c.length, c.omega0, m);
                auto v = variant(std::string(propagator_name(prop)) + "_M" + std::to_string(m), c);
                v.propagator = prop;
                v.fixed_modes = true;
                v.snapshot_times = intensity_times();
                v.analysis.coarse_grain = 50;
                v.trajectories = 1280000;
                v.desk_trajectories = 200000;
                s.variants.push_back(std::move(v));
            }
        }
    } else {
        std::string known;
        for (const auto& n : scenario_names()) known += (known.empty() ? "" : ", ") + n;
        throw ConfigError("unknown scenario '" + name + "' (known: " + known + ")");
    }
    return s;
}

// ---- config parsing -------------------------------------------------------

namespace {

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_factor(const std::string& token, double omega0, double length) {
    if (token == "pi") return kPi;
    if (token == "lambda") return wavelength(omega0);
    if (token == "L") return length;
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(token, &used);
    } catch (const std::exception&) {
        throw ConfigError("cannot parse value '" + token + "'");
    }
    if (used == token.size()) return v;
    const std::string rest = token.substr(used);
    if (rest == "pi") return v * kPi;
    throw ConfigError("cannot parse value '" + token + "'");
}

bool parse_bool(const std::string& key, std::string v) {
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    throw ConfigError("key '" + key + "': expected a boolean, got '" + v + "'");
}

std::size_t parse_count(const std::string& key, const std::string& v, double omega0, double length) {
    const double x = parse_value(v, omega0, length);
    if (!(x >= 0.0) || x != std::floor(x)) throw ConfigError("key '" + key + "': expected a non-negative integer");
    return static_cast<std::size_t>(x);
}

std::vector<double> parse_list(const std::string& v, double omega0, double length) {
    std::vector<double> out;
    for (const auto& item : split(v, ',')) out.push_back(parse_value(item, omega0, length));
    return out;
}

std::pair<double, double> parse_window(const std::string& key, const std::string& v, double omega0, double length) {
    const auto w = parse_list(v, omega0, length);
    if (w.size() != 2 || !(w[0] < w[1])) throw ConfigError("key '" + key + "': expected 'begin, end' with begin < end");
    return {w[0], w[1]};
}

using Section = boost::property_tree::ptree;

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"cavity", {"length", "modes", "first_mode", "centered", "grid_points", "dt_divisor"}},
        {"tls", {"omega0", "mu_ge", "sigma", "positions", "count", "spacing", "center", "excited"}},
        {"mmst", {"gamma", "sampling", "propagator", "trajectories", "desk_trajectories"}},
        {"run",
         {"name", "t_final", "output_interval", "snapshot_times", "phase_space_times", "quantum", "fit_window",
          "quantum_fit_window", "fit_fixed_intercept", "biexponential", "delays", "delay_smoothing",
          "delay_window_end", "derivative", "coarse_grain", "free_field_control"}},
    };
    return keys;
}

}  // namespace

double parse_value(const std::string& text, double omega0, double length) {
    std::string s;
    for (const char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.empty()) throw ConfigError("empty numeric value");
    double sign = 1.0;
    if (s.front() == '-' && s.size() > 1 && !std::isdigit(static_cast<unsigned char>(s[1])) && s[1] != '.') {
        sign = -1.0;
        s.erase(0, 1);
    }
    // Left-to-right product / quotient of factors; exponents inside numbers are kept intact.
    double value = 0.0;
    char op = '*';
    std::size_t start = 0;
    bool first = true;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        const bool at_end = i == s.size();
        if (!at_end && s[i] != '*' && s[i] != '/') continue;
        const std::string token = s.substr(start, i - start);
        if (token.empty()) throw ConfigError("cannot parse value '" + text + "'");
        const double f = parse_factor(token, omega0, length);
        if (first) value = f;
        else if (op == '*') value *= f;
        else {
            if (f == 0.0) throw ConfigError("division by zero in '" + text + "'");
            value /= f;
        }
        first = false;
        if (!at_end) op = s[i];
        start = i + 1;
    }
    return sign * value;
}

Scenario parse_config_text(const std::string& text, const std::string& name) {
    Section tree;
    try {
        std::istringstream in(text);
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("config syntax error: ") + e.what());
    }
    for (const auto& [section, body] : tree) {
        const auto it = known_keys().find(section);
        if (it == known_keys().end()) {
            if (body.empty()) throw ConfigError("key '" + section + "' outside any section");
            throw ConfigError("unknown section [" + section + "]");
        }
        for (const auto& [key, value] : body)
            if (!it->second.contains(key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
    }
    auto get = [&](const std::string& section, const std::string& key) -> std::optional<std::string> {
        const auto s = tree.get_child_optional(section);
        if (!s) return std::nullopt;
        const auto v = s->get_optional<std::string>(key);
        if (!v) return std::nullopt;
        return trim(*v);
    };

    ScenarioVariant v;
    SystemConfig& c = v.config;
    v.trajectories = 10000;

    if (auto x = get("tls", "omega0")) c.omega0 = parse_value(*x, 100.0, c.length);
    if (auto x = get("cavity", "length")) c.length = parse_value(*x, c.omega0, 2.0 * kPi);
    const double w0 = c.omega0;
    const double len = c.length;
    auto number = [&](const std::string& section, const std::string& key, double& out) {
        if (auto x = get(section, key)) out = parse_value(*x, w0, len);
    };

    if (auto x = get("cavity", "modes")) c.mode_count = parse_count("modes", *x, w0, len);
    if (auto x = get("cavity", "first_mode")) c.first_mode = parse_count("first_mode", *x, w0, len);
    if (auto x = get("cavity", "centered"); x && parse_bool("centered", *x)) {
        if (get("cavity", "first_mode")) throw ConfigError("'centered' and 'first_mode' are mutually exclusive");
        c.first_mode = centered_first_mode(len, w0, c.mode_count);
        v.fixed_modes = true;
    }
    if (get("cavity", "modes") || get("cavity", "first_mode")) v.fixed_modes = true;
    if (auto x = get("cavity", "grid_points")) c.grid_points = parse_count("grid_points", *x, w0, len);
    number("cavity", "dt_divisor", c.dt_divisor);
    number("tls", "mu_ge", c.mu_ge);
    number("tls", "sigma", c.sigma);

    const auto positions = get("tls", "positions");
    const auto count = get("tls", "count");
    if (positions && count) throw ConfigError("give either 'positions' or 'count'/'spacing', not both");
    if (positions) {
        c.positions = parse_list(*positions, w0, len);
    } else if (count) {
        const auto spacing = get("tls", "spacing");
        if (!spacing) throw ConfigError("'count' requires 'spacing'");
        double center = 0.5 * len;
        number("tls", "center", center);
        const std::size_t n = parse_count("count", *count, w0, len);
        if (n == 0) throw ConfigError("'count' must be at least 1");
        c.positions = chain_positions(n, parse_value(*spacing, w0, len), center);
    } else if (get("tls", "spacing") || get("tls", "center")) {
        throw ConfigError("'spacing' and 'center' require 'count'");
    }
    const std::size_t n = c.positions.size();
    c.initially_excited.assign(n, false);
    if (n > 0) c.initially_excited[n / 2] = true;
    if (auto x = get("tls", "excited")) {
        const std::string e = *x;
        if (e == "all") c.initially_excited.assign(n, true);
        else if (e == "none") c.initially_excited.assign(n, false);
        else if (e == "middle") {
            c.initially_excited.assign(n, false);
            if (n > 0) c.initially_excited[n / 2] = true;
        } else {
            const auto items = split(e, ',');
            if (items.size() != n)
                throw ConfigError("'excited' lists " + std::to_string(items.size()) + " flags for " +
                                  std::to_string(n) + " TLSs");
            for (std::size_t a = 0; a < n; ++a) c.initially_excited[a] = parse_bool("excited", items[a]);
        }
    }

    number("mmst", "gamma", c.gamma);
    v.sampling = SamplingOptions::from_name(get("mmst", "sampling").value_or("both"), c.gamma);
    if (auto x = get("mmst", "propagator")) v.propagator = propagator_from_name(*x);
    if (auto x = get("mmst", "trajectories")) v.trajectories = parse_count("trajectories", *x, w0, len);
    v.desk_trajectories = v.trajectories;
    if (auto x = get("mmst", "desk_trajectories")) v.desk_trajectories = parse_count("desk_trajectories", *x, w0, len);

    number("run", "t_final", c.t_final);
    number("run", "output_interval", c.output_interval);
    if (auto x = get("run", "snapshot_times")) v.snapshot_times = parse_list(*x, w0, len);
    if (auto x = get("run", "phase_space_times")) v.phase_space_times = parse_list(*x, w0, len);
    if (auto x = get("run", "quantum")) v.quantum = parse_bool("quantum", *x);
    if (auto x = get("run", "fit_window")) v.analysis.fit_window = parse_window("fit_window", *x, w0, len);
    if (auto x = get("run", "quantum_fit_window"))
        v.analysis.quantum_fit_window = parse_window("quantum_fit_window", *x, w0, len);
    if (auto x = get("run", "fit_fixed_intercept")) v.analysis.fit_fixed_intercept = parse_bool("fit_fixed_intercept", *x);
    if (auto x = get("run", "biexponential")) v.analysis.biexponential = parse_bool("biexponential", *x);
    if (auto x = get("run", "delays")) v.analysis.delays = parse_bool("delays", *x);
    number("run", "delay_smoothing", v.analysis.delay_smoothing);
    if (auto x = get("run", "delay_window_end")) v.analysis.delay_window_end = parse_value(*x, w0, len);
    if (auto x = get("run", "derivative")) v.analysis.derivative = parse_bool("derivative", *x);
    if (auto x = get("run", "free_field_control")) v.free_field_control = parse_bool("free_field_control", *x);
    if (auto x = get("run", "coarse_grain")) v.analysis.coarse_grain = parse_count("coarse_grain", *x, w0, len);

    c.validate();
    if (v.trajectories == 0 || v.desk_trajectories == 0) throw ConfigError("trajectories must be at least 1");
    for (const double t : v.snapshot_times)
        if (t < 0.0 || t > c.t_final) throw ConfigError("snapshot time outside [0, t_final]");
    for (const double t : v.phase_space_times)
        if (t < 0.0 || t > c.t_final) throw ConfigError("phase-space time outside [0, t_final]");

    Scenario s;
    s.name = get("run", "name").value_or(name);
    s.description = "configuration file";
    s.variants.push_back(std::move(v));
    return s;
}

Scenario parse_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config file '" + file.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), file.stem().string());
}

void apply_desk_scale(Scenario& scenario) {
    for (auto& v : scenario.variants) {
        if (!v.fixed_modes) {
            v.config.mode_count = 100;
            v.config.first_mode = centered_first_mode(v.config.length, v.config.omega0, 100);
        }
        v.config.grid_points = 1001;
        v.config.t_final = std::min(v.config.t_final, 3.0 * kPi);
        v.trajectories = v.desk_trajectories;
    }
}

void apply_overrides(Scenario& scenario, const RunOverrides& o) {
    for (auto& v : scenario.variants) {
        if (o.trajectories) {
            if (*o.trajectories == 0) throw ConfigError("trajectories must be at least 1");
            v.trajectories = *o.trajectories;
        }
        if (o.propagator) v.propagator = *o.propagator;
        if (o.gamma) {
            v.config.gamma = *o.gamma;
            v.sampling.gamma = *o.gamma;
        }
        if (o.sampling) v.sampling = SamplingOptions::from_name(*o.sampling, v.sampling.gamma);
        if (o.quantum) v.quantum = true;
        v.config.validate();
    }
}

// ---- output ---------------------------------------------------------------

namespace {

std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

class Csv {
public:
    explicit Csv(const std::filesystem::path& path) : out_(path) {
        if (!out_) throw std::runtime_error("cannot write " + path.string());
    }
    void header(const std::vector<std::string>& cols) { line(cols); }
    void row(const std::vector<double>& values) {
        std::vector<std::string> s;
        s.reserve(values.size());
        for (const double v : values) s.push_back(fmt(v));
        line(s);
    }
    void line(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

std::vector<std::size_t> excited_tls(const SystemConfig& c) {
    std::vector<std::size_t> idx;
    for (std::size_t a = 0; a < c.tls_count(); ++a)
        if (c.initially_excited[a]) idx.push_back(a);
    return idx;
}

void write_populations(const std::filesystem::path& path, const std::vector<double>& times, std::size_t n,
                       const std::vector<double>& rho, const std::vector<double>& err) {
    Csv csv(path);
    std::vector<std::string> head{"t"};
    for (std::size_t a = 1; a <= n; ++a) head.push_back("rho_ee_" + std::to_string(a));
    for (std::size_t a = 1; a <= n; ++a) head.push_back("stderr_" + std::to_string(a));
    csv.header(head);
    std::vector<double> row(1 + 2 * n);
    for (std::size_t t = 0; t < times.size(); ++t) {
        row[0] = times[t];
        for (std::size_t a = 0; a < n; ++a) {
            row[1 + a] = rho[t * n + a];
            row[1 + n + a] = err.empty() ? 0.0 : err[t * n + a];
        }
        csv.row(row);
    }
}

void write_profiles(const std::filesystem::path& path, const std::string& prefix, std::span<const double> r,
                    const std::vector<std::vector<double>>& columns) {
    Csv csv(path);
    std::vector<std::string> head{"r"};
    for (std::size_t s = 0; s < columns.size(); ++s) head.push_back(prefix + std::to_string(s));
    csv.header(head);
    std::vector<double> row(1 + columns.size());
    for (std::size_t k = 0; k < r.size(); ++k) {
        row[0] = r[k];
        for (std::size_t s = 0; s < columns.size(); ++s) row[1 + s] = columns[s][k];
        csv.row(row);
    }
}

std::string time_tag(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", t);
    return buf;
}

void write_fit_row(Csv& csv, const std::string& scenario, const FitResult& f, const std::string& status) {
    const bool bi = f.model == FitModel::biexponential;
    const double nan = std::nan("");
    csv.line({scenario, fit_model_name(f.model), fmt(bi ? nan : f.k), fmt(bi ? nan : f.intercept),
              fmt(bi ? f.amplitude : nan), fmt(bi ? f.k_slow : nan), fmt(bi ? f.k_fast : nan), fmt(f.t_begin),
              fmt(f.t_end), fmt(f.residual), status});
}

struct FitAttempt {
    std::optional<FitResult> fit;
    std::string status;
};

FitAttempt try_exponential(const std::vector<double>& t, const std::vector<double>& y, std::pair<double, double> w,
                           bool fixed) {
    try {
        return {fit_exponential(t, y, w.first, w.second, fixed), "ok"};
    } catch (const std::exception& e) {
        return {std::nullopt, std::string("failed: ") + e.what()};
    }
}

}  // namespace

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 || EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
        EVP_MD_CTX_free(ctx);
        throw std::runtime_error("SHA-256 computation failed");
    }
    EVP_MD_CTX_free(ctx);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return hex.str();
}

std::string canonical_description(const Scenario& scenario) {
    nlohmann::ordered_json j;
    j["name"] = scenario.name;
    for (const auto& v : scenario.variants) {
        const auto& c = v.config;
        nlohmann::ordered_json x;
        x["label"] = v.label;
        x["length"] = c.length;
        x["mode_count"] = c.mode_count;
        x["first_mode"] = c.first_mode;
        x["omega0"] = c.omega0;
        x["mu_ge"] = c.mu_ge;
        x["positions"] = c.positions;
        std::vector<int> excited(c.initially_excited.begin(), c.initially_excited.end());
        x["excited"] = excited;
        x["grid_points"] = c.grid_points;
        x["dt_divisor"] = c.dt_divisor;
        x["sigma"] = c.sigma;
        x["t_final"] = c.t_final;
        x["output_interval"] = c.output_interval;
        x["sampling"] = v.sampling.name();
        x["gamma"] = v.sampling.gamma;
        x["propagator"] = std::string(propagator_name(v.propagator));
        x["quantum"] = v.quantum;
        x["trajectories"] = v.trajectories;
        x["snapshot_times"] = v.snapshot_times;
        x["phase_space_times"] = v.phase_space_times;
        x["free_field_control"] = v.free_field_control;
        j["variants"].push_back(x);
    }
    return j.dump();
}

ScenarioReport run_scenario(const Scenario& scenario, const RunOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    auto log = [&](const std::string& msg) {
        if (options.log) *options.log << msg << std::endl;
    };
    std::filesystem::create_directories(options.out_dir);

    ScenarioReport report;
    report.name = scenario.name;
    report.config_hash = sha256_hex(canonical_description(scenario));

    Csv fits(options.out_dir / "fits.csv");
    fits.header({"scenario", "model", "k", "intercept", "A", "k_s", "k_f", "t_begin", "t_end", "residual", "status"});

    nlohmann::ordered_json manifest;
    manifest["scenario"] = scenario.name;
    manifest["description"] = scenario.description;
    manifest["version"] = MMST_VERSION;
    manifest["config_hash"] = report.config_hash;
    manifest["seed"] = options.seed;
    manifest["desk_scale"] = options.desk_scale;

    for (const auto& v : scenario.variants) {
        const auto dir = v.label.empty() ? options.out_dir : options.out_dir / v.label;
        std::filesystem::create_directories(dir);
        const std::string tag = v.label.empty() ? scenario.name : scenario.name + "/" + v.label;
        const auto vstart = std::chrono::steady_clock::now();

        VariantReport vr;
        vr.label = v.label;
        vr.trajectories = v.trajectories;

        const CavityModel model(v.config);
        if (v.propagator == Propagator::fdtd && model.source_under_resolved())
            vr.warnings.push_back("polarization width sigma is below the grid spacing; the source collapses onto "
                                  "the nearest nodes (renormalized to mu_ge)");
        for (const auto& w : vr.warnings) log("warning (" + tag + "): " + w);
        log("running " + tag + ": " + std::to_string(v.trajectories) + " trajectories, " +
            std::string(propagator_name(v.propagator)) + ", sampling " + v.sampling.name());

        EnsembleRequest req;
        req.trajectories = v.trajectories;
        req.seed = options.seed;
        req.propagator = v.propagator;
        req.sampling = v.sampling;
        req.snapshot_times = v.snapshot_times;
        req.phase_space_times = v.phase_space_times;
        req.free_field_control = v.free_field_control;
        req.threads = options.threads;
        req.delays.enabled = v.analysis.delays;
        req.delays.smoothing = v.analysis.delay_smoothing;
        if (v.analysis.delay_window_end) req.delays.window_end = *v.analysis.delay_window_end;
        const EnsembleResult result = run_ensemble(model, req);
        vr.completed = result.completed();
        vr.failed = result.failed;

        const std::size_t n = v.config.tls_count();
        const PopulationSeries pop = population_estimate(result);
        write_populations(dir / "populations.csv", pop.times, n, pop.rho, pop.std_error);
        const auto tracked = excited_tls(v.config);
        const std::vector<double> rho_bar = pop.mean_over(tracked);

        std::optional<QuantumSeries> quantum;
        if (v.quantum) {
            if (v.config.excited_count() > 1) {
                vr.warnings.push_back("quantum reference skipped: it covers at most one initial excitation");
                log("warning (" + tag + "): " + vr.warnings.back());
            } else {
                quantum = run_quantum_reference(model, pop.times, result.snapshot_times);
                write_populations(dir / "populations_quantum.csv", quantum->times, n, quantum->populations, {});
            }
        }

        if (!v.snapshot_times.empty()) {
            const IntensitySeries in = intensity_estimate(result, model);
            write_profiles(dir / "intensity.csv", "I_t", in.r, in.intensity);
            write_profiles(dir / "intensity_stderr.csv", "stderr_t", in.r, in.std_error);
            if (v.analysis.coarse_grain > 1) {
                const IntensitySeries cg = coarse_grain(in, v.analysis.coarse_grain);
                write_profiles(dir / "intensity_coarse.csv", "I_t", cg.r, cg.intensity);
            }
            if (quantum) write_profiles(dir / "intensity_quantum.csv", "I_t", in.r, quantum->intensity);
        }

        for (const auto& table : phase_space_export(result)) {
            if (n == 0) break;
            for (std::size_t a = 0; a < n; ++a) {
                const std::string suffix = n == 1 ? "" : "_tls" + std::to_string(a + 1);
                Csv csv(dir / ("phase_space_t" + time_tag(table.time) + suffix + ".csv"));
                csv.header({"traj_index", "n_g", "n_e"});
                for (const auto& p : table.points)
                    if (p.tls == a) csv.row({static_cast<double>(p.traj_index), p.n_g, p.n_e});
            }
        }

        if (v.analysis.fit_window && n > 0) {
            const auto a = try_exponential(pop.times, rho_bar, *v.analysis.fit_window, v.analysis.fit_fixed_intercept);
            FitResult f;
            if (a.fit) f = *a.fit;
            else {
                f.t_begin = v.analysis.fit_window->first;
                f.t_end = v.analysis.fit_window->second;
                f.residual = std::nan("");
                f.k = std::nan("");
                f.intercept = std::nan("");
                f.converged = false;
            }
            write_fit_row(fits, tag, f, a.status);
            vr.fits.push_back(f);
        }
        if (v.analysis.quantum_fit_window && quantum) {
            std::vector<double> q(quantum->times.size(), 0.0);
            for (std::size_t t = 0; t < q.size(); ++t) {
                for (const auto a : tracked) q[t] += quantum->populations[t * n + a];
                q[t] /= static_cast<double>(std::max<std::size_t>(1, tracked.size()));
            }
            const auto a = try_exponential(quantum->times, q, *v.analysis.quantum_fit_window,
                                           v.analysis.fit_fixed_intercept);
            if (a.fit) {
                write_fit_row(fits, tag + "/quantum", *a.fit, a.status);
                vr.fits.push_back(*a.fit);
            } else {
                fits.line({tag + "/quantum", "exp", "", "", "", "", "", "", "", "", a.status});
            }
        }
        if (v.analysis.biexponential && n > 0) {
            try {
                const FitResult f = fit_biexponential(pop.times, rho_bar);
                write_fit_row(fits, tag, f, f.degenerate ? "degenerate" : (f.converged ? "ok" : "not converged"));
                vr.fits.push_back(f);
            } catch (const std::exception& e) {
                fits.line({tag, "biexp", "", "", "", "", "", "", "", "", std::string("failed: ") + e.what()});
            }
        }

        if (v.analysis.derivative && n > 0 && pop.times.size() >= 3) {
            const double dt = pop.times[1] - pop.times[0];
            const auto d = numerical_derivative(rho_bar, dt, smoothing_points(v.analysis.derivative_smoothing, dt));
            const auto t_d = delay_time(pop.times, rho_bar, v.analysis.derivative_smoothing);
            const auto mf = dicke_meanfield_curve(std::max<std::size_t>(1, tracked.size()),
                                                  fgr_rate(v.config.omega0, v.config.mu_ge), t_d.value_or(0.0),
                                                  pop.times);
            Csv csv(dir / "derivative.csv");
            csv.header({"t", "minus_drho_dt", "meanfield"});
            for (std::size_t t = 0; t < pop.times.size(); ++t) csv.row({pop.times[t], -d[t], mf[t]});
        }

        if (v.analysis.delays) {
            Csv csv(dir / "delays.csv");
            csv.header({"traj_index", "t_D"});
            std::vector<std::optional<double>> values;
            for (const auto& s : result.delays) {
                csv.row({static_cast<double>(s.traj_index), s.t_d.value_or(std::nan(""))});
                values.push_back(s.t_d);
            }
            try {
                const DelayStatistics st =
                    delay_statistics(values, std::max<std::size_t>(1, tracked.size()),
                                     fgr_rate(v.config.omega0, v.config.mu_ge));
                Csv stats(dir / "delay_statistics.csv");
                stats.header({"N", "valid", "missing", "mean", "std", "reference_mean", "reference_std"});
                stats.row({static_cast<double>(tracked.size()), static_cast<double>(st.delays.size()),
                           static_cast<double>(st.missing), st.mean, st.std_dev, st.reference_mean,
                           st.reference_std});
                vr.delays = st;
            } catch (const std::invalid_argument& e) {
                vr.warnings.push_back(std::string("delay statistics unavailable: ") + e.what());
            }
        }

        nlohmann::ordered_json mv;
        mv["label"] = v.label;
        mv["propagator"] = std::string(propagator_name(v.propagator));
        mv["sampling"] = v.sampling.name();
        mv["gamma"] = v.sampling.gamma;
        mv["tls_count"] = n;
        mv["mode_count"] = v.config.mode_count;
        mv["first_mode"] = v.config.first_mode;
        mv["grid_points"] = v.config.grid_points;
        mv["dt"] = v.config.dt();
        mv["t_final"] = v.config.t_final;
        mv["trajectories"] = v.trajectories;
        mv["completed"] = vr.completed;
        mv["failed"] = vr.failed;
        mv["failure_diagnostics"] = result.diagnostics;
        mv["quantum_reference"] = quantum.has_value();
        mv["intensity_estimator"] = v.free_field_control ? "free_field_control" : "baseline_subtraction";
        mv["snapshot_times"] = result.snapshot_times;
        mv["phase_space_times"] = result.phase_space_times;
        mv["warnings"] = vr.warnings;
        mv["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - vstart).count();
        manifest["variants"].push_back(mv);
        report.variants.push_back(std::move(vr));
    }

    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest["wall_seconds"] = report.wall_seconds;
    std::ofstream(options.out_dir / "manifest.json") << manifest.dump(2) << '\n';
    return report;
}

}  // namespace mmst
