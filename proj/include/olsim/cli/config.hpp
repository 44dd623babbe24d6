// config.hpp - experiment specs: INI-style parsing, presets and validation
//
// [experiment]  type, sweep_key, sweep_values, output_prefix, format
// [physical]    PhysicalParams fields plus xi, regime and the laser setup
// [numerics]    per-experiment knobs; every key has a default

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "olsim/directional.hpp"
#include "olsim/errors.hpp"
#include "olsim/params.hpp"

namespace olsim::cli {

// ---------------------------------------------------------------------------
// Raw file

struct ConfigEntry {
    std::string value;
    int line{};
};

struct ConfigFile {
    std::string source;
    std::map<std::string, std::map<std::string, ConfigEntry>> sections;

    const ConfigEntry* find(const std::string& section, const std::string& key) const {
        auto s = sections.find(section);
        if (s == sections.end())
            return nullptr;
        auto k = s->second.find(key);
        return k == s->second.end() ? nullptr : &k->second;
    }
};

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] inline void config_fail(const std::string& source, int line, const std::string& msg) {
    throw ConfigError(source + ":" + std::to_string(line) + ": " + msg);
}

inline ConfigFile parse_config(std::string_view text, const std::string& source = "<spec>") {
    static const std::set<std::string> known{"experiment", "physical", "numerics"};
    ConfigFile cfg;
    cfg.source = source;
    std::string section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(raw.substr(0, hash));
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                config_fail(source, line_no, "malformed section header '" + line + "'");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (!known.count(section))
                config_fail(source, line_no, "unknown section [" + section + "]");
            cfg.sections[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            config_fail(source, line_no, "expected 'key = value', got '" + line + "'");
        if (section.empty())
            config_fail(source, line_no, "key outside of any section");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty())
            config_fail(source, line_no, "empty key");
        if (value.empty())
            config_fail(source, line_no, "empty value for '" + key + "'");
        auto& sec = cfg.sections[section];
        if (sec.count(key))
            config_fail(source, line_no,
                        "duplicate key '" + key + "' (first set on line " + std::to_string(sec[key].line) + ")");
        sec[key] = {value, line_no};
    }
    return cfg;
}

inline std::vector<std::string> split_list(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty())
            out.push_back(item);
    }
    return out;
}

inline std::optional<double> to_number(const std::string& s) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size() || !std::isfinite(v))
            return std::nullopt;
        return v;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

// ---------------------------------------------------------------------------
// Spec

enum class ExperimentKind {
    single_site_trace,
    steady_state_scan,
    coupling_map,
    hardcore_superradiance,
    boson_superradiance,
    decay_spectrum,
    directional,
    validity_report
};

inline const std::vector<std::pair<ExperimentKind, std::string>>& experiment_names() {
    static const std::vector<std::pair<ExperimentKind, std::string>> names{
        {ExperimentKind::single_site_trace, "single_site_trace"},
        {ExperimentKind::steady_state_scan, "steady_state_scan"},
        {ExperimentKind::coupling_map, "coupling_map"},
        {ExperimentKind::hardcore_superradiance, "hardcore_superradiance"},
        {ExperimentKind::boson_superradiance, "boson_superradiance"},
        {ExperimentKind::decay_spectrum, "decay_spectrum"},
        {ExperimentKind::directional, "directional"},
        {ExperimentKind::validity_report, "validity_report"}};
    return names;
}

inline std::string to_string(ExperimentKind k) {
    for (const auto& [kind, name] : experiment_names())
        if (kind == k)
            return name;
    return "?";
}

enum class OutputFormat { delimited, summary };
enum class LaserMode { none, resonant, vector };

/// Numerics keys: name, default, experiments it applies to (empty: all) and
/// the accepted values for choice keys (empty: numeric).
struct NumericKey {
    std::string name;
    std::string fallback;
    std::vector<ExperimentKind> applies;
    std::vector<std::string> choices;
    bool integer{false};
    double min{-HUGE_VAL};
    std::string help;
};

inline const std::vector<NumericKey>& numeric_keys() {
    using E = ExperimentKind;
    static const std::vector<NumericKey> keys{
        {"ode_rtol", "1e-8", {E::hardcore_superradiance}, {}, false, 0.0, "ODE relative tolerance"},
        {"ode_atol", "1e-12", {E::hardcore_superradiance}, {}, false, 0.0, "ODE absolute tolerance"},
        {"method", "analytic", {E::single_site_trace}, {"analytic", "direct", "both"}, false, 0, "amplitude solver"},
        {"t_end_gamma0", "20", {E::single_site_trace}, {}, false, 0.0, "horizon in units of 1/Gamma0"},
        {"horizon_gamma0", "5", {E::hardcore_superradiance, E::boson_superradiance}, {}, false, 0.0,
         "horizon in units of 1/Gamma0"},
        {"points", "401", {E::single_site_trace}, {}, true, 2.0, "output samples"},
        {"direct_step", "0.5", {E::single_site_trace}, {}, false, 0.0, "direct solver step in units of 1/omega0"},
        {"direct_step_tolerance", "1e-6", {E::single_site_trace}, {}, false, 0.0, "step-halving tolerance"},
        {"scan_min", "-0.05", {E::steady_state_scan}, {}, false, -HUGE_VAL, "first detuning, units of omega0"},
        {"scan_max", "0.1", {E::steady_state_scan}, {}, false, -HUGE_VAL, "last detuning, units of omega0"},
        {"scan_points", "100", {E::steady_state_scan}, {}, true, 2.0, "detuning samples"},
        {"radius", "3", {E::coupling_map}, {}, true, 1.0, "largest |j - l| tabulated"},
        {"oracle", "false", {E::coupling_map}, {"true", "false"}, false, 0, "add quadrature-oracle columns"},
        {"closure", "as_printed", {E::hardcore_superradiance}, {"as_printed", "consistent"}, false, 0,
         "three-point closure variant"},
        {"exact_check", "false", {E::hardcore_superradiance}, {"true", "false"}, false, 0,
         "also run the density-matrix solver (at most 12 sites)"},
        {"points_linear", "200", {E::hardcore_superradiance, E::boson_superradiance}, {}, true, 1.0,
         "uniform time samples"},
        {"points_geometric", "60", {E::hardcore_superradiance, E::boson_superradiance}, {}, true, 0.0,
         "geometric time samples near t = 0"},
        {"phases", "superfluid,mott", {E::boson_superradiance}, {}, false, 0, "initial phases, comma separated"},
        {"filling", "1", {E::boson_superradiance}, {}, true, 1.0, "atoms per site"},
        {"include_dispersive", "true", {E::boson_superradiance}, {"true", "false"}, false, 0,
         "evolve with Lambda as well as gamma"},
        {"nodes_per_width", "16", {E::directional}, {}, true, 1.0, "angular nodes across xi/M"},
        {"output_theta", "181", {E::directional}, {}, true, 2.0, "theta samples in the data file"},
        {"output_phi", "72", {E::directional}, {}, true, 1.0, "phi samples in the data file"},
        {"cone_factor", "3", {E::directional}, {}, false, 0.0, "cone half angle in units of xi/M"},
        {"maxima_cutoff", "2", {E::directional}, {}, true, 0.0, "max |m_a| in the maxima search"},
    };
    return keys;
}

inline const std::vector<std::string>& sweepable_keys() {
    static const std::vector<std::string> k{"rabi",           "trap",           "detuning",      "lattice_spacing",
                                            "ground_width",   "sites_per_axis", "reservoir_dim", "xi"};
    return k;
}

struct SweepAxis {
    std::string key;
    std::vector<double> values;
    int line{};
};

struct ExperimentSpec {
    std::string source;
    std::string text; // echo of the parsed file
    ExperimentKind experiment{ExperimentKind::validity_report};
    PhysicalParams params;
    std::optional<double> xi;
    int range_sign{+1};
    LaserMode laser{LaserMode::none};
    Eigen::Vector3d laser_direction{Eigen::Vector3d::UnitZ()};
    std::optional<SweepAxis> sweep;
    std::map<std::string, std::string> numerics; // every applicable key, resolved
    std::set<std::string> defaulted;
    std::string output_prefix{"olsim"};
    OutputFormat format{OutputFormat::delimited};
    std::map<std::string, int> lines; // "section.key" -> line

    double number(const std::string& key) const { return std::stod(numerics.at(key)); }
    int integer(const std::string& key) const { return static_cast<int>(std::lround(number(key))); }
    bool flag(const std::string& key) const { return numerics.at(key) == "true"; }
    const std::string& text_value(const std::string& key) const { return numerics.at(key); }
    int line_of(const std::string& section, const std::string& key) const {
        auto it = lines.find(section + "." + key);
        return it == lines.end() ? 0 : it->second;
    }
};

namespace detail {

inline bool applies(const NumericKey& k, ExperimentKind e) {
    return k.applies.empty() || std::find(k.applies.begin(), k.applies.end(), e) != k.applies.end();
}

/// Range check for one physical field; returns an empty string when valid.
inline std::string check_physical(const std::string& key, double v) {
    auto is_int = [](double x) { return std::floor(x) == x; };
    if (key == "rabi" || key == "trap" || key == "lattice_spacing" || key == "ground_width" || key == "xi")
        return v > 0.0 ? "" : key + " must be > 0";
    if (key == "sites_per_axis")
        return is_int(v) && v >= 1.0 && v <= 64.0 ? "" : "sites_per_axis must be an integer in [1, 64]";
    if (key == "reservoir_dim")
        return is_int(v) && v >= 1.0 && v <= 3.0 ? "" : "reservoir_dim must be 1, 2 or 3";
    return "";
}

inline void set_physical(PhysicalParams& p, std::optional<double>& xi, const std::string& key, double v) {
    if (key == "rabi")
        p.rabi = v;
    else if (key == "trap")
        p.trap = v;
    else if (key == "detuning")
        p.detuning = v;
    else if (key == "lattice_spacing")
        p.lattice_spacing = v;
    else if (key == "ground_width")
        p.ground_width = v;
    else if (key == "sites_per_axis")
        p.sites_per_axis = static_cast<int>(v);
    else if (key == "reservoir_dim")
        p.reservoir_dim = static_cast<int>(v);
    else if (key == "xi")
        xi = v;
}

inline Eigen::Vector3d parse_vector(const ConfigFile& cfg, const ConfigEntry& e, const std::string& key) {
    std::vector<std::string> parts = split_list(e.value, ' ');
    if (parts.size() == 1)
        parts = split_list(e.value, ',');
    if (parts.size() != 3)
        config_fail(cfg.source, e.line, key + " needs three components");
    Eigen::Vector3d v;
    for (int i = 0; i < 3; ++i) {
        const auto x = to_number(parts[static_cast<std::size_t>(i)]);
        if (!x)
            config_fail(cfg.source, e.line, key + ": '" + parts[static_cast<std::size_t>(i)] + "' is not a number");
        v[i] = *x;
    }
    return v;
}

} // namespace detail

inline ExperimentSpec build_spec(const ConfigFile& cfg, const std::string& text = {}) {
    ExperimentSpec spec;
    spec.source = cfg.source;
    spec.text = text;
    const auto fail = [&](int line, const std::string& msg) { config_fail(cfg.source, line, msg); };
    for (const auto& [sec, entries] : cfg.sections)
        for (const auto& [key, e] : entries)
            spec.lines[sec + "." + key] = e.line;

    // [experiment]
    const auto* type = cfg.find("experiment", "type");
    if (!type)
        fail(0, "missing [experiment] type");
    bool found = false;
    for (const auto& [kind, name] : experiment_names())
        if (name == type->value) {
            spec.experiment = kind;
            found = true;
        }
    if (!found)
        fail(type->line, "unknown experiment '" + type->value + "'");
    static const std::set<std::string> exp_keys{"type", "sweep_key", "sweep_values", "output_prefix", "format"};
    if (auto it = cfg.sections.find("experiment"); it != cfg.sections.end())
        for (const auto& [key, e] : it->second)
            if (!exp_keys.count(key))
                fail(e.line, "unknown key '" + key + "' in [experiment]");
    if (const auto* e = cfg.find("experiment", "output_prefix")) {
        if (e->value.find_first_of("/\\") != std::string::npos)
            fail(e->line, "output_prefix must be a plain file name prefix");
        spec.output_prefix = e->value;
    }
    if (const auto* e = cfg.find("experiment", "format")) {
        if (e->value == "delimited")
            spec.format = OutputFormat::delimited;
        else if (e->value == "summary")
            spec.format = OutputFormat::summary;
        else
            fail(e->line, "format must be 'delimited' or 'summary'");
    }

    // [physical]
    static const std::set<std::string> numeric_phys{"rabi",         "trap",           "detuning",     "lattice_spacing",
                                                    "ground_width", "sites_per_axis", "reservoir_dim", "xi"};
    if (auto it = cfg.sections.find("physical"); it != cfg.sections.end())
        for (const auto& [key, e] : it->second) {
            if (numeric_phys.count(key)) {
                const auto v = to_number(e.value);
                if (!v)
                    fail(e.line, key + ": '" + e.value + "' is not a finite number");
                if (auto msg = detail::check_physical(key, *v); !msg.empty())
                    fail(e.line, msg);
                detail::set_physical(spec.params, spec.xi, key, *v);
            } else if (key == "regime") {
                if (e.value == "radiative")
                    spec.range_sign = +1;
                else if (e.value == "bound")
                    spec.range_sign = -1;
                else
                    fail(e.line, "regime must be 'radiative' or 'bound'");
            } else if (key == "laser") {
                if (e.value == "none")
                    spec.laser = LaserMode::none;
                else if (e.value == "resonant")
                    spec.laser = LaserMode::resonant;
                else if (e.value == "vector")
                    spec.laser = LaserMode::vector;
                else
                    fail(e.line, "laser must be 'none', 'resonant' or 'vector'");
            } else if (key == "laser_direction") {
                spec.laser_direction = detail::parse_vector(cfg, e, key);
                if (spec.laser_direction.norm() == 0.0)
                    fail(e.line, "laser_direction must be nonzero");
                spec.laser_direction.normalize();
            } else if (key == "laser_wavevector") {
                spec.params.laser_wavevector = detail::parse_vector(cfg, e, key);
            } else {
                fail(e.line, "unknown key '" + key + "' in [physical]");
            }
        }
    const auto* det = cfg.find("physical", "detuning");
    const auto* xi = cfg.find("physical", "xi");
    if (det && xi)
        fail(xi->line, "xi and detuning both set; xi fixes the detuning");
    if (const auto* r = cfg.find("physical", "regime"); r && !xi)
        if (!(cfg.find("experiment", "sweep_key") && cfg.find("experiment", "sweep_key")->value == "xi"))
            fail(r->line, "regime only applies when xi sets the detuning");
    if (const auto* w = cfg.find("physical", "laser_wavevector"); w && spec.laser != LaserMode::vector)
        fail(w->line, "laser_wavevector needs laser = vector");
    if (const auto* d = cfg.find("physical", "laser_direction"); d && spec.laser != LaserMode::resonant)
        fail(d->line, "laser_direction needs laser = resonant");

    // sweep
    const auto* sk = cfg.find("experiment", "sweep_key");
    const auto* sv = cfg.find("experiment", "sweep_values");
    if (static_cast<bool>(sk) != static_cast<bool>(sv))
        fail((sk ? sk : sv)->line, "sweep_key and sweep_values must be given together");
    if (sk) {
        const auto& keys = sweepable_keys();
        if (std::find(keys.begin(), keys.end(), sk->value) == keys.end())
            fail(sk->line, "cannot sweep over unknown key '" + sk->value + "'");
        if (sk->value == "xi" && det)
            fail(sk->line, "sweeping xi conflicts with the fixed detuning on line " + std::to_string(det->line));
        if (sk->value == "detuning" && xi)
            fail(sk->line, "sweeping detuning conflicts with xi on line " + std::to_string(xi->line));
        SweepAxis axis{sk->value, {}, sv->line};
        for (const auto& item : split_list(sv->value, ',')) {
            const auto v = to_number(item);
            if (!v)
                fail(sv->line, "sweep value '" + item + "' is not a finite number");
            if (auto msg = detail::check_physical(sk->value, *v); !msg.empty())
                fail(sv->line, "sweep value " + item + ": " + msg);
            axis.values.push_back(*v);
        }
        if (axis.values.empty())
            fail(sv->line, "sweep_values is empty");
        spec.sweep = axis;
    }

    // [numerics]
    std::set<std::string> given;
    if (auto it = cfg.sections.find("numerics"); it != cfg.sections.end())
        for (const auto& [key, e] : it->second) {
            const auto& table = numeric_keys();
            auto k = std::find_if(table.begin(), table.end(), [&](const NumericKey& nk) { return nk.name == key; });
            if (k == table.end())
                fail(e.line, "unknown key '" + key + "' in [numerics]");
            if (!detail::applies(*k, spec.experiment))
                fail(e.line, "key '" + key + "' does not apply to experiment " + to_string(spec.experiment));
            if (key == "phases") {
                for (const auto& ph : split_list(e.value, ','))
                    if (ph != "mott" && ph != "superfluid")
                        fail(e.line, "unknown phase '" + ph + "'");
            } else if (!k->choices.empty()) {
                if (std::find(k->choices.begin(), k->choices.end(), e.value) == k->choices.end())
                    fail(e.line, key + " must be one of the listed choices, got '" + e.value + "'");
            } else {
                const auto v = to_number(e.value);
                if (!v)
                    fail(e.line, key + ": '" + e.value + "' is not a finite number");
                if (k->integer && std::floor(*v) != *v)
                    fail(e.line, key + " must be an integer");
                if (!(*v >= k->min) || (k->min == 0.0 && !k->integer && *v <= 0.0))
                    fail(e.line, key + " is out of range");
            }
            spec.numerics[key] = e.value;
            given.insert(key);
        }
    for (const auto& k : numeric_keys())
        if (detail::applies(k, spec.experiment) && !given.count(k.name)) {
            spec.numerics[k.name] = k.fallback;
            spec.defaulted.insert(k.name);
        }
    if (spec.experiment == ExperimentKind::steady_state_scan && spec.number("scan_min") >= spec.number("scan_max"))
        fail(spec.line_of("numerics", "scan_max"), "scan_max must exceed scan_min");
    if (spec.experiment == ExperimentKind::steady_state_scan && spec.sweep && spec.sweep->key == "detuning")
        fail(spec.sweep->line, "steady_state_scan scans the detuning itself");

    // experiment-specific requirements
    const int type_line = type->line;
    if (spec.experiment == ExperimentKind::directional) {
        if (spec.laser != LaserMode::resonant)
            fail(type_line, "directional needs laser = resonant");
        if (spec.range_sign < 0)
            fail(spec.line_of("physical", "regime"), "directional needs the radiative regime");
    }
    if (spec.laser != LaserMode::none && (spec.experiment == ExperimentKind::single_site_trace ||
                                          spec.experiment == ExperimentKind::steady_state_scan))
        fail(spec.line_of("physical", "laser"), "laser does not apply to experiment " + to_string(spec.experiment));
    return spec;
}

inline ExperimentSpec parse_spec(std::string_view text, const std::string& source = "<spec>") {
    return build_spec(parse_config(text, source), std::string(text));
}

/// Physical parameters of one sweep point: base values, the sweep override,
/// xi (through the detuning) and finally the resonant laser.
inline PhysicalParams point_params(const ExperimentSpec& spec, std::optional<double> sweep_value = std::nullopt) {
    PhysicalParams p = spec.params;
    std::optional<double> xi = spec.xi;
    if (spec.sweep && sweep_value)
        detail::set_physical(p, xi, spec.sweep->key, *sweep_value);
    if (xi)
        p = with_range(p, *xi, spec.range_sign);
    if (spec.laser == LaserMode::resonant)
        p = with_resonant_laser(p, spec.laser_direction);
    p.validate();
    return p;
}

inline std::vector<std::optional<double>> sweep_points(const ExperimentSpec& spec) {
    if (!spec.sweep)
        return {std::nullopt};
    std::vector<std::optional<double>> out;
    for (double v : spec.sweep->values)
        out.emplace_back(v);
    return out;
}

// ---------------------------------------------------------------------------
// Presets

struct Preset {
    std::string name;
    std::string description;
    std::string text;
};

inline const std::vector<Preset>& presets() {
    static const std::vector<Preset> list{
        {"fig2", "finite-trap steady state vs detuning at Omega/omega0 = 0.02, 0.05, 0.1",
         R"(# trapped population against the Raman detuning; the transition sits at 4 Omega^2/omega0
[experiment]
type = steady_state_scan
sweep_key = rabi
sweep_values = 0.02, 0.05, 0.1
output_prefix = fig2

[physical]
trap = 1

[numerics]
scan_min = -0.05
scan_max = 0.1
scan_points = 100
)"},
        {"fig2a", "single-site amplitude in the bound region (representative values)",
         R"(# representative bound-region point: delta_tilde = -10 pi alpha^2
[experiment]
type = single_site_trace
output_prefix = fig2a

[physical]
rabi = 0.05
trap = 1
detuning = 0.0084292

[numerics]
t_end_gamma0 = 20
)"},
        {"fig2b", "single-site amplitude in the pure non-Markovian region (representative values)",
         R"(# representative pure non-Markovian point: 0 < delta_tilde < pi alpha^2
[experiment]
type = single_site_trace
output_prefix = fig2b

[physical]
rabi = 0.05
trap = 1
detuning = 0.0100785

[numerics]
t_end_gamma0 = 20
)"},
        {"fig2c", "single-site amplitude in the radiative region (representative values)",
         R"(# representative radiative point: delta_tilde = 20 pi alpha^2
[experiment]
type = single_site_trace
output_prefix = fig2c

[physical]
rabi = 0.05
trap = 1
detuning = 0.0131416

[numerics]
t_end_gamma0 = 20
)"},
        {"fig3", "Markov couplings against distance, d0/X0 = 10, k_L = 0, four ranges",
         R"(# the four xi values are a representative choice
[experiment]
type = coupling_map
sweep_key = xi
sweep_values = 0.1, 0.5, 1, 2
output_prefix = fig3

[physical]
rabi = 0.01
trap = 1
ground_width = 1
lattice_spacing = 10
regime = radiative

[numerics]
radius = 10
)"},
        {"fig4", "hard-core superradiance, M^3 = 27, xi = 0.01, 0.5, 1, 10",
         R"([experiment]
type = hardcore_superradiance
sweep_key = xi
sweep_values = 0.01, 0.5, 1, 10
output_prefix = fig4

[physical]
rabi = 0.01
trap = 1
ground_width = 0.1
lattice_spacing = 1
sites_per_axis = 3
regime = radiative
)"},
        {"fig5", "bosonic superradiance, M^3 = 27, superfluid and Mott initial states",
         R"([experiment]
type = boson_superradiance
sweep_key = xi
sweep_values = 0.01, 0.5, 1, 10, 100
output_prefix = fig5

[physical]
rabi = 0.01
trap = 1
ground_width = 0.1
lattice_spacing = 1
sites_per_axis = 3
regime = radiative

[numerics]
phases = superfluid, mott
# the limit laws for N(t) follow from the dissipative part alone
include_dispersive = false
)"},
        {"directional_demo", "angular distribution for M = 10, xi = 0.5 with k_L = k0",
         R"([experiment]
type = directional
output_prefix = directional

[physical]
rabi = 0.001
trap = 1
ground_width = 0.25
lattice_spacing = 10
sites_per_axis = 10
xi = 0.5
regime = radiative
laser = resonant
laser_direction = 0 0 1
)"},
    };
    return list;
}

inline const Preset& find_preset(const std::string& name) {
    for (const auto& p : presets())
        if (p.name == name)
            return p;
    throw UnknownPreset("'" + name + "'");
}

inline ExperimentSpec preset(const std::string& name) {
    return parse_spec(find_preset(name).text, "preset:" + name);
}

// ---------------------------------------------------------------------------
// Validation

struct Diagnostics {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    bool ok() const { return errors.empty(); }
};

/// Physics warnings for one sweep point; never throws on physics.
inline std::vector<std::string> point_warnings(const ExperimentSpec& spec, const PhysicalParams& p) {
    auto out = physics_warnings(p);
    if (spec.experiment != ExperimentKind::directional)
        return out;
    try {
        const auto s = derive_scales(p);
        const auto v = validity_bound(p, s);
        if (!v.satisfied)
            out.push_back("Gamma << v0/L not satisfied: Omega^2/omega0^2 = " + std::to_string(v.lhs) +
                          " against " + std::to_string(v.rhs));
        if (!gaussian_peak_estimates(p, s).narrow)
            out.push_back("xi/M > 0.2: Gaussian peak estimates are unreliable");
        if (std::numbers::pi * s.xi <= 1.0)
            out.push_back("pi xi <= 1: emission is not confined to the laser direction");
    } catch (const Error& e) {
        out.emplace_back(e.what());
    }
    return out;
}

inline Diagnostics validate_text(std::string_view text, const std::string& source) {
    Diagnostics d;
    ExperimentSpec spec;
    try {
        spec = parse_spec(text, source);
    } catch (const Error& e) {
        d.errors.emplace_back(e.what());
        return d;
    }
    for (const auto& v : sweep_points(spec)) {
        const std::string where = v ? spec.sweep->key + " = " + std::to_string(*v) + ": " : std::string();
        try {
            const auto p = point_params(spec, v);
            for (const auto& w : point_warnings(spec, p))
                d.warnings.push_back(where + w);
        } catch (const Error& e) {
            const int line = spec.sweep ? spec.sweep->line : 0;
            d.errors.push_back(source + ":" + std::to_string(line) + ": " + where + e.what());
        }
    }
    return d;
}

} // namespace olsim::cli
