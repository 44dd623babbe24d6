// runner.hpp - executes an ExperimentSpec: one job per sweep point, data files
// written atomically, plus a JSON manifest describing the run

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "olsim/cli/config.hpp"
#include "olsim/collective.hpp"
#include "olsim/couplings.hpp"
#include "olsim/directional.hpp"
#include "olsim/master_exact.hpp"
#include "olsim/params.hpp"
#include "olsim/single_site.hpp"

namespace olsim::cli {

using json = nlohmann::ordered_json;

struct RunOptions {
    std::filesystem::path out_dir{"."};
    int threads{1};
    double tolerance_scale{1.0};
};

struct PointOutput {
    std::string label;
    std::optional<double> value;
    std::vector<std::string> files;
    json derived = json::object();
    json diagnostics = json::object();
    std::vector<std::string> warnings;
    double wall_time{};
    std::string error;
};

struct RunReport {
    bool ok{true};
    std::vector<PointOutput> points;
    std::filesystem::path manifest;
};

/// Writes to a temporary sibling and renames it into place.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os)
            throw Error("cannot open " + tmp.string() + " for writing");
        os << content;
        if (!os.flush())
            throw Error("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return buf;
}

inline json derived_json(const PhysicalParams& p) {
    json j;
    j["x0"] = p.x0();
    j["level_shift"] = p.level_shift();
    try {
        const auto s = derive_scales(p);
        j["delta_tilde"] = s.delta_tilde;
        j["alpha_sq"] = s.alpha_sq;
        j["gamma0"] = s.gamma0;
        j["k0"] = s.k0;
        j["xi"] = s.xi;
        j["regime"] = to_string(s.regime);
        j["markov_ratio"] = classify_markovianity(s).ratio;
    } catch (const Error& e) {
        j["error"] = e.what();
    }
    return j;
}

inline json params_json(const PhysicalParams& p) {
    json j;
    j["rabi"] = p.rabi;
    j["trap"] = p.trap;
    j["detuning"] = p.detuning;
    j["lattice_spacing"] = p.lattice_spacing;
    j["ground_width"] = p.x0();
    j["laser_wavevector"] = {p.laser_wavevector.x(), p.laser_wavevector.y(), p.laser_wavevector.z()};
    j["sites_per_axis"] = p.sites_per_axis;
    j["reservoir_dim"] = p.reservoir_dim;
    return j;
}

namespace detail {

/// Collects the data files of one point; names are <prefix>[_<label>][_<tag>].
struct Sink {
    const ExperimentSpec& spec;
    const RunOptions& opt;
    PointOutput& out;

    std::string stem(const std::string& tag) const {
        std::string s = spec.output_prefix;
        if (!out.label.empty())
            s += "_" + out.label;
        if (!tag.empty())
            s += "_" + tag;
        return s;
    }
    void csv(const std::string& tag, const std::string& content) {
        if (spec.format != OutputFormat::delimited)
            return;
        const std::string name = stem(tag) + ".csv";
        atomic_write(opt.out_dir / name, content);
        out.files.push_back(name);
    }
};

inline std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        v[static_cast<std::size_t>(i)] = n == 1 ? a : a + (b - a) * i / (n - 1);
    return v;
}

inline void run_single_site(const ExperimentSpec& spec, const RunOptions& opt, const PhysicalParams& p, Sink& sink) {
    const auto s = derive_scales(p);
    const std::string method = spec.text_value("method");
    const double t_end = spec.number("t_end_gamma0") / s.gamma0;
    auto& d = sink.out.diagnostics;
    if (s.regime == Regime::bound)
        d["analytic_steady_population"] = analytic_steady_population(s);
    if (method == "analytic" || method == "both") {
        const auto tr = solve_amplitude_analytic(s, linspace(0.0, t_end, spec.integer("points")));
        std::ostringstream os;
        os.precision(12);
        os << "t,t_gamma0,re_amplitude,im_amplitude,population\n";
        for (std::size_t i = 0; i < tr.times.size(); ++i)
            os << tr.times[i] << ',' << tr.times[i] * s.gamma0 << ',' << tr.amplitude[i].real() << ','
               << tr.amplitude[i].imag() << ',' << tr.population[i] << '\n';
        sink.csv("analytic", os.str());
        d["analytic_final_population"] = tr.population.back();
    }
    if (method == "direct" || method == "both") {
        DirectOptions o;
        o.step = spec.number("direct_step") / p.trap;
        o.step_tolerance = spec.number("direct_step_tolerance") * opt.tolerance_scale;
        const double steps = t_end / o.step;
        o.output_stride = static_cast<std::size_t>(std::max(1.0, std::floor(steps / (spec.integer("points") - 1))));
        const auto tr = solve_amplitude_direct(CorrelationKernel::from(p), t_end, o);
        std::ostringstream os;
        os.precision(12);
        os << "t,t_gamma0,re_amplitude,im_amplitude,population,emitted,unitarity_residual\n";
        double worst = 0.0;
        for (std::size_t i = 0; i < tr.times.size(); ++i) {
            const double res = tr.population[i] + tr.emitted[i] - 1.0;
            worst = std::max(worst, std::abs(res));
            os << tr.times[i] << ',' << tr.times[i] * s.gamma0 << ',' << tr.amplitude[i].real() << ','
               << tr.amplitude[i].imag() << ',' << tr.population[i] << ',' << tr.emitted[i] << ',' << res << '\n';
        }
        sink.csv("direct", os.str());
        d["direct_final_population"] = tr.population.back();
        d["direct_step"] = o.step;
        d["direct_max_unitarity_residual"] = worst;
    }
}

inline void run_steady_scan(const ExperimentSpec& spec, const PhysicalParams& base, Sink& sink) {
    const auto grid = linspace(spec.number("scan_min") * base.trap, spec.number("scan_max") * base.trap,
                               spec.integer("scan_points"));
    const double transition = base.level_shift();
    std::ostringstream os;
    os.precision(12);
    os << "detuning,detuning_over_trap,delta_tilde,population,population_strong_confinement,transition_detuning\n";
    double last_trapped = NAN, first_free = NAN;
    int failures = 0;
    for (double det : grid) {
        PhysicalParams p = base;
        p.detuning = det;
        double pop = NAN, strong = NAN;
        try {
            pop = steady_population_finite_trap(p).population;
            const auto s = derive_scales(p);
            strong = s.regime == Regime::bound ? analytic_steady_population(s) : 0.0;
        } catch (const Error&) {
            ++failures;
        }
        if (pop > 0.01)
            last_trapped = det;
        if (pop < 1e-3 && std::isnan(first_free) && det > transition - 1e-15)
            first_free = det;
        os << det << ',' << det / p.trap << ',' << det - transition << ',' << pop << ',' << strong << ','
           << transition << '\n';
    }
    sink.csv("", os.str());
    auto& d = sink.out.diagnostics;
    d["predicted_transition"] = transition;
    d["last_trapped_detuning"] = std::isnan(last_trapped) ? json(nullptr) : json(last_trapped);
    d["first_free_detuning"] = std::isnan(first_free) ? json(nullptr) : json(first_free);
    d["grid_step"] = grid.size() > 1 ? grid[1] - grid[0] : 0.0;
    d["failed_points"] = failures;
}

inline void run_coupling_map(const ExperimentSpec& spec, const RunOptions& opt, const PhysicalParams& p, Sink& sink) {
    const auto s = derive_scales(p);
    const int r = spec.integer("radius");
    const bool oracle = spec.flag("oracle");
    std::vector<Displacement> table;
    for (int a = 0; a <= r; ++a)
        for (int b = 0; b <= a; ++b)
            for (int c = 0; c <= b; ++c)
                if (a * a + b * b + c * c <= r * r)
                    table.push_back({a, b, c});
    std::stable_sort(table.begin(), table.end(), [](const Displacement& x, const Displacement& y) {
        return displacement_norm(x) < displacement_norm(y);
    });
    std::ostringstream os;
    os.precision(12);
    os << "dx,dy,dz,distance,re_gamma,im_gamma,re_over_gamma0,im_over_gamma0";
    if (oracle)
        os << ",oracle_re,oracle_im,relative_deviation";
    os << '\n';
    OracleOptions oo;
    oo.rel_tol *= opt.tolerance_scale;
    double worst = 0.0;
    for (const auto& dj : table) {
        const cplx g = dj == Displacement{0, 0, 0} ? cplx(s.gamma0, 0.0) : coupling_closed_form(p, s, dj);
        os << dj[0] << ',' << dj[1] << ',' << dj[2] << ',' << displacement_norm(dj) << ',' << g.real() << ','
           << g.imag() << ',' << g.real() / s.gamma0 << ',' << g.imag() / s.gamma0;
        if (oracle) {
            if (dj == Displacement{0, 0, 0}) {
                os << ",,,";
            } else {
                const cplx o = coupling_quadrature_oracle(p, dj, 1.0, oo);
                const double dev = std::abs(g - o) / std::abs(o);
                worst = std::max(worst, dev);
                os << ',' << o.real() << ',' << o.imag() << ',' << dev;
            }
        }
        os << '\n';
    }
    sink.csv("", os.str());
    sink.out.diagnostics["displacements"] = table.size();
    if (oracle)
        sink.out.diagnostics["max_oracle_deviation"] = worst;
}

inline std::string emission_csv(const EmissionRecord& r) {
    std::ostringstream os;
    write_emission_csv(os, r);
    return os.str();
}

inline void run_hardcore(const ExperimentSpec& spec, const RunOptions& opt, const PhysicalParams& p, Sink& sink) {
    const auto s = derive_scales(p);
    const auto m = build_coupling_matrix(p, s);
    const int n = m.size();
    const auto times = hybrid_time_grid(spec.number("horizon_gamma0") / s.gamma0, spec.integer("points_linear"),
                                        spec.integer("points_geometric"));
    SpinOptions so;
    so.closure = spec.text_value("closure") == "consistent" ? SpinClosure::consistent : SpinClosure::as_printed;
    so.ode.rel_tol = spec.number("ode_rtol") * opt.tolerance_scale;
    so.ode.abs_tol = spec.number("ode_atol") * opt.tolerance_scale;
    const auto res = evolve_spin_semiclassical(initial_state(EmitterKind::spin, InitialPhase::mott, n,
                                                             p.sites_per_axis),
                                               m, times, so);
    sink.csv("", emission_csv(res.trace));
    const auto slope = initial_rate_slope(m);
    const auto peak = std::max_element(res.trace.rate.begin(), res.trace.rate.end()) - res.trace.rate.begin();
    auto& d = sink.out.diagnostics;
    d["closure"] = to_string(so.closure);
    d["initial_slope_normalized"] = slope.normalized;
    d["superradiant_onset"] = slope.superradiant;
    d["rate_max_time_gamma0"] = res.trace.times[static_cast<std::size_t>(peak)] * s.gamma0;
    d["final_number"] = res.trace.n_total.back();
    for (const auto& w : m.warnings)
        sink.out.warnings.push_back(w);
    if (spec.flag("exact_check")) {
        ExactOptions eo;
        eo.ode.rel_tol = 1e-8 * opt.tolerance_scale;
        eo.ode.abs_tol = 1e-11 * opt.tolerance_scale;
        const auto ex = evolve_master_exact(m, EmitterKind::spin, ExactInitial::mott(n), times, eo);
        sink.csv("exact", emission_csv(ex.trace));
        double dev = 0.0;
        for (std::size_t i = 0; i < times.size(); ++i)
            dev = std::max(dev, std::abs(ex.trace.n_total[i] - res.trace.n_total[i]) / n);
        d["exact_max_deviation"] = dev;
    }
}

inline void run_boson(const ExperimentSpec& spec, const PhysicalParams& p, Sink& sink) {
    const auto s = derive_scales(p);
    const auto m = build_coupling_matrix(p, s);
    const int n = m.size();
    const auto times = hybrid_time_grid(spec.number("horizon_gamma0") / s.gamma0, spec.integer("points_linear"),
                                        spec.integer("points_geometric"));
    BosonOptions bo;
    bo.include_dispersive = spec.flag("include_dispersive");
    for (const auto& phase_name : split_list(spec.text_value("phases"), ',')) {
        const auto phase = phase_name == "mott" ? InitialPhase::mott : InitialPhase::superfluid;
        const auto c0 = initial_state(EmitterKind::boson, phase, spec.integer("filling") * n, p.sites_per_axis);
        const auto res = evolve_boson(c0, m, times, bo);
        sink.csv(phase_name, emission_csv(res.trace));
        sink.out.diagnostics[phase_name + "_final_number"] = res.trace.n_total.back();
    }
    for (const auto& w : m.warnings)
        sink.out.warnings.push_back(w);
}

inline void run_spectrum(const PhysicalParams& p, Sink& sink) {
    const auto s = derive_scales(p);
    const auto m = build_coupling_matrix(p, s);
    const auto b = decay_spectrum(m);
    std::ostringstream os;
    os.precision(12);
    os << "index,rate,rate_over_gamma0\n";
    for (int i = 0; i < b.rates.size(); ++i)
        os << i << ',' << b.rates(i) << ',' << b.rates(i) / s.gamma0 << '\n';
    sink.csv("", os.str());
    sink.out.diagnostics["max_rate_over_gamma0"] = b.rates.maxCoeff() / s.gamma0;
    sink.out.diagnostics["min_rate_over_gamma0"] = b.rates.minCoeff() / s.gamma0;
    for (const auto& w : m.warnings)
        sink.out.warnings.push_back(w);
}

inline json vec_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

inline void run_directional(const ExperimentSpec& spec, const PhysicalParams& p, Sink& sink) {
    const auto s = derive_scales(p);
    AngularGridSpec g;
    g.nodes_per_width = spec.integer("nodes_per_width");
    const auto dist = angular_distribution(p, s, g);
    std::ostringstream os;
    write_angular_csv(os, dist, spec.integer("output_theta"), spec.integer("output_phi"));
    sink.csv("", os.str());
    const auto sum = summarize(dist, p, s, spec.integer("maxima_cutoff"));
    auto& d = sink.out.diagnostics;
    d["enhancement"] = sum.enhancement;
    d["total_rate"] = dist.total_rate;
    d["half_width"] = sum.width;
    d["normalization_residual"] = sum.normalization_residual;
    d["cone_fraction"] = cone_fraction(dist, spec.number("cone_factor") * s.xi / p.sites_per_axis, g);
    d["gaussian_enhancement"] = sum.gaussian.chi;
    d["gaussian_width"] = sum.gaussian.delta_theta;
    json maxima = json::array();
    for (const auto& u : sum.maxima)
        maxima.push_back(vec_json(u));
    d["diffraction_maxima"] = maxima;
    const auto v = validity_bound(p, s);
    d["validity_satisfied"] = v.satisfied;
    d["validity_margin"] = v.margin;
}

inline void run_validity(const ExperimentSpec& spec, const PhysicalParams& p, Sink& sink) {
    std::ostringstream os;
    os.precision(12);
    os << "quantity,value\n";
    const auto s = derive_scales(p);
    const auto mk = classify_markovianity(s);
    const auto v = validity_bound(p, s);
    os << "markov_ratio," << mk.ratio << '\n';
    os << "markovian," << (mk.markovian ? 1 : 0) << '\n';
    os << "first_band_ratio," << p.trap / std::max(std::abs(p.detuning), p.rabi) << '\n';
    os << "kl_x0," << p.laser_wavevector.norm() * p.x0() << '\n';
    os << "directional_lhs," << v.lhs << '\n';
    os << "directional_rhs," << v.rhs << '\n';
    os << "directional_satisfied," << (v.satisfied ? 1 : 0) << '\n';
    os << "warnings," << point_warnings(spec, p).size() << '\n';
    sink.csv("", os.str());
    sink.out.diagnostics["markov_ratio"] = mk.ratio;
    sink.out.diagnostics["directional_margin"] = v.margin;
}

inline void run_point(const ExperimentSpec& spec, const RunOptions& opt, PointOutput& out) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const auto p = point_params(spec, out.value);
        out.derived = derived_json(p);
        out.derived["params"] = params_json(p);
        for (const auto& w : point_warnings(spec, p))
            out.warnings.push_back(w);
        Sink sink{spec, opt, out};
        switch (spec.experiment) {
        case ExperimentKind::single_site_trace: run_single_site(spec, opt, p, sink); break;
        case ExperimentKind::steady_state_scan: run_steady_scan(spec, p, sink); break;
        case ExperimentKind::coupling_map: run_coupling_map(spec, opt, p, sink); break;
        case ExperimentKind::hardcore_superradiance: run_hardcore(spec, opt, p, sink); break;
        case ExperimentKind::boson_superradiance: run_boson(spec, p, sink); break;
        case ExperimentKind::decay_spectrum: run_spectrum(p, sink); break;
        case ExperimentKind::directional: run_directional(spec, p, sink); break;
        case ExperimentKind::validity_report: run_validity(spec, p, sink); break;
        }
        if (spec.format == OutputFormat::summary) {
            json j;
            j["label"] = out.label;
            j["derived"] = out.derived;
            j["diagnostics"] = out.diagnostics;
            const std::string name = sink.stem("") + ".json";
            atomic_write(opt.out_dir / name, j.dump(2) + "\n");
            out.files.push_back(name);
        }
    } catch (const std::exception& e) {
        out.error = (out.label.empty() ? std::string() : "sweep point " + out.label + ": ") + e.what();
    }
    out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace detail

inline RunReport run(const ExperimentSpec& spec, const RunOptions& opt = {}) {
    if (!(opt.tolerance_scale > 0.0))
        throw ConfigError("tolerance scale must be > 0");
    std::filesystem::create_directories(opt.out_dir);
    const auto t0 = std::chrono::steady_clock::now();

    RunReport rep;
    for (const auto& v : sweep_points(spec)) {
        PointOutput p;
        p.value = v;
        if (v)
            p.label = spec.sweep->key + "_" + format_value(*v);
        rep.points.push_back(std::move(p));
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < rep.points.size(); i = next++)
            detail::run_point(spec, opt, rep.points[i]);
    };
    const int n_threads = std::clamp(opt.threads, 1, static_cast<int>(rep.points.size()));
    std::vector<std::thread> pool;
    for (int i = 1; i < n_threads; ++i)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();

    json m;
    m["tool"] = "olsim";
    m["spec_source"] = spec.source;
    m["experiment"] = to_string(spec.experiment);
    m["output_prefix"] = spec.output_prefix;
    m["format"] = spec.format == OutputFormat::delimited ? "delimited" : "summary";
    m["threads"] = opt.threads;
    m["tolerance_scale"] = opt.tolerance_scale;
    m["base_params"] = params_json(spec.params);
    if (spec.xi)
        m["xi"] = *spec.xi;
    if (spec.sweep)
        m["sweep"] = {{"key", spec.sweep->key}, {"values", spec.sweep->values}};
    json num = json::object();
    for (const auto& [k, v] : spec.numerics)
        num[k] = {{"value", v}, {"defaulted", spec.defaulted.count(k) > 0}};
    m["numerics"] = num;
    json pts = json::array();
    for (const auto& p : rep.points) {
        json j;
        j["label"] = p.label;
        if (p.value)
            j["sweep_value"] = *p.value;
        j["files"] = p.files;
        j["derived"] = p.derived;
        j["diagnostics"] = p.diagnostics;
        j["warnings"] = p.warnings;
        j["wall_time_s"] = p.wall_time;
        if (!p.error.empty()) {
            j["error"] = p.error;
            rep.ok = false;
        }
        pts.push_back(j);
    }
    m["points"] = pts;
    m["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    m["spec_text"] = spec.text;
    rep.manifest = opt.out_dir / (spec.output_prefix + "_manifest.json");
    atomic_write(rep.manifest, m.dump(2) + "\n");
    return rep;
}

} // namespace olsim::cli
