// collective.hpp - collective emission of a lattice under the Born-Markov
// master equation
//
// Two kinds of emitters share one generator for expectation values:
//   d<O>/dt = sum_jl Gamma_jl <[x_j^+, O] x_l> + Gamma_jl^* <x_l^+ [O, x_j]>,
// with x = a (bosons) or sigma^- (hard-core bosons / spins). For O = x_p^+ x_q
// this gives
//   d<x_p^+ x_q>/dt = sum_l Gamma_ql <x_p^+ Z_q x_l> + Gamma_pl^* <x_l^+ Z_p x_q>,
// where Z = -1 for bosons and Z = sigma^3 for spins.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "olsim/couplings.hpp"
#include "olsim/errors.hpp"
#include "olsim/ode.hpp"

namespace olsim {

enum class EmitterKind { spin, boson };
enum class InitialPhase { mott, superfluid };

inline const char* to_string(EmitterKind k) { return k == EmitterKind::spin ? "spin" : "boson"; }
inline const char* to_string(InitialPhase p) { return p == InitialPhase::mott ? "mott" : "superfluid"; }

struct CoherenceState {
    Eigen::MatrixXcd coherences; // c_jl = <x_j^+ x_l>
    Eigen::VectorXd populations; // s_j = <sigma^3_j>, spins only
    EmitterKind kind{EmitterKind::boson};
    double time{0.0};

    double total_number() const { return coherences.trace().real(); }
};

struct DecayModeBasis {
    Eigen::VectorXd rates; // descending
    Eigen::MatrixXd modes; // row p is mode p: S gamma S^T = diag(rates)
};

struct EmissionRecord {
    std::vector<double> times;
    std::vector<double> n_total;
    std::vector<double> rate; // R = -dn_T/dt, from the right-hand side
    double n_initial{0.0};
    int num_sites{1};
    double gamma0{1.0};
};

/// Columns t, n_T, R, n_T/N, R/(2 Gamma0 N). The last one is the rate in units
/// of N independent emitters.
inline void write_emission_csv(std::ostream& os, const EmissionRecord& r) {
    os << "t,n_total,rate,n_total_normalized,rate_normalized\n";
    os.precision(12);
    const double n0 = r.n_initial > 0.0 ? r.n_initial : 1.0;
    for (std::size_t i = 0; i < r.times.size(); ++i)
        os << r.times[i] << ',' << r.n_total[i] << ',' << r.rate[i] << ',' << r.n_total[i] / n0 << ','
           << r.rate[i] / (2.0 * r.gamma0 * n0) << '\n';
}

inline CoherenceState initial_state(EmitterKind kind, InitialPhase phase, int n_atoms, int sites_per_axis) {
    if (sites_per_axis < 1 || n_atoms < 0)
        throw InvalidParams("need M >= 1 and N >= 0");
    const int n = sites_per_axis * sites_per_axis * sites_per_axis;
    CoherenceState st;
    st.kind = kind;
    if (kind == EmitterKind::spin) {
        if (phase == InitialPhase::superfluid)
            throw UnsupportedState("coherent spin states are not supported");
        if (n_atoms != n)
            throw InvalidParams("spin Mott state needs N = M^3");
        st.coherences = Eigen::MatrixXcd::Identity(n, n);
        st.populations = Eigen::VectorXd::Ones(n);
        return st;
    }
    if (phase == InitialPhase::mott) {
        if (n_atoms % n != 0)
            throw InvalidParams("boson Mott state needs N divisible by M^3");
        st.coherences = static_cast<double>(n_atoms / n) * Eigen::MatrixXcd::Identity(n, n);
    } else {
        if (n_atoms < 1)
            throw InvalidParams("superfluid state needs N >= 1");
        st.coherences = Eigen::MatrixXcd::Constant(n, n, cplx(static_cast<double>(n_atoms) / n, 0.0));
    }
    return st;
}

// ---------------------------------------------------------------------------
// Shared generator

/// coef * <x_a^+ Z_z x_b>
struct GeneratorTerm {
    cplx coef;
    int a;
    int z;
    int b;
};

struct OperatorId {
    enum class Type { coherence, total_number } type{Type::coherence};
    int p{0};
    int q{0};

    static OperatorId coherence(int p, int q) { return {Type::coherence, p, q}; }
    static OperatorId total() { return {Type::total_number, 0, 0}; }
};

struct ExpectationRhs {
    std::vector<GeneratorTerm> terms;

    std::string describe() const {
        std::ostringstream os;
        os.precision(6);
        for (const auto& t : terms)
            os << "+ (" << t.coef.real() << (t.coef.imag() < 0 ? "" : "+") << t.coef.imag() << "i) <x" << t.a
               << "^+ Z" << t.z << " x" << t.b << ">\n";
        return os.str();
    }
};

namespace detail {

inline void append_coherence_terms(const Eigen::MatrixXcd& g, int p, int q, std::vector<GeneratorTerm>& out) {
    const int n = static_cast<int>(g.rows());
    for (int l = 0; l < n; ++l) {
        if (g(q, l) != 0.0)
            out.push_back({g(q, l), p, q, l});
        if (g(p, l) != 0.0)
            out.push_back({std::conj(g(p, l)), l, p, q});
    }
}

} // namespace detail

/// Generator of d<O>/dt for the bilinear observables, as a list of terms.
inline ExpectationRhs expectation_evolution_rhs(const Eigen::MatrixXcd& g, const OperatorId& which) {
    ExpectationRhs r;
    if (which.type == OperatorId::Type::total_number) {
        for (int p = 0; p < g.rows(); ++p)
            detail::append_coherence_terms(g, p, p, r.terms);
    } else {
        detail::append_coherence_terms(g, which.p, which.q, r.terms);
    }
    return r;
}

inline ExpectationRhs expectation_evolution_rhs(const CouplingMatrix& m, const OperatorId& which) {
    return expectation_evolution_rhs(m.gamma_full, which);
}

/// Mean-field treatment of <sigma_a^+ sigma^3_z sigma_b> for a != b.
enum class SpinClosure {
    as_printed, // <..> -> c_ab s_z for every z, damping -4 Gamma0 on each pair
    consistent  // operator identities where z hits a or b, -2 Gamma0 from those
};

inline const char* to_string(SpinClosure c) { return c == SpinClosure::as_printed ? "as_printed" : "consistent"; }

/// Evaluates a term list. Bosons: Z = -1 exactly. Spins: exact one-site
/// identities when z coincides with a or b, factorised <..> = c_ab s_z otherwise.
inline cplx evaluate_terms(const ExpectationRhs& rhs, const Eigen::MatrixXcd& c, const Eigen::VectorXd* s) {
    cplx acc(0.0);
    for (const auto& t : rhs.terms) {
        if (s == nullptr) {
            acc -= t.coef * c(t.a, t.b);
        } else if (t.z == t.a || t.z == t.b) {
            // sigma^+ sigma^3 = -sigma^+, sigma^3 sigma = -sigma
            acc -= t.coef * c(t.a, t.b);
        } else {
            acc += t.coef * c(t.a, t.b) * (*s)(t.z);
        }
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Bosons

struct BosonOptions {
    bool include_dispersive{true}; // false: evolve with the Hermitian part gamma only
    bool keep_states{false};
};

struct BosonResult {
    EmissionRecord trace;
    std::vector<CoherenceState> states;
};

namespace detail {

inline EmissionRecord make_record(const CoherenceState& c0, const CouplingMatrix& m) {
    EmissionRecord rec;
    rec.n_initial = c0.total_number();
    rec.num_sites = m.size();
    rec.gamma0 = m.diagonal_rate;
    return rec;
}

} // namespace detail

/// c(t) = E^+ c(0) E with E = exp(-Gamma^T t), the closed solution of
/// dc/dt = -c Gamma^T - Gamma^* c.
inline BosonResult evolve_boson(const CoherenceState& c0, const CouplingMatrix& m, const std::vector<double>& times,
                                const BosonOptions& opt = {}) {
    if (c0.kind != EmitterKind::boson)
        throw InvalidParams("evolve_boson needs a boson state");
    if (c0.coherences.rows() != m.size())
        throw InvalidParams("state and coupling matrix sizes differ");
    const Eigen::MatrixXcd g = opt.include_dispersive ? m.gamma_full : m.gamma;
    const Eigen::MatrixXcd gt = g.transpose();
    BosonResult out;
    out.trace = detail::make_record(c0, m);
    for (double t : times) {
        const Eigen::MatrixXcd e = (-gt * t).exp();
        const Eigen::MatrixXcd c = e.adjoint() * c0.coherences * e;
        out.trace.times.push_back(t);
        out.trace.n_total.push_back(c.trace().real());
        out.trace.rate.push_back((c * gt + g.conjugate() * c).trace().real());
        if (opt.keep_states) {
            CoherenceState st;
            st.kind = EmitterKind::boson;
            st.coherences = c;
            st.time = t;
            out.states.push_back(std::move(st));
        }
    }
    return out;
}

/// Same dynamics stepped as an ODE from the shared generator; cross-check only.
inline EmissionRecord evolve_boson_ode(const CoherenceState& c0, const CouplingMatrix& m,
                                       const std::vector<double>& times, const ode::Options& o = {}) {
    const int n = m.size();
    std::vector<ExpectationRhs> gens;
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q)
            gens.push_back(expectation_evolution_rhs(m, OperatorId::coherence(p, q)));
    auto unpack = [n](const ode::State& y) { return Eigen::Map<const Eigen::MatrixXcd>(y.data(), n, n); };
    ode::Rhs rhs = [&](double, const ode::State& y, ode::State& dy) {
        const Eigen::MatrixXcd c = unpack(y);
        dy.resize(y.size());
        for (int q = 0; q < n; ++q)
            for (int p = 0; p < n; ++p)
                dy(p + n * q) = evaluate_terms(gens[p * n + q], c, nullptr);
    };
    ode::State y = Eigen::Map<const ode::State>(c0.coherences.data(), n * n);
    const auto states = ode::integrate(rhs, y, 0.0, times, o);
    EmissionRecord rec = detail::make_record(c0, m);
    ode::State dy;
    for (std::size_t i = 0; i < times.size(); ++i) {
        rhs(times[i], states[i], dy);
        rec.times.push_back(times[i]);
        rec.n_total.push_back(unpack(states[i]).trace().real());
        rec.rate.push_back(-unpack(dy).trace().real());
    }
    return rec;
}

/// Eigen-decomposition of the real symmetric decay matrix (k_L = 0).
inline DecayModeBasis decay_spectrum(const CouplingMatrix& m) {
    if (!m.real_valued() && m.gamma.imag().cwiseAbs().maxCoeff() > 1e-12 * m.diagonal_rate)
        throw InvalidParams("decay_spectrum needs a real decay matrix (k_L = 0)");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.gamma.real());
    const int n = m.size();
    DecayModeBasis b;
    b.rates.resize(n);
    b.modes.resize(n, n);
    for (int p = 0; p < n; ++p) {
        const int src = n - 1 - p; // ascending -> descending
        b.rates(p) = es.eigenvalues()(src);
        b.modes.row(p) = es.eigenvectors().col(src).transpose();
    }
    return b;
}

/// n_T(t) = sum_p <c_p^+ c_p>(0) exp(-2 rate_p t), dissipative dynamics only.
inline EmissionRecord spectral_boson_number(const DecayModeBasis& b, const CoherenceState& c0,
                                            const CouplingMatrix& m, const std::vector<double>& times) {
    const Eigen::MatrixXcd s = b.modes.cast<cplx>();
    const Eigen::VectorXd occ = (s * c0.coherences * s.transpose()).diagonal().real();
    EmissionRecord rec = detail::make_record(c0, m);
    for (double t : times) {
        double n = 0.0, r = 0.0;
        for (int p = 0; p < occ.size(); ++p) {
            const double w = occ(p) * std::exp(-2.0 * b.rates(p) * t);
            n += w;
            r += 2.0 * b.rates(p) * w;
        }
        rec.times.push_back(t);
        rec.n_total.push_back(n);
        rec.rate.push_back(r);
    }
    return rec;
}

// ---------------------------------------------------------------------------
// Hard-core bosons, semiclassical

struct SpinOptions {
    SpinClosure closure{SpinClosure::as_printed};
    ode::Options ode{1e-8, 1e-12};
    double range_tol{1e-6};
    bool keep_states{false};
};

struct SpinResult {
    EmissionRecord trace;
    std::vector<CoherenceState> states;
};

namespace detail {

/// Packs off-diagonal c_jl (column-major, diagonal skipped) followed by s_j.
struct SpinLayout {
    int n;
    int size() const { return n * n + n; }
};

class SpinRhs {
public:
    SpinRhs(const CouplingMatrix& m, SpinClosure closure) : n_(m.size()), closure_(closure), g_(m.gamma_full) {
        for (int p = 0; p < n_; ++p)
            for (int q = 0; q < n_; ++q)
                gens_.push_back(expectation_evolution_rhs(g_, OperatorId::coherence(p, q)));
    }

    void unpack(const ode::State& y, Eigen::MatrixXcd& c, Eigen::VectorXd& s) const {
        c = Eigen::Map<const Eigen::MatrixXcd>(y.data(), n_, n_);
        s = y.tail(n_).real();
        for (int j = 0; j < n_; ++j)
            c(j, j) = 0.5 * (1.0 + s(j));
    }

    void operator()(double, const ode::State& y, ode::State& dy) const {
        Eigen::MatrixXcd c;
        Eigen::VectorXd s;
        unpack(y, c, s);
        dy.setZero(y.size());
        const double g0 = g_(0, 0).real();
        for (int q = 0; q < n_; ++q)
            for (int p = 0; p < n_; ++p) {
                const auto& gen = gens_[p * n_ + q];
                if (p == q) {
                    // exact: d s_p / dt = 2 d c_pp / dt, no closure needed
                    dy(n_ * n_ + p) = 2.0 * evaluate_terms(gen, c, &s).real();
                    continue;
                }
                cplx v;
                if (closure_ == SpinClosure::consistent) {
                    v = evaluate_terms(gen, c, &s);
                } else {
                    v = -4.0 * g0 * c(p, q);
                    for (const auto& t : gen.terms)
                        v += t.coef * c(t.a, t.b) * s(t.z);
                }
                dy(p + n_ * q) = v;
            }
    }

private:
    int n_;
    SpinClosure closure_;
    Eigen::MatrixXcd g_;
    std::vector<ExpectationRhs> gens_;
};

} // namespace detail

inline SpinResult evolve_spin_semiclassical(const CoherenceState& c0, const CouplingMatrix& m,
                                            const std::vector<double>& times, const SpinOptions& opt = {}) {
    if (c0.kind != EmitterKind::spin)
        throw InvalidParams("evolve_spin_semiclassical needs a spin state");
    const int n = m.size();
    if (c0.coherences.rows() != n || c0.populations.size() != n)
        throw InvalidParams("state and coupling matrix sizes differ");
    detail::SpinRhs f(m, opt.closure);
    ode::State y(n * n + n);
    y.head(n * n) = Eigen::Map<const ode::State>(c0.coherences.data(), n * n);
    y.tail(n) = c0.populations.cast<cplx>();
    for (int j = 0; j < n; ++j)
        y(j + n * j) = 0.0;

    const double tol = opt.range_tol;
    ode::StepHook hook = [&](double t, const ode::State& st) {
        for (int j = 0; j < n; ++j) {
            const double sj = st(n * n + j).real();
            if (!(sj >= -1.0 - tol && sj <= 1.0 + tol))
                throw StateOutOfRange("s_" + std::to_string(j) + " = " + std::to_string(sj) + " at t = " +
                                      std::to_string(t));
        }
        return true;
    };
    ode::Rhs rhs = [&](double t, const ode::State& yy, ode::State& dy) { f(t, yy, dy); };
    const auto states = ode::integrate(rhs, y, 0.0, times, opt.ode, nullptr, hook);

    SpinResult out;
    out.trace.n_initial = 0.5 * (c0.populations.array() + 1.0).sum();
    out.trace.num_sites = n;
    out.trace.gamma0 = m.diagonal_rate;
    ode::State dy;
    for (std::size_t i = 0; i < times.size(); ++i) {
        f(times[i], states[i], dy);
        const Eigen::VectorXd s = states[i].tail(n).real();
        out.trace.times.push_back(times[i]);
        out.trace.n_total.push_back(0.5 * (s.array() + 1.0).sum());
        out.trace.rate.push_back(-0.5 * dy.tail(n).real().sum());
        if (opt.keep_states) {
            CoherenceState st;
            st.kind = EmitterKind::spin;
            f.unpack(states[i], st.coherences, st.populations);
            st.time = times[i];
            out.states.push_back(std::move(st));
        }
    }
    return out;
}

struct RateSlope {
    double slope{};      // dR/dt at t = 0
    double normalized{}; // slope / (4 M^3 Gamma0^2)
    bool superradiant{}; // slope > 0
};

/// Initial slope of the emission rate for a fully inverted (Mott) hard-core
/// lattice: dR/dt|0 = -4 sum_j gamma_jj^2 + 4 sum_{j != l} |gamma_jl|^2.
inline RateSlope initial_rate_slope(const CouplingMatrix& m) {
    const int n = m.size();
    double diag = 0.0, off = 0.0;
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
            const double v = std::norm(m.gamma(j, l));
            (j == l ? diag : off) += v;
        }
    RateSlope r;
    r.slope = -4.0 * diag + 4.0 * off;
    r.normalized = r.slope / (4.0 * n * m.diagonal_rate * m.diagonal_rate);
    r.superradiant = r.slope > 0.0;
    return r;
}

// ---------------------------------------------------------------------------
// Time grids

/// Geometric points from t_min up to t_end merged with a uniform grid, so
/// both fast bursts and slow tails are sampled. Always starts at 0.
inline std::vector<double> hybrid_time_grid(double t_end, int n_linear = 200, int n_geometric = 60,
                                            double t_min = 0.0) {
    if (!(t_end > 0.0))
        throw InvalidParams("time grid needs t_end > 0");
    if (t_min <= 0.0)
        t_min = t_end * 1e-4;
    std::vector<double> g{0.0};
    for (int i = 1; i <= n_linear; ++i)
        g.push_back(t_end * i / n_linear);
    for (int i = 0; i < n_geometric; ++i)
        g.push_back(t_min * std::pow(t_end / t_min, static_cast<double>(i) / std::max(1, n_geometric - 1)));
    std::sort(g.begin(), g.end());
    std::vector<double> out;
    for (double t : g)
        if (out.empty() || t - out.back() > 1e-12 * t_end)
            out.push_back(std::min(t, t_end));
    return out;
}

/// Default horizon: five lifetimes of the slowest decaying mode with a
/// nonzero rate.
inline double default_horizon(const DecayModeBasis& b, double gamma0, double floor_rel = 1e-6) {
    double slow = 0.0;
    for (int p = 0; p < b.rates.size(); ++p)
        if (b.rates(p) > floor_rel * gamma0)
            slow = slow == 0.0 ? b.rates(p) : std::min(slow, b.rates(p));
    return 5.0 / (slow > 0.0 ? slow : gamma0);
}

} // namespace olsim
