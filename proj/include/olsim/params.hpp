// params.hpp - physical parameters of the lattice/reservoir setup and the
// secondary scales derived from them.
//
// Units: everything is dimensionless with hbar = m = 1. Frequencies are usually
// quoted in units of the trap frequency, but nothing here forces trap == 1.
// The ground-state width defaults to X0 = 1/sqrt(trap); supplying it
// explicitly fixes hbar/m = X0^2 * trap instead, which is how the ratio
// d0/X0 is set independently of the trap frequency.

#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "olsim/errors.hpp"

namespace olsim {

using cplx = std::complex<double>;

struct PhysicalParams {
    double rabi{0.05};           // two-photon Rabi frequency Omega
    double trap{1.0};            // harmonic trap frequency omega_0
    double detuning{0.0};        // Raman detuning Delta
    double lattice_spacing{1.0}; // d0
    std::optional<double> ground_width; // X0; defaults to 1/sqrt(trap)
    Eigen::Vector3d laser_wavevector{Eigen::Vector3d::Zero()};
    int sites_per_axis{1};
    int reservoir_dim{3};

    double x0() const { return ground_width ? *ground_width : 1.0 / std::sqrt(trap); }
    int num_sites() const { return sites_per_axis * sites_per_axis * sites_per_axis; }
    /// Energy shift 4 Omega^2 / omega_0 absorbed into the shifted detuning.
    double level_shift() const { return 4.0 * rabi * rabi / trap; }

    void validate() const {
        auto require = [](bool ok, const std::string& msg) {
            if (!ok)
                throw InvalidParams(msg);
        };
        require(std::isfinite(rabi) && rabi > 0.0, "rabi must be > 0");
        require(std::isfinite(trap) && trap > 0.0, "trap must be > 0");
        require(std::isfinite(detuning), "detuning must be finite");
        require(std::isfinite(lattice_spacing) && lattice_spacing > 0.0, "lattice_spacing must be > 0");
        require(!ground_width || (std::isfinite(*ground_width) && *ground_width > 0.0),
                "ground_width must be > 0");
        require(laser_wavevector.allFinite(), "laser_wavevector must be finite");
        require(sites_per_axis >= 1, "sites_per_axis must be >= 1");
        require(reservoir_dim >= 1 && reservoir_dim <= 3, "reservoir_dim must be 1, 2 or 3");
    }
};

enum class Regime { bound, pure_non_markovian, radiative };

inline const char* to_string(Regime r) {
    switch (r) {
    case Regime::bound: return "bound";
    case Regime::pure_non_markovian: return "pure_non_markovian";
    case Regime::radiative: return "radiative";
    }
    return "?";
}

struct DerivedScales {
    double detuning{};     // bare Delta, kept for phase factors
    double delta_tilde{};  // Delta - 4 Omega^2 / omega_0
    double alpha_sq{};     // 8 Omega^4 / omega_0^3
    double alpha{};
    double gamma0{};       // single-emitter rate 4 Omega^2 sqrt(2 pi |dt| / omega_0^3)
    double k0{};           // resonant wavenumber
    double xi{};           // interaction range 1/(d0 k0)
    cplx nu{};             // 1 (bound) or -i (radiative)
    cplx b_plus{};
    cplx b_minus{};
    cplx b{};              // root carrying the pole term (0 when there is none)
    cplx c_residue{};      // weight of the pole term in A(t)
    Regime regime{Regime::radiative};
    bool degenerate{false}; // delta_tilde == pi alpha^2: b+ == b-, c undefined
    // The pole i b^2 sits on the principal sheet of sqrt(s) only for
    // delta_tilde < 0 or delta_tilde > 2 pi alpha^2. Between pi alpha^2 and
    // 2 pi alpha^2 the radiative c_residue belongs to a pole that the contour
    // never encloses, and A(t) is the branch-cut integral alone.
    bool pole_on_sheet{false};
};

inline constexpr double kBoundaryRelTol = 1e-12;

/// Computes the secondary scales and classifies the emission regime.
/// Throws CriticalDetuning at delta_tilde == 0 and InvalidParams on bad input.
inline DerivedScales derive_scales(const PhysicalParams& p) {
    p.validate();
    DerivedScales s;
    const double shift = p.level_shift();
    s.detuning = p.detuning;
    s.delta_tilde = p.detuning - shift;
    if (std::abs(s.delta_tilde) <= kBoundaryRelTol * std::max(std::abs(p.detuning), shift))
        throw CriticalDetuning("shifted detuning vanishes (Delta = 4 Omega^2/omega_0)");

    const double om2 = p.rabi * p.rabi;
    s.alpha_sq = 8.0 * om2 * om2 / (p.trap * p.trap * p.trap);
    s.alpha = std::sqrt(s.alpha_sq);
    const double abs_dt = std::abs(s.delta_tilde);
    s.gamma0 = 4.0 * om2 * std::sqrt(2.0 * std::numbers::pi * abs_dt / (p.trap * p.trap * p.trap));
    s.k0 = std::sqrt(2.0 * abs_dt / p.trap) / p.x0();
    s.xi = 1.0 / (p.lattice_spacing * s.k0);
    s.nu = s.delta_tilde < 0.0 ? cplx(1.0, 0.0) : cplx(0.0, -1.0);

    const double pa2 = std::numbers::pi * s.alpha_sq;
    const double spa = std::sqrt(std::numbers::pi) * s.alpha;
    const cplx root = std::sqrt(cplx(1.0 - s.delta_tilde / pa2, 0.0));
    s.b_plus = spa * (-1.0 + root);
    s.b_minus = spa * (-1.0 - root);

    if (s.delta_tilde < 0.0) {
        s.regime = Regime::bound;
        s.b = s.b_plus;
        s.c_residue = 2.0 * s.b_plus / (s.b_plus - s.b_minus);
    } else if (std::abs(s.delta_tilde - pa2) <= kBoundaryRelTol * pa2) {
        s.regime = Regime::radiative;
        s.degenerate = true;
        s.b_plus = s.b_minus = cplx(-spa, 0.0);
        s.b = s.b_minus;
        s.c_residue = cplx(std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN());
    } else if (s.delta_tilde < pa2) {
        s.regime = Regime::pure_non_markovian;
        s.b = cplx(0.0, 0.0);
        s.c_residue = cplx(0.0, 0.0);
    } else {
        s.regime = Regime::radiative;
        s.b = s.b_minus;
        s.c_residue = 2.0 * s.b_minus / (s.b_minus - s.b_plus);
    }
    s.pole_on_sheet = s.delta_tilde < 0.0 || s.delta_tilde > 2.0 * pa2;
    return s;
}

struct MarkovReport {
    double ratio{};   // |delta_tilde| / (pi alpha^2)
    bool markovian{};
    double threshold{};
};

inline MarkovReport classify_markovianity(const DerivedScales& s, double threshold = 10.0) {
    MarkovReport r;
    r.ratio = std::abs(s.delta_tilde) / (std::numbers::pi * s.alpha_sq);
    r.threshold = threshold;
    r.markovian = r.ratio > threshold;
    return r;
}

struct WarningThresholds {
    double first_band_ratio{10.0}; // omega_0 must exceed |Delta|, Omega by this factor
    double max_kl_x0{0.1};
    double markov_threshold{10.0};
};

/// Soft physics checks. Never throws on physics, only reports.
inline std::vector<std::string> physics_warnings(const PhysicalParams& p, const WarningThresholds& th = {}) {
    std::vector<std::string> out;
    if (p.trap < th.first_band_ratio * std::max(std::abs(p.detuning), p.rabi))
        out.emplace_back("first-band condition violated: omega_0 is not >> |Delta|, Omega");
    const double klx0 = p.laser_wavevector.norm() * p.x0();
    if (klx0 > th.max_kl_x0)
        out.emplace_back("k_L X0 = " + std::to_string(klx0) + " exceeds " + std::to_string(th.max_kl_x0) +
                         "; closed-form couplings assume k_L << 1/X0");
    try {
        const auto s = derive_scales(p);
        const auto m = classify_markovianity(s, th.markov_threshold);
        if (!m.markovian)
            out.emplace_back("non-Markovian: |delta_tilde|/(pi alpha^2) = " + std::to_string(m.ratio));
    } catch (const CriticalDetuning&) {
        out.emplace_back("shifted detuning is critical (delta_tilde = 0)");
    }
    return out;
}

/// Returns a copy of `base` whose detuning realises interaction range `xi`
/// on the requested side of the transition (sign > 0: radiative, < 0: bound).
inline PhysicalParams with_range(PhysicalParams base, double xi, int sign = +1) {
    if (!(xi > 0.0))
        throw InvalidParams("xi must be > 0");
    const double x0 = base.x0();
    const double d0 = base.lattice_spacing;
    const double abs_dt = base.trap * x0 * x0 / (2.0 * d0 * d0 * xi * xi);
    base.detuning = base.level_shift() + (sign >= 0 ? abs_dt : -abs_dt);
    return base;
}

/// Sets k_L = k0 * direction, the resonance condition for directional emission.
inline PhysicalParams with_resonant_laser(PhysicalParams p, const Eigen::Vector3d& direction) {
    const auto s = derive_scales(p);
    p.laser_wavevector = s.k0 * direction.normalized();
    return p;
}

} // namespace olsim
