// couplings.hpp - Markov couplings between lattice sites
//
// Gamma_{j-l} is the time integral of the two-point reservoir correlation.
// Its Hermitian part gamma is the collective dissipator, the anti-Hermitian
// part i*Lambda generates coherent exchange. With k_L = 0 both are real.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "olsim/errors.hpp"
#include "olsim/params.hpp"
#include "olsim/quadrature.hpp"
#include "olsim/special.hpp"

namespace olsim {

using Displacement = std::array<int, 3>;

inline double displacement_norm(const Displacement& d) {
    return std::sqrt(static_cast<double>(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]));
}

/// Flattened site index j = jx + M jy + M^2 jz.
inline int site_index(int jx, int jy, int jz, int m) { return jx + m * (jy + m * jz); }

inline Displacement site_coords(int j, int m) { return {j % m, (j / m) % m, j / (m * m)}; }

/// Coupling for a nonzero displacement (in lattice units), closed form valid
/// for omega0 -> infinity and k_L X0 << 1.
inline cplx coupling_closed_form(const PhysicalParams& p, const DerivedScales& s, const Displacement& dj) {
    const double n = displacement_norm(dj);
    if (n == 0.0)
        throw InvalidParams("closed-form coupling is defined for off-diagonal pairs only");
    const Eigen::Vector3d r = p.lattice_spacing * Eigen::Vector3d(dj[0], dj[1], dj[2]);
    const cplx phase = std::exp(cplx(0.0, -p.laser_wavevector.dot(r)));
    const double erf_term = std::erf(p.lattice_spacing * n / (2.0 * p.x0()));
    const cplx bracket = 1.0 - erf_term - std::exp(-s.nu * n / s.xi);
    return cplx(0.0, 1.0) * phase * (s.gamma0 * s.xi / n) * bracket;
}

/// Two-point correlation G_{dj}(tau), carrying the shifted detuning.
inline cplx pair_correlation(const PhysicalParams& p, const Displacement& dj, double tau) {
    const Eigen::Vector3d r = p.lattice_spacing * Eigen::Vector3d(dj[0], dj[1], dj[2]);
    const double x0 = p.x0();
    const cplx z(1.0, 0.5 * p.trap * tau);
    const double delta_tilde = p.detuning - p.level_shift();
    const cplx g = p.rabi * p.rabi * std::exp(cplx(0.0, delta_tilde * tau)) * std::pow(z, -1.5);
    return std::exp(-r.squaredNorm() / (4.0 * x0 * x0) / z - cplx(0.0, p.laser_wavevector.dot(r))) * g;
}

// ---------------------------------------------------------------------------
// Momentum-space oracle

struct OracleOptions {
    std::vector<double> eps_factors{1e-2, 1e-3, 1e-4}; // eps in units of Gamma0
    double rel_tol{1e-11};
    double stability_tol{1e-3}; // relative spread allowed between extrapolants
};

namespace detail {

/// int_0^inf sinc(k r) exp(-X0^2 k^2) dk by quadrature.
inline quad::Result gaussian_sinc_integral(double r, double x0, double rel_tol = 1e-12) {
    auto f = [&](double k) { return cplx(special::sinc(k * r) * std::exp(-x0 * x0 * k * k), 0.0); };
    const double cutoff = 9.0 / x0; // exp(-81) beyond
    std::vector<double> pts{0.0};
    const int lobes = std::min(2000, static_cast<int>(cutoff * r / std::numbers::pi) + 1);
    for (int i = 1; i <= lobes; ++i)
        pts.push_back(std::min(cutoff, i * std::numbers::pi / r));
    pts.push_back(cutoff);
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return quad::integrate_breakpoints(f, pts, 1e-16, rel_tol, 20000);
}

/// int_0^inf sinc(k r) exp(-X0^2 k^2) / (dt + i eps - k^2 X0^2 omega0 / 2) dk
inline quad::Result resolvent_integral(double r, double x0, double omega0, double delta_tilde, double eps,
                                       double rel_tol) {
    const double c = 0.5 * x0 * x0 * omega0;
    const cplx num(delta_tilde, eps);
    auto f = [&](double k) { return special::sinc(k * r) * std::exp(-x0 * x0 * k * k) / (num - c * k * k); };
    const double cutoff = 9.0 / x0;
    std::vector<double> pts{0.0, cutoff};
    for (int i = 1; i * std::numbers::pi / r < cutoff && i < 4000; ++i)
        pts.push_back(i * std::numbers::pi / r);
    if (delta_tilde > 0.0) {
        // Lorentzian of half-width eps / (2 c k0) around the resonance
        const double k0 = std::sqrt(delta_tilde / c);
        const double w = eps / (2.0 * c * k0);
        for (double m : {1.0, 3.0, 10.0, 30.0, 100.0, 1e3, 1e4})
            for (double sgn : {-1.0, 1.0}) {
                const double k = k0 + sgn * m * w;
                if (k > 0.0 && k < cutoff)
                    pts.push_back(k);
            }
        pts.push_back(k0);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return quad::integrate_breakpoints(f, pts, 1e-18, rel_tol, 40000);
}

} // namespace detail

/// Coupling from the radial momentum integrals at finite eps, extrapolated to
/// eps -> 0+ by Richardson on the supplied eps sequence. `eps_scale` multiplies
/// every factor in opts.eps_factors. Intended for validation only.
inline cplx coupling_quadrature_oracle(const PhysicalParams& p, const Displacement& dj, double eps_scale = 1.0,
                                       const OracleOptions& opts = {}) {
    const auto s = derive_scales(p);
    const double n = displacement_norm(dj);
    if (n == 0.0)
        throw InvalidParams("oracle is defined for off-diagonal pairs only");
    if (!(eps_scale > 0.0) || opts.eps_factors.size() < 2)
        throw InvalidParams("oracle needs eps > 0 and at least two eps values");
    const double x0 = p.x0();
    const double r = p.lattice_spacing * n;
    const Eigen::Vector3d rv = p.lattice_spacing * Eigen::Vector3d(dj[0], dj[1], dj[2]);
    const cplx pref = 8.0 * x0 * p.rabi * p.rabi / (cplx(0.0, 1.0) * std::sqrt(std::numbers::pi) * p.trap) *
                      std::exp(cplx(0.0, -p.laser_wavevector.dot(rv)));
    const double i1 = detail::gaussian_sinc_integral(r, x0).value.real();

    std::vector<double> eps;
    std::vector<cplx> vals;
    for (double f : opts.eps_factors) {
        const double e = f * eps_scale * s.gamma0;
        const auto res = detail::resolvent_integral(r, x0, p.trap, s.delta_tilde, e, opts.rel_tol);
        eps.push_back(e);
        vals.push_back(pref * (i1 - cplx(s.delta_tilde, e) * res.value));
    }
    // Neville extrapolation to eps = 0 (values are analytic in eps)
    std::vector<cplx> tab = vals;
    std::vector<cplx> last_two;
    for (std::size_t level = 1; level < tab.size(); ++level) {
        for (std::size_t i = tab.size() - 1; i >= level; --i)
            tab[i] = (eps[i - level] * tab[i] - eps[i] * tab[i - 1]) / (eps[i - level] - eps[i]);
    }
    const cplx best = tab.back();
    // compare against the extrapolant that omits the largest eps
    cplx alt = vals.back();
    if (vals.size() >= 3) {
        std::vector<cplx> t2(vals.begin() + 1, vals.end());
        std::vector<double> e2(eps.begin() + 1, eps.end());
        for (std::size_t level = 1; level < t2.size(); ++level)
            for (std::size_t i = t2.size() - 1; i >= level; --i)
                t2[i] = (e2[i - level] * t2[i] - e2[i] * t2[i - 1]) / (e2[i - level] - e2[i]);
        alt = t2.back();
    }
    const double scale = std::max(std::abs(best), 1e-12 * s.gamma0);
    if (!std::isfinite(std::abs(best)) || std::abs(best - alt) > opts.stability_tol * scale)
        throw ExtrapolationUnstable("eps -> 0 estimates differ by " + std::to_string(std::abs(best - alt) / scale) +
                                    " (relative)");
    return best;
}

// ---------------------------------------------------------------------------
// Coupling matrix

struct CouplingMatrix {
    int sites_per_axis{1};
    Eigen::MatrixXcd gamma_full; // Gamma_{j-l}
    Eigen::MatrixXcd gamma;      // Hermitian part: collective decay rates
    Eigen::MatrixXcd lambda;     // Gamma = gamma + i lambda, lambda Hermitian
    double xi{};
    double diagonal_rate{};      // Gamma0
    Eigen::Vector3d k_laser{Eigen::Vector3d::Zero()};
    Regime regime{Regime::radiative};
    double min_gamma_eigenvalue{};
    double max_gamma_eigenvalue{};
    std::vector<std::string> warnings;

    int size() const { return static_cast<int>(gamma_full.rows()); }
    bool real_valued() const { return k_laser.isZero(0.0); }
};

struct CouplingOptions {
    int max_sites{4096};
    double psd_clip_tol{1e-9};  // relative to Gamma0
    double psd_fail_tol{1e-6};
};

inline CouplingMatrix build_coupling_matrix(const PhysicalParams& p, const DerivedScales& s,
                                            const CouplingOptions& opt = {}) {
    const int m = p.sites_per_axis;
    const long long n_sites = static_cast<long long>(m) * m * m;
    if (n_sites > opt.max_sites)
        throw InvalidParams("lattice of " + std::to_string(n_sites) + " sites exceeds cap of " +
                            std::to_string(opt.max_sites));
    const int n = static_cast<int>(n_sites);

    // one evaluation per displacement
    const int span = 2 * m - 1;
    std::vector<cplx> table(static_cast<std::size_t>(span) * span * span);
    auto slot = [&](int dx, int dy, int dz) {
        return static_cast<std::size_t>((dx + m - 1) + span * ((dy + m - 1) + span * (dz + m - 1)));
    };
    for (int dz = -(m - 1); dz < m; ++dz)
        for (int dy = -(m - 1); dy < m; ++dy)
            for (int dx = -(m - 1); dx < m; ++dx)
                table[slot(dx, dy, dz)] = (dx == 0 && dy == 0 && dz == 0)
                                              ? cplx(s.gamma0, 0.0)
                                              : coupling_closed_form(p, s, {dx, dy, dz});

    CouplingMatrix cm;
    cm.sites_per_axis = m;
    cm.xi = s.xi;
    cm.diagonal_rate = s.gamma0;
    cm.k_laser = p.laser_wavevector;
    cm.regime = s.regime;
    cm.gamma_full.resize(n, n);
    for (int j = 0; j < n; ++j) {
        const auto a = site_coords(j, m);
        for (int l = 0; l < n; ++l) {
            const auto b = site_coords(l, m);
            cm.gamma_full(j, l) = table[slot(a[0] - b[0], a[1] - b[1], a[2] - b[2])];
        }
    }
    cm.gamma = 0.5 * (cm.gamma_full + cm.gamma_full.adjoint());
    cm.lambda = (cm.gamma_full - cm.gamma_full.adjoint()) / cplx(0.0, 2.0);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(cm.gamma);
    const Eigen::VectorXd ev = es.eigenvalues();
    cm.min_gamma_eigenvalue = ev.minCoeff();
    cm.max_gamma_eigenvalue = ev.maxCoeff();
    if (cm.min_gamma_eigenvalue < -opt.psd_fail_tol * s.gamma0)
        throw NotPSD("smallest decay rate " + std::to_string(cm.min_gamma_eigenvalue / s.gamma0) +
                     " Gamma0; parameters fall outside Born-Markov validity");
    if (cm.min_gamma_eigenvalue < -opt.psd_clip_tol * s.gamma0) {
        const Eigen::VectorXd clipped = ev.cwiseMax(0.0);
        cm.gamma = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().adjoint();
        cm.gamma_full = cm.gamma + cplx(0.0, 1.0) * cm.lambda;
        cm.warnings.push_back("clipped negative decay rate " + std::to_string(cm.min_gamma_eigenvalue / s.gamma0) +
                              " Gamma0 to zero");
        cm.min_gamma_eigenvalue = 0.0;
    }
    return cm;
}

/// Hopping matrix -|Gamma_{j-l}| of the coherent exchange Hamiltonian that
/// remains in the bound regime, zero on the diagonal.
inline Eigen::MatrixXd effective_hamiltonian(const CouplingMatrix& m) {
    if (m.regime != Regime::bound)
        throw WrongRegime("couplings are dissipative for delta_tilde > 0; no Hamiltonian form");
    const int n = m.size();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
            if (j == l)
                continue;
            if (std::abs(m.gamma_full(j, l).real()) > 1e-9 * m.diagonal_rate)
                throw WrongRegime("couplings are not purely imaginary (k_L != 0?)");
            h(j, l) = -std::abs(m.gamma_full(j, l));
        }
    return h;
}

/// Rows jx,jy,jz,lx,ly,lz,ReGamma,ImGamma.
inline void write_coupling_csv(std::ostream& os, const CouplingMatrix& m) {
    os << "jx,jy,jz,lx,ly,lz,re_gamma,im_gamma\n";
    os.precision(12);
    const int n = m.size();
    for (int j = 0; j < n; ++j) {
        const auto a = site_coords(j, m.sites_per_axis);
        for (int l = 0; l < n; ++l) {
            const auto b = site_coords(l, m.sites_per_axis);
            os << a[0] << ',' << a[1] << ',' << a[2] << ',' << b[0] << ',' << b[1] << ',' << b[2] << ','
               << m.gamma_full(j, l).real() << ',' << m.gamma_full(j, l).imag() << '\n';
        }
    }
}

struct CouplingSummary {
    int sites_per_axis;
    double xi;
    double gamma0;
    double min_rate;
    double max_rate;
};

inline CouplingSummary summarize(const CouplingMatrix& m) {
    return {m.sites_per_axis, m.xi, m.diagonal_rate, m.min_gamma_eigenvalue, m.max_gamma_eigenvalue};
}

} // namespace olsim
