// directional.hpp - angular distribution of atoms emitted by a symmetric
// single-excitation state with k_L matched to k0
//
// I(u) = (1/4 pi M^3) (Gamma0/Gamma) prod_a sin^2[(u - k_hat)_a M/2xi] / sin^2[(u - k_hat)_a/2xi]
//
// Gamma follows from normalising I over the sphere. The same result applies
// to each of the N atoms of a superfluid, which decay through the symmetric
// mode; only the single-excitation distribution is computed.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "olsim/errors.hpp"
#include "olsim/params.hpp"
#include "olsim/quadrature.hpp"

namespace olsim {

/// sin^2(M a) / sin^2(a), pi-periodic in a, with the removable singularities
/// at multiples of pi replaced by the Taylor value.
inline double lattice_factor(double a, int m) {
    const double r = a - std::numbers::pi * std::round(a / std::numbers::pi);
    const double mm = static_cast<double>(m) * m;
    if (std::abs(r) < 1e-6)
        return mm * (1.0 - (mm - 1.0) * r * r / 3.0);
    const double num = std::sin(m * r);
    const double den = std::sin(r);
    return num * num / (den * den);
}

/// Unnormalised product over the three lattice axes, equal to M^6 at u = k_hat.
inline double interference_factor(const Eigen::Vector3d& u, const Eigen::Vector3d& k_hat, int m, double xi) {
    const Eigen::Vector3d d = u - k_hat;
    double f = 1.0;
    for (int a = 0; a < 3; ++a)
        f *= lattice_factor(d[a] / (2.0 * xi), m);
    return f;
}

struct AngularGridSpec {
    int nodes_per_width{16}; // nodes across the peak width xi/M, in theta and in arc length
    int gl_order{8};
    long max_nodes{60'000'000};
};

/// Product rule in polar coordinates about k_hat: composite Gauss-Legendre in
/// theta (weight sin theta folded in) times the periodic trapezoid in phi.
struct AngularDistribution {
    int sites_per_axis{};
    double xi{};
    Eigen::Vector3d k_hat{Eigen::Vector3d::UnitZ()};
    Eigen::Vector3d e1{Eigen::Vector3d::UnitX()};
    Eigen::Vector3d e2{Eigen::Vector3d::UnitY()};
    std::vector<double> theta;        // polar angle from k_hat
    std::vector<double> theta_weight; // includes sin theta
    int n_phi{};
    Eigen::MatrixXd values;           // I, rows theta, cols phi
    double total_rate{};              // Gamma
    double gamma0{};
    double enhancement{};             // chi = Gamma / Gamma0
    double width{};                   // measured half width at half maximum about k_hat
    double normalization_residual{};  // |int I| - 1 on the refined grid
    double peak_value{};              // I(k_hat)

    double phi(int i) const { return 2.0 * std::numbers::pi * i / n_phi; }
    double phi_weight() const { return 2.0 * std::numbers::pi / n_phi; }
    Eigen::Vector3d direction(double th, double ph) const {
        return std::cos(th) * k_hat + std::sin(th) * (std::cos(ph) * e1 + std::sin(ph) * e2);
    }
    long size() const { return static_cast<long>(theta.size()) * n_phi; }
};

namespace detail {

struct PolarGrid {
    std::vector<double> theta, weight;
    int n_phi{};
};

inline PolarGrid polar_grid(double peak_width, const AngularGridSpec& g, double theta_max = std::numbers::pi) {
    if (g.nodes_per_width < 8)
        throw GridTooCoarse("fewer than 8 nodes across a peak of width xi/M");
    const double panel = peak_width * g.gl_order / g.nodes_per_width;
    const long panels = std::max(1L, static_cast<long>(std::ceil(theta_max / panel)));
    const long n_phi = std::max(16L, static_cast<long>(std::ceil(2.0 * std::numbers::pi / peak_width * g.nodes_per_width)));
    if (panels * g.gl_order * n_phi > g.max_nodes)
        throw GridTooCoarse("resolving a peak of width " + std::to_string(peak_width) + " needs " +
                            std::to_string(panels * g.gl_order * n_phi) + " nodes, above the cap of " +
                            std::to_string(g.max_nodes));
    PolarGrid out;
    out.n_phi = static_cast<int>(n_phi);
    const double h = theta_max / panels;
    for (long k = 0; k < panels; ++k) {
        const auto rule = quad::gauss_legendre(g.gl_order, k * h, (k + 1) * h);
        for (int i = 0; i < g.gl_order; ++i) {
            out.theta.push_back(rule.nodes[i]);
            out.weight.push_back(rule.weights[i] * std::sin(rule.nodes[i]));
        }
    }
    return out;
}

inline void orthonormal_frame(const Eigen::Vector3d& k, Eigen::Vector3d& e1, Eigen::Vector3d& e2) {
    const Eigen::Vector3d seed = std::abs(k.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
    e1 = (seed - seed.dot(k) * k).normalized();
    e2 = k.cross(e1);
}

/// Integral of the unnormalised factor over the sphere.
inline double factor_integral(const Eigen::Vector3d& k, const Eigen::Vector3d& e1, const Eigen::Vector3d& e2, int m,
                              double xi, const PolarGrid& g, Eigen::MatrixXd* keep = nullptr) {
    if (keep)
        keep->resize(static_cast<long>(g.theta.size()), g.n_phi);
    std::vector<double> cph(g.n_phi), sph(g.n_phi);
    for (int j = 0; j < g.n_phi; ++j) {
        cph[j] = std::cos(2.0 * std::numbers::pi * j / g.n_phi);
        sph[j] = std::sin(2.0 * std::numbers::pi * j / g.n_phi);
    }
    double total = 0.0;
    for (std::size_t i = 0; i < g.theta.size(); ++i) {
        const double ct = std::cos(g.theta[i]);
        const double st = std::sin(g.theta[i]);
        double ring = 0.0;
        for (int j = 0; j < g.n_phi; ++j) {
            const Eigen::Vector3d u = ct * k + st * (cph[j] * e1 + sph[j] * e2);
            const double f = interference_factor(u, k, m, xi);
            ring += f;
            if (keep)
                (*keep)(static_cast<long>(i), j) = f;
        }
        total += g.weight[i] * ring;
    }
    return total * 2.0 * std::numbers::pi / g.n_phi;
}

} // namespace detail

/// Azimuthal mean of I at polar angle theta about k_hat.
inline double azimuthal_average(const AngularDistribution& d, double theta) {
    double sum = 0.0;
    for (int j = 0; j < d.n_phi; ++j)
        sum += interference_factor(d.direction(theta, d.phi(j)), d.k_hat, d.sites_per_axis, d.xi);
    const double m3 = std::pow(static_cast<double>(d.sites_per_axis), 3);
    return sum / d.n_phi / (4.0 * std::numbers::pi * m3 * d.enhancement);
}

/// Fraction of the emission inside the cone theta < theta_c about k_hat.
inline double cone_fraction(const AngularDistribution& d, double theta_c, const AngularGridSpec& g = {}) {
    const double width = d.xi / d.sites_per_axis;
    const auto grid = detail::polar_grid(width, g, theta_c);
    const double m3 = std::pow(static_cast<double>(d.sites_per_axis), 3);
    return detail::factor_integral(d.k_hat, d.e1, d.e2, d.sites_per_axis, d.xi, grid) /
           (4.0 * std::numbers::pi * m3 * d.enhancement);
}

inline AngularDistribution angular_distribution(const PhysicalParams& p, const DerivedScales& s,
                                                const AngularGridSpec& g = {}) {
    if (p.reservoir_dim != 3)
        throw InvalidParams("the angular distribution needs a 3D reservoir");
    if (!(s.delta_tilde > 0.0))
        throw WrongRegime("directional emission needs delta_tilde > 0");
    const double kl = p.laser_wavevector.norm();
    if (!(std::abs(kl - s.k0) <= 1e-6 * s.k0))
        throw InvalidParams("directional emission needs |k_L| = k0 (got " + std::to_string(kl) + " vs " +
                            std::to_string(s.k0) + ")");
    AngularDistribution d;
    d.sites_per_axis = p.sites_per_axis;
    d.xi = s.xi;
    d.gamma0 = s.gamma0;
    d.k_hat = p.laser_wavevector / kl;
    detail::orthonormal_frame(d.k_hat, d.e1, d.e2);

    const int m = p.sites_per_axis;
    const double m3 = std::pow(static_cast<double>(m), 3);
    const double width = s.xi / m;
    const auto grid = detail::polar_grid(width, g);
    const double integral = detail::factor_integral(d.k_hat, d.e1, d.e2, m, s.xi, grid, &d.values);
    AngularGridSpec fine = g;
    fine.nodes_per_width *= 2;
    fine.max_nodes *= 4;
    const double integral_fine = detail::factor_integral(d.k_hat, d.e1, d.e2, m, s.xi, detail::polar_grid(width, fine));

    d.theta = grid.theta;
    d.theta_weight = grid.weight;
    d.n_phi = grid.n_phi;
    d.enhancement = integral / (4.0 * std::numbers::pi * m3);
    d.total_rate = d.enhancement * s.gamma0;
    d.values /= 4.0 * std::numbers::pi * m3 * d.enhancement;
    d.normalization_residual = std::abs(integral_fine / integral - 1.0);
    d.peak_value = m3 / (4.0 * std::numbers::pi * d.enhancement);

    // half width at half maximum of the azimuthal mean, by bisection on the
    // first crossing found by stepping outward in steps of width/16
    const double half = 0.5 * d.peak_value;
    double lo = 0.0, hi = width / 16.0;
    while (azimuthal_average(d, hi) > half && hi < std::numbers::pi) {
        lo = hi;
        hi += width / 16.0;
    }
    for (int it = 0; it < 60 && hi - lo > 1e-12 * width; ++it) {
        const double mid = 0.5 * (lo + hi);
        (azimuthal_average(d, mid) > half ? lo : hi) = mid;
    }
    d.width = std::min(0.5 * (lo + hi), std::numbers::pi);
    return d;
}

/// All directions u = k_hat + 2 pi xi m on the unit sphere with max_a |m_a| <= cutoff.
inline std::vector<Eigen::Vector3d> diffraction_maxima(const DerivedScales& s, const Eigen::Vector3d& k_hat,
                                                       int cutoff) {
    std::vector<Eigen::Vector3d> out{k_hat};
    const double pxi = std::numbers::pi * s.xi;
    for (int a = -cutoff; a <= cutoff; ++a)
        for (int b = -cutoff; b <= cutoff; ++b)
            for (int c = -cutoff; c <= cutoff; ++c) {
                if (a == 0 && b == 0 && c == 0)
                    continue;
                const Eigen::Vector3d mv(a, b, c);
                // |u|^2 = 1  <=>  k_hat . m = -pi xi |m|^2
                const double norm = mv.norm();
                if (std::abs(k_hat.dot(mv) / norm + pxi * norm) <= 1e-9)
                    out.push_back(k_hat + 2.0 * pxi * mv);
            }
    return out;
}

struct PeakEstimates {
    double chi{};
    double delta_theta{};
    bool narrow{}; // xi/M <= 0.2
};

inline PeakEstimates gaussian_peak_estimates(const PhysicalParams& p, const DerivedScales& s) {
    const double m = p.sites_per_axis;
    return {std::pow(std::numbers::pi, 1.5) * m * s.xi * s.xi, s.xi / m, s.xi / m <= 0.2};
}

struct ValidityBound {
    bool satisfied{};
    double lhs{};    // Omega^2 / omega0^2
    double rhs{};    // (X0/d0) / (M^2 pi^2 xi^2)
    double margin{}; // rhs / lhs
};

/// Gamma << v0/L recast in lattice parameters, with a factor 10 margin.
inline ValidityBound validity_bound(const PhysicalParams& p, const DerivedScales& s, double factor = 10.0) {
    ValidityBound v;
    v.lhs = p.rabi * p.rabi / (p.trap * p.trap);
    const double m = p.sites_per_axis;
    v.rhs = (p.x0() / p.lattice_spacing) / (m * m * std::numbers::pi * std::numbers::pi * s.xi * s.xi);
    v.margin = v.rhs / v.lhs;
    v.satisfied = factor * v.lhs < v.rhs;
    return v;
}

/// Samples I on a lab-frame (theta, phi) grid.
inline void write_angular_csv(std::ostream& os, const AngularDistribution& d, int n_theta = 181, int n_phi = 72) {
    os << "theta,phi,I,I_over_peak\n";
    os.precision(12);
    const double m3 = std::pow(static_cast<double>(d.sites_per_axis), 3);
    const double norm = 4.0 * std::numbers::pi * m3 * d.enhancement;
    for (int i = 0; i < n_theta; ++i) {
        const double th = std::numbers::pi * i / std::max(1, n_theta - 1);
        for (int j = 0; j < n_phi; ++j) {
            const double ph = 2.0 * std::numbers::pi * j / n_phi;
            const Eigen::Vector3d u(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
            const double val = interference_factor(u, d.k_hat, d.sites_per_axis, d.xi) / norm;
            os << th << ',' << ph << ',' << val << ',' << val / d.peak_value << '\n';
        }
    }
}

struct DirectionalSummary {
    double enhancement{};
    double width{};
    double normalization_residual{};
    PeakEstimates gaussian;
    std::vector<Eigen::Vector3d> maxima;
};

inline DirectionalSummary summarize(const AngularDistribution& d, const PhysicalParams& p, const DerivedScales& s,
                                    int cutoff = 2) {
    return {d.enhancement, d.width, d.normalization_residual, gaussian_peak_estimates(p, s),
            diffraction_maxima(s, d.k_hat, cutoff)};
}

} // namespace olsim
