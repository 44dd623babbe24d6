#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "olsim/directional.hpp"
#include "oracles.hpp"

using namespace olsim;

namespace {

// d0/X0 = 10, |k_L| = k0 along `dir`
PhysicalParams setup(int m, double xi, const Eigen::Vector3d& dir = Eigen::Vector3d::UnitZ(), double rabi = 0.001) {
    PhysicalParams p;
    p.rabi = rabi;
    p.trap = 1.0;
    p.lattice_spacing = 10.0;
    p.ground_width = 1.0;
    p.sites_per_axis = m;
    return with_resonant_laser(with_range(p, xi, +1), dir);
}

// int over theta < theta_c of prod_a |sum_n exp(i n x_a)|^2, by brute force
double oracle_integral(const Eigen::Vector3d& k, int m, double xi, double theta_c, long panels, int n_phi) {
    Eigen::Vector3d e1 = (std::abs(k.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY());
    e1 = (e1 - e1.dot(k) * k).normalized();
    const Eigen::Vector3d e2 = k.cross(e1);
    auto ring = [&](double th) {
        double acc = 0.0;
        for (int j = 0; j < n_phi; ++j) {
            const double ph = 2.0 * std::numbers::pi * j / n_phi;
            const Eigen::Vector3d u = std::cos(th) * k + std::sin(th) * (std::cos(ph) * e1 + std::sin(ph) * e2);
            const Eigen::Vector3d d = (u - k) / xi;
            acc += oracle::lattice_sum_sq(d.x(), m) * oracle::lattice_sum_sq(d.y(), m) *
                   oracle::lattice_sum_sq(d.z(), m);
        }
        return acc * 2.0 * std::numbers::pi / n_phi * std::sin(th);
    };
    return oracle::composite_gl(ring, 0.0, theta_c, panels);
}

} // namespace

TEST(Factor, LatticeFactorLimits) {
    for (int m : {1, 2, 7, 10}) {
        EXPECT_DOUBLE_EQ(lattice_factor(0.0, m), m * m);
        EXPECT_NEAR(lattice_factor(std::numbers::pi, m), m * m, 1e-9 * m * m);
        EXPECT_NEAR(lattice_factor(1e-7, m), m * m, 1e-9 * m * m);
        for (double a : {0.3, 1.1, 2.9, -4.0})
            EXPECT_NEAR(lattice_factor(a, m), oracle::lattice_sum_sq(2.0 * a, m), 1e-10 * m * m);
    }
    // continuity across the Taylor switch
    EXPECT_NEAR(lattice_factor(0.99e-6, 10), lattice_factor(1.01e-6, 10), 1e-8);
}

TEST(Factor, PeakValue) {
    const Eigen::Vector3d k = Eigen::Vector3d(1.0, 2.0, 2.0) / 3.0;
    EXPECT_DOUBLE_EQ(interference_factor(k, k, 10, 0.5), 1e6);
}

TEST(Distribution, SingleSiteIsIsotropic) {
    const auto p = setup(1, 0.5);
    const auto s = derive_scales(p);
    const auto d = angular_distribution(p, s);
    EXPECT_NEAR(d.enhancement, 1.0, 1e-12);
    EXPECT_NEAR(d.total_rate, s.gamma0, 1e-12 * s.gamma0);
    EXPECT_NEAR(d.values.maxCoeff(), 1.0 / (4.0 * std::numbers::pi), 1e-14);
    EXPECT_NEAR(d.values.minCoeff(), 1.0 / (4.0 * std::numbers::pi), 1e-14);
}

TEST(Distribution, NormalisedAndNonNegative) {
    for (auto [m, xi] : {std::pair{10, 0.5}, std::pair{5, 0.5}, std::pair{4, 0.2}}) {
        const auto p = setup(m, xi, Eigen::Vector3d(0.3, -0.2, 1.0).normalized());
        const auto s = derive_scales(p);
        const auto d = angular_distribution(p, s);
        double total = 0.0;
        for (std::size_t i = 0; i < d.theta.size(); ++i)
            for (int j = 0; j < d.n_phi; ++j)
                total += d.theta_weight[i] * d.phi_weight() * d.values(i, j);
        EXPECT_NEAR(total, 1.0, 1e-12);
        EXPECT_LT(d.normalization_residual, 1e-6);
        EXPECT_GE(d.values.minCoeff(), 0.0);
        EXPECT_LE(d.values.maxCoeff(), d.peak_value * (1.0 + 1e-12));
        EXPECT_NEAR(d.values.maxCoeff() / d.peak_value, 1.0, 1e-3);
    }
}

TEST(Distribution, AgreesWithBruteForceSums) {
    const int m = 6;
    const double xi = 0.5;
    const auto p = setup(m, xi);
    const auto s = derive_scales(p);
    const auto d = angular_distribution(p, s);
    const double full = oracle_integral(d.k_hat, m, xi, std::numbers::pi, 600, 720);
    const double m3 = m * m * m;
    EXPECT_NEAR(d.enhancement, full / (4.0 * std::numbers::pi * m3), 1e-6 * d.enhancement);
    const double tc = 3.0 * xi / m;
    const double cone = oracle_integral(d.k_hat, m, xi, tc, 200, 720) / full;
    EXPECT_NEAR(cone_fraction(d, tc), cone, 1e-6);
}

TEST(Distribution, ConeHoldsMostOfTheEmission) {
    const auto p = setup(10, 0.5);
    const auto d = angular_distribution(p, derive_scales(p));
    EXPECT_GT(cone_fraction(d, 3.0 * 0.5 / 10), 0.5);
    EXPECT_NEAR(cone_fraction(d, std::numbers::pi), 1.0, 1e-12);
}

TEST(Distribution, MirrorSymmetryAboutTheLaserAxis) {
    const auto p = setup(7, 0.4);
    const auto s = derive_scales(p);
    const Eigen::Vector3d k = Eigen::Vector3d::UnitZ();
    for (double th : {0.02, 0.1, 0.7, 2.0})
        for (double ph : {0.1, 0.9, 2.5}) {
            const Eigen::Vector3d u(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
            const double f = interference_factor(u, k, 7, s.xi);
            EXPECT_NEAR(interference_factor(Eigen::Vector3d(-u.x(), u.y(), u.z()), k, 7, s.xi), f, 1e-9 * f + 1e-12);
            EXPECT_NEAR(interference_factor(Eigen::Vector3d(u.y(), u.x(), u.z()), k, 7, s.xi), f, 1e-9 * f + 1e-12);
        }
}

TEST(Distribution, RefinementConverges) {
    const auto p = setup(5, 0.5);
    const auto s = derive_scales(p);
    AngularGridSpec g;
    g.nodes_per_width = 8;
    const auto a = angular_distribution(p, s, g);
    g.nodes_per_width = 32;
    const auto b = angular_distribution(p, s, g);
    EXPECT_NEAR(a.enhancement, b.enhancement, 1e-8 * b.enhancement);
    EXPECT_NEAR(a.width, b.width, 1e-6);
}

TEST(Distribution, Errors) {
    auto p = setup(5, 0.5);
    const auto s = derive_scales(p);
    AngularGridSpec g;
    g.nodes_per_width = 4;
    EXPECT_THROW(angular_distribution(p, s, g), GridTooCoarse);
    g = {};
    g.max_nodes = 1000;
    EXPECT_THROW(angular_distribution(p, s, g), GridTooCoarse);

    p.laser_wavevector *= 1.01;
    EXPECT_THROW(angular_distribution(p, s), InvalidParams);

    PhysicalParams q = p;
    q = with_range(q, 0.5, -1);
    EXPECT_THROW(angular_distribution(q, derive_scales(q)), WrongRegime);
    q = setup(5, 0.5);
    q.reservoir_dim = 2;
    EXPECT_THROW(angular_distribution(q, derive_scales(q)), InvalidParams);
}

TEST(Maxima, LongRangeHasOnlyTheLaserDirection) {
    const auto p = setup(10, 0.5);
    const auto s = derive_scales(p);
    const auto mx = diffraction_maxima(s, Eigen::Vector3d::UnitZ(), 3);
    ASSERT_EQ(mx.size(), 1u);
    EXPECT_EQ(mx[0], Eigen::Vector3d::UnitZ());
}

TEST(Maxima, ShortRangeOpensSideOrders) {
    // pi xi = 1/2: m = (+-1, 0, -1) and (0, +-1, -1) satisfy k.m = -|m|^2 / 2
    const auto p = setup(10, 1.0 / (2.0 * std::numbers::pi));
    const auto s = derive_scales(p);
    const auto mx = diffraction_maxima(s, Eigen::Vector3d::UnitZ(), 1);
    EXPECT_EQ(mx.size(), 5u);
    for (const auto& u : mx) {
        EXPECT_NEAR(u.norm(), 1.0, 1e-9);
        EXPECT_NEAR(interference_factor(u, Eigen::Vector3d::UnitZ(), 10, s.xi), 1e6, 1e-3);
    }
    // pi xi = 1/4: only m = (+-2, 0, -2) and (0, +-2, -2) within the cutoff
    const auto quarter = diffraction_maxima(derive_scales(setup(10, 0.25 / std::numbers::pi)),
                                            Eigen::Vector3d::UnitZ(), 3);
    EXPECT_EQ(quarter.size(), 5u);
    // a generic range has no exact Bragg condition
    EXPECT_EQ(diffraction_maxima(derive_scales(setup(10, 0.05)), Eigen::Vector3d::UnitZ(), 3).size(), 1u);
}

TEST(Estimates, Formulae) {
    auto p = setup(10, 0.5);
    auto e = gaussian_peak_estimates(p, derive_scales(p));
    EXPECT_NEAR(e.chi, std::pow(std::numbers::pi, 1.5) * 2.5, 1e-12);
    EXPECT_NEAR(e.chi, 13.92, 5e-3);
    EXPECT_NEAR(e.delta_theta, 0.05, 1e-12);
    EXPECT_TRUE(e.narrow);
    p = setup(2, 0.5);
    EXPECT_FALSE(gaussian_peak_estimates(p, derive_scales(p)).narrow);
    p = setup(10, 1e-3);
    e = gaussian_peak_estimates(p, derive_scales(p));
    EXPECT_LT(e.chi, 1e-4);
    EXPECT_LT(e.delta_theta, 1e-3);
}

TEST(Estimates, GaussianChiAgainstNormalisation) {
    // Expected to fail: integrating the product of Fejer kernels gives
    // chi ~ pi M xi^2, a factor sqrt(pi) below the Gaussian estimate.
    const auto p = setup(20, 0.3);
    const auto s = derive_scales(p);
    const auto d = angular_distribution(p, s);
    const auto e = gaussian_peak_estimates(p, s);
    EXPECT_NEAR(d.enhancement / e.chi, 1.0, 0.2);
}

TEST(Validity, Examples) {
    PhysicalParams p = setup(10, 0.5, Eigen::Vector3d::UnitZ(), 0.01);
    auto v = validity_bound(p, derive_scales(p));
    EXPECT_NEAR(v.lhs, 1e-4, 1e-16);
    EXPECT_NEAR(v.rhs, 0.1 / (100.0 * std::numbers::pi * std::numbers::pi * 0.25), 1e-15);
    EXPECT_NEAR(v.rhs, 4.05e-4, 1e-6);
    EXPECT_FALSE(v.satisfied);

    p = setup(10, 0.5, Eigen::Vector3d::UnitZ(), 1e-5);
    EXPECT_TRUE(validity_bound(p, derive_scales(p)).satisfied);

    // equality point fails at the default margin
    p = setup(10, 0.5, Eigen::Vector3d::UnitZ(), 0.01);
    const double rhs = validity_bound(p, derive_scales(p)).rhs;
    p = setup(10, 0.5, Eigen::Vector3d::UnitZ(), std::sqrt(rhs));
    v = validity_bound(p, derive_scales(p));
    EXPECT_NEAR(v.margin, 1.0, 1e-9);
    EXPECT_FALSE(v.satisfied);
}

TEST(Export, AngularCsv) {
    const auto p = setup(3, 0.5);
    const auto s = derive_scales(p);
    const auto d = angular_distribution(p, s);
    std::ostringstream os;
    write_angular_csv(os, d, 5, 4);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "theta,phi,I,I_over_peak");
    int rows = 0;
    while (std::getline(is, line))
        ++rows;
    EXPECT_EQ(rows, 20);
    const auto sum = summarize(d, p, s);
    EXPECT_EQ(sum.maxima.size(), 1u);
    EXPECT_EQ(sum.enhancement, d.enhancement);
}
