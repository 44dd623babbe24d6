#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "olsim/params.hpp"

using namespace olsim;

namespace {

PhysicalParams base(double rabi, double trap, double detuning) {
    PhysicalParams p;
    p.rabi = rabi;
    p.trap = trap;
    p.detuning = detuning;
    return p;
}

bool has_warning(const std::vector<std::string>& w, const std::string& needle) {
    for (const auto& s : w)
        if (s.find(needle) != std::string::npos)
            return true;
    return false;
}

} // namespace

TEST(DeriveScales, WorkedExample) {
    const auto s = derive_scales(base(0.1, 1.0, 0.05));
    EXPECT_NEAR(s.delta_tilde, 0.01, 1e-15);
    EXPECT_NEAR(s.alpha_sq, 8e-4, 1e-18);
    // hand evaluation: 0.04 * sqrt(2 pi 0.01) = 0.04 * 0.250662827...
    EXPECT_NEAR(s.gamma0, 0.04 * 0.25066282746310002, 1e-15);
    EXPECT_NEAR(s.gamma0, 1.0027e-2, 1e-6);
    EXPECT_EQ(s.regime, Regime::radiative);
    EXPECT_EQ(s.nu, cplx(0.0, -1.0));
}

TEST(DeriveScales, CriticalDetuningRejected) {
    EXPECT_THROW(derive_scales(base(0.1, 1.0, 4.0 * 0.01)), CriticalDetuning);
}

TEST(DeriveScales, DegenerateBoundaryFlagged) {
    PhysicalParams p = base(0.1, 1.0, 0.0);
    const double pa2 = std::numbers::pi * 8.0 * std::pow(0.1, 4);
    p.detuning = p.level_shift() + pa2;
    const auto s = derive_scales(p);
    EXPECT_TRUE(s.degenerate);
    EXPECT_EQ(s.regime, Regime::radiative);
    EXPECT_EQ(s.b_plus, s.b_minus);
    EXPECT_NEAR(s.b_minus.real(), -std::sqrt(std::numbers::pi) * s.alpha, 1e-15);
}

TEST(DeriveScales, RegimeBySign) {
    PhysicalParams p = base(0.1, 1.0, 0.0);
    const double pa2 = std::numbers::pi * 8.0 * std::pow(0.1, 4);
    p.detuning = p.level_shift() - 0.5 * pa2;
    EXPECT_EQ(derive_scales(p).regime, Regime::bound);
    p.detuning = p.level_shift() + 0.5 * pa2;
    EXPECT_EQ(derive_scales(p).regime, Regime::pure_non_markovian);
    p.detuning = p.level_shift() + 2.0 * pa2;
    EXPECT_EQ(derive_scales(p).regime, Regime::radiative);
}

TEST(DeriveScales, ResiduePrefactorPerRegion) {
    PhysicalParams p = base(0.1, 1.0, 0.0);
    const double pa2 = std::numbers::pi * 8.0 * std::pow(0.1, 4);
    p.detuning = p.level_shift() - 3.0 * pa2;
    auto s = derive_scales(p);
    EXPECT_NEAR(std::abs(s.c_residue - 2.0 * s.b_plus / (s.b_plus - s.b_minus)), 0.0, 1e-14);
    EXPECT_NEAR((s.b_plus * s.b_plus).imag(), 0.0, 1e-12 * std::norm(s.b_plus));
    // |c|^2 = (1 - 1/sqrt(1 + 3))^2 = 0.25
    EXPECT_NEAR(std::norm(s.c_residue), 0.25, 1e-12);
    p.detuning = p.level_shift() + 0.3 * pa2;
    EXPECT_EQ(derive_scales(p).c_residue, cplx(0.0, 0.0));
    p.detuning = p.level_shift() + 5.0 * pa2;
    s = derive_scales(p);
    EXPECT_NEAR(std::abs(s.c_residue - 2.0 * s.b_minus / (s.b_minus - s.b_plus)), 0.0, 1e-14);
}

TEST(DeriveScales, RootsSolveTheQuadratic) {
    for (double ratio : {-50.0, -3.0, -0.1, 0.2, 0.9, 1.7, 30.0, 1e4}) {
        PhysicalParams p = base(0.07, 1.3, 0.0);
        const double pa2 = std::numbers::pi * 8.0 * std::pow(0.07, 4) / std::pow(1.3, 3);
        p.detuning = p.level_shift() + ratio * pa2;
        const auto s = derive_scales(p);
        const double spa = std::sqrt(std::numbers::pi) * s.alpha;
        for (cplx b : {s.b_plus, s.b_minus}) {
            const cplx q = b * b + 2.0 * spa * b + s.delta_tilde;
            EXPECT_LT(std::abs(q), 1e-12 * (std::norm(b) + std::abs(s.delta_tilde))) << ratio;
        }
    }
}

TEST(DeriveScales, PureFunction) {
    const auto p = base(0.03, 1.0, -0.2);
    const auto a = derive_scales(p);
    const auto b = derive_scales(p);
    EXPECT_EQ(a.gamma0, b.gamma0);
    EXPECT_EQ(a.b_plus, b.b_plus);
    EXPECT_EQ(a.c_residue, b.c_residue);
    EXPECT_EQ(a.xi, b.xi);
}

TEST(DeriveScales, FrequencyRescaling) {
    // Omega, omega0, Delta -> lambda * (...) with X0 and d0 fixed: delta_tilde,
    // alpha^2 and Gamma0 all scale linearly and the regime is unchanged.
    PhysicalParams p = base(0.05, 1.0, 0.013);
    p.ground_width = 1.0;
    const auto s = derive_scales(p);
    for (double lam : {0.1, 2.0, 17.0}) {
        PhysicalParams q = p;
        q.rabi *= lam;
        q.trap *= lam;
        q.detuning *= lam;
        const auto t = derive_scales(q);
        EXPECT_NEAR(t.delta_tilde, lam * s.delta_tilde, 1e-13 * lam);
        EXPECT_NEAR(t.alpha_sq, lam * s.alpha_sq, 1e-15 * lam);
        EXPECT_NEAR(t.gamma0, lam * s.gamma0, 1e-14 * lam);
        EXPECT_NEAR(t.xi, s.xi, 1e-12);
        EXPECT_EQ(t.regime, s.regime);
    }
}

TEST(DeriveScales, InvalidInputs) {
    EXPECT_THROW(derive_scales(base(0.0, 1.0, 0.1)), InvalidParams);
    EXPECT_THROW(derive_scales(base(0.1, -1.0, 0.1)), InvalidParams);
    auto p = base(0.1, 1.0, 0.1);
    p.lattice_spacing = 0.0;
    EXPECT_THROW(derive_scales(p), InvalidParams);
    p = base(0.1, 1.0, 0.1);
    p.ground_width = -1.0;
    EXPECT_THROW(derive_scales(p), InvalidParams);
    p = base(0.1, 1.0, 0.1);
    p.sites_per_axis = 0;
    EXPECT_THROW(derive_scales(p), InvalidParams);
    p = base(0.1, 1.0, 0.1);
    p.reservoir_dim = 4;
    EXPECT_THROW(derive_scales(p), InvalidParams);
}

TEST(DeriveScales, DefaultGroundWidth) {
    auto p = base(0.1, 4.0, 1.0);
    EXPECT_DOUBLE_EQ(p.x0(), 0.5);
    p.ground_width = 0.3;
    EXPECT_DOUBLE_EQ(p.x0(), 0.3);
}

TEST(Markovianity, RatioAndThreshold) {
    PhysicalParams p = base(0.1, 1.0, 0.0);
    const double pa2 = std::numbers::pi * 8e-4;
    p.detuning = p.level_shift() + 100.0 * pa2;
    auto m = classify_markovianity(derive_scales(p));
    EXPECT_NEAR(m.ratio, 100.0, 1e-9);
    EXPECT_TRUE(m.markovian);
    p.detuning = p.level_shift() + 0.5 * pa2;
    EXPECT_FALSE(classify_markovianity(derive_scales(p)).markovian);
    m = classify_markovianity(derive_scales(base(0.1, 1.0, 0.05)));
    EXPECT_NEAR(m.ratio, 0.01 / (std::numbers::pi * 8e-4), 1e-9);
    EXPECT_NEAR(m.ratio, 3.98, 5e-3);
    EXPECT_FALSE(m.markovian);
    EXPECT_TRUE(classify_markovianity(derive_scales(base(0.1, 1.0, 0.05)), 3.0).markovian);
}

TEST(Warnings, FirstBandAndLaser) {
    auto w = physics_warnings(base(1.0, 1.0, 5.0));
    EXPECT_TRUE(has_warning(w, "first-band condition violated"));
    auto p = base(0.01, 1.0, 0.05);
    EXPECT_FALSE(has_warning(physics_warnings(p), "first-band"));
    p.laser_wavevector = Eigen::Vector3d(0.0, 0.0, 0.5);
    EXPECT_TRUE(has_warning(physics_warnings(p), "k_L X0"));
    // warnings never throw, even at the critical point
    EXPECT_NO_THROW(physics_warnings(base(0.1, 1.0, 0.04)));
}

TEST(Helpers, WithRangeHitsRequestedXi) {
    PhysicalParams p = base(0.01, 1.0, 0.0);
    p.ground_width = 0.1;
    for (double xi : {0.01, 0.5, 3.0, 100.0})
        for (int sign : {+1, -1}) {
            const auto s = derive_scales(with_range(p, xi, sign));
            EXPECT_NEAR(s.xi, xi, 1e-12 * xi);
            EXPECT_EQ(s.delta_tilde > 0.0, sign > 0);
        }
    EXPECT_THROW(with_range(p, 0.0), InvalidParams);
}

TEST(Helpers, ResonantLaser) {
    PhysicalParams p = with_range(base(0.01, 1.0, 0.0), 0.5);
    p = with_resonant_laser(p, Eigen::Vector3d(1.0, 1.0, 0.0));
    const auto s = derive_scales(p);
    EXPECT_NEAR(p.laser_wavevector.norm(), s.k0, 1e-14);
    EXPECT_NEAR(p.laser_wavevector.x(), p.laser_wavevector.y(), 1e-15);
}
