// single_site.hpp - emission of one trapped atom into the free-atom reservoir
//
// The trapped amplitude obeys dA/dt = -int_0^t G(t-t') A(t') dt'. Three routes:
//   * solve_amplitude_analytic: residue + branch-cut solution in the strong
//     confinement limit (3D reservoir only),
//   * solve_amplitude_direct: brute-force Volterra integration with the full
//     kernel, any reservoir dimension,
//   * steady_population_finite_trap: long-time population from the purely
//     imaginary poles of the full Laplace-space amplitude.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "olsim/errors.hpp"
#include "olsim/params.hpp"
#include "olsim/quadrature.hpp"
#include "olsim/special.hpp"

namespace olsim {

struct CorrelationKernel {
    int dimension{3};
    double omega0{1.0};
    double rabi{0.05};
    double detuning{0.0};

    static CorrelationKernel from(const PhysicalParams& p) {
        return {p.reservoir_dim, p.trap, p.rabi, p.detuning};
    }

    /// Slowly varying part (1 + i omega0 tau / 2)^(-d/2), principal branch.
    cplx envelope(double tau) const {
        return std::pow(cplx(1.0, 0.5 * omega0 * tau), -0.5 * dimension);
    }
};

/// G(tau) = Omega^2 exp(i Delta tau) / (1 + i omega0 tau / 2)^(d/2).
inline cplx kernel_eval(const CorrelationKernel& k, double tau) {
    return k.rabi * k.rabi * std::exp(cplx(0.0, k.detuning * tau)) * k.envelope(tau);
}

enum class AmplitudeMethod { analytic_strong_confinement, direct_integrodifferential };

inline const char* to_string(AmplitudeMethod m) {
    return m == AmplitudeMethod::analytic_strong_confinement ? "analytic_strong_confinement"
                                                              : "direct_integrodifferential";
}

struct AmplitudeTrace {
    std::vector<double> times;
    std::vector<cplx> amplitude;
    std::vector<double> population;
    std::vector<double> emitted; // accumulated emitted norm (direct solver only)
    AmplitudeMethod method{AmplitudeMethod::analytic_strong_confinement};
};

// ---------------------------------------------------------------------------
// Strong-confinement solution

namespace detail {

/// Branch-cut integral int_0^inf sqrt(x) e^{-x t} / ((-x + i dt)^2 + i 4 pi a^2 x) dx.
/// Evaluated after x = u^2/(1-u)^2, which keeps the integrand bounded at both
/// ends of [0,1) even at t = 0.
inline quad::Result branch_cut_integral(double delta_tilde, double alpha_sq, double t, double abs_tol) {
    const double four_pi_a2 = 4.0 * std::numbers::pi * alpha_sq;
    auto integrand = [&](double u) -> cplx {
        if (u >= 1.0)
            return t > 0.0 ? cplx(0.0) : cplx(2.0, 0.0);
        const double om = 1.0 - u;
        const double sx = u / om;  // sqrt(x)
        const double x = sx * sx;
        const double jac = 2.0 * u / (om * om * om);
        const cplx d = cplx(-x, delta_tilde);
        const cplx denom = d * d + cplx(0.0, four_pi_a2 * x);
        return sx * std::exp(-x * t) * jac / denom;
    };
    auto to_u = [](double x) { const double r = std::sqrt(x); return r / (1.0 + r); };

    std::vector<double> xs = {std::abs(delta_tilde), std::numbers::pi * alpha_sq};
    if (t > 0.0)
        for (double f : {0.01, 0.1, 1.0, 10.0, 100.0})
            xs.push_back(f / t);
    std::vector<double> pts = {0.0, 1.0};
    for (double x : xs)
        if (x > 0.0 && std::isfinite(x))
            pts.push_back(to_u(x));
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return quad::integrate_breakpoints(integrand, pts, abs_tol, 1e-12, 4000);
}

} // namespace detail

inline constexpr double kQuadratureFailureTol = 1e-8;

/// A(t) in the strong-confinement limit: pole term c exp(i(b^2+Delta)t), kept
/// only when the pole is on the principal sheet, plus
/// the non-Markovian branch-cut integral.
inline AmplitudeTrace solve_amplitude_analytic(const DerivedScales& s, const std::vector<double>& times) {
    AmplitudeTrace tr;
    tr.method = AmplitudeMethod::analytic_strong_confinement;
    const cplx prefactor = 2.0 * s.alpha * std::numbers::inv_sqrtpi * std::exp(cplx(0.0, std::numbers::pi / 4));
    const double pref_abs = std::abs(prefactor);
    for (double t : times) {
        if (t < 0.0)
            throw InvalidParams("times must be >= 0");
        const auto r = detail::branch_cut_integral(s.delta_tilde, s.alpha_sq, t, 1e-11 / pref_abs);
        if (!(pref_abs * r.error <= kQuadratureFailureTol))
            throw QuadratureFailure("branch-cut integral error " + std::to_string(pref_abs * r.error) +
                                    " at t = " + std::to_string(t));
        const cplx pole = s.pole_on_sheet ? s.c_residue * std::exp(cplx(0.0, 1.0) * (s.b * s.b + s.detuning) * t)
                                          : cplx(0.0, 0.0);
        const cplx a = pole + prefactor * std::exp(cplx(0.0, s.detuning * t)) * r.value;
        tr.times.push_back(t);
        tr.amplitude.push_back(a);
        tr.population.push_back(std::norm(a));
    }
    return tr;
}

/// Long-time population |c|^2 of the strong-confinement solution.
inline double analytic_steady_population(const DerivedScales& s) {
    if (s.regime != Regime::bound)
        return 0.0;
    return std::norm(s.c_residue);
}

// ---------------------------------------------------------------------------
// Direct Volterra integration

struct DirectOptions {
    double step{0.5};
    bool check_step{true};      // rerun at step/2 and compare the final population
    double step_tolerance{1e-6};
    std::size_t output_stride{1}; // keep every n-th grid point
};

namespace detail {

/// Exact moments of a kernel over the panels [m h, (m+1) h]:
/// i0 = int f, i1 = int (s - m h) f.
struct PanelMoments {
    std::vector<cplx> i0;
    std::vector<cplx> i1;
};

/// Antiderivatives of z^q in s, z = 1 + i b s.
inline cplx power_antiderivative(cplx z, double q, cplx ib) {
    if (q == -1.0)
        return std::log(z) / ib;
    return std::pow(z, q + 1.0) / (ib * (q + 1.0));
}

/// Moments of the envelope K(s) = (1 + i b s)^(-p) and of its running
/// integral L(s) = int_0^s K. Closed forms on the first panels, where K varies
/// on the scale 1/b; Gauss-Legendre further out, where both are smooth.
inline void envelope_moments(const CorrelationKernel& k, double h, std::size_t count, PanelMoments& km,
                             PanelMoments& lm) {
    const double b = 0.5 * k.omega0;
    const double p = 0.5 * k.dimension;
    const cplx ib(0.0, b);
    auto z = [&](double s) { return cplx(1.0, b * s); };
    // antiderivatives of z^q and s z^q
    auto P = [&](double s, double q) { return power_antiderivative(z(s), q, ib); };
    auto SP = [&](double s, double q) { return (P(s, q + 1.0) - P(s, q)) / ib; };
    // L(s) and its antiderivatives
    auto L = [&](double s) -> cplx {
        if (p == 1.0)
            return std::log(z(s)) / ib;
        return (std::pow(z(s), 1.0 - p) - 1.0) / (ib * (1.0 - p));
    };
    auto int_L = [&](double s) -> cplx {
        if (p == 1.0) {
            const cplx zz = z(s);
            return (zz * std::log(zz) - zz) / (ib * ib);
        }
        return (P(s, 1.0 - p) - s) / (ib * (1.0 - p));
    };
    auto int_sL = [&](double s) -> cplx {
        if (p == 1.0) {
            const cplx zz = z(s);
            const cplx zlog = (zz * zz * std::log(zz) / 2.0 - zz * zz / 4.0) / ib;
            return (zlog - (zz * std::log(zz) - zz) / ib) / (ib * ib);
        }
        return (SP(s, 1.0 - p) - 0.5 * s * s) / (ib * (1.0 - p));
    };
    static const auto gl = quad::gauss_legendre(8, 0.0, 1.0);

    for (auto* m : {&km, &lm}) {
        m->i0.resize(count);
        m->i1.resize(count);
    }
    for (std::size_t j = 0; j < count; ++j) {
        const double a = static_cast<double>(j) * h;
        const double c = a + h;
        if (j < 8) {
            km.i0[j] = P(c, -p) - P(a, -p);
            km.i1[j] = (SP(c, -p) - SP(a, -p)) - a * km.i0[j];
            lm.i0[j] = int_L(c) - int_L(a);
            lm.i1[j] = (int_sL(c) - int_sL(a)) - a * lm.i0[j];
        } else {
            cplx k0(0.0), k1(0.0), l0(0.0), l1(0.0);
            for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
                const double u = gl.nodes[q] * h;
                const cplx kv = std::pow(z(a + u), -p);
                const cplx lv = L(a + u);
                k0 += gl.weights[q] * kv;
                k1 += gl.weights[q] * u * kv;
                l0 += gl.weights[q] * lv;
                l1 += gl.weights[q] * u * lv;
            }
            km.i0[j] = k0 * h;
            km.i1[j] = k1 * h;
            lm.i0[j] = l0 * h;
            lm.i1[j] = l1 * h;
        }
    }
}

/// Solves the time-integrated equation
///   A~(t) = 1 - i Delta int_0^t A~ - Omega^2 int_0^t L(t - s) A~(s) ds
/// in the frame rotating at Delta, with A~ piecewise linear and the memory
/// kernel integrated exactly. Integrating the kernel once removes the fast
/// initial layer (width 1/omega0) from the stepping, so the step only has to
/// resolve A~ itself. The emitted norm is accumulated independently from the
/// flux 2 Re(A~* int K A~).
inline AmplitudeTrace volterra_run(const CorrelationKernel& k, double t_end, double h, std::size_t stride) {
    const std::size_t n_steps = static_cast<std::size_t>(std::ceil(t_end / h - 1e-9));
    const double om2 = k.rabi * k.rabi;
    PanelMoments km, lm;
    envelope_moments(k, h, n_steps + 1, km, lm);
    // weight on A~_{n-m} (q) and A~_{n-m-1} (p) for lag panel m
    std::vector<cplx> kp(n_steps + 1), kq(n_steps + 1), lp(n_steps + 1), lq(n_steps + 1);
    for (std::size_t m = 0; m <= n_steps; ++m) {
        kp[m] = om2 * km.i1[m] / h;
        kq[m] = om2 * (km.i0[m] - km.i1[m] / h);
        lp[m] = om2 * lm.i1[m] / h;
        lq[m] = om2 * (lm.i0[m] - lm.i1[m] / h);
    }

    std::vector<cplx> a(n_steps + 1);
    a[0] = 1.0;
    cplx running(0.0);    // trapezoid integral of A~ up to t_{n-1}
    cplx flux_prev(0.0);  // A~* int K A~ at t_{n-1}
    double emitted = 0.0;
    const cplx idelta(0.0, k.detuning);

    AmplitudeTrace tr;
    tr.method = AmplitudeMethod::direct_integrodifferential;
    auto record = [&](std::size_t n) {
        const double t = static_cast<double>(n) * h;
        const cplx lab = a[n] * std::exp(cplx(0.0, k.detuning * t));
        tr.times.push_back(t);
        tr.amplitude.push_back(lab);
        tr.population.push_back(std::norm(lab));
        tr.emitted.push_back(emitted);
    };
    record(0);

    for (std::size_t n = 1; n <= n_steps; ++n) {
        cplx lknown = lp[0] * a[n - 1];
        cplx kknown = kp[0] * a[n - 1];
        for (std::size_t m = 1; m < n; ++m) {
            lknown += lq[m] * a[n - m] + lp[m] * a[n - m - 1];
            kknown += kq[m] * a[n - m] + kp[m] * a[n - m - 1];
        }
        const cplx rhs = 1.0 - idelta * (running + 0.5 * h * a[n - 1]) - lknown;
        a[n] = rhs / (1.0 + 0.5 * h * idelta + lq[0]);
        running += 0.5 * h * (a[n - 1] + a[n]);
        const cplx flux = std::conj(a[n]) * (kq[0] * a[n] + kknown);
        emitted += h * (flux_prev.real() + flux.real());
        flux_prev = flux;
        if (n % stride == 0 || n == n_steps)
            record(n);
    }
    return tr;
}

} // namespace detail

/// Brute-force integration of the non-Markovian amplitude equation on a
/// uniform grid [0, t_end]. With check_step set, the run is repeated at half
/// the step and StepTooLarge is raised if the final populations differ by more
/// than step_tolerance.
inline AmplitudeTrace solve_amplitude_direct(const CorrelationKernel& k, double t_end, const DirectOptions& opt = {}) {
    if (!(opt.step > 0.0) || !(t_end >= 0.0))
        throw InvalidParams("direct solver needs step > 0 and t_end >= 0");
    if (k.dimension < 1 || k.dimension > 3)
        throw InvalidParams("reservoir dimension must be 1, 2 or 3");
    const std::size_t stride = std::max<std::size_t>(1, opt.output_stride);
    auto coarse = detail::volterra_run(k, t_end, opt.step, stride);
    if (opt.check_step && t_end > 0.0) {
        const auto fine = detail::volterra_run(k, t_end, 0.5 * opt.step, 2 * stride);
        const double diff = std::abs(fine.population.back() - coarse.population.back());
        if (diff > opt.step_tolerance)
            throw StepTooLarge("halving the step changed the final population by " + std::to_string(diff));
    }
    return coarse;
}

// ---------------------------------------------------------------------------
// Laplace-space kernel

/// Laplace transform of the 3D correlation function. The full form uses the
/// Faddeeva function, exp(-w^2)(1 + erf(i w)) = w_F(w), w = sqrt(2 (Delta + i s)/omega0)
/// on the principal branch; `strong_confinement` returns the first-order form.
inline cplx laplace_kernel_transform(const PhysicalParams& p, cplx s, bool strong_confinement = false) {
    const double om2 = p.rabi * p.rabi;
    if (strong_confinement) {
        const double alpha = std::sqrt(8.0 * om2 * om2 / (p.trap * p.trap * p.trap));
        return cplx(0.0, -4.0 * om2 / p.trap) +
               alpha * cplx(1.0, 1.0) * std::sqrt(2.0 * std::numbers::pi * (s - cplx(0.0, p.detuning)));
    }
    const cplx w = std::sqrt(2.0 * (p.detuning + cplx(0.0, 1.0) * s) / p.trap);
    const double sqrt_pi = std::sqrt(std::numbers::pi);
    return 4.0 * om2 / p.trap * (cplx(0.0, -1.0) + sqrt_pi * w * special::faddeeva(w));
}

// ---------------------------------------------------------------------------
// Finite-trap steady state

struct SteadyState {
    double population{0.0};
    std::vector<double> poles;    // real x_j with s = i x_j
    std::vector<double> residues; // 1 / f'(x_j)
    std::vector<std::string> scan_trace;
};

namespace detail {

/// Pole condition for s = i x, x > 0 (outside the continuum):
/// f(x) = x + dt + 4 Omega^2 sqrt(2 pi x / omega0^3) erfcx(sqrt(2x/omega0)).
struct PoleFunction {
    double delta_tilde;
    double omega0;
    double rabi;

    double scale() const { return 4.0 * rabi * rabi * std::sqrt(std::numbers::pi) / omega0; }
    double value(double x) const {
        const double y = std::sqrt(2.0 * x / omega0);
        return x + delta_tilde + scale() * y * special::erfcx(y);
    }
    double derivative(double x) const {
        const double y = std::sqrt(2.0 * x / omega0);
        const double ex = special::erfcx(y);
        const double dh_dy = scale() * (ex * (1.0 + 2.0 * y * y) - 2.0 * y * std::numbers::inv_sqrtpi);
        return 1.0 + dh_dy / (omega0 * y);
    }
    /// Continuation to x < 0, where s = i x lies on the reservoir continuum.
    cplx continued(double x) const {
        const double v = std::sqrt(-2.0 * x / omega0);
        const cplx w = special::faddeeva(cplx(v, 0.0));
        return x + delta_tilde + cplx(0.0, -1.0) * scale() * v * w;
    }
};

} // namespace detail

struct SteadyStateOptions {
    int scan_points{400};
    double imag_tolerance{1e-10};
    int newton_iterations{200};
};

inline SteadyState steady_population_finite_trap(const PhysicalParams& p, const SteadyStateOptions& opt = {}) {
    p.validate();
    if (p.reservoir_dim != 3)
        throw InvalidParams("finite-trap steady state is implemented for the 3D kernel");
    const double dt = p.detuning - p.level_shift();
    detail::PoleFunction f{dt, p.trap, p.rabi};
    SteadyState out;

    // f is increasing and f(x) >= x + dt, so any real root lies in (0, |dt|].
    auto scan = [&](double lo, double hi, auto&& fn, std::vector<std::pair<double, double>>& brackets) {
        double x_prev = lo;
        double f_prev = fn(lo);
        for (int i = 1; i <= opt.scan_points; ++i) {
            const double x = lo * std::pow(hi / lo, static_cast<double>(i) / opt.scan_points);
            const double fx = fn(x);
            if ((f_prev < 0.0) != (fx < 0.0))
                brackets.emplace_back(x_prev, x);
            x_prev = x;
            f_prev = fx;
        }
    };

    if (dt != 0.0) {
        const double hi = std::abs(dt) * 2.0 + 1e-300;
        const double lo = hi * 1e-18;
        std::vector<std::pair<double, double>> brackets;
        scan(lo, hi, [&](double x) { return f.value(x); }, brackets);
        for (auto [a, b] : brackets) {
            double x = 0.5 * (a + b);
            bool ok = false;
            for (int it = 0; it < opt.newton_iterations; ++it) {
                const double fx = f.value(x);
                double xn = x - fx / f.derivative(x);
                if (!(xn > a && xn < b))
                    xn = 0.5 * (a + b);
                if (f.value(xn) < 0.0)
                    a = xn;
                else
                    b = xn;
                if (std::abs(xn - x) <= 1e-15 * std::abs(xn) || b - a <= 1e-15 * b) {
                    x = xn;
                    ok = true;
                    break;
                }
                x = xn;
            }
            out.scan_trace.push_back("bracket [" + std::to_string(a) + ", " + std::to_string(b) + "]");
            if (!ok)
                throw RootSearchFailure("Newton polishing did not converge near x = " + std::to_string(x));
            out.poles.push_back(x);
        }

        // x < 0: the continued left-hand side is complex; sign changes of its
        // real part are rejected unless the imaginary part also vanishes there.
        std::vector<std::pair<double, double>> neg;
        scan(lo, hi + 8.0 * p.level_shift(), [&](double y) { return f.continued(-y).real(); }, neg);
        for (auto [a, b] : neg) {
            double lo_y = a, hi_y = b;
            const bool lo_neg = f.continued(-lo_y).real() < 0.0;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo_y + hi_y);
                if ((f.continued(-mid).real() < 0.0) == lo_neg)
                    lo_y = mid;
                else
                    hi_y = mid;
            }
            const double y = 0.5 * (lo_y + hi_y);
            const double im = std::abs(f.continued(-y).imag());
            out.scan_trace.push_back("continuum crossing at x = " + std::to_string(-y) +
                                     " |Im| = " + std::to_string(im) + (im < opt.imag_tolerance ? " accepted" : " rejected"));
            if (im < opt.imag_tolerance)
                out.poles.push_back(-y);
        }
    }

    double sum = 0.0;
    for (double x : out.poles) {
        const double r = x > 0.0 ? 1.0 / f.derivative(x) : 0.0;
        out.residues.push_back(r);
        sum += r;
    }
    out.population = sum * sum;
    return out;
}

} // namespace olsim
