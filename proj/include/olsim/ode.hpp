// ode.hpp - Dormand-Prince 5(4) adaptive integrator over complex Eigen vectors

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace olsim::ode {

struct Options {
    double rel_tol{1e-8};
    double abs_tol{1e-12};
    double initial_step{0.0}; // 0 -> estimated from the first derivative
    double max_step{0.0};     // 0 -> unbounded
    long max_steps{10'000'000};
};

struct Stats {
    long accepted{0};
    long rejected{0};
};

using State = Eigen::VectorXcd;
using Rhs = std::function<void(double, const State&, State&)>;
/// Called after every accepted step; return false to abort.
using StepHook = std::function<bool(double, const State&)>;

/// Advances y from t0 to each time in `outputs` (ascending, >= t0), storing
/// the state at every output time.
inline std::vector<State> integrate(const Rhs& rhs, State y, double t0, const std::vector<double>& outputs,
                                    const Options& opt = {}, Stats* stats = nullptr,
                                    const StepHook& hook = {}) {
    // Dormand-Prince tableau
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;

    const Eigen::Index n = y.size();
    State k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), ynew(n), err(n);
    std::vector<State> out;
    out.reserve(outputs.size());

    double t = t0;
    rhs(t, y, k1);
    double h = opt.initial_step;
    if (h <= 0.0) {
        const double d0 = y.cwiseAbs().maxCoeff();
        const double d1 = k1.cwiseAbs().maxCoeff();
        h = (d1 > 0.0) ? 0.01 * std::max(d0, opt.abs_tol / opt.rel_tol) / d1 : 1e-3;
        if (!outputs.empty() && outputs.back() > t0)
            h = std::min(h, 0.1 * (outputs.back() - t0));
        if (h <= 0.0)
            h = 1e-6;
    }

    long steps = 0;
    for (double target : outputs) {
        if (target < t)
            throw std::invalid_argument("ode::integrate: output times must be ascending");
        while (t < target) {
            if (++steps > opt.max_steps)
                throw std::runtime_error("ode::integrate: step budget exhausted");
            double step = std::min(h, target - t);
            if (opt.max_step > 0.0)
                step = std::min(step, opt.max_step);
            const bool hits_target = (step == target - t);

            tmp = y + step * a21 * k1;
            rhs(t + c2 * step, tmp, k2);
            tmp = y + step * (a31 * k1 + a32 * k2);
            rhs(t + c3 * step, tmp, k3);
            tmp = y + step * (a41 * k1 + a42 * k2 + a43 * k3);
            rhs(t + c4 * step, tmp, k4);
            tmp = y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
            rhs(t + c5 * step, tmp, k5);
            tmp = y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
            rhs(t + step, tmp, k6);
            ynew = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            rhs(t + step, ynew, k7);
            err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

            double enorm = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double scale = opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
                enorm = std::max(enorm, std::abs(err[i]) / scale);
            }

            if (enorm <= 1.0) {
                t = hits_target ? target : t + step;
                y.swap(ynew);
                k1.swap(k7);
                if (stats)
                    ++stats->accepted;
                if (hook && !hook(t, y))
                    return out;
                const double fac = enorm > 0.0 ? 0.9 * std::pow(enorm, -0.2) : 5.0;
                if (!hits_target || fac < 1.0)
                    h = step * std::clamp(fac, 0.2, 5.0);
            } else {
                if (stats)
                    ++stats->rejected;
                h = step * std::max(0.2, 0.9 * std::pow(enorm, -0.2));
            }
        }
        out.push_back(y);
    }
    return out;
}

} // namespace olsim::ode
