// oracles.hpp - independent reference computations for the tests. Nothing in
// here calls into the library's numerics.

#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cplx = std::complex<double>;

struct Rule {
    std::vector<double> x, w;
};

/// Gauss-Legendre nodes on [-1, 1] from the Jacobi matrix (Golub-Welsch).
inline Rule golub_welsch(int n) {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k)
        j(k, k - 1) = j(k - 1, k) = k / std::sqrt(4.0 * k * k - 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    Rule r;
    for (int k = 0; k < n; ++k) {
        r.x.push_back(es.eigenvalues()(k));
        r.w.push_back(2.0 * es.eigenvectors()(0, k) * es.eigenvectors()(0, k));
    }
    return r;
}

template <class F>
auto composite_gl(F f, double a, double b, long panels, int order = 16) -> decltype(f(a)) {
    static thread_local int cached = 0;
    static thread_local Rule rule;
    if (cached != order) {
        rule = golub_welsch(order);
        cached = order;
    }
    using T = decltype(f(a));
    T sum{};
    const double h = (b - a) / panels;
    for (long p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        for (int k = 0; k < order; ++k)
            sum += 0.5 * h * rule.w[k] * f(mid + 0.5 * h * rule.x[k]);
    }
    return sum;
}

/// erf by its Maclaurin series in long double; accurate to ~1e-15 for |x| <= 2.5.
inline double erf_maclaurin(double x) {
    long double term = x, sum = x;
    const long double x2 = static_cast<long double>(x) * x;
    for (int n = 1; n < 400; ++n) {
        term *= -x2 / n;
        const long double add = term / (2 * n + 1);
        sum += add;
        if (std::fabs(static_cast<double>(add)) < 1e-30)
            break;
    }
    return static_cast<double>(2.0L / std::sqrt(3.14159265358979323846264338327950288L) * sum);
}

/// erfc(x) for x >= 2 from the Laplace continued fraction
/// sqrt(pi) e^{x^2} erfc(x) = 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))), evaluated bottom-up.
inline double erfc_continued_fraction(double x) {
    long double t = x;
    for (int k = 400; k >= 1; --k)
        t = x + (k / 2.0L) / t;
    return static_cast<double>(std::exp(-static_cast<long double>(x) * x) /
                               (std::sqrt(3.14159265358979323846264338327950288L) * t));
}

/// erf assembled from the two expansions above.
inline double erf_series(double x) {
    if (std::abs(x) <= 2.5)
        return erf_maclaurin(x);
    const double c = erfc_continued_fraction(std::abs(x));
    return x > 0.0 ? 1.0 - c : c - 1.0;
}

/// Classical fourth-order Runge-Kutta with a fixed step.
template <class State, class Rhs>
State rk4(Rhs f, State y, double t0, double t1, long steps) {
    const double h = (t1 - t0) / steps;
    double t = t0;
    for (long i = 0; i < steps; ++i) {
        const State k1 = f(t, y);
        const State k2 = f(t + 0.5 * h, State(y + 0.5 * h * k1));
        const State k3 = f(t + 0.5 * h, State(y + 0.5 * h * k2));
        const State k4 = f(t + h, State(y + h * k3));
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
    }
    return y;
}

/// |sum_{n=0}^{M-1} exp(i n x)|^2 by direct summation.
inline double lattice_sum_sq(double x, int m) {
    cplx s = 0.0;
    for (int n = 0; n < m; ++n)
        s += std::exp(cplx(0.0, n * x));
    return std::norm(s);
}

} // namespace oracle
