// special.hpp - Faddeeva function and the error-function family built on it

#pragma once

#include <cmath>
#include <complex>
#include <numbers>

namespace olsim::special {

using cplx = std::complex<double>;

namespace detail {

// w(z) for x >= 0, y >= 0. Power series near the origin, Gautschi's
// Taylor/continued-fraction scheme elsewhere (the layout of TOMS 680).
inline cplx faddeeva_first_quadrant(double x, double y) {
    constexpr double two_over_sqrt_pi = 2.0 * std::numbers::inv_sqrtpi;
    const double xs = x / 5.33;
    const double ys = y / 4.29;
    double qrho = xs * xs + ys * ys;
    const double re_z2 = x * x - y * y;
    const double im_z2 = 2.0 * x * y;

    if (qrho < 0.085264) {
        qrho = (1.0 - 0.85 * y) * std::sqrt(qrho);
        const int n = static_cast<int>(std::lround(6.0 + 72.0 * qrho));
        const cplx z2(re_z2, im_z2);
        cplx sum = 1.0 / (2.0 * n + 1.0);
        for (int i = n; i >= 1; --i)
            sum = 1.0 / (2.0 * i - 1.0) + z2 * sum / static_cast<double>(i);
        const cplx z(x, y);
        const cplx erf_part = 1.0 + cplx(0.0, two_over_sqrt_pi) * z * sum;
        return std::exp(-z2) * erf_part;
    }

    double h = 0.0;
    double two_h = 0.0;
    int kapn = 0;
    int nu = 0;
    if (qrho < 1.0) {
        const double q = std::sqrt(qrho);
        h = 1.6 * q;
        two_h = 2.0 * h;
        kapn = static_cast<int>(std::lround(7.0 + 34.0 * q));
        nu = static_cast<int>(std::lround(16.0 + 26.0 * q));
    } else {
        const double rho = std::sqrt(qrho);
        nu = static_cast<int>(std::lround(3.0 + 1442.0 / (26.0 * rho + 77.0)));
    }
    double lambda = h > 0.0 ? std::pow(two_h, kapn) : 0.0;

    cplx r(0.0, 0.0);
    cplx s(0.0, 0.0);
    for (int n = nu; n >= 0; --n) {
        const cplx t = cplx(y + h, -x) + static_cast<double>(n + 1) * r;
        r = 0.5 / t;
        if (h > 0.0 && n <= kapn) {
            s = r * (lambda + s);
            lambda /= two_h;
        }
    }
    cplx w = two_over_sqrt_pi * (h > 0.0 ? s : r);
    if (y == 0.0)
        w.real(std::exp(-x * x));
    return w;
}

} // namespace detail

/// Faddeeva function w(z) = exp(-z^2) erfc(-iz), valid in the whole plane.
inline cplx faddeeva(cplx z) {
    const double x = z.real();
    const double y = z.imag();
    if (y >= 0.0) {
        const cplx w = detail::faddeeva_first_quadrant(std::abs(x), y);
        return x < 0.0 ? std::conj(w) : w;
    }
    return 2.0 * std::exp(-z * z) - faddeeva(-z);
}

/// Scaled complementary error function exp(y^2) erfc(y) for real y.
inline double erfcx(double y) {
    if (y >= 0.0)
        return detail::faddeeva_first_quadrant(0.0, y).real();
    return 2.0 * std::exp(y * y) - erfcx(-y);
}

/// Complex error function. Series near the origin avoids the 1 - (~1) cancellation.
inline cplx erf(cplx z) {
    if (std::abs(z) < 2.0) {
        // erf z = 2/sqrt(pi) sum (-1)^n z^(2n+1) / (n! (2n+1))
        const cplx z2 = z * z;
        cplx term = z;
        cplx sum = z;
        for (int n = 1; n < 80; ++n) {
            term *= -z2 / static_cast<double>(n);
            const cplx add = term / (2.0 * n + 1.0);
            sum += add;
            if (std::abs(add) < 1e-17 * std::abs(sum))
                break;
        }
        return 2.0 * std::numbers::inv_sqrtpi * sum;
    }
    if (z.real() >= 0.0)
        return 1.0 - std::exp(-z * z) * faddeeva(cplx(-z.imag(), z.real()));
    return -erf(-z);
}

/// Imaginary error function erfi(y) = -i erf(iy) for real y.
inline double erfi(double y) { return erf(cplx(0.0, y)).imag(); }

/// Unnormalised sinc, sin(x)/x.
inline double sinc(double x) {
    if (std::abs(x) < 1e-4) {
        const double x2 = x * x;
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
    }
    return std::sin(x) / x;
}

} // namespace olsim::special
