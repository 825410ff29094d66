#pragma once

// Test-only oracles, deliberately independent of the library's
// implementation paths: direct-sum DFT, windowed-sinc interpolation for
// intersample peaks, and adaptive Simpson integration of the chi-square
// density for p-values.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>

namespace oracles {

inline Eigen::ArrayXcd naive_dft(const Eigen::ArrayXd& x) {
    const auto n = x.size();
    Eigen::ArrayXcd out(n / 2 + 1);
    for (Eigen::Index k = 0; k <= n / 2; ++k) {
        std::complex<double> acc(0.0, 0.0);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) *
                                 static_cast<double>(i) / static_cast<double>(n);
            acc += x(i) * std::complex<double>(std::cos(angle), std::sin(angle));
        }
        out(k) = acc;
    }
    return out;
}

/// Peak of the bandlimited reconstruction sampled on a factor-`ratio` finer
/// grid, via windowed-sinc interpolation (half-width taps on each side).
inline double sinc_interpolated_peak(const Eigen::ArrayXd& x, int ratio = 64,
                                     int half_width = 64) {
    const auto n = x.size();
    double peak = 0.0;
    for (Eigen::Index m = 0; m < n * ratio; ++m) {
        const double t = static_cast<double>(m) / ratio;
        const auto center = static_cast<Eigen::Index>(std::floor(t));
        double acc = 0.0;
        for (Eigen::Index i = std::max<Eigen::Index>(0, center - half_width);
             i <= std::min<Eigen::Index>(n - 1, center + half_width); ++i) {
            const double d = t - static_cast<double>(i);
            double s;
            if (std::abs(d) < 1e-12) {
                s = 1.0;
            } else {
                s = std::sin(std::numbers::pi * d) / (std::numbers::pi * d);
                // Hann taper over the window span keeps truncation ripple low
                s *= 0.5 + 0.5 * std::cos(std::numbers::pi * d / (half_width + 1));
            }
            acc += x(i) * s;
        }
        peak = std::max(peak, std::abs(acc));
    }
    return peak;
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double fa, double fm, double fb, double eps, int depth) {
    const double m = (a + b) / 2.0;
    const double lm = (a + m) / 2.0, rm = (m + b) / 2.0;
    const double flm = f(lm), frm = f(rm);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * eps)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, eps / 2.0, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, eps / 2.0, depth - 1);
}

/// Upper-tail chi-square probability by numerical integration of the density.
inline double chi_square_upper_tail(int dof, double statistic) {
    const double k2 = dof / 2.0;
    const double log_norm = k2 * std::log(2.0) + std::lgamma(k2);
    auto density = [&](double x) {
        if (x <= 0.0) return 0.0;
        return std::exp((k2 - 1.0) * std::log(x) - x / 2.0 - log_norm);
    };
    // beyond stat + 400 the tail is negligible at our tolerances
    const double hi = statistic + 400.0;
    const double a = statistic, b = hi;
    return adaptive_simpson(density, a, b, density(a), density((a + b) / 2.0), density(b), 1e-10,
                            40);
}

} // namespace oracles
