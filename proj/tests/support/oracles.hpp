#pragma once

// Reference implementations that share no code with the library. They are
// deliberately slow and direct.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

inline double Phi(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

// Defaults every live bank at or below 0, applies C ln(1 - k/S) to the rest,
// and repeats until nobody is at or below 0. Returns the total defaulted.
inline std::size_t iterative_cascade(std::vector<double> values, double c) {
    const std::size_t s0 = values.size();
    std::size_t survivors = s0;
    std::vector<bool> dead(s0, false);
    double shift = 0.0;
    while (true) {
        std::size_t k = 0;
        for (std::size_t i = 0; i < s0; ++i) {
            if (!dead[i] && values[i] + shift <= 0.0) {
                dead[i] = true;
                ++k;
            }
        }
        if (k == 0 || survivors == k) {
            return s0 - survivors + k;
        }
        // Cumulative loss relative to the start of the cascade.
        survivors -= k;
        shift = c * std::log(static_cast<double>(survivors) / static_cast<double>(s0));
    }
}

// Bisection on y - a - min(1, max(y + 1, 0)) * lam, which is increasing in y
// (slope 1 - lam or 1).
inline double solve_loss_bisect(double a, double lam) {
    auto g = [&](double y) { return y - a - std::min(1.0, std::max(y + 1.0, 0.0)) * lam; };
    double lo = a + lam - 1.0;
    double hi = a + 1.0;
    for (int i = 0; i < 400 && hi - lo > 0.0; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) {
            break;
        }
        (g(mid) > 0.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

// Composite Simpson on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, std::size_t n = 2000) {
    if (n % 2) {
        ++n;
    }
    const double h = (b - a) / static_cast<double>(n);
    double s = f(a) + f(b);
    for (std::size_t i = 1; i < n; ++i) {
        s += (i % 2 ? 4.0 : 2.0) * f(a + static_cast<double>(i) * h);
    }
    return s * h / 3.0;
}

inline double gauss_kernel(double x, double var) {
    return std::exp(-x * x / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
}

// Free-space solution of p_t = -v p_y + d p_yy at (t, y) from f.
inline double gaussian_convolution(const std::function<double(double)>& f, double lo, double hi, double v, double d,
                                   double t, double y) {
    const double var = 2.0 * d * t;
    return simpson([&](double x) { return f(x) * gauss_kernel(y - x - v * t, var); }, lo, hi, 4000);
}

// Image-charge solution on (0, inf) with absorbing 0, driftless.
inline double dirichlet_heat(const std::function<double(double)>& f, double lo, double hi, double d, double t,
                             double y) {
    const double var = 2.0 * d * t;
    return simpson([&](double x) { return f(x) * (gauss_kernel(y - x, var) - gauss_kernel(y + x, var)); }, lo, hi,
                   4000);
}

// P(y + alpha s + sigma B_s > 0 for all s <= t), via the reflection principle.
inline double first_passage_survival(double y, double t, double alpha, double sigma) {
    if (y <= 0.0) {
        return 0.0;
    }
    const double st = sigma * std::sqrt(t);
    return Phi((y + alpha * t) / st) - std::exp(-2.0 * alpha * y / (sigma * sigma)) * Phi((-y + alpha * t) / st);
}

}  // namespace oracle
