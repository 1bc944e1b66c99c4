#pragma once

#include <cmath>
#include <functional>
#include <limits>

#include "varitherm/linalg.hpp"

namespace varitherm {
namespace fd {

/// Central-difference step: cbrt(eps) * max(1, |x|).
inline double step(double x) {
    static const double h0 = std::cbrt(std::numeric_limits<double>::epsilon());
    return h0 * std::max(1.0, std::abs(x));
}

/// Step for second differences: eps^(1/4) * max(1, |x|).
inline double step2(double x) {
    static const double h0 = std::pow(std::numeric_limits<double>::epsilon(), 0.25);
    return h0 * std::max(1.0, std::abs(x));
}

inline double partial(const std::function<double(double)>& f, double x) {
    const double h = step(x);
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Gradient of a scalar function of a vector by central differences.
inline Vec gradient(const std::function<double(const Vec&)>& f, const Vec& x) {
    Vec g(x.size());
    Vec xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = step(x[i]);
        xp[i] = x[i] + h;
        const double fp = f(xp);
        xp[i] = x[i] - h;
        const double fm = f(xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

/// Jacobian of a vector function by central differences (rows: outputs, cols: inputs).
inline Mat jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x) {
    Vec xp = x;
    Mat J;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = step(x[i]);
        xp[i] = x[i] + h;
        const Vec fp = f(xp);
        xp[i] = x[i] - h;
        const Vec fm = f(xp);
        xp[i] = x[i];
        if (J.size() == 0) J.resize(fp.size(), x.size());
        J.col(i) = (fp - fm) / (2.0 * h);
    }
    return J;
}

/// Hessian of a scalar function by second central differences.
inline Mat hessian(const std::function<double(const Vec&)>& f, const Vec& x) {
    const Eigen::Index n = x.size();
    Mat H(n, n);
    const double f0 = f(x);
    Vec xp = x;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double hi = step2(x[i]);
        for (Eigen::Index j = i; j < n; ++j) {
            const double hj = step2(x[j]);
            if (i == j) {
                xp[i] = x[i] + hi;
                const double fpp = f(xp);
                xp[i] = x[i] - hi;
                const double fmm = f(xp);
                xp[i] = x[i];
                H(i, i) = (fpp - 2.0 * f0 + fmm) / (hi * hi);
            } else {
                xp[i] = x[i] + hi; xp[j] = x[j] + hj;
                const double fpp = f(xp);
                xp[j] = x[j] - hj;
                const double fpm = f(xp);
                xp[i] = x[i] - hi; xp[j] = x[j] + hj;
                const double fmp = f(xp);
                xp[j] = x[j] - hj;
                const double fmm = f(xp);
                xp[i] = x[i]; xp[j] = x[j];
                H(i, j) = H(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
            }
        }
    }
    return H;
}

}  // namespace fd
}  // namespace varitherm
