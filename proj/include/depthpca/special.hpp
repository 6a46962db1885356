#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "depthpca/errors.hpp"

namespace depthpca {

inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

// Phi^{-1}(p) by bisection on the CDF, refined with Newton steps.
inline double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw InvalidInput("std_normal_quantile: p must be in (0,1)");
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        (normal_cdf(mid) < p ? lo : hi) = mid;
    }
    double x = 0.5 * (lo + hi);
    const double inv_sqrt2pi = 0.3989422804014327;
    for (int i = 0; i < 4; ++i) {
        const double pdf = inv_sqrt2pi * std::exp(-0.5 * x * x);
        if (pdf <= 0.0) break;
        x -= (normal_cdf(x) - p) / pdf;
    }
    return x;
}

namespace detail {

// Regularized lower incomplete gamma P(a,x); series for x < a+1, Lentz
// continued fraction for the complement otherwise.
inline double lower_gamma_reg(double a, double x) {
    if (x <= 0.0) return 0.0;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        double term = 1.0 / a, sum = term, ap = a;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-16) break;
        }
        return sum * std::exp(-x + a * std::log(x) - lg);
    }
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return 1.0 - std::exp(-x + a * std::log(x) - lg) * h;
}

// Regularized incomplete beta I_x(a,b), continued fraction form.
inline double betacf(double a, double b, double x) {
    const double tiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return h;
}

inline double inc_beta_reg(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                  a * std::log(x) + b * std::log(1.0 - x));
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

} // namespace detail

// Quantile of the chi-square distribution with integer df, by bisection on
// the regularized incomplete gamma.
inline double chi2_quantile(double p, int df) {
    if (!(p > 0.0 && p < 1.0)) throw InvalidInput("chi2_quantile: p must be in (0,1)");
    if (df < 1) throw InvalidInput("chi2_quantile: df must be >= 1");
    const double a = 0.5 * df;
    double hi = 2.0 * df + 20.0;
    while (detail::lower_gamma_reg(a, 0.5 * hi) < p) hi *= 2.0;
    double lo = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (detail::lower_gamma_reg(a, 0.5 * mid) < p ? lo : hi) = mid;
        if (hi - lo < 1e-13 * (1.0 + hi)) break;
    }
    return 0.5 * (lo + hi);
}

inline double chi2_cdf(double x, int df) {
    if (df < 1) throw InvalidInput("chi2_cdf: df must be >= 1");
    return detail::lower_gamma_reg(0.5 * df, 0.5 * x);
}

inline double student_t_cdf(double t, int df) {
    if (df < 1) throw InvalidInput("student_t_cdf: df must be >= 1");
    const double x = df / (df + t * t);
    const double tail = 0.5 * detail::inc_beta_reg(0.5 * df, 0.5, x);
    return t >= 0.0 ? 1.0 - tail : tail;
}

inline double student_t_quantile(double p, int df) {
    if (!(p > 0.0 && p < 1.0)) throw InvalidInput("student_t_quantile: p must be in (0,1)");
    if (df < 1) throw InvalidInput("student_t_quantile: df must be >= 1");
    double lo = -1e8, hi = 1e8;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (student_t_cdf(mid, df) < p ? lo : hi) = mid;
        if (hi - lo < 1e-13 * (1.0 + std::abs(hi))) break;
    }
    return 0.5 * (lo + hi);
}

} // namespace depthpca
