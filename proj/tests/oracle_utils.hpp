#pragma once

// Test-only oracles, independent of the implementation paths they check:
// series special functions, brute-force halfspace depth, grid search for the
// spatial median, and epsilon-contamination functionals for influence checks.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "depthpca/depth.hpp"
#include "depthpca/linalg.hpp"
#include "depthpca/rng.hpp"

namespace oracle {

using depthpca::Matrix;
using depthpca::Vec;

// erf by its Maclaurin series; accurate to ~1e-12 for |x| <= 3.5
inline double erf_series(double x) {
    const double two_over_sqrt_pi = 1.1283791670955126;
    double term = x, sum = x;
    for (int n = 1; n < 200; ++n) {
        term *= -x * x / n;
        const double add = term / (2.0 * n + 1.0);
        sum += add;
        if (std::abs(add) < 1e-18 * std::abs(sum)) break;
    }
    return two_over_sqrt_pi * sum;
}

inline double normal_cdf_series(double x) { return 0.5 * (1.0 + erf_series(x / std::sqrt(2.0))); }

inline double bisect(double lo, double hi, double target, const auto& cdf) {
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (cdf(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// regularized lower incomplete gamma by pure series (no continued fraction)
inline double lower_gamma_series(double a, double x) {
    if (x <= 0.0) return 0.0;
    double term = 1.0 / a, sum = term, ap = a;
    for (int k = 0; k < 2000; ++k) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// exact bivariate halfspace depth by brute force: evaluate the closed
// halfplane count, via direct dot-product signs, at midpoint directions
// between all critical angles defined by query-to-point normals
inline double brute_halfspace_2d(const Matrix& data, std::span<const double> x) {
    const std::size_t n = data.rows();
    std::vector<std::array<double, 2>> v;
    std::size_t coincident = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = data(i, 0) - x[0], b = data(i, 1) - x[1];
        if (a == 0.0 && b == 0.0)
            ++coincident;
        else
            v.push_back({a, b});
    }
    if (v.empty()) return static_cast<double>(coincident) / n;
    const double pi = 3.14159265358979323846;
    std::vector<double> events;
    for (const auto& w : v) {
        const double th = std::atan2(w[1], w[0]);
        for (double e : {th + pi / 2, th - pi / 2}) {
            while (e > pi) e -= 2 * pi;
            while (e <= -pi) e += 2 * pi;
            events.push_back(e);
        }
    }
    std::sort(events.begin(), events.end());
    events.erase(std::unique(events.begin(), events.end()), events.end());
    std::size_t best = v.size();
    for (std::size_t i = 0; i < events.size(); ++i) {
        const double next = (i + 1 < events.size()) ? events[i + 1] : events[0] + 2 * pi;
        const double mid = 0.5 * (events[i] + next);
        const double ux = std::cos(mid), uy = std::sin(mid);
        std::size_t count = 0;
        for (const auto& w : v)
            if (ux * w[0] + uy * w[1] >= 0.0) ++count;
        best = std::min(best, count);
    }
    return static_cast<double>(coincident + best) / n;
}

inline double l1_objective(const Matrix& data, double gx, double gy) {
    double s = 0.0;
    for (std::size_t i = 0; i < data.rows(); ++i)
        s += std::hypot(data(i, 0) - gx, data(i, 1) - gy);
    return s;
}

// best objective over a grid_n x grid_n grid covering the data's bounding box
inline double grid_min_l1(const Matrix& data, std::size_t grid_n = 200) {
    double x0 = data(0, 0), x1 = data(0, 0), y0 = data(0, 1), y1 = data(0, 1);
    for (std::size_t i = 0; i < data.rows(); ++i) {
        x0 = std::min(x0, data(i, 0));
        x1 = std::max(x1, data(i, 0));
        y0 = std::min(y0, data(i, 1));
        y1 = std::max(y1, data(i, 1));
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < grid_n; ++a)
        for (std::size_t b = 0; b < grid_n; ++b) {
            const double gx = x0 + (x1 - x0) * a / (grid_n - 1.0);
            const double gy = y0 + (y1 - y0) * b / (grid_n - 1.0);
            best = std::min(best, l1_objective(data, gx, gy));
        }
    return best;
}

// deterministic random symmetric / SPD matrices for reconstruction tests
inline Matrix random_symmetric(std::size_t p, std::uint64_t seed) {
    depthpca::Rng rng(seed);
    Matrix m(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i; j < p; ++j) m(i, j) = m(j, i) = rng.normal();
    return m;
}

inline Matrix random_spd(std::size_t p, std::uint64_t seed) {
    depthpca::Rng rng(seed);
    Matrix a(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) a(i, j) = rng.normal();
    Matrix m(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < p; ++k) s += a(i, k) * a(j, k);
            m(i, j) = s;
        }
    for (std::size_t i = 0; i < p; ++i) m(i, i) += 0.5; // keep well-conditioned
    return m;
}

// random orthogonal matrix via Gram-Schmidt on a Gaussian matrix
inline Matrix random_orthogonal(std::size_t p, std::uint64_t seed) {
    depthpca::Rng rng(seed);
    Matrix q(p, p);
    for (std::size_t j = 0; j < p; ++j) {
        Vec v(p);
        for (std::size_t i = 0; i < p; ++i) v[i] = rng.normal();
        for (std::size_t k = 0; k < j; ++k) {
            double proj = 0.0;
            for (std::size_t i = 0; i < p; ++i) proj += q(i, k) * v[i];
            for (std::size_t i = 0; i < p; ++i) v[i] -= proj * q(i, k);
        }
        const double nrm = depthpca::norm2(v);
        for (std::size_t i = 0; i < p; ++i) q(i, j) = v[i] / nrm;
    }
    return q;
}

} // namespace oracle
