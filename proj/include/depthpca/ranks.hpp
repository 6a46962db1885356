#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "depthpca/depth.hpp"
#include "depthpca/errors.hpp"
#include "depthpca/linalg.hpp"
#include "depthpca/parallel.hpp"

namespace depthpca {

// S(x - mu) = (x - mu)/||x - mu||, the zero vector at x = mu.
inline Vec spatial_sign(std::span<const double> x, std::span<const double> mu) {
    if (x.size() != mu.size()) throw InvalidInput("spatial_sign: dimension mismatch");
    Vec s(x.size());
    double nrm2 = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        s[j] = x[j] - mu[j];
        nrm2 += s[j] * s[j];
    }
    if (nrm2 == 0.0) return s;
    const double inv = 1.0 / std::sqrt(nrm2);
    for (double& v : s) v *= inv;
    return s;
}

// Multivariate rank: htped(x) * S(x - mu). Lies in the ball of radius M_D.
struct RankVector {
    Vec value;
    std::size_t source_index = 0;
};

inline std::vector<RankVector> rank_transform(const DepthModel& model,
                                              std::span<const double> mu,
                                              const Matrix& data) {
    if (model.dimension() != data.cols() || mu.size() != data.cols())
        throw InvalidInput("rank_transform: dimension mismatch");
    std::vector<RankVector> out(data.rows());
    parallel_for(data.rows(), [&](std::size_t i0, std::size_t i1) {
        for (std::size_t i = i0; i < i1; ++i) {
            const double h = model.htped_at(data.row(i));
            Vec v = spatial_sign(data.row(i), mu);
            for (double& c : v) c *= h;
            out[i] = RankVector{std::move(v), i};
        }
    });
    return out;
}

struct LocationEstimate {
    Vec value;
    int iterations = 0;
    bool converged = false;
};

// Spatial median: minimizes sum_i ||x_i - m|| by the Weiszfeld iteration with
// the Vardi-Zhang step when an iterate coincides with a data point. Converged
// when the L1-objective subgradient norm (in excess of the coincident-point
// multiplicity) falls below tol.
inline LocationEstimate spatial_median(const Matrix& data, double tol = 1e-10,
                                       int max_iter = 500) {
    const std::size_t n = data.rows(), p = data.cols();
    if (n == 0) throw InvalidInput("spatial_median: empty data");
    if (!all_finite(data)) throw InvalidInput("spatial_median: non-finite data");

    LocationEstimate est;
    est.value = detail::column_median(data);
    if (n == 1) {
        est.converged = true;
        return est;
    }

    double scale = 0.0;
    for (double v : data.data()) scale = std::max(scale, std::abs(v));
    const double anchor_eps = 1e-12 * (1.0 + scale);

    Vec& y = est.value;
    Vec grad(p), tilde(p), diff(p);
    for (int it = 0; it <= max_iter; ++it) {
        std::fill(grad.begin(), grad.end(), 0.0);
        std::fill(tilde.begin(), tilde.end(), 0.0);
        double inv_sum = 0.0;
        std::size_t multiplicity = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double d2 = 0.0;
            for (std::size_t j = 0; j < p; ++j) {
                diff[j] = data(i, j) - y[j];
                d2 += diff[j] * diff[j];
            }
            const double d = std::sqrt(d2);
            if (d <= anchor_eps) {
                ++multiplicity;
                continue;
            }
            const double w = 1.0 / d;
            inv_sum += w;
            for (std::size_t j = 0; j < p; ++j) {
                grad[j] -= diff[j] * w; // gradient of sum ||x_i - y|| wrt y
                tilde[j] += data(i, j) * w;
            }
        }
        const double gnorm = norm2(grad);
        est.iterations = it;
        if (gnorm <= static_cast<double>(multiplicity) + tol) {
            est.converged = true;
            return est;
        }
        if (it == max_iter) break;
        if (inv_sum == 0.0) break; // every point coincides with y
        for (std::size_t j = 0; j < p; ++j) tilde[j] /= inv_sum;
        if (multiplicity == 0) {
            y = tilde;
        } else {
            const double gamma = std::min(1.0, static_cast<double>(multiplicity) / gnorm);
            for (std::size_t j = 0; j < p; ++j)
                y[j] = (1.0 - gamma) * tilde[j] + gamma * y[j];
        }
    }
    est.converged = false;
    return est;
}

} // namespace depthpca
