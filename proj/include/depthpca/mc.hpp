#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "depthpca/linalg.hpp"
#include "depthpca/parallel.hpp"
#include "depthpca/rng.hpp"

namespace depthpca {

// Batched Monte Carlo expectation over z ~ N(0, I_p). Draws are split into
// fixed-size batches with per-batch generators derived from the master seed;
// batch sums are reduced in batch order. The result is bit-identical for any
// thread count, and the per-batch means support jackknife standard errors of
// smooth functions of the estimated moments.
struct McMoments {
    Vec mean;                        // K component means
    Vec std_error;                   // per-component SE of the mean
    std::vector<Vec> batch_sums;     // B x K
    std::vector<std::size_t> batch_counts;
    std::size_t n = 0;

    std::size_t batches() const { return batch_sums.size(); }

    // mean vector with batch b left out
    Vec leave_one_out(std::size_t b) const {
        Vec m(mean.size());
        const double denom = static_cast<double>(n - batch_counts[b]);
        for (std::size_t k = 0; k < mean.size(); ++k) {
            double total = 0.0;
            for (std::size_t j = 0; j < batch_sums.size(); ++j)
                if (j != b) total += batch_sums[j][k];
            m[k] = total / denom;
        }
        return m;
    }
};

inline constexpr std::size_t kMcBatchSize = 16384;

// fn(z, out) evaluates the K integrand components at one draw.
inline McMoments mc_normal_expect(
    std::size_t p, std::size_t mc_n, std::uint64_t seed, std::size_t k,
    const std::function<void(std::span<const double>, std::span<double>)>& fn) {
    const std::size_t batches = (mc_n + kMcBatchSize - 1) / kMcBatchSize;
    McMoments out;
    out.n = mc_n;
    out.batch_sums.assign(batches, Vec(k, 0.0));
    out.batch_counts.assign(batches, 0);
    std::vector<Vec> batch_sq(batches, Vec(k, 0.0));

    parallel_for(batches, [&](std::size_t b0, std::size_t b1) {
        Vec z(p), vals(k);
        for (std::size_t b = b0; b < b1; ++b) {
            Rng rng(Rng::derive(seed, b));
            const std::size_t count = std::min(kMcBatchSize, mc_n - b * kMcBatchSize);
            out.batch_counts[b] = count;
            for (std::size_t i = 0; i < count; ++i) {
                rng.normal_fill(z);
                fn(z, vals);
                for (std::size_t j = 0; j < k; ++j) {
                    out.batch_sums[b][j] += vals[j];
                    batch_sq[b][j] += vals[j] * vals[j];
                }
            }
        }
    });

    out.mean.assign(k, 0.0);
    Vec m2(k, 0.0);
    for (std::size_t b = 0; b < batches; ++b)
        for (std::size_t j = 0; j < k; ++j) {
            out.mean[j] += out.batch_sums[b][j];
            m2[j] += batch_sq[b][j];
        }
    out.std_error.assign(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        out.mean[j] /= static_cast<double>(mc_n);
        const double var = m2[j] / static_cast<double>(mc_n) - out.mean[j] * out.mean[j];
        out.std_error[j] = std::sqrt(std::max(var, 0.0) / static_cast<double>(mc_n));
    }
    return out;
}

// Jackknife SE of a scalar statistic g(moments) over the MC batches.
inline double mc_jackknife_se(const McMoments& m, const std::function<double(const Vec&)>& g) {
    const std::size_t b = m.batches();
    if (b < 2) return 0.0;
    Vec vals(b);
    for (std::size_t i = 0; i < b; ++i) vals[i] = g(m.leave_one_out(i));
    double avg = 0.0;
    for (double v : vals) avg += v;
    avg /= static_cast<double>(b);
    double ss = 0.0;
    for (double v : vals) ss += (v - avg) * (v - avg);
    return std::sqrt(ss * static_cast<double>(b - 1) / static_cast<double>(b));
}

} // namespace depthpca
