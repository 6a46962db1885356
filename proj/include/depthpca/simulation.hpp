#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "depthpca/depth.hpp"
#include "depthpca/errors.hpp"
#include "depthpca/linalg.hpp"
#include "depthpca/parallel.hpp"
#include "depthpca/ranks.hpp"
#include "depthpca/rng.hpp"
#include "depthpca/scatter.hpp"

namespace depthpca {

// Draws n rows from the elliptical model. Normal: mu + L g. StudentT(nu):
// the scale matrix is ((nu-2)/nu) * Sigma so that the covariance equals
// Sigma; each row is mu + L_scale * g * sqrt(nu / chi2_nu).
inline Matrix sample_elliptical(const EllipticalModel& model, std::size_t n,
                                std::uint64_t seed) {
    model.validate();
    if (n < 1) throw InvalidInput("sample_elliptical: n must be >= 1");
    if (model.family == Family::StudentT && model.df <= 2)
        throw InvalidInput("sample_elliptical: t covariance needs df > 2");
    const std::size_t p = model.dim();
    Matrix scale = model.sigma;
    if (model.family == Family::StudentT) {
        const double f = (model.df - 2.0) / model.df;
        for (double& v : scale.data()) v *= f;
    }
    const Matrix l = cholesky(scale);

    Matrix out(n, p);
    Rng rng(seed);
    Vec g(p);
    for (std::size_t i = 0; i < n; ++i) {
        rng.normal_fill(g);
        double mix = 1.0;
        if (model.family == Family::StudentT)
            mix = std::sqrt(model.df / rng.chi_square(model.df));
        for (std::size_t a = 0; a < p; ++a) {
            double s = 0.0;
            for (std::size_t b = 0; b <= a; ++b) s += l(a, b) * g[b];
            out(i, a) = model.mu[a] + mix * s;
        }
    }
    return out;
}

// Smallest angle between the lines spanned by g1 and g2: acos(|g1.g2|),
// inner product clamped to [0,1].
inline double principal_angle(std::span<const double> g1, std::span<const double> g2) {
    if (g1.size() != g2.size()) throw InvalidInput("principal_angle: dimension mismatch");
    const double n1 = norm2(g1), n2 = norm2(g2);
    if (n1 == 0.0 || n2 == 0.0) throw InvalidInput("principal_angle: zero vector");
    const double c = std::min(1.0, std::abs(dot(g1, g2)) / (n1 * n2));
    return std::acos(c);
}

struct SimPlan {
    EllipticalModel model;
    std::vector<EstimatorKind> estimators;
    std::vector<std::size_t> sample_sizes;
    std::size_t replications = 1000;
    std::uint64_t seed = 0;
    std::size_t n_projections = 500;

    void validate() const {
        model.validate();
        if (replications < 1) throw InvalidInput("sim plan: replications must be >= 1");
        if (estimators.empty()) throw InvalidInput("sim plan: no estimators");
        for (std::size_t n : sample_sizes)
            if (n < model.dim() + 2) throw InvalidInput("sim plan: sample sizes must be >= p+2");
    }
};

struct FseCell {
    EstimatorKind estimator;
    std::size_t n = 0;
    double mspa = 0.0;
    double fse = 0.0;
    double mc_se = 0.0;
    std::size_t failures = 0;
    bool valid = true; // failures stayed below 1% of replications
};

struct FseTable {
    std::vector<FseCell> cells;
};

// Finite-sample efficiency study: MSPA is the mean squared principal angle
// between the estimated and true first eigenvector; FSE is the ratio against
// the sample-covariance baseline on the same replications. Per-replication
// seeds are fixed by index, so the table is reproducible for any worker
// count, and cells are independent of each other.
inline FseTable run_fse(const SimPlan& plan) {
    plan.validate();
    const std::size_t p = plan.model.dim();
    const Vec true_g1 = eigh(plan.model.sigma).eigenvectors.col(0);
    const std::size_t reps = plan.replications;
    const std::size_t n_est = plan.estimators.size();

    FseTable table;
    for (std::size_t n : plan.sample_sizes) {
        const std::uint64_t cell_seed = Rng::derive(plan.seed, n);
        // angle^2 per estimator (column 0 = baseline), NaN marks a failure
        Matrix angles(reps, n_est + 1, std::numeric_limits<double>::quiet_NaN());

        parallel_for(reps, [&](std::size_t r0, std::size_t r1) {
            for (std::size_t r = r0; r < r1; ++r) {
                const std::uint64_t rep_seed = Rng::derive(cell_seed, r);
                const Matrix data = sample_elliptical(plan.model, n, Rng::derive(rep_seed, 0));
                const Vec median = spatial_median(data).value;

                ScatterOptions cov_opts;
                const ScatterFit cov =
                    fit_scatter({EstimatorKind::Tag::SampleCov, {}}, data, cov_opts);
                const double a0 = principal_angle(cov.decomp.eigenvectors.col(0), true_g1);
                angles(r, 0) = a0 * a0;

                for (std::size_t e = 0; e < n_est; ++e) {
                    ScatterOptions opts;
                    opts.center = median;
                    opts.seed = Rng::derive(rep_seed, 1 + e);
                    opts.n_projections = plan.n_projections;
                    if (plan.estimators[e].tag == EstimatorKind::Tag::SampleCov) {
                        angles(r, e + 1) = angles(r, 0);
                        continue;
                    }
                    try {
                        const ScatterFit fit = fit_scatter(plan.estimators[e], data, opts);
                        const double a =
                            principal_angle(fit.decomp.eigenvectors.col(0), true_g1);
                        angles(r, e + 1) = a * a;
                    } catch (const ConvergenceFailure&) {
                        // leave NaN: failed replication, excluded with a count
                    }
                }
            }
        });

        double base_sum = 0.0;
        for (std::size_t r = 0; r < reps; ++r) base_sum += angles(r, 0);
        const double mspa_cov = base_sum / static_cast<double>(reps);

        for (std::size_t e = 0; e < n_est; ++e) {
            FseCell cell;
            cell.estimator = plan.estimators[e];
            cell.n = n;
            double sb = 0.0, sa = 0.0, sbb = 0.0, saa = 0.0, sab = 0.0;
            std::size_t m = 0;
            for (std::size_t r = 0; r < reps; ++r) {
                const double b = angles(r, e + 1);
                if (std::isnan(b)) {
                    ++cell.failures;
                    continue;
                }
                const double a = angles(r, 0);
                ++m;
                sa += a;
                sb += b;
                saa += a * a;
                sbb += b * b;
                sab += a * b;
            }
            if (m == 0) {
                cell.valid = false;
                table.cells.push_back(cell);
                continue;
            }
            const double am = sa / m, bm = sb / m;
            cell.mspa = bm;
            cell.fse = mspa_cov / bm;
            const double va = saa / m - am * am;
            const double vb = sbb / m - bm * bm;
            const double cab = sab / m - am * bm;
            const double rel2 = std::max(
                0.0, va / (am * am) + vb / (bm * bm) - 2.0 * cab / (am * bm));
            cell.mc_se = (am / bm) * std::sqrt(rel2 / static_cast<double>(m));
            cell.valid = cell.failures * 100 < reps;
            table.cells.push_back(cell);
        }
    }
    return table;
}

} // namespace depthpca
