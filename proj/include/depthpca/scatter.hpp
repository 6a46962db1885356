#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "depthpca/depth.hpp"
#include "depthpca/errors.hpp"
#include "depthpca/linalg.hpp"
#include "depthpca/mc.hpp"
#include "depthpca/ranks.hpp"

namespace depthpca {

struct EstimatorKind {
    enum class Tag { SampleCov, SCM, DCM, Tyler, DepthWeightedTyler };

    Tag tag = Tag::SampleCov;
    DepthKind depth = DepthKind::Projection; // used by DCM / DepthWeightedTyler

    bool uses_depth() const {
        return tag == Tag::DCM || tag == Tag::DepthWeightedTyler;
    }
    bool is_tyler() const {
        return tag == Tag::Tyler || tag == Tag::DepthWeightedTyler;
    }

    std::string name() const {
        switch (tag) {
            case Tag::SampleCov: return "sample-cov";
            case Tag::SCM: return "scm";
            case Tag::Tyler: return "tyler";
            case Tag::DCM: return "dcm-" + depth_kind_name(depth);
            case Tag::DepthWeightedTyler: return "dwtyler-" + depth_kind_name(depth);
        }
        return "?";
    }

    static EstimatorKind parse(const std::string& s) {
        if (s == "sample-cov") return {Tag::SampleCov, {}};
        if (s == "scm") return {Tag::SCM, {}};
        if (s == "tyler") return {Tag::Tyler, {}};
        if (s.rfind("dcm-", 0) == 0) return {Tag::DCM, parse_depth_kind(s.substr(4))};
        if (s.rfind("dwtyler-", 0) == 0)
            return {Tag::DepthWeightedTyler, parse_depth_kind(s.substr(8))};
        throw InvalidInput("unknown estimator: " + s);
    }
};

struct ScatterFit {
    EstimatorKind kind;
    Matrix matrix;
    SpectralDecomp decomp;
    Vec center;
    int iterations = 0;
    bool converged = true;
    std::size_t dropped_rows = 0; // rows coinciding exactly with the center
    Vec weights;                  // htped^2 per row for depth-weighted kinds
};

struct ScatterOptions {
    std::optional<Vec> center;
    std::uint64_t seed = 0;
    const DepthModel* depth_model = nullptr; // default: sample fit on the data
    double tyler_tol = 1e-8;
    int tyler_max_iter = 200;
    std::size_t n_projections = 500;
};

namespace detail {

inline Vec column_mean(const Matrix& data) {
    Vec mean(data.cols(), 0.0);
    for (std::size_t i = 0; i < data.rows(); ++i)
        for (std::size_t j = 0; j < data.cols(); ++j) mean[j] += data(i, j);
    for (double& m : mean) m /= static_cast<double>(data.rows());
    return mean;
}

inline bool is_zero_diff(std::span<const double> row, std::span<const double> c) {
    for (std::size_t j = 0; j < row.size(); ++j)
        if (row[j] != c[j]) return false;
    return true;
}

// Fixed-point iteration for Tyler-type estimators:
//   Sigma <- (p / sum w) * sum_i w_i (x_i-c)(x_i-c)^T / ((x_i-c)^T Sigma^{-1} (x_i-c))
// trace-renormalized to p each step; w == 1 gives the plain estimator.
inline Matrix tyler_iterate(const Matrix& data, std::span<const double> center,
                            const Vec& weights, const std::vector<std::size_t>& rows,
                            double tol, int max_iter, int& iterations, bool& converged) {
    const std::size_t p = data.cols();
    double weight_sum = 0.0;
    for (std::size_t i : rows) weight_sum += weights.empty() ? 1.0 : weights[i];
    if (!(weight_sum > 1e-12))
        throw DegenerateData("tyler: total weight is zero (all htped vanish)");

    Matrix sigma = Matrix::identity(p);
    Vec u(p);
    converged = false;
    iterations = 0;
    double last_rel_change = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= max_iter; ++it) {
        Matrix l;
        try {
            l = cholesky(sigma);
        } catch (const NotPositiveDefinite&) {
            throw ConvergenceFailure("tyler: iterate lost positive definiteness", it,
                                     std::numeric_limits<double>::quiet_NaN());
        }
        Matrix next(p, p);
        for (std::size_t i : rows) {
            for (std::size_t j = 0; j < p; ++j) u[j] = data(i, j) - center[j];
            const double d = quadform_inv(l, u);
            if (!(d > 0.0))
                throw ConvergenceFailure("tyler: degenerate quadratic form", it,
                                         std::numeric_limits<double>::quiet_NaN());
            const double w = (weights.empty() ? 1.0 : weights[i]) / d;
            for (std::size_t a = 0; a < p; ++a)
                for (std::size_t b = a; b < p; ++b) next(a, b) += w * u[a] * u[b];
        }
        const double scale = static_cast<double>(p) / weight_sum;
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = a; b < p; ++b) next(b, a) = next(a, b) = next(a, b) * scale;
        const double tr = trace(next);
        if (!(tr > 0.0))
            throw ConvergenceFailure("tyler: trace collapsed", it,
                                     std::numeric_limits<double>::quiet_NaN());
        for (double& v : next.data()) v *= static_cast<double>(p) / tr;

        double diff2 = 0.0, base2 = 0.0;
        for (std::size_t idx = 0; idx < next.data().size(); ++idx) {
            const double d = next.data()[idx] - sigma.data()[idx];
            diff2 += d * d;
            base2 += sigma.data()[idx] * sigma.data()[idx];
        }
        sigma = next;
        iterations = it;
        last_rel_change = std::sqrt(diff2) / std::sqrt(base2);
        if (last_rel_change <= tol) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw ConvergenceFailure("tyler: no convergence in " + std::to_string(max_iter) +
                                     " iterations",
                                 iterations, last_rel_change);
    return sigma;
}

} // namespace detail

// Fits one of the five scatter estimators. The center defaults to the spatial
// median (sample mean for the sample covariance). Rows equal to the center
// have zero spatial sign; they are dropped from sign-based sums and counted.
inline ScatterFit fit_scatter(EstimatorKind kind, const Matrix& data,
                              const ScatterOptions& opts = {}) {
    const std::size_t n = data.rows(), p = data.cols();
    if (n < 2 || p < 1) throw DegenerateData("fit_scatter: need at least 2 rows");
    if (!all_finite(data)) throw InvalidInput("fit_scatter: non-finite data");
    if (kind.is_tyler() && n <= p)
        throw DegenerateData("fit_scatter: Tyler-type estimators need n > p");

    ScatterFit fit;
    fit.kind = kind;
    fit.center = opts.center ? *opts.center
                             : (kind.tag == EstimatorKind::Tag::SampleCov
                                    ? detail::column_mean(data)
                                    : spatial_median(data).value);
    if (fit.center.size() != p) throw InvalidInput("fit_scatter: center dimension mismatch");

    // rows with nonzero spatial sign
    std::vector<std::size_t> rows;
    rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (detail::is_zero_diff(data.row(i), fit.center))
            ++fit.dropped_rows;
        else
            rows.push_back(i);
    }

    // htped^2 weights for the depth-carrying estimators
    if (kind.uses_depth()) {
        std::optional<DepthModel> own;
        const DepthModel* dm = opts.depth_model;
        if (dm == nullptr) {
            own = DepthModel::fit(kind.depth, data, Rng::derive(opts.seed, 0xD3117),
                                  opts.n_projections);
            dm = &*own;
        }
        if (dm->dimension() != p) throw InvalidInput("fit_scatter: depth model dimension");
        fit.weights.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double h = dm->htped_at(data.row(i));
            fit.weights[i] = h * h;
        }
    }

    switch (kind.tag) {
        case EstimatorKind::Tag::SampleCov: {
            Matrix m(p, p);
            Vec u(p);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < p; ++j) u[j] = data(i, j) - fit.center[j];
                for (std::size_t a = 0; a < p; ++a)
                    for (std::size_t b = a; b < p; ++b) m(a, b) += u[a] * u[b];
            }
            for (std::size_t a = 0; a < p; ++a)
                for (std::size_t b = a; b < p; ++b)
                    m(b, a) = m(a, b) = m(a, b) / static_cast<double>(n - 1);
            fit.matrix = std::move(m);
            fit.dropped_rows = 0; // the mean-centered sum keeps every row
            break;
        }
        case EstimatorKind::Tag::SCM:
        case EstimatorKind::Tag::DCM: {
            Matrix m(p, p);
            for (std::size_t i : rows) {
                const Vec s = spatial_sign(data.row(i), fit.center);
                const double w =
                    kind.tag == EstimatorKind::Tag::DCM ? fit.weights[i] : 1.0;
                for (std::size_t a = 0; a < p; ++a)
                    for (std::size_t b = a; b < p; ++b) m(a, b) += w * s[a] * s[b];
            }
            for (std::size_t a = 0; a < p; ++a)
                for (std::size_t b = a; b < p; ++b)
                    m(b, a) = m(a, b) = m(a, b) / static_cast<double>(n);
            fit.matrix = std::move(m);
            break;
        }
        case EstimatorKind::Tag::Tyler:
        case EstimatorKind::Tag::DepthWeightedTyler: {
            fit.matrix = detail::tyler_iterate(data, fit.center, fit.weights, rows,
                                               opts.tyler_tol, opts.tyler_max_iter,
                                               fit.iterations, fit.converged);
            break;
        }
    }
    fit.decomp = eigh(fit.matrix);
    return fit;
}

// Frobenius norm of (RHS(fit.matrix) - fit.matrix), RHS being the defining
// fixed-point right side evaluated on the data. Converged fits satisfy
// residual <= 1e-6 * p.
inline double tyler_residual(const ScatterFit& fit, const Matrix& data) {
    if (!fit.kind.is_tyler()) throw InvalidInput("tyler_residual: not a Tyler-type fit");
    const std::size_t n = data.rows(), p = data.cols();
    if (fit.center.size() != p) throw InvalidInput("tyler_residual: dimension mismatch");
    const bool weighted = fit.kind.tag == EstimatorKind::Tag::DepthWeightedTyler;
    if (weighted && fit.weights.size() != n)
        throw InvalidInput("tyler_residual: missing htped weights");

    const Matrix l = cholesky(fit.matrix);
    Matrix rhs(p, p);
    Vec u(p);
    double weight_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (detail::is_zero_diff(data.row(i), fit.center)) continue;
        for (std::size_t j = 0; j < p; ++j) u[j] = data(i, j) - fit.center[j];
        const double d = quadform_inv(l, u);
        const double w = weighted ? fit.weights[i] : 1.0;
        weight_sum += w;
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = a; b < p; ++b) rhs(a, b) += w * u[a] * u[b] / d;
    }
    const double scale = static_cast<double>(p) / weight_sum;
    double diff2 = 0.0;
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < p; ++b) {
            const double r = (b >= a ? rhs(a, b) : rhs(b, a)) * scale - fit.matrix(a, b);
            diff2 += r * r;
        }
    return std::sqrt(diff2);
}

// Diagonal of Lambda_{D,S} for a population model: the Monte Carlo estimate
// of E[ htped(||z||)^2 * lambda_i z_i^2 / (z^T Lambda z) ] with z ~ N(0, I_p)
// and the htped of the model's whitened law.
inline Vec lambda_ds_population(const EllipticalModel& model, DepthKind depth,
                                std::size_t mc_n, std::uint64_t seed) {
    model.validate();
    if (mc_n < 10000) throw InvalidInput("lambda_ds_population: mc_n must be >= 1e4");
    const std::size_t p = model.dim();
    const Vec lam = eigh(model.sigma).eigenvalues;
    const RadialHtped htped(depth, model.family, model.df);
    const McMoments m = mc_normal_expect(
        p, mc_n, seed, p, [&](std::span<const double> z, std::span<double> out) {
            double q = 0.0, r2 = 0.0;
            for (std::size_t j = 0; j < p; ++j) {
                const double zj2 = z[j] * z[j];
                q += lam[j] * zj2;
                r2 += zj2;
            }
            const double h = htped(std::sqrt(r2));
            const double w = h * h / q;
            for (std::size_t j = 0; j < p; ++j) out[j] = w * lam[j] * z[j] * z[j];
        });
    return m.mean;
}

struct ShapeEigenvalues {
    Vec values;
    int iterations = 0;
    bool converged = false;
};

// Iterative recovery of the determinant-one shape eigenvalues Lambda* from
// the DCM eigenvalues Lambda_{D,S}:
//   Lambda*(k+1) = [ E_z( htped^2 z z^T / (z^T Lambda*(k) z) ) ]^{-1} Lambda_{D,S}
// followed by det-standardization. The expectation uses one fixed seeded
// Monte Carlo panel across iterations, so the map is deterministic and a
// fixed point stays fixed under re-application.
inline ShapeEigenvalues recover_shape(const Vec& lambda_ds, const EllipticalModel& model,
                                      DepthKind depth, std::size_t mc_n, double tol,
                                      int max_iter, std::uint64_t seed) {
    const std::size_t p = lambda_ds.size();
    if (p < 1) throw InvalidInput("recover_shape: empty eigenvalues");
    if (mc_n < 10000) throw InvalidInput("recover_shape: mc_n must be >= 1e4");
    for (std::size_t i = 0; i < p; ++i) {
        if (!(lambda_ds[i] > 0.0)) throw InvalidInput("recover_shape: eigenvalues must be positive");
        if (i > 0 && lambda_ds[i] > lambda_ds[i - 1])
            throw InvalidInput("recover_shape: eigenvalues must be descending");
    }
    const RadialHtped htped(depth, model.family, model.df);

    // fixed panel: per-draw squared coordinates and htped^2 weights
    Matrix z2(mc_n, p);
    Vec w(mc_n);
    parallel_for((mc_n + kMcBatchSize - 1) / kMcBatchSize, [&](std::size_t b0, std::size_t b1) {
        Vec z(p);
        for (std::size_t b = b0; b < b1; ++b) {
            Rng rng(Rng::derive(seed, b));
            const std::size_t lo = b * kMcBatchSize;
            const std::size_t hi = std::min(mc_n, lo + kMcBatchSize);
            for (std::size_t i = lo; i < hi; ++i) {
                rng.normal_fill(z);
                double r2 = 0.0;
                for (std::size_t j = 0; j < p; ++j) {
                    z2(i, j) = z[j] * z[j];
                    r2 += z2(i, j);
                }
                const double h = htped(std::sqrt(r2));
                w[i] = h * h;
            }
        }
    });

    auto standardize = [&](Vec& v) {
        double logdet = 0.0;
        for (double x : v) logdet += std::log(x);
        const double scale = std::exp(-logdet / static_cast<double>(p));
        for (double& x : v) x *= scale;
    };

    ShapeEigenvalues out;
    out.values = lambda_ds;
    standardize(out.values);

    Vec denom(p), next(p);
    for (int it = 1; it <= max_iter; ++it) {
        std::fill(denom.begin(), denom.end(), 0.0);
        for (std::size_t i = 0; i < mc_n; ++i) {
            double q = 0.0;
            for (std::size_t j = 0; j < p; ++j) q += out.values[j] * z2(i, j);
            const double f = w[i] / q;
            for (std::size_t j = 0; j < p; ++j) denom[j] += f * z2(i, j);
        }
        for (std::size_t j = 0; j < p; ++j) next[j] = lambda_ds[j] * mc_n / denom[j];
        standardize(next);
        double rel = 0.0;
        for (std::size_t j = 0; j < p; ++j)
            rel = std::max(rel, std::abs(next[j] - out.values[j]) / out.values[j]);
        out.values = next;
        out.iterations = it;
        if (rel <= tol) {
            out.converged = true;
            break;
        }
    }
    return out;
}

} // namespace depthpca
