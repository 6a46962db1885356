#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "depthpca/depth.hpp"
#include "depthpca/errors.hpp"
#include "depthpca/linalg.hpp"
#include "depthpca/mc.hpp"
#include "depthpca/scatter.hpp"

namespace depthpca {

namespace detail {

inline void check_distinct(const Vec& lam, const char* what) {
    double scale = 0.0;
    for (double l : lam) scale = std::max(scale, std::abs(l));
    for (std::size_t i = 0; i + 1 < lam.size(); ++i)
        if (std::abs(lam[i] - lam[i + 1]) <= 1e-10 * std::max(scale, 1e-300))
            throw DegenerateModel(std::string(what) + ": tied eigenvalues");
}

// excess-kurtosis factor 1+kappa of the elliptical family; scales the sample
// covariance eigenvector limit (equal to 1 at the normal, (nu-2)/(nu-4) for t)
inline double kurtosis_factor(const EllipticalModel& model) {
    if (model.family == Family::Normal) return 1.0;
    if (model.df <= 4)
        throw DegenerateModel("kurtosis factor: t with df <= 4 has no fourth moments");
    return (model.df - 2.0) / (model.df - 4.0);
}

} // namespace detail

struct IfRequest {
    EstimatorKind estimator;
    EllipticalModel model;
    int eigen_index = 1; // 1-based
    Vec x0;
};

// Closed-form influence functions of eigenvector functionals at elliptical
// models, for the sample covariance, SCM, Tyler's matrix and the DCM. The
// constructor runs the Monte Carlo needed for the scale constants
// (lambda_{D,S} for the DCM, lambda_S for the SCM); evaluation is then cheap,
// which is what the grid command wants.
class InfluenceEvaluator {
public:
    InfluenceEvaluator(EstimatorKind est, const EllipticalModel& model, std::size_t mc_n,
                       std::uint64_t seed)
        : est_(est), model_(model) {
        model_.validate();
        if (est.tag == EstimatorKind::Tag::DepthWeightedTyler)
            throw InvalidInput("influence function: no closed form for depth-weighted Tyler");
        sd_ = eigh(model_.sigma);
        detail::check_distinct(sd_.eigenvalues, "influence function");
        const std::size_t p = model_.dim();
        switch (est.tag) {
            case EstimatorKind::Tag::DCM: {
                htped_.emplace(est.depth, model_.family, model_.df);
                lam_scale_ = lambda_ds_population(model_, est.depth, mc_n, seed);
                break;
            }
            case EstimatorKind::Tag::SCM: {
                const Vec& lam = sd_.eigenvalues;
                lam_scale_ = mc_normal_expect(
                                 p, mc_n, seed, p,
                                 [&](std::span<const double> z, std::span<double> out) {
                                     double q = 0.0;
                                     for (std::size_t j = 0; j < p; ++j)
                                         q += lam[j] * z[j] * z[j];
                                     for (std::size_t j = 0; j < p; ++j)
                                         out[j] = lam[j] * z[j] * z[j] / q;
                                 })
                                 .mean;
                break;
            }
            default:
                lam_scale_ = sd_.eigenvalues;
                break;
        }
        detail::check_distinct(lam_scale_, "influence function scale");
    }

    // IF of the i-th eigenvector functional at x0; lies in span{gamma_k, k != i}.
    Vec eigvec_if(int eigen_index, std::span<const double> x0) const {
        const std::size_t p = model_.dim();
        if (x0.size() != p) throw InvalidInput("influence function: dimension mismatch");
        if (eigen_index < 1 || static_cast<std::size_t>(eigen_index) > p)
            throw InvalidInput("influence function: eigen index out of range");
        const std::size_t i = static_cast<std::size_t>(eigen_index - 1);
        const Vec& lam = sd_.eigenvalues;

        Vec z0(p);
        double norm_diff = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            double c = 0.0;
            for (std::size_t a = 0; a < p; ++a) c += sd_.eigenvectors(a, j) * (x0[a] - model_.mu[a]);
            z0[j] = c / std::sqrt(lam[j]);
            norm_diff += c * c;
        }
        Vec out(p, 0.0);
        if (norm_diff == 0.0) return out; // the symmetry center has no influence

        double q0 = 0.0, r2 = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            q0 += lam[j] * z0[j] * z0[j];
            r2 += z0[j] * z0[j];
        }
        for (std::size_t k = 0; k < p; ++k) {
            if (k == i) continue;
            const double root = std::sqrt(lam[i] * lam[k]);
            double coef = 0.0;
            switch (est_.tag) {
                case EstimatorKind::Tag::DCM: {
                    const double h = (*htped_)(std::sqrt(r2));
                    coef = root * z0[i] * z0[k] / (lam_scale_[i] - lam_scale_[k]) * h * h / q0;
                    break;
                }
                case EstimatorKind::Tag::SCM:
                    coef = root / (lam_scale_[i] - lam_scale_[k]) * z0[i] * z0[k] / q0;
                    break;
                case EstimatorKind::Tag::Tyler:
                    coef = (p + 2.0) * root / (lam[i] - lam[k]) * z0[i] * z0[k] / r2;
                    break;
                case EstimatorKind::Tag::SampleCov:
                    // replaces (p+2) by ||z0||^2 in the Tyler form; unbounded
                    coef = root / (lam[i] - lam[k]) * z0[i] * z0[k];
                    break;
                default:
                    break;
            }
            for (std::size_t a = 0; a < p; ++a) out[a] += coef * sd_.eigenvectors(a, k);
        }
        return out;
    }

    double if_norm(int eigen_index, std::span<const double> x0) const {
        return norm2(eigvec_if(eigen_index, x0));
    }

    const Vec& lambda_scale() const { return lam_scale_; }
    const SpectralDecomp& sigma_decomp() const { return sd_; }

private:
    EstimatorKind est_;
    EllipticalModel model_;
    SpectralDecomp sd_;
    Vec lam_scale_;
    std::optional<RadialHtped> htped_;
};

inline Vec influence_eigvec(const IfRequest& req, std::size_t mc_n, std::uint64_t seed) {
    return InfluenceEvaluator(req.estimator, req.model, mc_n, seed)
        .eigvec_if(req.eigen_index, req.x0);
}

struct InfluenceGrid {
    Vec xs, ys;
    Matrix norms;               // ys.size() rows, xs.size() cols
    bool boundary_growth = false; // boundary-ring max exceeds interior max
};

inline InfluenceGrid influence_grid(EstimatorKind est, const EllipticalModel& model,
                                    int eigen_index, double x_min, double x_max, double y_min,
                                    double y_max, std::size_t resolution, std::size_t mc_n,
                                    std::uint64_t seed) {
    if (model.dim() != 2) throw InvalidInput("influence_grid: model must be bivariate");
    if (resolution < 3) throw InvalidInput("influence_grid: resolution must be >= 3");
    const InfluenceEvaluator ev(est, model, mc_n, seed);
    InfluenceGrid g;
    g.xs.resize(resolution);
    g.ys.resize(resolution);
    for (std::size_t i = 0; i < resolution; ++i) {
        g.xs[i] = x_min + (x_max - x_min) * static_cast<double>(i) / (resolution - 1.0);
        g.ys[i] = y_min + (y_max - y_min) * static_cast<double>(i) / (resolution - 1.0);
    }
    g.norms = Matrix(resolution, resolution);
    for (std::size_t r = 0; r < resolution; ++r)
        for (std::size_t c = 0; c < resolution; ++c) {
            const Vec x0{g.xs[c], g.ys[r]};
            g.norms(r, c) = ev.if_norm(eigen_index, x0);
        }
    double boundary_max = 0.0, interior_max = 0.0;
    for (std::size_t r = 0; r < resolution; ++r)
        for (std::size_t c = 0; c < resolution; ++c) {
            const bool boundary =
                r == 0 || c == 0 || r + 1 == resolution || c + 1 == resolution;
            double& slot = boundary ? boundary_max : interior_max;
            slot = std::max(slot, g.norms(r, c));
        }
    g.boundary_growth = boundary_max > interior_max;
    return g;
}

// Element types of the limiting covariance V_{D,S}(F_Lambda) of the sample
// DCM, assembled from the fourth-moment matrix
//   gamma4[a][b] = E[ htped^4 lambda_a lambda_b z_a^2 z_b^2 / (z^T Lambda z)^2 ].
// Off/off and off/on covariances vanish by circular symmetry and are pinned
// to exact zeros.
struct VdsElements {
    Vec var_diag;         // Var of on-diagonal elements
    Matrix var_offdiag;   // Var of off-diagonal elements (a != b)
    Matrix cov_diag_pairs;// Cov of two on-diagonal elements (a != b)
    Matrix gamma4;
    Vec lambda_ds;
    std::size_t mc_n = 0;
};

inline VdsElements vds_elements(const EllipticalModel& model, DepthKind depth,
                                std::size_t mc_n, std::uint64_t seed) {
    model.validate();
    if (mc_n < 100000) throw InvalidInput("vds_elements: mc_n must be >= 1e5");
    const std::size_t p = model.dim();
    const Vec lam = eigh(model.sigma).eigenvalues;
    const RadialHtped htped(depth, model.family, model.df);

    const std::size_t pairs = p * (p + 1) / 2;
    const McMoments m = mc_normal_expect(
        p, mc_n, seed, p + pairs, [&](std::span<const double> z, std::span<double> out) {
            double q = 0.0, r2 = 0.0;
            for (std::size_t j = 0; j < p; ++j) {
                const double zj2 = z[j] * z[j];
                q += lam[j] * zj2;
                r2 += zj2;
            }
            const double h = htped(std::sqrt(r2));
            const double h2 = h * h, h4 = h2 * h2;
            for (std::size_t j = 0; j < p; ++j) out[j] = h2 * lam[j] * z[j] * z[j] / q;
            std::size_t idx = p;
            for (std::size_t a = 0; a < p; ++a)
                for (std::size_t b = a; b < p; ++b)
                    out[idx++] = h4 * lam[a] * lam[b] * z[a] * z[a] * z[b] * z[b] / (q * q);
        });

    VdsElements v;
    v.mc_n = mc_n;
    v.lambda_ds.assign(m.mean.begin(), m.mean.begin() + p);
    v.gamma4 = Matrix(p, p);
    std::size_t idx = p;
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = a; b < p; ++b) {
            v.gamma4(a, b) = v.gamma4(b, a) = m.mean[idx++];
        }
    v.var_diag.resize(p);
    v.var_offdiag = Matrix(p, p);
    v.cov_diag_pairs = Matrix(p, p);
    for (std::size_t a = 0; a < p; ++a) {
        v.var_diag[a] = v.gamma4(a, a) - v.lambda_ds[a] * v.lambda_ds[a];
        for (std::size_t b = 0; b < p; ++b) {
            if (a == b) continue;
            v.var_offdiag(a, b) = v.gamma4(a, b);
            v.cov_diag_pairs(a, b) = v.gamma4(a, b) - v.lambda_ds[a] * v.lambda_ds[b];
        }
    }
    return v;
}

// Limiting variances of the sample DCM eigenvectors and eigenvalues:
//   Tr AVar(g_i)  = sum_{k != i} gamma4[i][k] / (lambda_{D,S,k}-lambda_{D,S,i})^2
//   ACov(g_i,g_j) = -gamma4[i][j] / (lambda_{D,S,i}-lambda_{D,S,j})^2 * gamma_j gamma_i^T
//   AVar(l_i)     = gamma4[i][i] - lambda_{D,S,i}^2
//   ACov(l_i,l_j) = gamma4[i][j] - lambda_{D,S,i} lambda_{D,S,j}
struct EigenLimits {
    Vec avar_trace;
    Matrix acov_coeff;
    Vec eigval_avar;
    Matrix eigval_acov;
    Vec lambda_ds;
};

inline EigenLimits eigvec_avar(const EllipticalModel& model, DepthKind depth, std::size_t mc_n,
                               std::uint64_t seed) {
    const VdsElements v = vds_elements(model, depth, mc_n, seed);
    const std::size_t p = model.dim();
    detail::check_distinct(v.lambda_ds, "eigvec_avar");
    EigenLimits e;
    e.lambda_ds = v.lambda_ds;
    e.avar_trace.assign(p, 0.0);
    e.acov_coeff = Matrix(p, p);
    e.eigval_avar.resize(p);
    e.eigval_acov = Matrix(p, p);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t k = 0; k < p; ++k) {
            if (k == i) continue;
            const double gap = v.lambda_ds[k] - v.lambda_ds[i];
            e.avar_trace[i] += v.gamma4(i, k) / (gap * gap);
            e.acov_coeff(i, k) = -v.gamma4(i, k) / (gap * gap);
            e.eigval_acov(i, k) = v.gamma4(i, k) - v.lambda_ds[i] * v.lambda_ds[k];
        }
        e.eigval_avar[i] = v.gamma4(i, i) - v.lambda_ds[i] * v.lambda_ds[i];
        e.eigval_acov(i, i) = e.eigval_avar[i];
    }
    return e;
}

struct AreResult {
    double value = 0.0;
    double mc_std_error = 0.0;
    double numerator = 0.0;   // Tr AVar of the sample-covariance eigenvector
    double denominator = 0.0; // Tr AVar of the competing estimator's eigenvector
};

namespace detail {

inline double anderson_trace(const Vec& lam, std::size_t i) {
    double s = 0.0;
    for (std::size_t k = 0; k < lam.size(); ++k) {
        if (k == i) continue;
        const double gap = lam[i] - lam[k];
        s += lam[i] * lam[k] / (gap * gap);
    }
    return s;
}

} // namespace detail

// ARE of the i-th eigenvector of an estimator against the sample covariance:
// the ratio of asymptotic variance traces. The covariance baseline carries
// the family's kurtosis factor; Tyler's limit is family-free and closed-form.
// General p uses the trace-ratio; see are_eigvec for the bivariate shortcut.
inline AreResult are_eigvec_trace(const EllipticalModel& model, EstimatorKind est,
                                  int eigen_index, std::size_t mc_n, std::uint64_t seed) {
    model.validate();
    const std::size_t p = model.dim();
    if (eigen_index < 1 || static_cast<std::size_t>(eigen_index) > p)
        throw InvalidInput("are_eigvec: eigen index out of range");
    const std::size_t i = static_cast<std::size_t>(eigen_index - 1);
    const Vec lam = eigh(model.sigma).eigenvalues;
    detail::check_distinct(lam, "are_eigvec");
    const double kurt = detail::kurtosis_factor(model);
    const double base = detail::anderson_trace(lam, i);

    AreResult out;
    out.numerator = kurt * base;
    switch (est.tag) {
        case EstimatorKind::Tag::SampleCov:
            out.denominator = out.numerator;
            out.value = 1.0;
            return out;
        case EstimatorKind::Tag::Tyler:
            out.denominator = (p + 2.0) / static_cast<double>(p) * base;
            out.value = out.numerator / out.denominator;
            return out;
        case EstimatorKind::Tag::DepthWeightedTyler:
            throw InvalidInput("are_eigvec: no closed-form limit for depth-weighted Tyler");
        default:
            break;
    }

    // SCM is the htped == 1 special case of the DCM formulas
    std::optional<RadialHtped> htped;
    if (est.tag == EstimatorKind::Tag::DCM)
        htped.emplace(est.depth, model.family, model.df);

    // moment streams: lambda_scale (p entries), then gamma4[i][k] for k != i
    const McMoments m = mc_normal_expect(
        p, mc_n, seed, 2 * p - 1, [&](std::span<const double> z, std::span<double> out_v) {
            double q = 0.0, r2 = 0.0;
            for (std::size_t j = 0; j < p; ++j) {
                const double zj2 = z[j] * z[j];
                q += lam[j] * zj2;
                r2 += zj2;
            }
            const double h = htped ? (*htped)(std::sqrt(r2)) : 1.0;
            const double h2 = h * h, h4 = h2 * h2;
            for (std::size_t j = 0; j < p; ++j) out_v[j] = h2 * lam[j] * z[j] * z[j] / q;
            std::size_t idx = p;
            for (std::size_t k = 0; k < p; ++k) {
                if (k == i) continue;
                out_v[idx++] = h4 * lam[i] * lam[k] * z[i] * z[i] * z[k] * z[k] / (q * q);
            }
        });

    auto denominator_of = [&](const Vec& mom) {
        double denom = 0.0;
        std::size_t idx = p;
        for (std::size_t k = 0; k < p; ++k) {
            if (k == i) continue;
            const double gap = mom[k] - mom[i];
            denom += mom[idx++] / (gap * gap);
        }
        return denom;
    };

    Vec lam_scale(m.mean.begin(), m.mean.begin() + p);
    detail::check_distinct(lam_scale, "are_eigvec scale");
    out.denominator = denominator_of(m.mean);
    out.value = out.numerator / out.denominator;
    out.mc_std_error =
        mc_jackknife_se(m, [&](const Vec& mom) { return out.numerator / denominator_of(mom); });
    return out;
}

// Bivariate closed form with eigenvalues (lambda, rho*lambda):
//   ARE = kurt * [E(htped^2 (z1^2 - rho z2^2)/(z1^2 + rho z2^2))]^2
//         / ((1-rho)^2 E[htped^4 z1^2 z2^2/(z1^2 + rho z2^2)^2])
inline AreResult are_eigvec(const EllipticalModel& model, EstimatorKind est, int eigen_index,
                            std::size_t mc_n, std::uint64_t seed) {
    model.validate();
    if (model.dim() != 2 || est.tag == EstimatorKind::Tag::SampleCov ||
        est.tag == EstimatorKind::Tag::Tyler)
        return are_eigvec_trace(model, est, eigen_index, mc_n, seed);
    if (est.tag == EstimatorKind::Tag::DepthWeightedTyler)
        throw InvalidInput("are_eigvec: no closed-form limit for depth-weighted Tyler");
    if (eigen_index < 1 || eigen_index > 2)
        throw InvalidInput("are_eigvec: eigen index out of range");
    // in two dimensions both eigenvectors share the same efficiency

    const Vec lam = eigh(model.sigma).eigenvalues;
    detail::check_distinct(lam, "are_eigvec");
    const double rho = lam[1] / lam[0];
    const double kurt = detail::kurtosis_factor(model);
    std::optional<RadialHtped> htped;
    if (est.tag == EstimatorKind::Tag::DCM)
        htped.emplace(est.depth, model.family, model.df);

    const McMoments m = mc_normal_expect(
        2, mc_n, seed, 2, [&](std::span<const double> z, std::span<double> out_v) {
            const double z1s = z[0] * z[0], z2s = z[1] * z[1];
            const double q = z1s + rho * z2s;
            const double h = htped ? (*htped)(std::sqrt(z1s + z2s)) : 1.0;
            const double h2 = h * h;
            out_v[0] = h2 * (z1s - rho * z2s) / q;
            out_v[1] = h2 * h2 * z1s * z2s / (q * q);
        });

    auto value_of = [&](const Vec& mom) {
        return kurt * mom[0] * mom[0] / ((1.0 - rho) * (1.0 - rho) * mom[1]);
    };
    AreResult out;
    out.numerator = kurt * m.mean[0] * m.mean[0];
    out.denominator = (1.0 - rho) * (1.0 - rho) * m.mean[1];
    out.value = value_of(m.mean);
    out.mc_std_error = mc_jackknife_se(m, value_of);
    return out;
}

} // namespace depthpca
