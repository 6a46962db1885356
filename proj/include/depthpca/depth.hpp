#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "depthpca/errors.hpp"
#include "depthpca/linalg.hpp"
#include "depthpca/rng.hpp"
#include "depthpca/special.hpp"

namespace depthpca {

enum class DepthKind { Halfspace, Mahalanobis, Projection };

inline double max_depth_of(DepthKind kind) {
    return kind == DepthKind::Halfspace ? 0.5 : 1.0;
}

inline std::string depth_kind_name(DepthKind kind) {
    switch (kind) {
        case DepthKind::Halfspace: return "halfspace";
        case DepthKind::Mahalanobis: return "mahalanobis";
        case DepthKind::Projection: return "projection";
    }
    return "?";
}

inline DepthKind parse_depth_kind(const std::string& s) {
    if (s == "halfspace") return DepthKind::Halfspace;
    if (s == "mahalanobis") return DepthKind::Mahalanobis;
    if (s == "projection") return DepthKind::Projection;
    throw InvalidInput("unknown depth kind: " + s);
}

enum class Family { Normal, StudentT };

// Generative elliptical model; sigma is the covariance matrix, so StudentT
// requires df >= 3 for it to exist.
struct EllipticalModel {
    Family family = Family::Normal;
    int df = 0;
    Vec mu;
    Matrix sigma;

    std::size_t dim() const { return mu.size(); }

    void validate() const {
        if (mu.empty() || sigma.rows() != mu.size() || sigma.cols() != mu.size())
            throw InvalidInput("elliptical model: mu/sigma dimension mismatch");
        if (family == Family::StudentT && df < 3)
            throw InvalidInput("elliptical model: StudentT needs df >= 3");
        check_symmetric(sigma, "elliptical model");
    }
};

inline EllipticalModel make_normal_model(Vec mu, Matrix sigma) {
    EllipticalModel m{Family::Normal, 0, std::move(mu), std::move(sigma)};
    m.validate();
    return m;
}

inline EllipticalModel make_student_t_model(int df, Vec mu, Matrix sigma) {
    EllipticalModel m{Family::StudentT, df, std::move(mu), std::move(sigma)};
    m.validate();
    return m;
}

// Population depth of the whitened (spherical, covariance-identity) law as a
// function of the Mahalanobis radius d:
//   Mahalanobis  1/(1+d^2)
//   Halfspace    G(-d), G the CDF of the unit-variance univariate marginal
//   Projection   1/(1+d/q), q the MAD of that marginal
// Every population expectation in the package is a radial integral through
// this functor.
class RadialHtped {
public:
    RadialHtped(DepthKind kind, Family family, int df)
        : kind_(kind), family_(family), df_(df), max_depth_(max_depth_of(kind)) {
        if (family_ == Family::StudentT && df_ < 3)
            throw InvalidInput("RadialHtped: StudentT needs df >= 3");
        if (kind_ == DepthKind::Projection) {
            if (family_ == Family::Normal) {
                q_ = std_normal_quantile(0.75);
            } else {
                const double s = std::sqrt((df_ - 2.0) / df_);
                q_ = s * student_t_quantile(0.75, df_);
            }
        }
        if (family_ == Family::StudentT) t_scale_ = std::sqrt(df_ / (df_ - 2.0));
    }

    double depth(double d) const {
        switch (kind_) {
            case DepthKind::Mahalanobis:
                return 1.0 / (1.0 + d * d);
            case DepthKind::Halfspace:
                return family_ == Family::Normal ? normal_cdf(-d)
                                                 : student_t_cdf(-d * t_scale_, df_);
            case DepthKind::Projection:
                return 1.0 / (1.0 + d / q_);
        }
        return 0.0;
    }

    double operator()(double d) const { return max_depth_ - depth(d); }
    double max_depth() const { return max_depth_; }

private:
    DepthKind kind_;
    Family family_;
    int df_;
    double max_depth_;
    double q_ = 0.0;
    double t_scale_ = 1.0;
};

namespace detail {

inline Vec column_median(const Matrix& data) {
    Vec med(data.cols());
    Vec buf(data.rows());
    for (std::size_t j = 0; j < data.cols(); ++j) {
        for (std::size_t i = 0; i < data.rows(); ++i) buf[i] = data(i, j);
        std::sort(buf.begin(), buf.end());
        const std::size_t n = buf.size();
        med[j] = (n % 2 == 1) ? buf[n / 2] : 0.5 * (buf[n / 2 - 1] + buf[n / 2]);
    }
    return med;
}

inline double median_inplace(Vec& v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Direction set shared by sample projection depth and sample halfspace depth
// in p >= 3: seeded random unit vectors, the 2p signed axes, and the
// data-driven directions x_i - colmedian.
inline Matrix make_direction_set(const Matrix& data, std::uint64_t seed,
                                 std::size_t n_projections) {
    const std::size_t p = data.cols();
    std::vector<Vec> dirs;
    dirs.reserve(n_projections + 2 * p + data.rows());
    Rng rng(seed);
    Vec u(p);
    for (std::size_t k = 0; k < n_projections; ++k) {
        double nrm = 0.0;
        do {
            rng.normal_fill(u);
            nrm = norm2(u);
        } while (nrm < 1e-12);
        Vec d(p);
        for (std::size_t j = 0; j < p; ++j) d[j] = u[j] / nrm;
        dirs.push_back(std::move(d));
    }
    for (std::size_t j = 0; j < p; ++j) {
        Vec d(p, 0.0);
        d[j] = 1.0;
        dirs.push_back(d);
        d[j] = -1.0;
        dirs.push_back(d);
    }
    const Vec med = column_median(data);
    for (std::size_t i = 0; i < data.rows(); ++i) {
        Vec d(p);
        for (std::size_t j = 0; j < p; ++j) d[j] = data(i, j) - med[j];
        const double nrm = norm2(d);
        if (nrm < 1e-12) continue;
        for (std::size_t j = 0; j < p; ++j) d[j] /= nrm;
        dirs.push_back(std::move(d));
    }
    Matrix out(dirs.size(), p);
    for (std::size_t i = 0; i < dirs.size(); ++i)
        for (std::size_t j = 0; j < p; ++j) out(i, j) = dirs[i][j];
    return out;
}

// Exact bivariate halfspace depth by an angular sweep. The minimum count of a
// closed halfplane through x equals k minus the maximum count of an open
// pi-arc, and the maximum is attained strictly between consecutive event
// angles {theta_i, theta_i - pi}; evaluating at arc midpoints is exact.
inline double halfspace_depth_2d(const Matrix& data, std::span<const double> x) {
    const std::size_t n = data.rows();
    std::size_t coincident = 0;
    std::vector<double> theta;
    theta.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double vx = data(i, 0) - x[0];
        const double vy = data(i, 1) - x[1];
        if (vx == 0.0 && vy == 0.0)
            ++coincident;
        else
            theta.push_back(std::atan2(vy, vx));
    }
    const std::size_t k = theta.size();
    if (k == 0) return static_cast<double>(coincident) / static_cast<double>(n);
    std::sort(theta.begin(), theta.end());

    const double pi = 3.14159265358979323846;
    std::vector<double> events;
    events.reserve(2 * k);
    for (double t : theta) {
        events.push_back(t);
        double e = t - pi;
        if (e < -pi) e += 2.0 * pi;
        events.push_back(e);
    }
    std::sort(events.begin(), events.end());
    events.erase(std::unique(events.begin(), events.end()), events.end());

    // #{theta strictly inside (lo, lo+pi)} with wraparound
    auto count_open = [&](double lo) -> std::size_t {
        const double hi = lo + pi;
        if (hi <= pi) {
            return static_cast<std::size_t>(
                std::lower_bound(theta.begin(), theta.end(), hi) -
                std::upper_bound(theta.begin(), theta.end(), lo));
        }
        const double hi_wrapped = hi - 2.0 * pi;
        const auto above_lo = theta.end() - std::upper_bound(theta.begin(), theta.end(), lo);
        const auto below_hi =
            std::lower_bound(theta.begin(), theta.end(), hi_wrapped) - theta.begin();
        return static_cast<std::size_t>(above_lo) + static_cast<std::size_t>(below_hi);
    };

    std::size_t best_open = 0;
    const std::size_t m = events.size();
    for (std::size_t i = 0; i < m; ++i) {
        double a = events[i];
        double b = (i + 1 < m) ? events[i + 1] : events[0] + 2.0 * pi;
        double mid = 0.5 * (a + b);
        if (mid > pi) mid -= 2.0 * pi;
        best_open = std::max(best_open, count_open(mid));
    }
    const std::size_t min_closed = k - best_open;
    return static_cast<double>(coincident + min_closed) / static_cast<double>(n);
}

} // namespace detail

// A fitted depth evaluator: either sample-based (empirical distribution) or a
// population elliptical closed form. Immutable after construction; depth_at
// and htped_at are safe to call concurrently.
class DepthModel {
public:
    static DepthModel fit(DepthKind kind, const Matrix& data, std::uint64_t seed,
                          std::size_t n_projections = 500) {
        const std::size_t n = data.rows(), p = data.cols();
        if (n < 2 || p < 1) throw DegenerateData("fit_depth: need at least 2 rows");
        if (!all_finite(data)) throw InvalidInput("fit_depth: non-finite data");
        DepthModel m;
        m.kind_ = kind;
        m.dim_ = p;
        m.max_depth_ = max_depth_of(kind);
        m.seed_ = seed;
        switch (kind) {
            case DepthKind::Mahalanobis: {
                if (n < p + 1) throw DegenerateData("fit_depth: Mahalanobis needs n >= p+1");
                m.mh_center_.assign(p, 0.0);
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < p; ++j) m.mh_center_[j] += data(i, j);
                for (double& c : m.mh_center_) c /= static_cast<double>(n);
                Matrix cov(p, p);
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t a = 0; a < p; ++a) {
                        const double da = data(i, a) - m.mh_center_[a];
                        for (std::size_t b = a; b < p; ++b)
                            cov(a, b) += da * (data(i, b) - m.mh_center_[b]);
                    }
                for (std::size_t a = 0; a < p; ++a)
                    for (std::size_t b = a; b < p; ++b)
                        cov(b, a) = cov(a, b) = cov(a, b) / static_cast<double>(n - 1);
                try {
                    m.mh_cov_chol_ = cholesky(cov);
                } catch (const NotPositiveDefinite&) {
                    throw DegenerateData("fit_depth: rank-deficient data for Mahalanobis depth");
                }
                break;
            }
            case DepthKind::Halfspace: {
                if (p == 1) {
                    m.sorted_1d_.resize(n);
                    for (std::size_t i = 0; i < n; ++i) m.sorted_1d_[i] = data(i, 0);
                    std::sort(m.sorted_1d_.begin(), m.sorted_1d_.end());
                } else {
                    m.data_ = data;
                    if (p >= 3)
                        m.directions_ = detail::make_direction_set(data, seed, n_projections);
                }
                break;
            }
            case DepthKind::Projection: {
                m.directions_ = detail::make_direction_set(data, seed, n_projections);
                const std::size_t ndir = m.directions_.rows();
                m.proj_m_.resize(ndir);
                m.proj_s_.resize(ndir);
                Vec t(n);
                for (std::size_t d = 0; d < ndir; ++d) {
                    for (std::size_t i = 0; i < n; ++i) t[i] = dot(data.row(i), m.directions_.row(d));
                    Vec tmp = t;
                    m.proj_m_[d] = detail::median_inplace(tmp);
                    for (std::size_t i = 0; i < n; ++i) tmp[i] = std::abs(t[i] - m.proj_m_[d]);
                    m.proj_s_[d] = detail::median_inplace(tmp);
                }
                break;
            }
        }
        return m;
    }

    static DepthModel population(DepthKind kind, const EllipticalModel& model) {
        model.validate();
        DepthModel m;
        m.kind_ = kind;
        m.dim_ = model.dim();
        m.max_depth_ = max_depth_of(kind);
        m.population_ = model;
        try {
            m.chol_sigma_ = cholesky(model.sigma);
        } catch (const NotPositiveDefinite&) {
            throw InvalidInput("population depth: sigma must be positive definite");
        }
        m.radial_.emplace(kind, model.family, model.df);
        return m;
    }

    DepthKind kind() const { return kind_; }
    double max_depth() const { return max_depth_; }
    std::size_t dimension() const { return dim_; }
    bool is_population() const { return population_.has_value(); }
    const EllipticalModel& population_model() const { return *population_; }

    double depth_at(std::span<const double> x) const {
        if (x.size() != dim_) throw InvalidInput("depth_at: dimension mismatch");
        for (double v : x)
            if (!std::isfinite(v)) throw InvalidInput("depth_at: non-finite point");
        if (population_) {
            Vec c(dim_);
            for (std::size_t j = 0; j < dim_; ++j) c[j] = x[j] - population_->mu[j];
            const double d = std::sqrt(std::max(0.0, quadform_inv(chol_sigma_, c)));
            return radial_->depth(d);
        }
        switch (kind_) {
            case DepthKind::Mahalanobis: {
                Vec c(dim_);
                for (std::size_t j = 0; j < dim_; ++j) c[j] = x[j] - mh_center_[j];
                const double d2 = std::max(0.0, quadform_inv(mh_cov_chol_, c));
                return 1.0 / (1.0 + d2);
            }
            case DepthKind::Halfspace:
                return sample_halfspace(x);
            case DepthKind::Projection:
                return sample_projection(x);
        }
        return 0.0;
    }

    double htped_at(std::span<const double> x) const { return max_depth_ - depth_at(x); }

private:
    double sample_halfspace(std::span<const double> x) const {
        if (dim_ == 1) {
            const auto lo = std::lower_bound(sorted_1d_.begin(), sorted_1d_.end(), x[0]);
            const auto hi = std::upper_bound(sorted_1d_.begin(), sorted_1d_.end(), x[0]);
            const std::size_t n = sorted_1d_.size();
            const std::size_t le = static_cast<std::size_t>(hi - sorted_1d_.begin());
            const std::size_t ge = n - static_cast<std::size_t>(lo - sorted_1d_.begin());
            return static_cast<double>(std::min(le, ge)) / static_cast<double>(n);
        }
        if (dim_ == 2) return detail::halfspace_depth_2d(data_, x);
        // p >= 3: minimum over the seeded direction set (upper bound on the
        // exact infimum)
        const std::size_t n = data_.rows();
        std::size_t best = n;
        Vec v(dim_);
        for (std::size_t d = 0; d < directions_.rows(); ++d) {
            const auto u = directions_.row(d);
            std::size_t count = 0;
            for (std::size_t i = 0; i < n; ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < dim_; ++j) s += u[j] * (data_(i, j) - x[j]);
                if (s >= 0.0) ++count;
            }
            best = std::min(best, count);
            if (best == 0) break;
        }
        return static_cast<double>(best) / static_cast<double>(n);
    }

    double sample_projection(std::span<const double> x) const {
        double outl = 0.0;
        for (std::size_t d = 0; d < directions_.rows(); ++d) {
            const double t = dot(x, directions_.row(d));
            const double num = std::abs(t - proj_m_[d]);
            if (proj_s_[d] > 0.0) {
                outl = std::max(outl, num / proj_s_[d]);
            } else if (num != 0.0) {
                return 0.0; // all mass flat in this direction, x off it: depth 0
            }
        }
        return 1.0 / (1.0 + outl);
    }

    DepthKind kind_ = DepthKind::Halfspace;
    std::size_t dim_ = 0;
    double max_depth_ = 0.5;
    std::uint64_t seed_ = 0;

    std::optional<EllipticalModel> population_;
    Matrix chol_sigma_;
    std::optional<RadialHtped> radial_;

    Matrix data_;
    Vec mh_center_;
    Matrix mh_cov_chol_;
    Vec sorted_1d_;
    Matrix directions_;
    Vec proj_m_, proj_s_;
};

} // namespace depthpca
