#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "depthpca/errors.hpp"

namespace depthpca {

using Vec = std::vector<double>;

// Dense row-major matrix. Small and value-semantic; everything downstream
// (scatter fits, loadings, FSE panels) stays below a few hundred columns.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static Matrix diag(const Vec& d) {
        Matrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * cols_, cols_};
    }
    std::span<double> row(std::size_t i) {
        return {data_.data() + i * cols_, cols_};
    }

    Vec col(std::size_t j) const {
        Vec c(rows_);
        for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
        return c;
    }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

inline Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw InvalidInput("matrix product: dimension mismatch");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

inline Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

inline Vec matvec(const Matrix& a, std::span<const double> x) {
    if (a.cols() != x.size()) throw InvalidInput("matvec: dimension mismatch");
    Vec y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double frobenius_norm(const Matrix& a) {
    double s = 0.0;
    for (double v : a.data()) s += v * v;
    return std::sqrt(s);
}

inline double trace(const Matrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < std::min(a.rows(), a.cols()); ++i) s += a(i, i);
    return s;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i)
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

inline bool all_finite(const Matrix& a) {
    return std::all_of(a.data().begin(), a.data().end(),
                       [](double v) { return std::isfinite(v); });
}

inline void check_symmetric(const Matrix& m, const char* where) {
    if (m.rows() != m.cols()) throw InvalidInput(std::string(where) + ": matrix not square");
    if (!all_finite(m)) throw InvalidInput(std::string(where) + ": non-finite entries");
    const double scale = 1.0 + frobenius_norm(m);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i + 1; j < m.cols(); ++j)
            if (std::abs(m(i, j) - m(j, i)) > 1e-12 * scale)
                throw InvalidInput(std::string(where) + ": matrix not symmetric");
}

// Eigendecomposition of a symmetric matrix. Columns of `eigenvectors` are the
// eigenvectors, matching `eigenvalues` sorted in descending order. Sign
// convention: each column's largest-magnitude coordinate is positive (ties
// broken by lowest index), so identical inputs give identical outputs.
struct SpectralDecomp {
    Vec eigenvalues;
    Matrix eigenvectors;
};

namespace detail {

inline void jacobi_rotate(Matrix& a, Matrix& v, std::size_t p, std::size_t q) {
    const double apq = a(p, q);
    if (apq == 0.0) return;
    const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
    const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                     (std::abs(theta) + std::sqrt(theta * theta + 1.0));
    const double c = 1.0 / std::sqrt(t * t + 1.0);
    const double s = t * c;
    const double tau = s / (1.0 + c);
    const std::size_t n = a.rows();

    a(p, p) -= t * apq;
    a(q, q) += t * apq;
    a(p, q) = 0.0;
    a(q, p) = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        if (r != p && r != q) {
            const double arp = a(r, p), arq = a(r, q);
            a(r, p) = a(p, r) = arp - s * (arq + tau * arp);
            a(r, q) = a(q, r) = arq + s * (arp - tau * arq);
        }
        const double vrp = v(r, p), vrq = v(r, q);
        v(r, p) = vrp - s * (vrq + tau * vrp);
        v(r, q) = vrq + s * (vrp - tau * vrq);
    }
}

inline double offdiag_norm(const Matrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i + 1; j < a.cols(); ++j) s += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(s);
}

inline void fix_eigenvector_sign(Matrix& vecs, std::size_t col) {
    std::size_t arg = 0;
    double best = std::abs(vecs(0, col));
    for (std::size_t i = 1; i < vecs.rows(); ++i) {
        const double m = std::abs(vecs(i, col));
        if (m > best) {
            best = m;
            arg = i;
        }
    }
    if (vecs(arg, col) < 0.0)
        for (std::size_t i = 0; i < vecs.rows(); ++i) vecs(i, col) = -vecs(i, col);
}

} // namespace detail

// Cyclic Jacobi: sweeps all (p,q) pairs in fixed order until the off-diagonal
// Frobenius norm falls below 1e-14 * ||m||_F, at most 100 sweeps.
inline SpectralDecomp eigh(const Matrix& m) {
    check_symmetric(m, "eigh");
    const std::size_t n = m.rows();
    Matrix a = m;
    Matrix v = Matrix::identity(n);
    const double threshold = 1e-14 * std::max(frobenius_norm(m), 1e-300);

    bool converged = (n < 2) || detail::offdiag_norm(a) <= threshold;
    for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) detail::jacobi_rotate(a, v, p, q);
        converged = detail::offdiag_norm(a) <= threshold;
    }
    if (!converged) throw NumericalFailure("eigh: Jacobi did not converge in 100 sweeps");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return a(i, i) > a(j, j);
    });

    SpectralDecomp out;
    out.eigenvalues.resize(n);
    out.eigenvectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.eigenvalues[k] = a(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = v(i, order[k]);
        detail::fix_eigenvector_sign(out.eigenvectors, k);
    }
    return out;
}

// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
inline Matrix cholesky(const Matrix& m) {
    check_symmetric(m, "cholesky");
    const std::size_t n = m.rows();
    const double pivot_tol = 1e-14 * std::max(trace(m), 1e-300);
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = m(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > pivot_tol)) throw NotPositiveDefinite("cholesky: pivot " + std::to_string(d));
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = m(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

inline Vec solve_lower(const Matrix& l, std::span<const double> b) {
    const std::size_t n = l.rows();
    Vec y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
        y[i] = s / l(i, i);
    }
    return y;
}

inline Vec solve_lower_transpose(const Matrix& l, std::span<const double> y) {
    const std::size_t n = l.rows();
    Vec x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
        x[ii] = s / l(ii, ii);
    }
    return x;
}

inline Vec solve_spd(const Matrix& m, std::span<const double> b) {
    if (m.rows() != b.size()) throw InvalidInput("solve_spd: dimension mismatch");
    const Matrix l = cholesky(m);
    return solve_lower_transpose(l, solve_lower(l, b));
}

inline Matrix inverse_spd(const Matrix& m) {
    const std::size_t n = m.rows();
    const Matrix l = cholesky(m);
    Matrix inv(n, n);
    Vec e(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        const Vec x = solve_lower_transpose(l, solve_lower(l, e));
        for (std::size_t i = 0; i < n; ++i) inv(i, j) = x[i];
        e[j] = 0.0;
    }
    // symmetrize away the last-bit asymmetry from columnwise solves
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double s = 0.5 * (inv(i, j) + inv(j, i));
            inv(i, j) = inv(j, i) = s;
        }
    return inv;
}

// x^T m^{-1} x via one triangular solve; m supplied as its Cholesky factor.
inline double quadform_inv(const Matrix& chol_l, std::span<const double> x) {
    const Vec y = solve_lower(chol_l, x);
    return dot(y, y);
}

} // namespace depthpca
