#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "depthpca/errors.hpp"
#include "depthpca/linalg.hpp"
#include "depthpca/scatter.hpp"
#include "depthpca/special.hpp"

namespace depthpca {

struct PcaModel {
    Matrix loading; // p x k, orthonormal columns
    Vec eigvals;    // k, positive descending
    Vec center;
    std::size_t k = 0;
};

struct PcaProjection {
    PcaModel model;
    Matrix scores; // n x k
};

inline PcaProjection project(const ScatterFit& fit, const Matrix& data, std::size_t k) {
    const std::size_t p = fit.matrix.rows();
    if (k < 1 || k > p) throw InvalidInput("project: k out of range");
    if (data.cols() != p) throw InvalidInput("project: data dimension mismatch");
    if (!(fit.decomp.eigenvalues[k - 1] > 0.0))
        throw DegenerateModel("project: component " + std::to_string(k) +
                              " has nonpositive eigenvalue");
    PcaProjection out;
    out.model.k = k;
    out.model.center = fit.center;
    out.model.eigvals.assign(fit.decomp.eigenvalues.begin(), fit.decomp.eigenvalues.begin() + k);
    out.model.loading = Matrix(p, k);
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t j = 0; j < k; ++j) out.model.loading(a, j) = fit.decomp.eigenvectors(a, j);
    out.scores = Matrix(data.rows(), k);
    for (std::size_t i = 0; i < data.rows(); ++i)
        for (std::size_t j = 0; j < k; ++j) {
            double s = 0.0;
            for (std::size_t a = 0; a < p; ++a)
                s += out.model.loading(a, j) * (data(i, a) - fit.center[a]);
            out.scores(i, j) = s;
        }
    return out;
}

enum class OutlierFlag { Regular, ScoreOutlier, OrthogonalOutlier, BothOutlier };

inline std::string outlier_flag_name(OutlierFlag f) {
    switch (f) {
        case OutlierFlag::Regular: return "regular";
        case OutlierFlag::ScoreOutlier: return "score";
        case OutlierFlag::OrthogonalOutlier: return "orthogonal";
        case OutlierFlag::BothOutlier: return "both";
    }
    return "?";
}

struct DiagnosticsReport {
    Vec sd;                  // score distances  sqrt(sum_j s_ij^2 / lambda_j)
    Vec od;                  // orthogonal distances ||(x_i - center) - P s_i||
    std::vector<OutlierFlag> flags;
    double sd_cut = 0.0;
    double od_cut = 0.0;
    bool od_mad_degenerate = false; // every OD equal: cutoff fell back to the median
};

inline DiagnosticsReport distances(const PcaModel& model, const Matrix& scores,
                                   const Matrix& data) {
    const std::size_t n = data.rows(), p = model.loading.rows(), k = model.k;
    if (scores.rows() != n || scores.cols() != k || data.cols() != p)
        throw InvalidInput("distances: inconsistent shapes");
    DiagnosticsReport rep;
    rep.sd.resize(n);
    rep.od.resize(n);
    Vec resid(p);
    for (std::size_t i = 0; i < n; ++i) {
        double sd2 = 0.0;
        for (std::size_t j = 0; j < k; ++j)
            sd2 += scores(i, j) * scores(i, j) / model.eigvals[j];
        rep.sd[i] = std::sqrt(sd2);
        for (std::size_t a = 0; a < p; ++a) {
            double recon = 0.0;
            for (std::size_t j = 0; j < k; ++j) recon += model.loading(a, j) * scores(i, j);
            resid[a] = (data(i, a) - model.center[a]) - recon;
        }
        rep.od[i] = norm2(resid);
    }
    return rep;
}

// Cutoffs: SD at sqrt(chi^2_{k,0.975}); OD at
// [ median(OD^{2/3}) + MAD(OD^{2/3}) Phi^{-1}(0.975) ]^{3/2}, MAD unnormalized.
inline void apply_cutoffs(DiagnosticsReport& rep, std::size_t k) {
    const std::size_t n = rep.od.size();
    if (n < 2) throw InvalidInput("cutoffs: need at least 2 observations");
    rep.sd_cut = std::sqrt(chi2_quantile(0.975, static_cast<int>(k)));

    Vec t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = std::pow(rep.od[i], 2.0 / 3.0);
    Vec tmp = t;
    const double med = detail::median_inplace(tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = std::abs(t[i] - med);
    const double mad = detail::median_inplace(tmp);
    if (mad == 0.0) {
        rep.od_mad_degenerate = true;
        rep.od_cut = std::pow(med, 1.5);
    } else {
        rep.od_cut = std::pow(med + mad * std_normal_quantile(0.975), 1.5);
    }

    rep.flags.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const bool s = rep.sd[i] > rep.sd_cut;
        const bool o = rep.od[i] > rep.od_cut;
        rep.flags[i] = s ? (o ? OutlierFlag::BothOutlier : OutlierFlag::ScoreOutlier)
                         : (o ? OutlierFlag::OrthogonalOutlier : OutlierFlag::Regular);
    }
}

inline DiagnosticsReport diagnose(const PcaProjection& proj, const Matrix& data) {
    DiagnosticsReport rep = distances(proj.model, proj.scores, data);
    apply_cutoffs(rep, proj.model.k);
    return rep;
}

// 1 - (sum of the top q eigenvalues) / (sum of all eigenvalues)
inline double unexplained_variance(const ScatterFit& fit, std::size_t q) {
    const std::size_t p = fit.decomp.eigenvalues.size();
    if (q < 1 || q > p) throw InvalidInput("unexplained_variance: q out of range");
    double top = 0.0, total = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
        total += fit.decomp.eigenvalues[j];
        if (j < q) top += fit.decomp.eigenvalues[j];
    }
    return 1.0 - top / total;
}

// Type-7 (linear interpolation) empirical quantile.
inline double quantile_type7(Vec sorted, double prob) {
    if (sorted.empty()) throw InvalidInput("quantile: empty sample");
    if (prob <= 0.0) return sorted.front();
    if (prob >= 1.0) return sorted.back();
    const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const double frac = h - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

// Empirical quantiles of the squared orthogonal distances from the top-k
// principal hyperplane.
inline Vec squared_distance_quantiles(const ScatterFit& fit, const Matrix& data, std::size_t k,
                                      const Vec& probs) {
    const PcaProjection proj = project(fit, data, k);
    const DiagnosticsReport rep = distances(proj.model, proj.scores, data);
    Vec od2(rep.od.size());
    for (std::size_t i = 0; i < od2.size(); ++i) od2[i] = rep.od[i] * rep.od[i];
    std::sort(od2.begin(), od2.end());
    Vec out(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) out[i] = quantile_type7(od2, probs[i]);
    return out;
}

} // namespace depthpca
