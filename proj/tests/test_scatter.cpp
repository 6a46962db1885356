#include <catch2/catch_amalgamated.hpp>

#include "depthpca/scatter.hpp"
#include "depthpca/simulation.hpp"
#include "oracle_utils.hpp"

using namespace depthpca;
using Catch::Approx;

namespace {

Matrix cross_data() {
    Matrix data(4, 2);
    data(0, 0) = 1.0;
    data(1, 0) = -1.0;
    data(2, 1) = 1.0;
    data(3, 1) = -1.0;
    return data;
}

double trace_normalized_diff(const Matrix& a, const Matrix& b) {
    const double p = static_cast<double>(a.rows());
    Matrix an = a, bn = b;
    for (double& v : an.data()) v *= p / trace(a);
    for (double& v : bn.data()) v *= p / trace(b);
    return max_abs_diff(an, bn) / (1.0 + frobenius_norm(an));
}

} // namespace

TEST_CASE("SCM of the symmetric four-point set", "[scatter]") {
    ScatterOptions opts;
    opts.center = Vec{0.0, 0.0};
    const ScatterFit fit = fit_scatter({EstimatorKind::Tag::SCM, {}}, cross_data(), opts);
    CHECK(fit.matrix(0, 0) == Approx(0.5));
    CHECK(fit.matrix(1, 1) == Approx(0.5));
    CHECK(fit.matrix(0, 1) == Approx(0.0).margin(1e-15));
    CHECK(fit.iterations == 0);
    CHECK(fit.converged);
}

TEST_CASE("Tyler on the symmetric four-point set", "[scatter]") {
    ScatterOptions opts;
    opts.center = Vec{0.0, 0.0};
    const ScatterFit fit = fit_scatter({EstimatorKind::Tag::Tyler, {}}, cross_data(), opts);
    CHECK(fit.converged);
    CHECK(trace(fit.matrix) == Approx(2.0).margin(1e-8));
    CHECK(max_abs_diff(fit.matrix, Matrix::identity(2)) <= 1e-8);
    CHECK(tyler_residual(fit, cross_data()) <= 1e-6 * 2);
}

TEST_CASE("tyler_residual direct evaluation", "[scatter]") {
    const Matrix data = cross_data();
    ScatterFit guess;
    guess.kind = {EstimatorKind::Tag::Tyler, {}};
    guess.center = Vec{0.0, 0.0};
    guess.matrix = Matrix::identity(2);
    CHECK(tyler_residual(guess, data) == Approx(0.0).margin(1e-14));

    guess.matrix(0, 1) = guess.matrix(1, 0) = 0.1;
    CHECK(tyler_residual(guess, data) > 1e-3);

    ScatterFit wrong_kind;
    wrong_kind.kind = {EstimatorKind::Tag::SCM, {}};
    CHECK_THROWS_AS(tyler_residual(wrong_kind, data), InvalidInput);
}

TEST_CASE("Tyler residual bound holds on converged fits", "[scatter]") {
    for (std::uint64_t seed : {3u, 17u}) {
        Matrix sigma(3, 3);
        sigma(0, 0) = 3.0;
        sigma(1, 1) = 2.0;
        sigma(2, 2) = 1.0;
        sigma(0, 1) = sigma(1, 0) = 0.8;
        const auto model = make_student_t_model(5, Vec(3, 0.0), sigma);
        const Matrix data = sample_elliptical(model, 200, seed);
        ScatterOptions opts;
        opts.seed = seed;
        for (auto tag : {EstimatorKind::Tag::Tyler, EstimatorKind::Tag::DepthWeightedTyler}) {
            const ScatterFit fit = fit_scatter({tag, DepthKind::Mahalanobis}, data, opts);
            CHECK(fit.converged);
            CHECK(trace(fit.matrix) == Approx(3.0).margin(1e-8));
            CHECK(tyler_residual(fit, data) <= 1e-6 * 3);
        }
    }
}

TEST_CASE("DCM is orthogonally equivariant with a population depth", "[scatter]") {
    Matrix sigma(2, 2);
    sigma(0, 0) = 2.0;
    sigma(1, 1) = 1.0;
    const auto model = make_normal_model(Vec(2, 0.0), sigma);
    const Matrix data = sample_elliptical(model, 150, 44);
    const DepthModel depth = DepthModel::population(DepthKind::Mahalanobis, model);

    ScatterOptions opts;
    opts.center = Vec{0.0, 0.0};
    opts.depth_model = &depth;
    const ScatterFit fit =
        fit_scatter({EstimatorKind::Tag::DCM, DepthKind::Mahalanobis}, data, opts);

    const Matrix rot = oracle::random_orthogonal(2, 9);
    const Matrix rotated = data * transpose(rot);
    const auto rot_model = make_normal_model(Vec(2, 0.0), rot * sigma * transpose(rot));
    const DepthModel rot_depth = DepthModel::population(DepthKind::Mahalanobis, rot_model);
    ScatterOptions rot_opts;
    rot_opts.center = Vec{0.0, 0.0};
    rot_opts.depth_model = &rot_depth;
    const ScatterFit rot_fit =
        fit_scatter({EstimatorKind::Tag::DCM, DepthKind::Mahalanobis}, rotated, rot_opts);

    const Matrix expected = rot * fit.matrix * transpose(rot);
    CHECK(max_abs_diff(rot_fit.matrix, expected) <= 1e-8);

    ScatterOptions plain;
    plain.center = Vec{0.0, 0.0};
    const Matrix scm = fit_scatter({EstimatorKind::Tag::SCM, {}}, data, plain).matrix;
    const Matrix scm_rot = fit_scatter({EstimatorKind::Tag::SCM, {}}, rotated, plain).matrix;
    CHECK(max_abs_diff(scm_rot, rot * scm * transpose(rot)) <= 1e-8);
}

TEST_CASE("Tyler and sample covariance are affine equivariant", "[scatter]") {
    Matrix sigma(2, 2);
    sigma(0, 0) = 2.0;
    sigma(1, 1) = 1.0;
    const auto model = make_normal_model(Vec(2, 0.0), sigma);
    const Matrix data = sample_elliptical(model, 120, 7);
    Matrix a(2, 2); // nonsingular, not orthogonal
    a(0, 0) = 1.5;
    a(0, 1) = 0.7;
    a(1, 0) = -0.3;
    a(1, 1) = 2.0;
    const Matrix transformed = data * transpose(a);

    ScatterOptions opts;
    opts.center = Vec{0.0, 0.0};

    SECTION("tyler up to scale") {
        const Matrix t = fit_scatter({EstimatorKind::Tag::Tyler, {}}, data, opts).matrix;
        const Matrix t2 = fit_scatter({EstimatorKind::Tag::Tyler, {}}, transformed, opts).matrix;
        CHECK(trace_normalized_diff(t2, a * t * transpose(a)) <= 1e-6);
    }
    SECTION("sample covariance exactly") {
        const Matrix c = fit_scatter({EstimatorKind::Tag::SampleCov, {}}, data, {}).matrix;
        const Matrix c2 =
            fit_scatter({EstimatorKind::Tag::SampleCov, {}}, transformed, {}).matrix;
        const Matrix expect = a * c * transpose(a);
        CHECK(max_abs_diff(c2, expect) <= 1e-6 * (1.0 + frobenius_norm(expect)));
    }
}

TEST_CASE("DCM trace identity and zero-sign row handling", "[scatter]") {
    Matrix sigma(3, 3);
    sigma(0, 0) = 2.0;
    sigma(1, 1) = 1.5;
    sigma(2, 2) = 1.0;
    const auto model = make_normal_model(Vec(3, 0.0), sigma);
    const Matrix data = sample_elliptical(model, 100, 31);

    ScatterOptions opts;
    opts.seed = 5;
    const ScatterFit fit =
        fit_scatter({EstimatorKind::Tag::DCM, DepthKind::Projection}, data, opts);
    REQUIRE(fit.dropped_rows == 0);
    double mean_ht2 = 0.0;
    for (double w : fit.weights) mean_ht2 += w;
    mean_ht2 /= static_cast<double>(data.rows());
    CHECK(trace(fit.matrix) == Approx(mean_ht2).margin(1e-12));

    SECTION("a row equal to the center is dropped and counted") {
        Matrix with_center(data.rows() + 1, 3);
        for (std::size_t i = 0; i < data.rows(); ++i)
            for (std::size_t j = 0; j < 3; ++j) with_center(i, j) = data(i, j);
        const Vec center{0.25, -0.5, 1.0};
        for (std::size_t j = 0; j < 3; ++j) with_center(data.rows(), j) = center[j];
        ScatterOptions opts2;
        opts2.center = center;
        const ScatterFit f2 = fit_scatter({EstimatorKind::Tag::SCM, {}}, with_center, opts2);
        CHECK(f2.dropped_rows == 1);
    }
}

TEST_CASE("DCM eigenvectors approach the population axes", "[scatter]") {
    Matrix sigma(2, 2);
    sigma(0, 0) = sigma(1, 1) = 5.0;
    sigma(0, 1) = sigma(1, 0) = -4.0;
    const auto model = make_normal_model(Vec(2, 0.0), sigma);
    const Vec gamma1 = eigh(sigma).eigenvectors.col(0);

    double angle_small = 0.0, angle_large = 0.0;
    for (std::size_t n : {std::size_t{200}, std::size_t{2000}}) {
        const Matrix data = sample_elliptical(model, n, 606);
        ScatterOptions opts;
        opts.seed = 7;
        const ScatterFit fit =
            fit_scatter({EstimatorKind::Tag::DCM, DepthKind::Mahalanobis}, data, opts);
        const double angle = principal_angle(fit.decomp.eigenvectors.col(0), gamma1);
        (n == 200 ? angle_small : angle_large) = angle;
    }
    CHECK(angle_large < angle_small);
    CHECK(angle_large <= 5.0 * 3.14159265358979323846 / 180.0);
}

TEST_CASE("all-center data degenerates", "[scatter]") {
    Matrix data(5, 2); // five copies of the origin
    ScatterOptions opts;
    opts.center = Vec{0.0, 0.0};
    CHECK_THROWS_AS(fit_scatter({EstimatorKind::Tag::Tyler, {}}, data, opts), DegenerateData);
}

TEST_CASE("estimator names parse and round trip", "[scatter]") {
    for (const std::string name : {"sample-cov", "scm", "tyler", "dcm-halfspace",
                                   "dcm-mahalanobis", "dcm-projection", "dwtyler-projection"})
        CHECK(EstimatorKind::parse(name).name() == name);
    CHECK_THROWS_AS(EstimatorKind::parse("mcd"), InvalidInput);
}

TEST_CASE("lambda_ds_population under isotropy and against a high-draw oracle", "[scatter]") {
    SECTION("isotropic: equal entries") {
        Matrix sigma = Matrix::identity(3);
        for (double& v : sigma.data()) v *= 2.0;
        const auto model = make_normal_model(Vec(3, 0.0), sigma);
        const Vec lds = lambda_ds_population(model, DepthKind::Mahalanobis, 200000, 11);
        CHECK(lds[0] == Approx(lds[1]).margin(0.005));
        CHECK(lds[1] == Approx(lds[2]).margin(0.005));
    }
    SECTION("halfspace sum bound from M_D = 0.5") {
        Matrix sigma(2, 2);
        sigma(0, 0) = 3.0;
        sigma(1, 1) = 1.0;
        const auto model = make_normal_model(Vec(2, 0.0), sigma);
        const Vec lds = lambda_ds_population(model, DepthKind::Halfspace, 100000, 3);
        CHECK(lds[0] + lds[1] <= 0.25 + 0.003);
        CHECK(lds[0] > lds[1]);
    }
    SECTION("p=2 diag(2,1) Mahalanobis against a 1e7-draw oracle") {
        Matrix sigma(2, 2);
        sigma(0, 0) = 2.0;
        sigma(1, 1) = 1.0;
        const auto model = make_normal_model(Vec(2, 0.0), sigma);
        const Vec lds = lambda_ds_population(model, DepthKind::Mahalanobis, 1000000, 21);

        // independent plain-loop Monte Carlo at 1e7 draws
        Rng rng(987654321);
        double s0 = 0.0, s1 = 0.0, sq0 = 0.0, sq1 = 0.0;
        const std::size_t oracle_n = 10000000;
        for (std::size_t i = 0; i < oracle_n; ++i) {
            const double z1 = rng.normal(), z2 = rng.normal();
            const double q = 2.0 * z1 * z1 + z2 * z2;
            const double r2 = z1 * z1 + z2 * z2;
            const double ht = r2 / (1.0 + r2);
            const double v0 = ht * ht * 2.0 * z1 * z1 / q;
            const double v1 = ht * ht * z2 * z2 / q;
            s0 += v0;
            s1 += v1;
            sq0 += v0 * v0;
            sq1 += v1 * v1;
        }
        const double m0 = s0 / oracle_n, m1 = s1 / oracle_n;
        const double se0 = std::sqrt((sq0 / oracle_n - m0 * m0) / oracle_n);
        const double se1 = std::sqrt((sq1 / oracle_n - m1 * m1) / oracle_n);
        const double se_impl0 = se0 * std::sqrt(10.0), se_impl1 = se1 * std::sqrt(10.0);
        CHECK(std::abs(lds[0] - m0) <= 3.0 * (se0 + se_impl0));
        CHECK(std::abs(lds[1] - m1) <= 3.0 * (se1 + se_impl1));
    }
}

TEST_CASE("recover_shape fixed points and contracts", "[scatter]") {
    const auto model = make_normal_model(Vec(3, 0.0), Matrix::identity(3));

    SECTION("isotropic input is the fixed point") {
        const Vec lds{0.07, 0.07, 0.07};
        const ShapeEigenvalues s =
            recover_shape(lds, model, DepthKind::Mahalanobis, 20000, 1e-8, 100, 5);
        CHECK(s.converged);
        for (double v : s.values) CHECK(v == Approx(1.0).margin(1e-6));
    }
    SECTION("one iterate with tol=0 reports non-convergence") {
        const Vec lds{0.09, 0.06, 0.05};
        const ShapeEigenvalues s =
            recover_shape(lds, model, DepthKind::Mahalanobis, 20000, 0.0, 1, 5);
        CHECK_FALSE(s.converged);
        CHECK(s.iterations == 1);
        double prod = 1.0;
        for (double v : s.values) prod *= v;
        CHECK(prod == Approx(1.0).margin(1e-8)); // det-standardized anyway
    }
    SECTION("input validation") {
        CHECK_THROWS_AS(recover_shape(Vec{0.05, 0.07, 0.06}, model, DepthKind::Mahalanobis,
                                      20000, 1e-8, 100, 5),
                        InvalidInput); // not descending
        CHECK_THROWS_AS(
            recover_shape(Vec{0.05, -0.01}, model, DepthKind::Mahalanobis, 20000, 1e-8, 100, 5),
            InvalidInput);
    }
}

TEST_CASE("recover_shape inverts the forward map", "[scatter]") {
    // true standardized eigenvalues (sqrt2, 1/sqrt2); forward map by an
    // independent plain Monte Carlo of the population DCM eigenvalue formula
    const double l1 = std::sqrt(2.0), l2 = 1.0 / std::sqrt(2.0);
    Rng rng(13579);
    double s0 = 0.0, s1 = 0.0;
    const std::size_t n = 4000000;
    for (std::size_t i = 0; i < n; ++i) {
        const double z1 = rng.normal(), z2 = rng.normal();
        const double q = l1 * z1 * z1 + l2 * z2 * z2;
        const double r2 = z1 * z1 + z2 * z2;
        const double ht = r2 / (1.0 + r2);
        s0 += ht * ht * l1 * z1 * z1 / q;
        s1 += ht * ht * l2 * z2 * z2 / q;
    }
    const Vec lambda_ds{s0 / n, s1 / n};

    Matrix sigma(2, 2);
    sigma(0, 0) = l1;
    sigma(1, 1) = l2;
    const auto model = make_normal_model(Vec(2, 0.0), sigma);
    const ShapeEigenvalues s =
        recover_shape(lambda_ds, model, DepthKind::Mahalanobis, 100000, 1e-9, 300, 99);
    REQUIRE(s.converged);
    CHECK(s.values[0] == Approx(l1).margin(0.02));
    CHECK(s.values[1] == Approx(l2).margin(0.02));

    SECTION("the deterministic map re-applies to the same output") {
        const Vec lds2 = lambda_ds_population(model, DepthKind::Mahalanobis, 100000, 99);
        const ShapeEigenvalues s2 =
            recover_shape(lds2, model, DepthKind::Mahalanobis, 100000, 1e-9, 300, 99);
        REQUIRE(s2.converged);
        const ShapeEigenvalues s3 =
            recover_shape(lds2, model, DepthKind::Mahalanobis, 100000, 1e-9, 300, 99);
        CHECK(s2.values == s3.values);
    }
}
