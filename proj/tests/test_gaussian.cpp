#include <doctest.h>

#include <cmath>

#include "hoed/errors.hpp"
#include "hoed/gaussian.hpp"
#include "hoed/spectral.hpp"
#include "support.hpp"

using namespace hoed;
using testing::random_matrix;
using testing::random_space;
using testing::random_spd_op;
using testing::random_vector;

namespace {

struct Moments {
    double mean = 0.0;
    double se = 0.0;
};

template <typename F>
Moments mc(std::size_t count, F&& f) {
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double v = f(i);
        sum += v;
        sum2 += v * v;
    }
    const double n = static_cast<double>(count);
    const double mean = sum / n;
    const double var = (sum2 - n * mean * mean) / (n - 1.0);
    return {mean, std::sqrt(std::max(var, 0.0) / n)};
}

GaussianMeasure scalar_measure(double m, double q) {
    const Space s = Space::euclidean(1);
    return GaussianMeasure(Vector::Constant(1, m), OpExpr::dense(Matrix::Constant(1, 1, q), s, true));
}

GaussianMeasure random_measure(const Space& s, std::uint64_t seed, bool centered) {
    const Vector m = centered ? Vector::Zero(s.dim()) : random_vector(s.dim(), seed, 1);
    return GaussianMeasure(m, random_spd_op(s, seed, 0.3));
}

}  // namespace

TEST_CASE("construction checks the covariance") {
    const Space s = random_space(4, 1);
    CHECK_THROWS(GaussianMeasure(Vector::Zero(4), OpExpr::dense(random_matrix(4, 4, 2), s)));
    CHECK_THROWS_AS(GaussianMeasure(Vector::Zero(3), random_spd_op(s, 3)), DimensionError);
    const GaussianMeasure mu = random_measure(s, 4, true);
    CHECK(mu.cov_spectrum().values.minCoeff() >= 0.0);
    CHECK(mu.cov_spectrum().orthonormality_defect() <= 1e-10);
}

TEST_CASE("sampling") {
    const Space s = random_space(3, 10);
    const Vector m = random_vector(3, 11);
    const GaussianMeasure point(m, OpExpr::zero(s, s));
    for (const Vector& x : sample(point, 5, 7)) {
        CHECK((x - m).norm() == 0.0);
    }

    const GaussianMeasure unit = scalar_measure(0.0, 1.0);
    const auto draws = sample(unit, 100000, 12);
    double mean = 0.0;
    for (const auto& x : draws) mean += x[0];
    mean /= 1e5;
    CHECK(std::abs(mean) <= 4.0 / std::sqrt(1e5));

    // second moment: tr(Q) + |m|^2
    const GaussianMeasure mu = random_measure(s, 13, false);
    const Moments mom = mc(20000, [&](std::size_t i) { return s.norm_squared(sample_one(mu, 14, i)); });
    const double expected = trace(mu.cov()) + s.norm_squared(mu.mean());
    CHECK(std::abs(mom.mean - expected) <= 5.0 * mom.se);
}

TEST_CASE("sampling is reproducible and independent of thread count") {
    const Space s = random_space(5, 20);
    const GaussianMeasure mu = random_measure(s, 21, false);
    const auto a = sample(mu, 64, 99, 1);
    const auto b = sample(mu, 64, 99, 4);
    const auto c = sample(mu, 64, 99, 1);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK((a[i].array() == b[i].array()).all());
        CHECK((a[i].array() == c[i].array()).all());
        CHECK((a[i].array() == sample_one(mu, 99, i).array()).all());
    }
    CHECK((sample(mu, 1, 100)[0].array() != a[0].array()).any());
}

TEST_CASE("pushforward_affine") {
    const Space s = random_space(4, 30);
    const GaussianMeasure mu = random_measure(s, 31, false);

    const GaussianMeasure same = pushforward_affine(mu, OpExpr::identity(s), Vector::Zero(4));
    CHECK(same.mean().isApprox(mu.mean()));
    CHECK((same.cov().to_dense() - mu.cov().to_dense()).norm() <= 1e-12 * mu.cov().to_dense().norm());

    const Space data = Space::euclidean(2);
    const Vector b = random_vector(2, 32);
    const GaussianMeasure pt = pushforward_affine(mu, OpExpr::zero(s, data), b);
    CHECK(pt.mean().isApprox(b));
    CHECK(pt.cov().to_dense().norm() == 0.0);

    const GaussianMeasure scaled =
        pushforward_affine(scalar_measure(1.0, 2.0), OpExpr::diagonal(Vector::Constant(1, 3.0), Space::euclidean(1)),
                           Vector::Constant(1, 1.0));
    CHECK(scaled.mean()[0] == doctest::Approx(4.0));
    CHECK(scaled.cov().apply(Vector::Ones(1))[0] == doctest::Approx(18.0));
    CHECK(scaled.cov().kind() == OpExpr::Kind::Composition);

    CHECK_THROWS_AS(pushforward_affine(mu, OpExpr::identity(Space::euclidean(3)), Vector::Zero(3)), DimensionError);
}

TEST_CASE("pushforward second moment") {
    const Space s = random_space(5, 40);
    const Space data = Space::euclidean(3);
    const GaussianMeasure mu = random_measure(s, 41, false);
    const OpExpr a = OpExpr::dense(random_matrix(3, 5, 42), s, data);
    const Vector b = random_vector(3, 43);
    const GaussianMeasure nu = pushforward_affine(mu, a, b);
    const double closed = trace(nu.cov()) + (a.apply(mu.mean()) + b).squaredNorm();
    const Moments m =
        mc(20000, [&](std::size_t i) { return (a.apply(sample_one(mu, 44, i)) + b).squaredNorm(); });
    CHECK(std::abs(m.mean - closed) <= 5.0 * m.se);
}

TEST_CASE("expect_quad_form") {
    const Space s = random_space(6, 50);
    const GaussianMeasure centered = random_measure(s, 51, true);
    CHECK(expect_quad_form(OpExpr::identity(s), centered) == doctest::Approx(trace(centered.cov())).epsilon(1e-12));

    const GaussianMeasure scalar = scalar_measure(3.0, 4.0);
    CHECK(expect_quad_form(OpExpr::diagonal(Vector::Constant(1, 2.0), Space::euclidean(1)), scalar) ==
          doctest::Approx(26.0));

    const GaussianMeasure mu = random_measure(s, 52, false);
    const OpExpr a = random_spd_op(s, 53);
    const double closed = expect_quad_form(a, mu);
    const Moments m = mc(100000, [&](std::size_t i) {
        const Vector x = sample_one(mu, 54, i);
        return s.inner(a.apply(x), x);
    });
    CHECK(std::abs(m.mean - closed) <= 5.0 * m.se);

    // linear in A
    const OpExpr a2 = random_spd_op(s, 55);
    const OpExpr sum = OpExpr::dense(a.to_dense() + a2.to_dense(), s, true);
    const double lhs = expect_quad_form(sum, mu);
    CHECK(std::abs(lhs - (expect_quad_form(a, mu) + expect_quad_form(a2, mu))) <= 1e-10 * std::abs(lhs));
}

TEST_CASE("gaussian_exp_integral") {
    const Space s = random_space(4, 60);
    const GaussianMeasure mu = random_measure(s, 61, true);
    CHECK(gaussian_exp_integral(OpExpr::zero(s, s), Vector::Zero(4), mu) == doctest::Approx(0.0));

    const GaussianMeasure unit = scalar_measure(0.0, 1.0);
    CHECK(gaussian_exp_integral(OpExpr::identity(Space::euclidean(1)), Vector::Zero(1), unit) ==
          doctest::Approx(-0.5 * std::log(2.0)).epsilon(1e-14));

    // b = 0 reduces to -1/2 logdet(I + Q^1/2 A Q^1/2)
    const OpExpr a = random_spd_op(s, 62, 0.1);
    const Matrix qh = sqrt_dense(mu.cov_spectrum());
    const OpExpr tilde = OpExpr::dense(qh * a.to_dense() * qh, s, true);
    const double by_spectrum = -0.5 * logdet_i_plus(eig_self_adjoint(tilde));
    CHECK(std::abs(gaussian_exp_integral(a, Vector::Zero(4), mu) - by_spectrum) <= 1e-10);

    // MC in the linear domain
    const Vector b = 0.5 * random_vector(4, 63);
    const double closed = std::exp(gaussian_exp_integral(a, b, mu));
    const Moments m = mc(1000000, [&](std::size_t i) {
        const Vector x = sample_one(mu, 64, i);
        return std::exp(-0.5 * s.inner(a.apply(x), x) + s.inner(b, x));
    });
    CHECK(std::abs(m.mean - closed) <= 5.0 * m.se);

    CHECK_THROWS_AS(gaussian_exp_integral(a, b, random_measure(s, 65, false)), ParameterError);
    const OpExpr indefinite = OpExpr::diagonal(Vector::Constant(4, -1.0), s);
    CHECK_THROWS(gaussian_exp_integral(indefinite, b, mu));
}

TEST_CASE("kl_gaussian_ref") {
    const GaussianMeasure prior = scalar_measure(0.0, 1.0);
    CHECK(kl_gaussian_ref(prior, prior) == doctest::Approx(0.0));
    CHECK(kl_gaussian_ref(scalar_measure(1.0, 1.0), prior) == doctest::Approx(0.5));
    CHECK(kl_gaussian_ref(scalar_measure(0.0, 0.5), prior) == doctest::Approx(0.5 * (std::log(2.0) - 0.5)));
    CHECK(kl_gaussian_ref(scalar_measure(0.0, 0.5), prior) == doctest::Approx(0.096574).epsilon(1e-5));

    for (std::uint64_t t = 0; t < 100; ++t) {
        const Space s = random_space(5, 200 + t);
        const GaussianMeasure p = random_measure(s, 300 + t, false);
        const GaussianMeasure q = random_measure(s, 400 + t, t % 2 == 0);
        CHECK(kl_gaussian_ref(p, q) >= 0.0);
        CHECK(std::abs(kl_gaussian_ref(p, p)) <= 1e-10);
    }

    const Space s = random_space(3, 500);
    const Space other = random_space(3, 501);
    CHECK_THROWS_AS(kl_gaussian_ref(random_measure(s, 1, true), random_measure(other, 1, true)), DimensionError);
}
