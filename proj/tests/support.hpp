// Small problem builders shared by the unit tests.
#pragma once

#include <cmath>

#include "hoed/gaussian.hpp"
#include "hoed/inverse_problem.hpp"
#include "hoed/rng.hpp"

namespace testing {

using hoed::Matrix;
using hoed::OpExpr;
using hoed::Space;
using hoed::Vector;

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    hoed::CounterRng rng(seed, 77);
    Matrix a(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) {
            a(i, j) = rng.normal();
        }
    }
    return a;
}

inline Vector random_vector(Eigen::Index n, std::uint64_t seed, std::uint64_t stream = 0) {
    return hoed::CounterRng(seed, 1000 + stream).normal_vector(n);
}

inline Space random_space(Eigen::Index n, std::uint64_t seed) {
    hoed::CounterRng rng(seed, 5);
    Vector m(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        m[i] = 0.5 + rng.uniform();
    }
    return Space(m);
}

// Symmetric positive definite coefficient matrix with spectrum roughly in [shift, n + shift].
inline Matrix random_spd(Eigen::Index n, std::uint64_t seed, double shift = 1.0) {
    const Matrix b = random_matrix(n, n, seed);
    return b * b.transpose() / static_cast<double>(n) + shift * Matrix::Identity(n, n);
}

// Operator that is self-adjoint and positive in the weighted geometry: K = M^-1 S.
inline OpExpr random_spd_op(const Space& s, std::uint64_t seed, double shift = 1.0) {
    const Matrix k = s.mass().cwiseInverse().asDiagonal() * random_spd(s.dim(), seed, shift);
    return OpExpr::dense(k, s, true);
}

inline hoed::InverseProblem scalar_problem(double c_pr, double g, double noise_var, double m_pr = 0.0) {
    const Space s = Space::euclidean(1);
    const hoed::GaussianMeasure prior(Vector::Constant(1, m_pr), OpExpr::dense(Matrix::Constant(1, 1, c_pr), s, true));
    const OpExpr forward = OpExpr::dense(Matrix::Constant(1, 1, g), s, Space::euclidean(1));
    return hoed::InverseProblem(prior, forward, Vector::Constant(1, noise_var));
}

// Random weighted problem: n parameters, q observations, covariance scaled to `prior_scale`.
inline hoed::InverseProblem random_problem(Eigen::Index n, Eigen::Index q, std::uint64_t seed, bool centered = true,
                                           double prior_scale = 1.0) {
    const Space s = random_space(n, seed);
    const Vector mean = centered ? Vector::Zero(n) : random_vector(n, seed, 3);
    const OpExpr cov = OpExpr::dense(prior_scale * random_spd_op(s, seed + 1, 0.2).dense_coeffs(), s, true);
    const OpExpr forward = OpExpr::dense(random_matrix(q, n, seed + 2), s, Space::euclidean(q));
    hoed::CounterRng rng(seed, 9);
    Vector noise(q);
    for (Eigen::Index j = 0; j < q; ++j) {
        noise[j] = 0.2 + rng.uniform();
    }
    return hoed::InverseProblem(hoed::GaussianMeasure(mean, cov), forward, noise);
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testing
