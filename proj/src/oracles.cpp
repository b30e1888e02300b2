#include "hoed/oracles.hpp"

namespace hoed::oracle {

namespace {

// Symmetric form M^{1/2} A M^{-1/2} of an M-self-adjoint coefficient array.
Matrix symmetric_form(const Space& s, const Matrix& a) {
    const Vector sq = s.mass().cwiseSqrt();
    Matrix b = sq.asDiagonal() * a * sq.cwiseInverse().asDiagonal();
    return 0.5 * (b + b.transpose());
}

Matrix from_symmetric_form(const Space& s, const Matrix& b) {
    const Vector sq = s.mass().cwiseSqrt();
    return sq.cwiseInverse().asDiagonal() * b * sq.asDiagonal();
}

}  // namespace

GaussianMeasure dense_posterior(const InverseProblem& p, const Vector& y) {
    const Space& s = p.space();
    const Matrix g = p.forward().to_dense();
    const Vector w2 = p.whitening().cwiseAbs2();
    // H_m = M^{-1} G^T diag(w^2) G
    const Matrix hm = s.mass().cwiseInverse().asDiagonal() * g.transpose() * w2.asDiagonal() * g;
    const Matrix c_pr = symmetric_form(s, p.prior().cov().to_dense());
    const Matrix c_pr_inv = c_pr.inverse();
    const Matrix precision = symmetric_form(s, hm) + c_pr_inv;
    const Matrix c_post_sym = precision.inverse();
    Matrix c_post = from_symmetric_form(s, 0.5 * (c_post_sym + c_post_sym.transpose()));

    const Vector& m_pr = p.prior().mean();
    const Vector rhs = s.mass().cwiseInverse().cwiseProduct(g.transpose() * w2.cwiseProduct(y)) +
                       from_symmetric_form(s, c_pr_inv) * m_pr;
    Vector m_post = c_post * rhs;
    return GaussianMeasure(std::move(m_post), OpExpr::dense(std::move(c_post), s, true));
}

Matrix dense_pp_hessian(const InverseProblem& p) {
    const Space& s = p.space();
    const Matrix c_pr = symmetric_form(s, p.prior().cov().to_dense());
    Eigen::SelfAdjointEigenSolver<Matrix> es(c_pr);
    const Matrix half_sym = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                            es.eigenvectors().transpose();
    const Matrix g = p.forward().to_dense();
    const Vector w2 = p.whitening().cwiseAbs2();
    const Matrix hm = s.mass().cwiseInverse().asDiagonal() * g.transpose() * w2.asDiagonal() * g;
    return from_symmetric_form(s, half_sym * symmetric_form(s, hm) * half_sym);
}

}  // namespace hoed::oracle
