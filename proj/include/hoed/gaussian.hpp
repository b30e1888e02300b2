#ifndef HOED_GAUSSIAN_HPP
#define HOED_GAUSSIAN_HPP

#include <cstdint>
#include <memory>
#include <vector>

#include "hoed/opexpr.hpp"
#include "hoed/spectrum.hpp"

namespace hoed {

/// N(mean, cov) on a weighted space. The covariance spectrum is computed on
/// first use and shared between copies; eigenvalues within 1e-12 of zero
/// from below are clamped to zero.
class GaussianMeasure {
public:
    /// Throws if cov is not square over mean's space or fails the
    /// self-adjointness check.
    GaussianMeasure(Vector mean, OpExpr cov);
    /// Seeds the spectrum cache with a known factorization of cov.
    GaussianMeasure(Vector mean, OpExpr cov, Spectrum cov_spectrum);

    const Space& space() const { return cov_.domain(); }
    const Vector& mean() const { return mean_; }
    const OpExpr& cov() const { return cov_; }
    const Spectrum& cov_spectrum() const;
    bool is_centered() const { return mean_.isZero(0.0); }

private:
    struct Cache;
    Vector mean_;
    OpExpr cov_;
    std::shared_ptr<Cache> cache_;
};

/// x = m + sum_i sqrt(lambda_i) z_i e_i; sample j reads stream j of the
/// counter generator keyed by `seed`.
std::vector<Vector> sample(const GaussianMeasure& mu, std::size_t count, std::uint64_t seed, int threads = 1);

/// One draw from stream `stream_id`.
Vector sample_one(const GaussianMeasure& mu, std::uint64_t seed, std::uint64_t stream_id);

/// Law of x -> A x + b: N(A m + b, A Q A*), covariance kept as a composition.
GaussianMeasure pushforward_affine(const GaussianMeasure& mu, const OpExpr& a, const Vector& b);

/// E_mu <A x, x> = tr(A Q) + <A m, m>.
double expect_quad_form(const OpExpr& a, const GaussianMeasure& mu);

/// log of  E_mu exp{-1/2 <A x,x> + <b,x>}
///       = -1/2 log det(I + Q^{1/2} A Q^{1/2}) + 1/2 |(I + Q^{1/2} A Q^{1/2})^{-1/2} Q^{1/2} b|^2
/// for centered mu and positive semidefinite A.
double gaussian_exp_integral(const OpExpr& a, const Vector& b, const GaussianMeasure& mu);

/// Finite-dimensional KL(post || prior) from dense factorizations of both
/// covariances, including the explicit inverse of the prior covariance.
/// Reference only: meaningful at fixed dimension.
double kl_gaussian_ref(const GaussianMeasure& post, const GaussianMeasure& prior);

}  // namespace hoed

#endif
