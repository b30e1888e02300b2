#ifndef HOED_INVERSE_PROBLEM_HPP
#define HOED_INVERSE_PROBLEM_HPP

#include <cstdint>
#include <memory>

#include "hoed/design_weights.hpp"
#include "hoed/gaussian.hpp"
#include "hoed/opexpr.hpp"
#include "hoed/spectrum.hpp"

namespace hoed {

/// Linear Gaussian inverse problem y = G u + eta, eta ~ N(0, diag(noise_var)),
/// u ~ prior, with per-row design weights.
///
/// Every criterion is evaluated on the whitened problem: row j of G and of
/// the data is scaled by sqrt(xi_j)/sigma_j, which turns the likelihood into
/// the unit-noise case. Construction computes and caches the prior square
/// root, the whitened forward array and the full nonzero spectrum of the
/// prior-preconditioned misfit Hessian; instances are immutable afterwards.
class InverseProblem {
public:
    /// Throws DimensionError on size mismatches and ParameterError for a
    /// degenerate prior, non-positive noise or a non-Euclidean data space.
    InverseProblem(GaussianMeasure prior, OpExpr forward, Vector noise_var);
    InverseProblem(GaussianMeasure prior, OpExpr forward, Vector noise_var, DesignWeights design);

    /// Same prior, forward map and noise with different weights. Shares the
    /// prior factorization.
    InverseProblem with_design(DesignWeights design) const;
    /// Noise variances multiplied by `factor`.
    InverseProblem with_noise_scaled(double factor) const;

    const Space& space() const { return prior_.space(); }
    const GaussianMeasure& prior() const { return prior_; }
    const OpExpr& forward() const { return forward_; }
    const Vector& noise_var() const { return noise_var_; }
    const DesignWeights& design() const { return design_; }
    Eigen::Index num_observations() const { return noise_var_.size(); }

    /// sqrt(xi_j) / sigma_j
    const Vector& whitening() const;
    /// diag(whitening) G as a q x n array.
    const Matrix& whitened_forward() const;
    /// The whitened forward array as an operator into Euclidean R^q.
    const OpExpr& whitened_forward_op() const;
    /// C_pr^{1/2} (self-adjoint, from the prior spectrum).
    const OpExpr& prior_sqrt() const;
    /// Full nonzero spectrum of C_pr^{1/2} G* Gamma^{-1} G C_pr^{1/2}.
    const Spectrum& pp_spectrum() const;
    /// Coefficient array of C_post, assembled as C_pr - sum_i alpha_i (C_pr^{1/2} e_i)(C_pr^{1/2} e_i)^*.
    const Matrix& posterior_cov_dense() const;
    /// n x q array mapping the raw data residual y - G m_pr to m_post - m_pr.
    const Matrix& posterior_gain() const;

    /// w o (y - G m_pr)
    Vector whitened_residual(const Vector& y) const;
    /// m_pr + posterior_gain (y - G m_pr)
    Vector posterior_mean(const Vector& y) const;

private:
    struct PriorCache;
    struct DesignCache;
    InverseProblem(GaussianMeasure prior, OpExpr forward, Vector noise_var, DesignWeights design,
                   std::shared_ptr<const PriorCache> prior_cache);
    void build_design_cache();

    GaussianMeasure prior_;
    OpExpr forward_;
    Vector noise_var_;
    DesignWeights design_;
    std::shared_ptr<const PriorCache> prior_cache_;
    std::shared_ptr<const DesignCache> design_cache_;
};

/// Posterior measure together with the H~_m spectrum that defines it.
struct PosteriorBundle {
    GaussianMeasure posterior;
    Spectrum pp_spectrum;
    Vector data;
};

struct VarianceReduction {
    /// tr(C_pr) - tr(C_post)
    double delta;
    /// lambda_j / (1 + lambda_j)
    Vector alphas;
    Spectrum directions;
};

/// G u + eta. Active rows get noise variance sigma_j^2 / xi_j, the variance
/// the weighted likelihood assumes; rows with xi_j = 0 get sigma_j^2.
/// Stream `stream_id` of the counter generator keyed by `seed` is consumed.
Vector simulate_data(const InverseProblem& p, const Vector& u, std::uint64_t seed, std::uint64_t stream_id = 0);

/// 1/2 (G u - y)^T Gamma^{-1} (G u - y), design-weighted.
double misfit_phi(const InverseProblem& p, const Vector& u, const Vector& y);
/// The same value expanded as 1/2 <H_m u,u> - <G* Gamma^{-1} y,u> + 1/2 |y|^2_Gamma.
double misfit_phi_expanded(const InverseProblem& p, const Vector& u, const Vector& y);

/// H_m = G* Gamma^{-1} G as a composition.
OpExpr misfit_hessian(const InverseProblem& p);
/// H~_m = C_pr^{1/2} H_m C_pr^{1/2} as a self-adjoint composition.
OpExpr pp_hessian(const InverseProblem& p);
/// Leading eigenpairs of H~_m: the smallest r with lambda_{r+1} < tol * max(lambda_1, 1).
/// Never more than the number of active observations.
Spectrum pp_hessian_lowrank(const InverseProblem& p, double tol);

/// C_post = C_pr^{1/2} (I + H~_m)^{-1} C_pr^{1/2},
/// m_post = m_pr + C_post G* Gamma^{-1} (y - G m_pr).
PosteriorBundle posterior(const InverseProblem& p, const Vector& y);
/// The covariance expression used by `posterior`.
OpExpr posterior_cov(const InverseProblem& p);

/// <C_pr^{-1/2} x, C_pr^{-1/2} y> from the prior spectrum, keeping
/// eigenvalues above 1e-12 * lambda_max. Throws CameronMartinError if x or
/// y has components outside the retained span.
double cameron_martin_inner(const InverseProblem& p, const Vector& x, const Vector& y);

/// Phi(u; y) + 1/2 |u - m_pr|^2_C
double map_objective(const InverseProblem& p, const Vector& u, const Vector& y);

VarianceReduction variance_reduction(const InverseProblem& p);

}  // namespace hoed

#endif
