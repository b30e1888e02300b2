#ifndef HOED_ORACLES_HPP
#define HOED_ORACLES_HPP

// Independent reference computations used by the validation suite and the
// tests. Nothing here is called by the criteria themselves.

#include "hoed/gaussian.hpp"
#include "hoed/inverse_problem.hpp"

namespace hoed::oracle {

/// Posterior from the textbook normal equations C_post = (H_m + C_pr^{-1})^{-1},
/// m_post = C_post (G* Gamma^{-1} y + C_pr^{-1} m_pr), assembled with dense
/// inverses of the prior covariance.
GaussianMeasure dense_posterior(const InverseProblem& p, const Vector& y);

/// Coefficient array of C_pr^{1/2} H_m C_pr^{1/2} from a fresh dense
/// eigendecomposition of the symmetrized prior covariance.
Matrix dense_pp_hessian(const InverseProblem& p);

/// Central finite difference of f along h with step `step`.
template <typename F>
double directional_derivative(F&& f, const Vector& x, const Vector& h, double step) {
    return (f(x + step * h) - f(x - step * h)) / (2.0 * step);
}

}  // namespace hoed::oracle

#endif
