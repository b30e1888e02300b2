#ifndef HOED_SPECTRAL_HPP
#define HOED_SPECTRAL_HPP

#include <cstdint>
#include <optional>

#include "hoed/opexpr.hpp"
#include "hoed/spectrum.hpp"

namespace hoed {

struct EigOptions {
    /// Number of leading eigenpairs; std::nullopt requests the full spectrum.
    std::optional<Eigen::Index> rank;
    /// Residual bound |A e - lambda e| <= tol * max(1, |lambda|).
    double tol = 1e-9;
    /// Starting-vector seed for the Krylov path.
    std::uint64_t seed = 0;
    /// Above this dimension "full" requests still use the dense solver but
    /// partial requests always go through Lanczos.
    Eigen::Index dense_limit = 512;
};

/// Leading eigenpairs of an operator that is self-adjoint in the weighted
/// inner product of its domain. Full spectra use a dense symmetric solver on
/// M^{1/2} A M^{-1/2}; partial spectra use Lanczos with full
/// reorthogonalization in the M-inner product. Degenerate eigenvalues get an
/// arbitrary M-orthonormal basis of their eigenspace.
///
/// Throws NumericalError if the residual bound is not met.
Spectrum eig_self_adjoint(const OpExpr& op, const EigOptions& opts = {});

/// Lanczos path, exposed for testing against the dense path.
Spectrum lanczos_eig(const OpExpr& op, Eigen::Index rank, double tol, std::uint64_t seed);

/// Trace in the weighted geometry. LowRankSpectral returns sum lambda_i;
/// a Composition holding a LowRankSpectral factor is rotated cyclically so
/// that factor comes first and only its eigenvectors are probed. Everything
/// else sums <A f_j, f_j> over the canonical M-orthonormal basis.
double trace(const OpExpr& op);

/// sum_j <A f_j, f_j> over the columns f_j of an M-orthonormal basis.
double trace_in_basis(const OpExpr& op, const Matrix& basis);

/// log det(I + A) = sum_i log(1 + lambda_i). Eigenvalues below
/// trunc_tol * max(lambda_1, 1) are dropped. Throws NumericalError for any
/// retained value <= -1.
double logdet_i_plus(const Spectrum& spec, double trunc_tol = 0.0);

/// A^{1/2} x = sum_i sqrt(lambda_i) <e_i, x> e_i. Components orthogonal to
/// the stored vectors map to zero. Throws NumericalError on eigenvalues
/// below -1e-12.
Vector sqrt_apply(const Spectrum& spec, const Vector& x);

/// Coefficient array of A^{1/2} from a full spectrum.
Matrix sqrt_dense(const Spectrum& spec);

/// Random M-orthonormal basis of the space (columns).
Matrix random_orthonormal_basis(const Space& space, std::uint64_t seed);

}  // namespace hoed

#endif
