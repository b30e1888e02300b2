#include "hoed/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hoed/errors.hpp"
#include "hoed/rng.hpp"

namespace hoed {

Spectrum::Spectrum(Space s, Vector vals, Matrix vecs)
    : space(std::move(s)), values(std::move(vals)), vectors(std::move(vecs)) {
    if (vectors.rows() != space.dim() || vectors.cols() != values.size()) {
        throw DimensionError("Spectrum: vectors must be dim x rank");
    }
}

Spectrum Spectrum::truncated(Eigen::Index r) const {
    r = std::clamp<Eigen::Index>(r, 0, rank());
    return Spectrum(space, values.head(r), vectors.leftCols(r));
}

double Spectrum::orthonormality_defect() const {
    if (rank() == 0) {
        return 0.0;
    }
    const Matrix gram = vectors.transpose() * space.mass().asDiagonal() * vectors;
    return (gram - Matrix::Identity(rank(), rank())).cwiseAbs().maxCoeff();
}

namespace {

void check_residuals(const OpExpr& op, const Spectrum& s, double tol, const char* who) {
    for (Eigen::Index i = 0; i < s.rank(); ++i) {
        const Vector e = s.vectors.col(i);
        const double res = s.space.norm(op.apply(e) - s.values[i] * e);
        if (!(res <= tol * std::max(1.0, std::abs(s.values[i])))) {
            throw NumericalError(std::string(who) + ": eigenpair " + std::to_string(i) + " residual " +
                                 std::to_string(res) + " exceeds tolerance");
        }
    }
}

Spectrum sorted_descending(const Space& space, const Vector& vals, const Matrix& vecs, Eigen::Index keep) {
    std::vector<Eigen::Index> order(vals.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return vals[a] > vals[b]; });
    keep = std::min<Eigen::Index>(keep, vals.size());
    Vector v(keep);
    Matrix e(vecs.rows(), keep);
    for (Eigen::Index i = 0; i < keep; ++i) {
        v[i] = vals[order[i]];
        e.col(i) = vecs.col(order[i]);
    }
    return Spectrum(space, std::move(v), std::move(e));
}

Spectrum dense_eig(const OpExpr& op, Eigen::Index keep) {
    const Space& s = op.domain();
    const Vector sq = s.mass().cwiseSqrt();
    Matrix b = sq.asDiagonal() * op.to_dense() * sq.cwiseInverse().asDiagonal();
    b = 0.5 * (b + b.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(b);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("eig_self_adjoint: dense solver did not converge");
    }
    const Matrix vecs = sq.cwiseInverse().asDiagonal() * solver.eigenvectors();
    return sorted_descending(s, solver.eigenvalues(), vecs, keep);
}

// Orthogonalize v against the first `count` columns of q, twice (CGS2).
void m_orthogonalize(const Space& s, const Matrix& q, Eigen::Index count, Vector& v) {
    if (count == 0) {
        return;
    }
    const auto basis = q.leftCols(count);
    for (int pass = 0; pass < 2; ++pass) {
        const Vector coeffs = basis.transpose() * s.mass().cwiseProduct(v);
        v -= basis * coeffs;
    }
}

}  // namespace

Spectrum lanczos_eig(const OpExpr& op, Eigen::Index rank, double tol, std::uint64_t seed) {
    if (!op.is_square()) {
        throw DimensionError("lanczos_eig: operator is not square");
    }
    const Space& s = op.domain();
    const Eigen::Index n = s.dim();
    rank = std::clamp<Eigen::Index>(rank, 0, n);
    if (rank == 0) {
        return Spectrum(s);
    }

    Matrix q(n, n);
    Matrix aq(n, n);
    Eigen::Index built = 0;
    Eigen::Index target = std::min<Eigen::Index>(n, 2 * rank + 20);
    std::uint64_t restart = 0;
    Vector v;

    auto fresh_start = [&]() {
        CounterRng rng(seed, restart++);
        v = rng.normal_vector(n);
    };
    fresh_start();

    double op_scale = 0.0;
    for (;;) {
        while (built < target) {
            m_orthogonalize(s, q, built, v);
            double nv = s.norm(v);
            // Krylov space went invariant: continue from a new random direction.
            int attempts = 0;
            while (nv <= 1e-10 * std::max(1.0, op_scale) && attempts < 4) {
                fresh_start();
                m_orthogonalize(s, q, built, v);
                nv = s.norm(v);
                ++attempts;
            }
            if (nv == 0.0) {
                break;
            }
            q.col(built) = v / nv;
            aq.col(built) = op.apply(q.col(built));
            op_scale = std::max(op_scale, s.norm(aq.col(built)));
            v = aq.col(built);
            ++built;
        }

        const auto basis = q.leftCols(built);
        Matrix proj = basis.transpose() * s.mass().asDiagonal() * aq.leftCols(built);
        proj = 0.5 * (proj + proj.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Matrix> solver(proj);
        if (solver.info() != Eigen::Success) {
            throw NumericalError("lanczos_eig: projected eigenproblem failed");
        }
        const Matrix ritz = basis * solver.eigenvectors();
        const Matrix a_ritz = aq.leftCols(built) * solver.eigenvectors();
        Spectrum candidate = sorted_descending(s, solver.eigenvalues(), ritz, rank);

        // residuals straight from the stored products, no extra applies
        bool converged = true;
        std::vector<Eigen::Index> order(solver.eigenvalues().size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](auto a, auto b) { return solver.eigenvalues()[a] > solver.eigenvalues()[b]; });
        for (Eigen::Index i = 0; i < candidate.rank(); ++i) {
            const Eigen::Index j = order[i];
            const double theta = solver.eigenvalues()[j];
            const double res = s.norm(a_ritz.col(j) - theta * ritz.col(j));
            if (res > tol * std::max(1.0, std::abs(theta))) {
                converged = false;
                break;
            }
        }
        if (converged) {
            return candidate;
        }
        if (built >= n) {
            throw NumericalError("lanczos_eig: no convergence within the iteration budget");
        }
        target = std::min<Eigen::Index>(n, 2 * target);
    }
}

Spectrum eig_self_adjoint(const OpExpr& op, const EigOptions& opts) {
    if (!op.is_square()) {
        throw DimensionError("eig_self_adjoint: operator is not square");
    }
    const Eigen::Index n = op.domain().dim();
    Spectrum out(op.domain());
    if (!opts.rank.has_value() || *opts.rank >= n) {
        out = dense_eig(op, n);
    } else if (n <= 32) {
        out = dense_eig(op, *opts.rank);
    } else {
        return lanczos_eig(op, *opts.rank, opts.tol, opts.seed);
    }
    check_residuals(op, out, opts.tol, "eig_self_adjoint");
    return out;
}

double trace_in_basis(const OpExpr& op, const Matrix& basis) {
    if (!op.is_square()) {
        throw DimensionError("trace: operator is not square");
    }
    const Space& s = op.domain();
    if (basis.rows() != s.dim()) {
        throw DimensionError("trace_in_basis: basis vectors have the wrong length");
    }
    double t = 0.0;
    for (Eigen::Index j = 0; j < basis.cols(); ++j) {
        const Vector f = basis.col(j);
        t += s.inner(op.apply(f), f);
    }
    return t;
}

double trace(const OpExpr& op) {
    if (!op.is_square()) {
        throw DimensionError("trace: unsupported non-square operator");
    }
    const Space& s = op.domain();
    switch (op.kind()) {
        case OpExpr::Kind::LowRankSpectral:
            return op.spectrum().values.sum();
        case OpExpr::Kind::Diagonal:
            return op.diagonal_values().sum();
        case OpExpr::Kind::Dense:
            // <A f_j, f_j> with f_j = u_j / sqrt(m_j) reduces to A_jj
            return op.dense_coeffs().trace();
        case OpExpr::Kind::Composition: {
            const auto& fs = op.factors();
            const auto low = std::find_if(fs.begin(), fs.end(), [](const OpExpr& f) {
                return f.kind() == OpExpr::Kind::LowRankSpectral;
            });
            if (low != fs.end()) {
                // tr(F_1 ... L ... F_k) = tr(L F_{i+1} ... F_k F_1 ... F_{i-1})
                std::vector<OpExpr> rest(low + 1, fs.end());
                rest.insert(rest.end(), fs.begin(), low);
                const Spectrum& spec = low->spectrum();
                if (rest.empty()) {
                    return spec.values.sum();
                }
                const OpExpr tail = OpExpr::compose(std::move(rest));
                if (tail.domain() != spec.space || tail.codomain() != spec.space) {
                    throw DimensionError("trace: cyclic rotation does not close on the low-rank factor's space");
                }
                double t = 0.0;
                for (Eigen::Index i = 0; i < spec.rank(); ++i) {
                    const Vector e = spec.vectors.col(i);
                    t += spec.values[i] * spec.space.inner(tail.apply(e), e);
                }
                return t;
            }
            break;
        }
        default:
            break;
    }
    const Vector inv_sqrt = s.mass().cwiseSqrt().cwiseInverse();
    double t = 0.0;
    Vector f = Vector::Zero(s.dim());
    for (Eigen::Index j = 0; j < s.dim(); ++j) {
        f.setZero();
        f[j] = inv_sqrt[j];
        t += s.inner(op.apply(f), f);
    }
    return t;
}

double logdet_i_plus(const Spectrum& spec, double trunc_tol) {
    if (spec.rank() == 0) {
        return 0.0;
    }
    const double cutoff = trunc_tol * std::max(spec.values.maxCoeff(), 1.0);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < spec.rank(); ++i) {
        const double lam = spec.values[i];
        if (trunc_tol > 0.0 && lam < cutoff) {
            continue;
        }
        if (lam <= -1.0) {
            throw NumericalError("logdet_i_plus: eigenvalue " + std::to_string(lam) + " <= -1");
        }
        acc += std::log1p(lam);
    }
    return acc;
}

Vector sqrt_apply(const Spectrum& spec, const Vector& x) {
    spec.space.check_member(x, "sqrt_apply");
    Vector roots(spec.rank());
    for (Eigen::Index i = 0; i < spec.rank(); ++i) {
        const double lam = spec.values[i];
        if (lam < -1e-12) {
            throw NumericalError("sqrt_apply: negative eigenvalue " + std::to_string(lam));
        }
        roots[i] = std::sqrt(std::max(lam, 0.0));
    }
    const Vector coords = spec.vectors.transpose() * spec.space.mass().cwiseProduct(x);
    return spec.vectors * roots.cwiseProduct(coords);
}

Matrix sqrt_dense(const Spectrum& spec) {
    Vector roots(spec.rank());
    for (Eigen::Index i = 0; i < spec.rank(); ++i) {
        if (spec.values[i] < -1e-12) {
            throw NumericalError("sqrt_dense: negative eigenvalue " + std::to_string(spec.values[i]));
        }
        roots[i] = std::sqrt(std::max(spec.values[i], 0.0));
    }
    return spec.vectors * roots.asDiagonal() * spec.vectors.transpose() * spec.space.mass().asDiagonal();
}

Matrix random_orthonormal_basis(const Space& space, std::uint64_t seed) {
    const Eigen::Index n = space.dim();
    CounterRng rng(seed, 0);
    Matrix g(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        g.col(j) = rng.normal_vector(n);
    }
    const Eigen::HouseholderQR<Matrix> qr(g);
    const Matrix orth = qr.householderQ();
    // Euclidean-orthonormal columns become M-orthonormal after M^{-1/2}
    return space.mass().cwiseSqrt().cwiseInverse().asDiagonal() * orth;
}

}  // namespace hoed
