#include "hoed/inverse_problem.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hoed/errors.hpp"
#include "hoed/rng.hpp"
#include "hoed/spectral.hpp"

namespace hoed {

namespace {

constexpr double kCameronMartinTruncation = 1e-12;
constexpr double kPpNullTol = 1e-14;
constexpr double kPpEigTol = 1e-11;

}  // namespace

// ---------------------------------------------------------------- DesignWeights

DesignWeights::DesignWeights(Vector weights) : weights_(std::move(weights)) {
    for (Eigen::Index j = 0; j < weights_.size(); ++j) {
        if (!(weights_[j] >= 0.0 && weights_[j] <= 1.0)) {
            throw ParameterError("DesignWeights: weight " + std::to_string(j) + " outside [0,1]");
        }
    }
}

DesignWeights DesignWeights::all(Eigen::Index count) { return DesignWeights(Vector::Ones(count)); }
DesignWeights DesignWeights::none(Eigen::Index count) { return DesignWeights(Vector::Zero(count)); }

DesignWeights DesignWeights::subset(Eigen::Index count, const std::vector<Eigen::Index>& active) {
    Vector w = Vector::Zero(count);
    for (auto j : active) {
        if (j < 0 || j >= count) {
            throw DimensionError("DesignWeights::subset: index " + std::to_string(j) + " out of range");
        }
        w[j] = 1.0;
    }
    return DesignWeights(std::move(w));
}

std::vector<Eigen::Index> DesignWeights::active() const {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < weights_.size(); ++j) {
        if (weights_[j] > 0.0) {
            idx.push_back(j);
        }
    }
    return idx;
}

DesignWeights DesignWeights::with(Eigen::Index j, double weight) const {
    Vector w = weights_;
    w[j] = weight;
    return DesignWeights(std::move(w));
}

// ---------------------------------------------------------------- InverseProblem

struct InverseProblem::PriorCache {
    OpExpr sqrt_op;
    Matrix cov_dense;
    Eigen::Index cm_rank;  // retained prior eigenpairs for the Cameron-Martin product
};

struct InverseProblem::DesignCache {
    Vector whitening;
    Matrix whitened;
    OpExpr whitened_op;
    Spectrum pp;
    Matrix post_cov;
    Matrix gain;
    OpExpr post_cov_op;
};

InverseProblem::InverseProblem(GaussianMeasure prior, OpExpr forward, Vector noise_var)
    : InverseProblem(std::move(prior), std::move(forward), noise_var, DesignWeights::all(noise_var.size())) {}

InverseProblem::InverseProblem(GaussianMeasure prior, OpExpr forward, Vector noise_var, DesignWeights design)
    : InverseProblem(std::move(prior), std::move(forward), std::move(noise_var), std::move(design), nullptr) {}

InverseProblem::InverseProblem(GaussianMeasure prior, OpExpr forward, Vector noise_var, DesignWeights design,
                               std::shared_ptr<const PriorCache> prior_cache)
    : prior_(std::move(prior)),
      forward_(std::move(forward)),
      noise_var_(std::move(noise_var)),
      design_(std::move(design)),
      prior_cache_(std::move(prior_cache)) {
    if (forward_.domain() != prior_.space()) {
        throw DimensionError("InverseProblem: forward map domain differs from the prior's space");
    }
    if (!forward_.codomain().is_euclidean()) {
        throw ParameterError("InverseProblem: data space must carry the identity weighting");
    }
    const Eigen::Index q = forward_.codomain().dim();
    if (noise_var_.size() != q) {
        throw DimensionError("InverseProblem: " + std::to_string(noise_var_.size()) + " noise variances for " +
                             std::to_string(q) + " observations");
    }
    if (design_.size() != q) {
        throw DimensionError("InverseProblem: design has " + std::to_string(design_.size()) + " weights for " +
                             std::to_string(q) + " observations");
    }
    for (Eigen::Index j = 0; j < q; ++j) {
        if (!(noise_var_[j] > 0.0)) {
            throw ParameterError("InverseProblem: noise variance " + std::to_string(j) + " is not positive");
        }
    }

    if (!prior_cache_) {
        const Spectrum& ps = prior_.cov_spectrum();
        if (ps.rank() < ps.dim() || !(ps.values.minCoeff() > 0.0)) {
            throw ParameterError("InverseProblem: prior covariance is degenerate");
        }
        const double cut = kCameronMartinTruncation * ps.values.maxCoeff();
        Eigen::Index keep = 0;
        while (keep < ps.rank() && ps.values[keep] > cut) {
            ++keep;
        }
        auto cache = std::make_shared<PriorCache>(
            PriorCache{OpExpr::dense(sqrt_dense(ps), space(), true), prior_.cov().to_dense(), keep});
        prior_cache_ = std::move(cache);
    }
    build_design_cache();
}

void InverseProblem::build_design_cache() {
    const Space& s = space();
    const Eigen::Index q = num_observations();
    const Vector& mass = s.mass();

    Vector w(q);
    for (Eigen::Index j = 0; j < q; ++j) {
        w[j] = std::sqrt(design_[j]) / std::sqrt(noise_var_[j]);
    }
    const Matrix g = forward_.to_dense();
    Matrix gw = w.asDiagonal() * g;
    OpExpr gw_op = OpExpr::dense(gw, s, forward_.codomain());

    const OpExpr& c_half = prior_cache_->sqrt_op;
    const OpExpr pp_op = OpExpr::compose({c_half, adjoint(gw_op), gw_op, c_half}, true);
    const Eigen::Index active = static_cast<Eigen::Index>(design_.active().size());
    const Eigen::Index r = std::min(active, s.dim());
    Spectrum pp(s);
    if (r > 0) {
        EigOptions opts;
        opts.rank = r;
        opts.tol = kPpEigTol;
        pp = eig_self_adjoint(pp_op, opts);
        const double scale = std::max(1.0, pp.values.cwiseAbs().maxCoeff());
        for (Eigen::Index i = 0; i < pp.rank(); ++i) {
            if (pp.values[i] < -1e-12 * scale) {
                throw NumericalError("InverseProblem: prior-preconditioned Hessian is not positive semidefinite");
            }
            pp.values[i] = std::max(pp.values[i], 0.0);
        }
        // directions the data cannot see at all (e.g. G = 0) are not part of the spectrum
        Eigen::Index keep = pp.rank();
        while (keep > 0 && pp.values[keep - 1] <= kPpNullTol * scale) {
            --keep;
        }
        pp = pp.truncated(keep);
    }

    // C_post = C_pr - B diag(alpha) B^* with B = C_pr^{1/2} E
    const Matrix b = c_half.dense_coeffs() * pp.vectors;
    const Vector alpha = pp.values.array() / (1.0 + pp.values.array());
    Matrix post = prior_cache_->cov_dense - b * alpha.asDiagonal() * b.transpose() * mass.asDiagonal();

    // m_post - m_pr = C_post M^{-1} G_w^T w o (y - G m_pr)
    Matrix gain = post * mass.cwiseInverse().asDiagonal() * gw.transpose() * w.asDiagonal();

    OpExpr post_op = OpExpr::compose(
        {c_half, OpExpr::shifted_inverse(OpExpr::low_rank(pp), 1.0), c_half}, true);

    design_cache_ = std::make_shared<const DesignCache>(DesignCache{std::move(w), std::move(gw), std::move(gw_op),
                                                                    std::move(pp), std::move(post), std::move(gain),
                                                                    std::move(post_op)});
}

InverseProblem InverseProblem::with_design(DesignWeights design) const {
    return InverseProblem(prior_, forward_, noise_var_, std::move(design), prior_cache_);
}

InverseProblem InverseProblem::with_noise_scaled(double factor) const {
    if (!(factor > 0.0)) {
        throw ParameterError("with_noise_scaled: factor must be positive");
    }
    return InverseProblem(prior_, forward_, noise_var_ * factor, design_, prior_cache_);
}

const Vector& InverseProblem::whitening() const { return design_cache_->whitening; }
const Matrix& InverseProblem::whitened_forward() const { return design_cache_->whitened; }
const OpExpr& InverseProblem::whitened_forward_op() const { return design_cache_->whitened_op; }
const OpExpr& InverseProblem::prior_sqrt() const { return prior_cache_->sqrt_op; }
const Spectrum& InverseProblem::pp_spectrum() const { return design_cache_->pp; }
const Matrix& InverseProblem::posterior_cov_dense() const { return design_cache_->post_cov; }
const Matrix& InverseProblem::posterior_gain() const { return design_cache_->gain; }

Vector InverseProblem::whitened_residual(const Vector& y) const {
    forward_.codomain().check_member(y, "whitened_residual");
    return whitening().cwiseProduct(y - forward_.apply(prior_.mean()));
}

Vector InverseProblem::posterior_mean(const Vector& y) const {
    forward_.codomain().check_member(y, "posterior_mean");
    return prior_.mean() + posterior_gain() * (y - forward_.apply(prior_.mean()));
}

// ---------------------------------------------------------------- operations

Vector simulate_data(const InverseProblem& p, const Vector& u, std::uint64_t seed, std::uint64_t stream_id) {
    p.space().check_member(u, "simulate_data");
    Vector y = p.forward().apply(u);
    CounterRng rng(seed, stream_id);
    const DesignWeights& xi = p.design();
    for (Eigen::Index j = 0; j < y.size(); ++j) {
        const double var = xi[j] > 0.0 ? p.noise_var()[j] / xi[j] : p.noise_var()[j];
        y[j] += std::sqrt(var) * rng.normal();
    }
    return y;
}

double misfit_phi(const InverseProblem& p, const Vector& u, const Vector& y) {
    p.space().check_member(u, "misfit_phi");
    p.forward().codomain().check_member(y, "misfit_phi");
    const Vector r = p.whitening().cwiseProduct(p.forward().apply(u) - y);
    return 0.5 * r.squaredNorm();
}

double misfit_phi_expanded(const InverseProblem& p, const Vector& u, const Vector& y) {
    p.space().check_member(u, "misfit_phi_expanded");
    p.forward().codomain().check_member(y, "misfit_phi_expanded");
    const Space& s = p.space();
    const Vector yw = p.whitening().cwiseProduct(y);
    const Vector b = p.whitened_forward_op().adjoint_apply(yw);
    return 0.5 * s.inner(misfit_hessian(p).apply(u), u) - s.inner(b, u) + 0.5 * yw.squaredNorm();
}

OpExpr misfit_hessian(const InverseProblem& p) {
    const OpExpr& gw = p.whitened_forward_op();
    return OpExpr::compose({adjoint(gw), gw}, true);
}

OpExpr pp_hessian(const InverseProblem& p) {
    const OpExpr& c_half = p.prior_sqrt();
    const OpExpr& gw = p.whitened_forward_op();
    return OpExpr::compose({c_half, adjoint(gw), gw, c_half}, true);
}

Spectrum pp_hessian_lowrank(const InverseProblem& p, double tol) {
    if (!(tol > 0.0)) {
        throw ParameterError("pp_hessian_lowrank: tolerance must be positive");
    }
    const Spectrum& full = p.pp_spectrum();
    if (full.rank() == 0) {
        return full;
    }
    const double cut = tol * std::max(full.values[0], 1.0);
    Eigen::Index r = 0;
    while (r < full.rank() && full.values[r] >= cut) {
        ++r;
    }
    return full.truncated(r);
}

OpExpr posterior_cov(const InverseProblem& p) {
    const OpExpr& c_half = p.prior_sqrt();
    return OpExpr::compose({c_half, OpExpr::shifted_inverse(OpExpr::low_rank(p.pp_spectrum()), 1.0), c_half}, true);
}

PosteriorBundle posterior(const InverseProblem& p, const Vector& y) {
    GaussianMeasure post(p.posterior_mean(y), posterior_cov(p));
    return PosteriorBundle{std::move(post), p.pp_spectrum(), y};
}

double cameron_martin_inner(const InverseProblem& p, const Vector& x, const Vector& y) {
    const Space& s = p.space();
    s.check_member(x, "cameron_martin_inner");
    s.check_member(y, "cameron_martin_inner");
    const Spectrum& ps = p.prior().cov_spectrum();
    Eigen::Index keep = 0;
    const double cut = kCameronMartinTruncation * ps.values.maxCoeff();
    while (keep < ps.rank() && ps.values[keep] > cut) {
        ++keep;
    }
    const auto basis = ps.vectors.leftCols(keep);
    const Vector cx = basis.transpose() * s.mass().cwiseProduct(x);
    const Vector cy = basis.transpose() * s.mass().cwiseProduct(y);
    for (const auto* pair : {&x, &y}) {
        const Vector& v = *pair;
        const Vector& c = (pair == &x) ? cx : cy;
        const double outside = s.norm(v - basis * c);
        if (outside > 1e-10 * std::max(s.norm(v), 1e-300)) {
            throw CameronMartinError("cameron_martin_inner: vector has components outside the retained prior span");
        }
    }
    return (cx.array() * cy.array() / ps.values.head(keep).array()).sum();
}

double map_objective(const InverseProblem& p, const Vector& u, const Vector& y) {
    const Vector d = u - p.prior().mean();
    return misfit_phi(p, u, y) + 0.5 * cameron_martin_inner(p, d, d);
}

VarianceReduction variance_reduction(const InverseProblem& p) {
    const Spectrum& pp = p.pp_spectrum();
    const Space& s = p.space();
    Vector alphas = pp.values.array() / (1.0 + pp.values.array());
    double delta = 0.0;
    for (Eigen::Index j = 0; j < pp.rank(); ++j) {
        const Vector e = pp.vectors.col(j);
        delta += alphas[j] * s.inner(p.prior().cov().apply(e), e);
    }
    return VarianceReduction{delta, std::move(alphas), pp};
}

}  // namespace hoed
