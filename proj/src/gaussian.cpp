#include "hoed/gaussian.hpp"

#include <cmath>
#include <mutex>
#include <optional>

#include "hoed/errors.hpp"
#include "hoed/parallel.hpp"
#include "hoed/rng.hpp"
#include "hoed/spectral.hpp"

namespace hoed {

namespace {

constexpr double kSelfAdjointTol = 1e-10;
constexpr double kClamp = 1e-12;
// relative cut for realizing Q^{1/2} A Q^{1/2}
constexpr double kSqrtTruncation = 1e-12;

Spectrum clamped(Spectrum s) {
    const double scale = std::max(1.0, s.rank() > 0 ? s.values.cwiseAbs().maxCoeff() : 0.0);
    for (Eigen::Index i = 0; i < s.rank(); ++i) {
        if (s.values[i] < -kClamp * scale) {
            throw NumericalError("GaussianMeasure: covariance has negative eigenvalue " +
                                 std::to_string(s.values[i]));
        }
        s.values[i] = std::max(s.values[i], 0.0);
    }
    return s;
}

}  // namespace

struct GaussianMeasure::Cache {
    std::once_flag once;
    std::optional<Spectrum> spectrum;
};

GaussianMeasure::GaussianMeasure(Vector mean, OpExpr cov)
    : mean_(std::move(mean)), cov_(std::move(cov)), cache_(std::make_shared<Cache>()) {
    if (!cov_.is_square()) {
        throw DimensionError("GaussianMeasure: covariance must map the space to itself");
    }
    cov_.domain().check_member(mean_, "GaussianMeasure mean");
    if (self_adjoint_defect(cov_, 3, 0x5eed) > kSelfAdjointTol) {
        throw NumericalError("GaussianMeasure: covariance is not self-adjoint");
    }
}

GaussianMeasure::GaussianMeasure(Vector mean, OpExpr cov, Spectrum cov_spectrum)
    : GaussianMeasure(std::move(mean), std::move(cov)) {
    if (cov_spectrum.space != cov_.domain()) {
        throw DimensionError("GaussianMeasure: spectrum lives on a different space");
    }
    std::call_once(cache_->once, [&] { cache_->spectrum = clamped(std::move(cov_spectrum)); });
}

const Spectrum& GaussianMeasure::cov_spectrum() const {
    std::call_once(cache_->once, [&] { cache_->spectrum = clamped(eig_self_adjoint(cov_)); });
    return *cache_->spectrum;
}

Vector sample_one(const GaussianMeasure& mu, std::uint64_t seed, std::uint64_t stream_id) {
    const Spectrum& s = mu.cov_spectrum();
    CounterRng rng(seed, stream_id);
    const Vector z = rng.normal_vector(s.rank());
    return mu.mean() + s.vectors * s.values.cwiseSqrt().cwiseProduct(z);
}

std::vector<Vector> sample(const GaussianMeasure& mu, std::size_t count, std::uint64_t seed, int threads) {
    mu.cov_spectrum();
    std::vector<Vector> out(count);
    parallel_for(count, threads, [&](std::size_t i) { out[i] = sample_one(mu, seed, i); });
    return out;
}

GaussianMeasure pushforward_affine(const GaussianMeasure& mu, const OpExpr& a, const Vector& b) {
    if (a.domain() != mu.space()) {
        throw DimensionError("pushforward_affine: map domain differs from the measure's space");
    }
    a.codomain().check_member(b, "pushforward_affine shift");
    OpExpr cov = OpExpr::compose({a, mu.cov(), adjoint(a)}, true);
    return GaussianMeasure(a.apply(mu.mean()) + b, std::move(cov));
}

double expect_quad_form(const OpExpr& a, const GaussianMeasure& mu) {
    if (a.domain() != mu.space() || a.codomain() != mu.space()) {
        throw DimensionError("expect_quad_form: operator must act on the measure's space");
    }
    const double tr = trace(OpExpr::compose({a, mu.cov()}));
    return tr + mu.space().inner(a.apply(mu.mean()), mu.mean());
}

double gaussian_exp_integral(const OpExpr& a, const Vector& b, const GaussianMeasure& mu) {
    if (!mu.is_centered()) {
        throw ParameterError("gaussian_exp_integral: measure must be centered");
    }
    const Space& s = mu.space();
    if (a.domain() != s || a.codomain() != s) {
        throw DimensionError("gaussian_exp_integral: operator must act on the measure's space");
    }
    s.check_member(b, "gaussian_exp_integral linear term");

    Spectrum qs = mu.cov_spectrum();
    if (qs.rank() > 0) {
        const double cut = kSqrtTruncation * qs.values.maxCoeff();
        Eigen::Index keep = 0;
        while (keep < qs.rank() && qs.values[keep] > cut) {
            ++keep;
        }
        qs = qs.truncated(keep);
    }
    const OpExpr q_half = OpExpr::dense(sqrt_dense(qs), s, true);
    const OpExpr tilde = OpExpr::compose({q_half, a, q_half}, true);
    const Spectrum ts = eig_self_adjoint(tilde);
    const double scale = std::max(1.0, ts.rank() > 0 ? std::abs(ts.values[0]) : 0.0);
    if (ts.rank() > 0 && ts.values[ts.rank() - 1] < -1e-10 * scale) {
        throw ParameterError("gaussian_exp_integral: operator is indefinite");
    }
    double logdet = 0.0;
    double quad = 0.0;
    const Vector qb = q_half.apply(b);
    const Vector coords = ts.vectors.transpose() * s.mass().cwiseProduct(qb);
    for (Eigen::Index i = 0; i < ts.rank(); ++i) {
        const double lam = std::max(ts.values[i], 0.0);
        logdet += std::log1p(lam);
        quad += coords[i] * coords[i] / (1.0 + lam);
    }
    return -0.5 * logdet + 0.5 * quad;
}

double kl_gaussian_ref(const GaussianMeasure& post, const GaussianMeasure& prior) {
    if (post.space() != prior.space()) {
        throw DimensionError("kl_gaussian_ref: measures live on different spaces");
    }
    const Space& s = prior.space();
    const Eigen::Index n = s.dim();
    const Vector sq = s.mass().cwiseSqrt();
    auto symmetric = [&](const OpExpr& c) {
        Matrix m = sq.asDiagonal() * c.to_dense() * sq.cwiseInverse().asDiagonal();
        return Matrix(0.5 * (m + m.transpose()));
    };
    const Matrix c_pr = symmetric(prior.cov());
    const Matrix c_post = symmetric(post.cov());

    const Eigen::LLT<Matrix> llt_pr(c_pr);
    if (llt_pr.info() != Eigen::Success) {
        throw NumericalError("kl_gaussian_ref: prior covariance is singular");
    }
    const Eigen::LLT<Matrix> llt_post(c_post);
    if (llt_post.info() != Eigen::Success) {
        throw NumericalError("kl_gaussian_ref: posterior covariance is not positive definite");
    }
    const double logdet_pr = 2.0 * llt_pr.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const double logdet_post = 2.0 * llt_post.matrixL().toDenseMatrix().diagonal().array().log().sum();

    const Matrix pr_inv_post = llt_pr.solve(c_post);
    const Vector d = sq.cwiseProduct(post.mean() - prior.mean());
    const double mahal = d.dot(llt_pr.solve(d));

    return 0.5 * (-(logdet_post - logdet_pr) - static_cast<double>(n) + pr_inv_post.trace() + mahal);
}

}  // namespace hoed
