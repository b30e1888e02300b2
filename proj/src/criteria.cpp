#include "hoed/criteria.hpp"

#include <cmath>
#include <vector>

#include "hoed/errors.hpp"
#include "hoed/parallel.hpp"
#include "hoed/spectral.hpp"

namespace hoed {

double CriterionReport::mc_gap() const {
    return mc_estimate ? std::abs(value - mc_estimate->mean) : 0.0;
}

bool CriterionReport::mc_agrees(double sigmas) const {
    return !mc_estimate || mc_gap() <= sigmas * mc_estimate->std_error;
}

double z0_log(const InverseProblem& p, const Vector& y) {
    const Space& s = p.space();
    const Vector yw = p.whitened_residual(y);
    const Vector b = p.whitened_forward_op().adjoint_apply(yw);
    const Vector cb = p.posterior_cov_dense() * b;
    return -0.5 * yw.squaredNorm() - 0.5 * logdet_i_plus(p.pp_spectrum()) + 0.5 * s.inner(cb, b);
}

double trace_hm_cpost(const InverseProblem& p) {
    const Vector& lam = p.pp_spectrum().values;
    return (lam.array() / (1.0 + lam.array())).sum();
}

double kl_post_prior(const InverseProblem& p, const Vector& y, KlForm form) {
    const Vector d = p.posterior_mean(y) - p.prior().mean();
    const double base = logdet_i_plus(p.pp_spectrum()) - trace_hm_cpost(p);
    if (form == KlForm::CameronMartin) {
        return 0.5 * (base + cameron_martin_inner(p, d, d));
    }
    // <d, G_w^*(G_w m_post - y_w)>_M = (G_w d) . (G_w d - y'), y' = w o (y - G m_pr)
    const Vector gd = p.whitened_forward() * d;
    const Vector resid = gd - p.whitened_residual(y);
    return 0.5 * (base - gd.dot(resid));
}

CriterionReport expected_info_gain(const InverseProblem& p) {
    return CriterionReport{"D", 0.5 * logdet_i_plus(p.pp_spectrum()), p.pp_spectrum(), std::nullopt};
}

CriterionReport expected_info_gain(const InverseProblem& p, double lowrank_tol) {
    Spectrum s = pp_hessian_lowrank(p, lowrank_tol);
    const double v = 0.5 * logdet_i_plus(s);
    return CriterionReport{"D", v, std::move(s), std::nullopt};
}

CriterionReport bayes_risk(const InverseProblem& p) {
    const VarianceReduction vr = variance_reduction(p);
    const double tr_prior = trace(p.prior().cov());
    return CriterionReport{"A", tr_prior - vr.delta, p.pp_spectrum(), std::nullopt};
}

MseDecomposition mse_map(const InverseProblem& p, const Vector& u_true) {
    const Space& s = p.space();
    s.check_member(u_true, "mse_map");
    const Vector shifted = u_true - p.prior().mean();
    const OpExpr hm = misfit_hessian(p);
    const OpExpr cpost = OpExpr::dense(p.posterior_cov_dense(), s, true);
    const Vector bias_vec = cpost.apply(hm.apply(shifted)) - shifted;
    const double variance = trace(OpExpr::compose({cpost, cpost, hm}));
    return MseDecomposition{s.norm_squared(bias_vec), variance};
}

const char* to_string(McTarget t) {
    switch (t) {
        case McTarget::Eig: return "eig";
        case McTarget::BayesRisk: return "bayes_risk";
        case McTarget::Z0: return "z0";
        case McTarget::DblExpData: return "dblexp_data";
        case McTarget::DblExpHessian: return "dblexp_hessian";
        case McTarget::MseAtTruth: return "mse_at_truth";
        case McTarget::ForwardSecondMoment: return "forward_second_moment";
    }
    return "unknown";
}

McEstimate mc_oracle(const InverseProblem& p, McTarget target, const McOptions& opts) {
    if (opts.n_samples < 2) {
        throw ParameterError("mc_oracle: need at least two samples");
    }
    const bool needs_fixed = target == McTarget::Z0 || target == McTarget::MseAtTruth;
    if (needs_fixed && !opts.fixed) {
        throw ParameterError(std::string("mc_oracle: target ") + to_string(target) + " needs a fixed vector");
    }
    if (target == McTarget::Z0) {
        p.forward().codomain().check_member(*opts.fixed, "mc_oracle z0 data");
    }
    if (target == McTarget::MseAtTruth) {
        p.space().check_member(*opts.fixed, "mc_oracle parameter");
    }

    const Space& s = p.space();
    const GaussianMeasure& prior = p.prior();
    prior.cov_spectrum();
    const Vector& m_pr = prior.mean();
    // per-sample closed-form pieces that do not depend on the draw
    const double logdet = logdet_i_plus(p.pp_spectrum());
    const double tr_sh = trace_hm_cpost(p);

    std::vector<double> values(opts.n_samples);
    parallel_for(opts.n_samples, opts.threads, [&](std::size_t i) {
        const std::uint64_t u_stream = 2 * static_cast<std::uint64_t>(i);
        const std::uint64_t y_stream = u_stream + 1;
        switch (target) {
            case McTarget::Z0: {
                const Vector u = sample_one(prior, opts.seed, u_stream);
                values[i] = std::exp(-misfit_phi(p, u, *opts.fixed));
                break;
            }
            case McTarget::ForwardSecondMoment: {
                const Vector u = sample_one(prior, opts.seed, u_stream) - m_pr;
                values[i] = (p.whitened_forward() * u).squaredNorm();
                break;
            }
            case McTarget::MseAtTruth: {
                const Vector y = simulate_data(p, *opts.fixed, opts.seed, y_stream);
                values[i] = s.norm_squared(*opts.fixed - p.posterior_mean(y));
                break;
            }
            default: {
                const Vector u = sample_one(prior, opts.seed, u_stream);
                const Vector y = simulate_data(p, u, opts.seed, y_stream);
                const Vector d = p.posterior_mean(y) - m_pr;
                const Vector gd = p.whitened_forward() * d;
                const Vector yw = p.whitened_residual(y);
                if (target == McTarget::Eig) {
                    values[i] = 0.5 * (logdet - tr_sh - gd.dot(gd - yw));
                } else if (target == McTarget::BayesRisk) {
                    values[i] = s.norm_squared(u - (d + m_pr));
                } else if (target == McTarget::DblExpData) {
                    values[i] = gd.dot(yw);
                } else {
                    values[i] = gd.squaredNorm();
                }
                break;
            }
        }
    });

    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    const double n = static_cast<double>(values.size());
    const double mean = sum / n;
    double ss = 0.0;
    for (double v : values) {
        ss += (v - mean) * (v - mean);
    }
    const double sd = std::sqrt(ss / (n - 1.0));
    return McEstimate{mean, sd / std::sqrt(n), values.size(), opts.seed};
}

}  // namespace hoed
