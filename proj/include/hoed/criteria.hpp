#ifndef HOED_CRITERIA_HPP
#define HOED_CRITERIA_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "hoed/inverse_problem.hpp"

namespace hoed {

/// Monte Carlo estimate: sample mean and std_error = sample std / sqrt(n).
struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
};

struct CriterionReport {
    std::string criterion_name;
    double value = 0.0;
    Spectrum spectrum_used;
    std::optional<McEstimate> mc_estimate;

    /// |value - mc.mean|, or 0 without an estimate.
    double mc_gap() const;
    /// mc_gap() <= sigmas * std_error
    bool mc_agrees(double sigmas = 3.0) const;
};

enum class KlForm { Misfit, CameronMartin };

/// log Z_0(y), Z_0(y) = integral of exp{-Phi(u;y)} over the prior:
/// -1/2 |y'|^2 - 1/2 log det(I + H~_m) + 1/2 <C_post b, b>, with y' the
/// whitened residual y - G m_pr and b = G* y'.
double z0_log(const InverseProblem& p, const Vector& y);

/// KL(posterior || prior) in nats.
///   Misfit:        1/2 [log det(I+H~) - tr(H_m C_post) - <m_post - m_pr, G*(G m_post - y)>]
///   CameronMartin: 1/2 [log det(I+H~) - tr(H_m C_post) + |m_post - m_pr|_C^2]
/// (whitened quantities throughout).
double kl_post_prior(const InverseProblem& p, const Vector& y, KlForm form = KlForm::Misfit);

/// tr(H_m C_post) = tr(S H~_m) = sum lambda_i / (1 + lambda_i)
double trace_hm_cpost(const InverseProblem& p);

/// D-criterion 1/2 log det(I + H~_m) over the full nonzero spectrum.
CriterionReport expected_info_gain(const InverseProblem& p);
/// Same from the spectrum truncated by pp_hessian_lowrank(p, tol).
CriterionReport expected_info_gain(const InverseProblem& p, double lowrank_tol);

/// A-criterion tr(C_post) = tr(C_pr) - sum_j alpha_j <C_pr e_j, e_j>.
CriterionReport bayes_risk(const InverseProblem& p);

struct MseDecomposition {
    /// |(C_post H_m - I)(u - m_pr)|^2
    double bias;
    /// tr(C_post^2 H_m)
    double variance;
    double total() const { return bias + variance; }
};

/// Mean squared error of the MAP estimator at a fixed parameter. A
/// non-centered prior is handled by shifting coordinates by m_pr.
MseDecomposition mse_map(const InverseProblem& p, const Vector& u_true);

enum class McTarget {
    /// KL(post||prior) over joint (u, y) draws
    Eig,
    /// |u - m_post|^2 over joint draws
    BayesRisk,
    /// exp{-Phi(u; y)} over prior draws at fixed y
    Z0,
    /// <m_post - m_pr, G*(y - G m_pr)> over joint draws
    DblExpData,
    /// <m_post - m_pr, H_m (m_post - m_pr)> over joint draws
    DblExpHessian,
    /// |u - m_post|^2 over data draws at fixed u
    MseAtTruth,
    /// |G u|^2_Gamma over prior draws
    ForwardSecondMoment,
};

struct McOptions {
    std::size_t n_samples = 4000;
    std::uint64_t seed = 0;
    int threads = 1;
    /// data vector for Z0, parameter for MseAtTruth
    std::optional<Vector> fixed;
};

/// Single-loop Monte Carlo oracle for the closed forms above. Sample i uses
/// streams (2i, 2i+1) of the counter generator, so the estimate is
/// independent of the thread count. Throws ParameterError for n_samples < 2
/// or a missing `fixed` vector.
McEstimate mc_oracle(const InverseProblem& p, McTarget target, const McOptions& opts);

const char* to_string(McTarget t);

}  // namespace hoed

#endif
