#include "hoed/design.hpp"

#include <cmath>
#include <string>

#include "hoed/errors.hpp"
#include "hoed/spectral.hpp"

namespace hoed {

namespace {

constexpr double kMonotoneSlack = 1e-10;
constexpr Eigen::Index kRankOneCandidateLimit = 64;
constexpr Eigen::Index kExhaustiveLimit = 15;

bool better(double candidate, double best, Criterion c) {
    const double margin = 1e-12 * std::max(1.0, std::abs(best));
    return c == Criterion::D ? candidate > best + margin : candidate < best - margin;
}

// Gain of adding candidate j to the design behind `p` (all weights 0/1).
// D: log(1 + w^T M^{-1} (I + H~)^{-1} w) / 2 with w = C^{1/2} g_j;
// A: |C_post g|^2 / (1 + <C_post g, g>) with g = M^{-1} g_j.
double rank_one_gain(const InverseProblem& p, const Matrix& unit_rows, Eigen::Index j, Criterion c) {
    const Space& s = p.space();
    const Vector& mass = s.mass();
    const Vector g = unit_rows.row(j).transpose().cwiseQuotient(mass);  // Riesz representer of row j
    if (c == Criterion::D) {
        const Vector w = p.prior_sqrt().apply(g);
        const Spectrum& pp = p.pp_spectrum();
        const Vector coords = pp.vectors.transpose() * mass.cwiseProduct(w);
        const Vector alpha = pp.values.array() / (1.0 + pp.values.array());
        const double quad = s.inner(w, w) - coords.dot(alpha.cwiseProduct(coords));
        return 0.5 * std::log1p(std::max(quad, 0.0));
    }
    const Vector cg = p.posterior_cov_dense() * g;
    return s.inner(cg, cg) / (1.0 + s.inner(cg, g));
}

}  // namespace

const char* to_string(Criterion c) { return c == Criterion::D ? "D" : "A"; }

double criterion_value(const InverseProblem& p, const DesignWeights& design, Criterion c) {
    const InverseProblem trial = p.with_design(design);
    return c == Criterion::D ? expected_info_gain(trial).value : bayes_risk(trial).value;
}

GreedyResult greedy_design(const InverseProblem& p, Eigen::Index k, Criterion c, GreedyUpdate update) {
    const Eigen::Index qc = p.num_observations();
    if (k < 0 || k > qc) {
        throw ParameterError("greedy_design: k = " + std::to_string(k) + " but only " + std::to_string(qc) +
                             " candidates");
    }
    if (update == GreedyUpdate::Auto) {
        update = qc <= kRankOneCandidateLimit ? GreedyUpdate::RankOne : GreedyUpdate::Recompute;
    }

    // unit-noise rows: the whitened rows of the full design
    const Matrix unit_rows = p.with_design(DesignWeights::all(qc)).whitened_forward();

    DesignWeights design = DesignWeights::none(qc);
    InverseProblem current = p.with_design(design);
    const auto report_of = [&](const InverseProblem& q) {
        return c == Criterion::D ? expected_info_gain(q) : bayes_risk(q);
    };
    GreedyResult result{design, report_of(current).value, {}};
    double value = result.initial_value;

    for (Eigen::Index step = 0; step < k; ++step) {
        Eigen::Index best_j = -1;
        double best_score = 0.0;
        for (Eigen::Index j = 0; j < qc; ++j) {
            if (design[j] > 0.0) {
                continue;
            }
            double score;
            if (update == GreedyUpdate::RankOne) {
                const double gain = rank_one_gain(current, unit_rows, j, c);
                score = c == Criterion::D ? value + gain : value - gain;
            } else {
                score = criterion_value(p, design.with(j, 1.0), c);
            }
            if (best_j < 0 || better(score, best_score, c)) {
                best_j = j;
                best_score = score;
            }
        }
        design = design.with(best_j, 1.0);
        current = p.with_design(design);
        CriterionReport rep = report_of(current);
        const bool monotone = c == Criterion::D ? rep.value >= value - kMonotoneSlack
                                                : rep.value <= value + kMonotoneSlack;
        value = rep.value;
        result.steps.push_back(GreedyStep{best_j, std::move(rep), monotone});
    }
    result.design = design;
    return result;
}

ExhaustiveResult exhaustive_design(const InverseProblem& p, Eigen::Index k, Criterion c) {
    const Eigen::Index qc = p.num_observations();
    if (qc > kExhaustiveLimit) {
        throw ParameterError("exhaustive_design: " + std::to_string(qc) + " candidates exceeds the limit of " +
                             std::to_string(kExhaustiveLimit));
    }
    if (k < 0 || k > qc) {
        throw ParameterError("exhaustive_design: k out of range");
    }
    ExhaustiveResult out{{}, 0.0, 0, {}};
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(k));
    for (Eigen::Index i = 0; i < k; ++i) {
        idx[i] = i;
    }
    for (;;) {
        const double v = criterion_value(p, DesignWeights::subset(qc, idx), c);
        out.all_values.push_back(v);
        if (out.subsets_evaluated == 0 || better(v, out.best_value, c)) {
            out.best = idx;
            out.best_value = v;
        }
        ++out.subsets_evaluated;
        // next combination in lexicographic order
        Eigen::Index i = k - 1;
        while (i >= 0 && idx[i] == qc - k + i) {
            --i;
        }
        if (i < 0) {
            break;
        }
        ++idx[i];
        for (Eigen::Index t = i + 1; t < k; ++t) {
            idx[t] = idx[t - 1] + 1;
        }
    }
    return out;
}

}  // namespace hoed
