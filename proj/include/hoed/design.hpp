#ifndef HOED_DESIGN_HPP
#define HOED_DESIGN_HPP

#include <vector>

#include "hoed/criteria.hpp"

namespace hoed {

enum class Criterion { D, A };

/// How each greedy step scores candidates.
enum class GreedyUpdate {
    /// Rank-one updates from the current posterior: determinant lemma for D,
    /// Sherman-Morrison for A.
    RankOne,
    /// Rebuild the problem for every trial design and recompute the spectrum.
    Recompute,
    /// RankOne for at most 64 candidates, Recompute above.
    Auto,
};

struct GreedyStep {
    Eigen::Index chosen;
    /// criterion of the design after this step
    CriterionReport report;
    /// D: value did not decrease; A: value did not increase (1e-10 slack)
    bool monotone;
};

struct GreedyResult {
    DesignWeights design;
    /// criterion of the empty design
    double initial_value;
    std::vector<GreedyStep> steps;
};

/// Criterion value (D: expected information gain, A: Bayes risk) of a design.
double criterion_value(const InverseProblem& p, const DesignWeights& design, Criterion c);

/// Starts from the empty design and activates k candidates one at a time,
/// each time the one with the largest D increase (or A decrease); ties go to
/// the lowest index. Throws ParameterError if k exceeds the candidate count.
GreedyResult greedy_design(const InverseProblem& p, Eigen::Index k, Criterion c,
                           GreedyUpdate update = GreedyUpdate::Auto);

struct ExhaustiveResult {
    std::vector<Eigen::Index> best;
    double best_value;
    std::size_t subsets_evaluated;
    /// criterion value of every k-subset, in lexicographic subset order
    std::vector<double> all_values;
};

/// Best k-subset by enumeration. Limited to at most 15 candidates.
ExhaustiveResult exhaustive_design(const InverseProblem& p, Eigen::Index k, Criterion c);

const char* to_string(Criterion c);

}  // namespace hoed

#endif
