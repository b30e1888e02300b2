#ifndef HOED_DESIGN_WEIGHTS_HPP
#define HOED_DESIGN_WEIGHTS_HPP

#include <vector>

#include "hoed/space.hpp"

namespace hoed {

/// Per-candidate observation weights xi_j in [0,1]. Candidate j's row of
/// the forward map and its noise variance live in the InverseProblem; the
/// weight scales its contribution to the likelihood by xi_j.
class DesignWeights {
public:
    /// Throws ParameterError for weights outside [0,1].
    explicit DesignWeights(Vector weights);

    static DesignWeights all(Eigen::Index count);
    static DesignWeights none(Eigen::Index count);
    static DesignWeights subset(Eigen::Index count, const std::vector<Eigen::Index>& active);

    Eigen::Index size() const { return weights_.size(); }
    const Vector& weights() const { return weights_; }
    double operator[](Eigen::Index j) const { return weights_[j]; }

    /// Indices with xi_j > 0, ascending.
    std::vector<Eigen::Index> active() const;
    DesignWeights with(Eigen::Index j, double weight) const;

private:
    Vector weights_;
};

}  // namespace hoed

#endif
