#ifndef HOED_SPACE_HPP
#define HOED_SPACE_HPP

#include <memory>

#include <Eigen/Dense>

namespace hoed {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A discretized Hilbert space: coordinates in R^n with the diagonal
/// quadrature weighting <x,y> = sum_i m_i x_i y_i.
///
/// Copies are cheap; the mass vector is shared.
class Space {
public:
    /// Throws ParameterError unless every weight is strictly positive.
    explicit Space(Vector mass);

    /// Identity-weighted R^q, used for data spaces.
    static Space euclidean(Eigen::Index q);

    Eigen::Index dim() const { return mass_->size(); }
    const Vector& mass() const { return *mass_; }
    bool is_euclidean() const { return euclidean_; }

    double inner(const Vector& x, const Vector& y) const;
    double norm(const Vector& x) const;
    double norm_squared(const Vector& x) const { return inner(x, x); }

    /// Same dimension and weights.
    bool operator==(const Space& other) const;
    bool operator!=(const Space& other) const { return !(*this == other); }

    /// Throws DimensionError if x is not a coordinate vector of this space.
    void check_member(const Vector& x, const char* what) const;

private:
    std::shared_ptr<const Vector> mass_;
    bool euclidean_ = false;
};

}  // namespace hoed

#endif
