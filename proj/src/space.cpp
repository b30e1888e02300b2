#include "hoed/space.hpp"

#include <string>

#include "hoed/errors.hpp"

namespace hoed {

Space::Space(Vector mass) {
    if (mass.size() == 0) {
        throw ParameterError("Space: dimension must be positive");
    }
    for (Eigen::Index i = 0; i < mass.size(); ++i) {
        if (!(mass[i] > 0.0)) {
            throw ParameterError("Space: mass weight " + std::to_string(i) + " is not strictly positive");
        }
    }
    euclidean_ = (mass.array() == 1.0).all();
    mass_ = std::make_shared<const Vector>(std::move(mass));
}

Space Space::euclidean(Eigen::Index q) {
    Space s(Vector::Ones(q > 0 ? q : 1));
    if (q == 0) {
        // zero-dimensional data space (no sensors)
        s.mass_ = std::make_shared<const Vector>(Vector(0));
    }
    s.euclidean_ = true;
    return s;
}

double Space::inner(const Vector& x, const Vector& y) const {
    if (x.size() != dim() || y.size() != dim()) {
        throw DimensionError("Space::inner: vector length does not match dimension " + std::to_string(dim()));
    }
    if (euclidean_) {
        return x.dot(y);
    }
    return (x.array() * mass_->array() * y.array()).sum();
}

double Space::norm(const Vector& x) const { return std::sqrt(norm_squared(x)); }

bool Space::operator==(const Space& other) const {
    if (mass_ == other.mass_) {
        return true;
    }
    return mass_->size() == other.mass_->size() && *mass_ == *other.mass_;
}

void Space::check_member(const Vector& x, const char* what) const {
    if (x.size() != dim()) {
        throw DimensionError(std::string(what) + ": vector of length " + std::to_string(x.size()) +
                             " in a space of dimension " + std::to_string(dim()));
    }
}

}  // namespace hoed
