#ifndef HOED_SPECTRUM_HPP
#define HOED_SPECTRUM_HPP

#include "hoed/space.hpp"

namespace hoed {

/// Eigenpairs of a self-adjoint operator on `space`: values sorted
/// non-increasing, columns of `vectors` M-orthonormal.
struct Spectrum {
    Space space;
    Vector values;
    Matrix vectors;

    explicit Spectrum(Space s) : space(std::move(s)), values(0), vectors(space.dim(), 0) {}
    Spectrum(Space s, Vector vals, Matrix vecs);

    Eigen::Index rank() const { return values.size(); }
    Eigen::Index dim() const { return space.dim(); }

    /// Leading r pairs.
    Spectrum truncated(Eigen::Index r) const;

    /// max_{i,j} |<e_i,e_j> - delta_ij|.
    double orthonormality_defect() const;
};

}  // namespace hoed

#endif
