#ifndef HOED_OPEXPR_HPP
#define HOED_OPEXPR_HPP

#include <cstdint>
#include <memory>
#include <vector>

#include "hoed/space.hpp"
#include "hoed/spectrum.hpp"

namespace hoed {

/// A linear map between weighted coordinate spaces, stored as an expression
/// tree. Adjoints are taken with respect to the weighted inner products of
/// domain and codomain: for a coefficient array K, A* = M_dom^{-1} K^T M_cod.
///
/// OpExpr is an immutable handle; copies share the node.
class OpExpr {
public:
    enum class Kind { Dense, Diagonal, LowRankSpectral, Composition, ShiftedInverse };

    /// Coefficient array acting on coordinates.
    static OpExpr dense(Matrix coeffs, Space domain, Space codomain, bool self_adjoint = false);
    static OpExpr dense(Matrix coeffs, const Space& space, bool self_adjoint = false);
    static OpExpr diagonal(Vector values, Space space);
    static OpExpr identity(Space space);
    static OpExpr zero(Space domain, Space codomain);
    /// v -> sum_i lambda_i <e_i, v> e_i
    static OpExpr low_rank(Spectrum spectrum);
    /// factors applied right to left: compose({A, B}) x = A(B x).
    static OpExpr compose(std::vector<OpExpr> factors, bool self_adjoint = false);
    /// x -> (base + shift I)^{-1} x. The factorization is computed on first
    /// use and shared by all copies.
    static OpExpr shifted_inverse(OpExpr base, double shift);

    Vector apply(const Vector& x) const;
    Vector adjoint_apply(const Vector& y) const;

    /// Coefficient array of the map (codomain dim x domain dim).
    Matrix to_dense() const;

    const Space& domain() const;
    const Space& codomain() const;
    Kind kind() const;
    bool is_self_adjoint() const;
    bool is_square() const { return domain() == codomain(); }

    /// Node accessors; throw std::logic_error on the wrong kind.
    const Matrix& dense_coeffs() const;
    const Vector& diagonal_values() const;
    const Spectrum& spectrum() const;
    const std::vector<OpExpr>& factors() const;
    const OpExpr& shifted_base() const;
    double shift() const;

    struct Node;

private:
    explicit OpExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

/// The adjoint as an expression of the same variant family.
OpExpr adjoint(const OpExpr& op);

/// Largest relative violation of <Ax,y>_cod = <x,A*y>_dom over `trials`
/// random pairs.
double adjoint_defect(const OpExpr& op, int trials, std::uint64_t seed);

/// Largest relative violation of <Ax,y> = <x,Ay> over `trials` random pairs.
double self_adjoint_defect(const OpExpr& op, int trials, std::uint64_t seed);

}  // namespace hoed

#endif
