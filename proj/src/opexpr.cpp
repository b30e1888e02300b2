#include "hoed/opexpr.hpp"

#include <mutex>
#include <stdexcept>
#include <string>
#include <variant>

#include "hoed/errors.hpp"
#include "hoed/rng.hpp"

namespace hoed {

namespace {

constexpr double kPivotTolerance = 1e-14;

struct DenseNode {
    Matrix coeffs;
};

struct DiagonalNode {
    Vector values;
};

struct LowRankNode {
    Spectrum spectrum;
};

struct CompositionNode {
    std::vector<OpExpr> factors;
};

struct Factorization {
    std::once_flag once;
    Eigen::PartialPivLU<Matrix> lu;
};

struct ShiftedInverseNode {
    OpExpr base;
    double shift;
    std::shared_ptr<Factorization> cache;
};

}  // namespace

struct OpExpr::Node {
    Space domain;
    Space codomain;
    bool self_adjoint;
    std::variant<DenseNode, DiagonalNode, LowRankNode, CompositionNode, ShiftedInverseNode> body;
};

namespace {

const Eigen::PartialPivLU<Matrix>& factorize(const ShiftedInverseNode& node) {
    std::call_once(node.cache->once, [&] {
        Matrix shifted = node.base.to_dense();
        shifted.diagonal().array() += node.shift;
        Eigen::PartialPivLU<Matrix> lu(shifted);
        const auto pivots = lu.matrixLU().diagonal().cwiseAbs();
        const double scale = std::max(1.0, shifted.cwiseAbs().maxCoeff());
        if (pivots.size() > 0 && pivots.minCoeff() <= kPivotTolerance * scale) {
            throw NumericalError("ShiftedInverse: singular factorization (pivot " +
                                 std::to_string(pivots.minCoeff()) + ")");
        }
        node.cache->lu = std::move(lu);
    });
    return node.cache->lu;
}

}  // namespace

OpExpr OpExpr::dense(Matrix coeffs, Space domain, Space codomain, bool self_adjoint) {
    if (coeffs.rows() != codomain.dim() || coeffs.cols() != domain.dim()) {
        throw DimensionError("OpExpr::dense: coefficient array is " + std::to_string(coeffs.rows()) + "x" +
                             std::to_string(coeffs.cols()) + ", expected " + std::to_string(codomain.dim()) +
                             "x" + std::to_string(domain.dim()));
    }
    if (self_adjoint && domain != codomain) {
        throw DimensionError("OpExpr::dense: self-adjoint operator must be square");
    }
    return OpExpr(std::make_shared<const Node>(
        Node{std::move(domain), std::move(codomain), self_adjoint, DenseNode{std::move(coeffs)}}));
}

OpExpr OpExpr::dense(Matrix coeffs, const Space& space, bool self_adjoint) {
    return dense(std::move(coeffs), space, space, self_adjoint);
}

OpExpr OpExpr::diagonal(Vector values, Space space) {
    if (values.size() != space.dim()) {
        throw DimensionError("OpExpr::diagonal: length mismatch");
    }
    // diagonal M commutes with any diagonal D, so D is always M-self-adjoint
    return OpExpr(std::make_shared<const Node>(Node{space, space, true, DiagonalNode{std::move(values)}}));
}

OpExpr OpExpr::identity(Space space) {
    const auto n = space.dim();
    return diagonal(Vector::Ones(n), std::move(space));
}

OpExpr OpExpr::zero(Space domain, Space codomain) {
    const bool square = domain == codomain;
    Matrix z = Matrix::Zero(codomain.dim(), domain.dim());
    return dense(std::move(z), std::move(domain), std::move(codomain), square);
}

OpExpr OpExpr::low_rank(Spectrum spectrum) {
    Space s = spectrum.space;
    return OpExpr(std::make_shared<const Node>(Node{s, s, true, LowRankNode{std::move(spectrum)}}));
}

OpExpr OpExpr::compose(std::vector<OpExpr> factors, bool self_adjoint) {
    if (factors.empty()) {
        throw DimensionError("OpExpr::compose: empty factor list");
    }
    for (std::size_t i = 0; i + 1 < factors.size(); ++i) {
        if (factors[i].domain() != factors[i + 1].codomain()) {
            throw DimensionError("OpExpr::compose: factor " + std::to_string(i) + " domain does not match factor " +
                                 std::to_string(i + 1) + " codomain");
        }
    }
    Space domain = factors.back().domain();
    Space codomain = factors.front().codomain();
    if (self_adjoint && domain != codomain) {
        throw DimensionError("OpExpr::compose: self-adjoint composition must be square");
    }
    if (factors.size() == 1 && factors.front().is_self_adjoint()) {
        self_adjoint = true;
    }
    return OpExpr(std::make_shared<const Node>(
        Node{std::move(domain), std::move(codomain), self_adjoint, CompositionNode{std::move(factors)}}));
}

OpExpr OpExpr::shifted_inverse(OpExpr base, double shift) {
    if (!base.is_square()) {
        throw DimensionError("OpExpr::shifted_inverse: base must be square");
    }
    Space s = base.domain();
    const bool sa = base.is_self_adjoint();
    return OpExpr(std::make_shared<const Node>(
        Node{s, s, sa, ShiftedInverseNode{std::move(base), shift, std::make_shared<Factorization>()}}));
}

const Space& OpExpr::domain() const { return node_->domain; }
const Space& OpExpr::codomain() const { return node_->codomain; }
bool OpExpr::is_self_adjoint() const { return node_->self_adjoint; }

OpExpr::Kind OpExpr::kind() const {
    return static_cast<Kind>(node_->body.index());
}

Vector OpExpr::apply(const Vector& x) const {
    domain().check_member(x, "OpExpr::apply");
    return std::visit(
        [&](const auto& n) -> Vector {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, DenseNode>) {
                return n.coeffs * x;
            } else if constexpr (std::is_same_v<T, DiagonalNode>) {
                return n.values.cwiseProduct(x);
            } else if constexpr (std::is_same_v<T, LowRankNode>) {
                const auto& s = n.spectrum;
                const Vector coords = s.vectors.transpose() * s.space.mass().cwiseProduct(x);
                return s.vectors * s.values.cwiseProduct(coords);
            } else if constexpr (std::is_same_v<T, CompositionNode>) {
                Vector v = x;
                for (auto it = n.factors.rbegin(); it != n.factors.rend(); ++it) {
                    v = it->apply(v);
                }
                return v;
            } else {
                return factorize(n).solve(x);
            }
        },
        node_->body);
}

Vector OpExpr::adjoint_apply(const Vector& y) const {
    codomain().check_member(y, "OpExpr::adjoint_apply");
    return std::visit(
        [&](const auto& n) -> Vector {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, DenseNode>) {
                const Vector weighted = codomain().mass().cwiseProduct(y);
                return (n.coeffs.transpose() * weighted).cwiseQuotient(domain().mass());
            } else if constexpr (std::is_same_v<T, DiagonalNode> || std::is_same_v<T, LowRankNode>) {
                return apply(y);
            } else if constexpr (std::is_same_v<T, CompositionNode>) {
                Vector v = y;
                for (const auto& f : n.factors) {
                    v = f.adjoint_apply(v);
                }
                return v;
            } else {
                // (B + sI)^{-*} = M^{-1} (B + sI)^{-T} M in coordinates
                const Vector weighted = domain().mass().cwiseProduct(y);
                const Vector z = factorize(n).transpose().solve(weighted);
                return z.cwiseQuotient(domain().mass());
            }
        },
        node_->body);
}

Matrix OpExpr::to_dense() const {
    if (const auto* d = std::get_if<DenseNode>(&node_->body)) {
        return d->coeffs;
    }
    if (const auto* d = std::get_if<DiagonalNode>(&node_->body)) {
        return d->values.asDiagonal();
    }
    if (const auto* l = std::get_if<LowRankNode>(&node_->body)) {
        const auto& s = l->spectrum;
        return s.vectors * s.values.asDiagonal() * s.vectors.transpose() * s.space.mass().asDiagonal();
    }
    if (const auto* c = std::get_if<CompositionNode>(&node_->body)) {
        Matrix acc = c->factors.back().to_dense();
        for (auto it = c->factors.rbegin() + 1; it != c->factors.rend(); ++it) {
            acc = it->to_dense() * acc;
        }
        return acc;
    }
    const auto& si = std::get<ShiftedInverseNode>(node_->body);
    return factorize(si).inverse();
}

const Matrix& OpExpr::dense_coeffs() const {
    if (const auto* d = std::get_if<DenseNode>(&node_->body)) return d->coeffs;
    throw std::logic_error("OpExpr: not a Dense node");
}

const Vector& OpExpr::diagonal_values() const {
    if (const auto* d = std::get_if<DiagonalNode>(&node_->body)) return d->values;
    throw std::logic_error("OpExpr: not a Diagonal node");
}

const Spectrum& OpExpr::spectrum() const {
    if (const auto* d = std::get_if<LowRankNode>(&node_->body)) return d->spectrum;
    throw std::logic_error("OpExpr: not a LowRankSpectral node");
}

const std::vector<OpExpr>& OpExpr::factors() const {
    if (const auto* d = std::get_if<CompositionNode>(&node_->body)) return d->factors;
    throw std::logic_error("OpExpr: not a Composition node");
}

const OpExpr& OpExpr::shifted_base() const {
    if (const auto* d = std::get_if<ShiftedInverseNode>(&node_->body)) return d->base;
    throw std::logic_error("OpExpr: not a ShiftedInverse node");
}

double OpExpr::shift() const {
    if (const auto* d = std::get_if<ShiftedInverseNode>(&node_->body)) return d->shift;
    throw std::logic_error("OpExpr: not a ShiftedInverse node");
}

OpExpr adjoint(const OpExpr& op) {
    if (op.is_self_adjoint()) {
        return op;
    }
    switch (op.kind()) {
        case OpExpr::Kind::Dense: {
            const Matrix& k = op.dense_coeffs();
            Matrix adj = op.domain().mass().cwiseInverse().asDiagonal() * k.transpose() *
                         op.codomain().mass().asDiagonal();
            return OpExpr::dense(std::move(adj), op.codomain(), op.domain());
        }
        case OpExpr::Kind::Composition: {
            std::vector<OpExpr> reversed;
            const auto& fs = op.factors();
            for (auto it = fs.rbegin(); it != fs.rend(); ++it) {
                reversed.push_back(adjoint(*it));
            }
            return OpExpr::compose(std::move(reversed));
        }
        case OpExpr::Kind::ShiftedInverse:
            return OpExpr::shifted_inverse(adjoint(op.shifted_base()), op.shift());
        default:
            return op;  // Diagonal and LowRankSpectral are always self-adjoint
    }
}

namespace {

double relative_gap(double a, double b, double scale) {
    return std::abs(a - b) / std::max(scale, std::numeric_limits<double>::min());
}

}  // namespace

double adjoint_defect(const OpExpr& op, int trials, std::uint64_t seed) {
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        CounterRng rng(seed, static_cast<std::uint64_t>(t));
        const Vector x = rng.normal_vector(op.domain().dim());
        const Vector y = rng.normal_vector(op.codomain().dim());
        const Vector ax = op.apply(x);
        const Vector aty = op.adjoint_apply(y);
        const double lhs = op.codomain().inner(ax, y);
        const double rhs = op.domain().inner(x, aty);
        const double scale = op.codomain().norm(ax) * op.codomain().norm(y) +
                             op.domain().norm(x) * op.domain().norm(aty);
        worst = std::max(worst, scale == 0.0 ? std::abs(lhs - rhs) : relative_gap(lhs, rhs, scale));
    }
    return worst;
}

double self_adjoint_defect(const OpExpr& op, int trials, std::uint64_t seed) {
    if (!op.is_square()) {
        throw DimensionError("self_adjoint_defect: operator is not square");
    }
    const Space& s = op.domain();
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        CounterRng rng(seed, static_cast<std::uint64_t>(t));
        const Vector x = rng.normal_vector(s.dim());
        const Vector y = rng.normal_vector(s.dim());
        const Vector ax = op.apply(x);
        const Vector ay = op.apply(y);
        const double lhs = s.inner(ax, y);
        const double rhs = s.inner(x, ay);
        const double scale = s.norm(ax) * s.norm(y) + s.norm(x) * s.norm(ay);
        worst = std::max(worst, scale == 0.0 ? std::abs(lhs - rhs) : relative_gap(lhs, rhs, scale));
    }
    return worst;
}

}  // namespace hoed
