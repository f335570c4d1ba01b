#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "lpshho/mesh.hpp"
#include "lpshho/quadrature.hpp"

namespace lpshho {

using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Eigen::Vector2d(const Point&)>;

/// Dimension of P^k in two variables; zero for k < 0.
constexpr std::size_t dim_p2(int k) noexcept
{
    return k < 0 ? 0 : static_cast<std::size_t>((k + 1) * (k + 2) / 2);
}

/// Scaled monomials ((x - c)/s)^a ((y - c)/s)^b ordered by total degree,
/// optionally orthonormalized on a quadrature rule by a Cholesky factor.
/// Orthonormalization is lower triangular, so the first dim_p2(m)
/// functions always span P^m.
class CellBasis {
public:
    CellBasis() = default;
    CellBasis(Point center, double scale, int degree);

    static CellBasis on_cell(const PolytopalMesh& mesh, std::size_t cell, int degree, bool orthonormal,
                             const QuadRule& rule);

    /// Replace the monomials by their orthonormalization w.r.t. `rule`.
    void orthonormalize(const QuadRule& rule);

    int degree() const noexcept { return degree_; }
    std::size_t size() const noexcept { return dim_p2(degree_); }
    bool is_orthonormal() const noexcept { return orthonormal_; }
    const Point& center() const noexcept { return center_; }
    double scale() const noexcept { return scale_; }

    Eigen::VectorXd values(const Point& x) const;
    /// size() x 2
    Eigen::MatrixXd gradients(const Point& x) const;

    /// size() x rule.size()
    Eigen::MatrixXd values(const QuadRule& rule) const;
    /// Derivative along `axis` (0 = x, 1 = y) at every rule point.
    Eigen::MatrixXd derivatives(const QuadRule& rule, int axis) const;

    Eigen::MatrixXd gram(const QuadRule& rule) const;

    double evaluate(const Eigen::VectorXd& coeffs, const Point& x) const;

private:
    Eigen::VectorXd monomials(const Point& x) const;
    Eigen::MatrixXd monomial_gradients(const Point& x) const;

    Point center_ = Point::Zero();
    double scale_ = 1.0;
    int degree_ = 0;
    bool orthonormal_ = false;
    Eigen::MatrixXd transform_;  // rows: basis functions in the monomial basis
};

/// 1D scaled monomials in s = (x - midpoint) . tangent / h_F.
class FaceBasis {
public:
    FaceBasis() = default;
    FaceBasis(Point midpoint, Point tangent, double scale, int degree);

    static FaceBasis on_face(const PolytopalMesh& mesh, std::size_t face, int degree, bool orthonormal,
                             const QuadRule& rule);
    void orthonormalize(const QuadRule& rule);

    int degree() const noexcept { return degree_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(degree_ + 1); }

    Eigen::VectorXd values(const Point& x) const;
    Eigen::MatrixXd values(const QuadRule& rule) const;
    Eigen::MatrixXd gram(const QuadRule& rule) const;
    double evaluate(const Eigen::VectorXd& coeffs, const Point& x) const;

private:
    Eigen::VectorXd monomials(const Point& x) const;

    Point midpoint_ = Point::Zero();
    Point tangent_ = Point(1.0, 0.0);
    double scale_ = 1.0;
    int degree_ = 0;
    bool orthonormal_ = false;
    Eigen::MatrixXd transform_;
};

class ProjectionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// L2-orthogonal projection onto the span of the first `dim` functions of
/// `basis` (dim defaults to the whole basis). Throws ProjectionError when
/// the Gram matrix is numerically singular.
Eigen::VectorXd l2_project(const CellBasis& basis, const QuadRule& rule, const ScalarField& f,
                           std::size_t dim = 0);
Eigen::VectorXd l2_project(const FaceBasis& basis, const QuadRule& rule, const ScalarField& f);

/// Projection onto P^m(T) in the scaled monomial basis of the cell.
Eigen::VectorXd l2_project_cell(const PolytopalMesh& mesh, std::size_t cell, const ScalarField& f, int degree);
Eigen::VectorXd l2_project_face(const PolytopalMesh& mesh, std::size_t face, const ScalarField& f, int degree);

/// K_M = Id - pi_M^{k-1} on a macro patch, with pi_M computed from a single
/// Gram solve over the union of the patch cells. For k = 0 it is the identity.
class PatchFluctuation {
public:
    PatchFluctuation(const PolytopalMesh& mesh, const MacroPatch& patch, int k, int quad_degree);

    int projection_degree() const noexcept { return degree_; }
    const MacroPatch& patch() const noexcept { return *patch_; }
    /// Quadrature of the i-th cell of the patch.
    const QuadRule& rule(std::size_t i) const { return rules_.at(i); }
    std::size_t num_cells() const noexcept { return rules_.size(); }

    /// samples[i] holds g at the quadrature points of the i-th patch cell.
    std::vector<Eigen::VectorXd> apply(const std::vector<Eigen::VectorXd>& samples) const;

    /// Coefficients of pi_M^{k-1} g in the patch basis.
    Eigen::VectorXd project(const std::vector<Eigen::VectorXd>& samples) const;

    /// Given per-cell basis values (n_i x nq_i) on the patch rules, returns Q
    /// with (K_M g, K_M g')_M = g^T Q g' for g stacked cell coefficients.
    Eigen::MatrixXd fluctuation_gram(const std::vector<Eigen::MatrixXd>& cell_values) const;

    const CellBasis& basis() const noexcept { return basis_; }

private:
    const MacroPatch* patch_;
    int degree_;
    std::vector<QuadRule> rules_;
    CellBasis basis_;
    std::vector<Eigen::MatrixXd> basis_values_;
    Eigen::LDLT<Eigen::MatrixXd> gram_;
};

}  // namespace lpshho
