#include "lpshho/basis.hpp"

#include <cmath>

namespace lpshho {

namespace {

// Returns L^{-1} for G = L L^T; two passes restore orthogonality lost to
// ill-conditioning of high-degree monomials on thin cells.
Eigen::MatrixXd cholesky_inverse_factor(const Eigen::MatrixXd& gram)
{
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success)
        throw ProjectionError("basis Gram matrix is not positive definite");
    const Eigen::MatrixXd L = llt.matrixL();
    return L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(gram.rows(), gram.cols()));
}

Eigen::LDLT<Eigen::MatrixXd> checked_factor(const Eigen::MatrixXd& gram)
{
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    const Eigen::VectorXd d = ldlt.vectorD();
    if (ldlt.info() != Eigen::Success || d.size() == 0 || d.minCoeff() <= 1e-14 * d.cwiseAbs().maxCoeff())
        throw ProjectionError("singular Gram matrix (degenerate cell or basis)");
    return ldlt;
}

}  // namespace

CellBasis::CellBasis(Point center, double scale, int degree)
    : center_(std::move(center)), scale_(scale), degree_(degree)
{}

CellBasis CellBasis::on_cell(const PolytopalMesh& mesh, std::size_t cell, int degree, bool orthonormal,
                             const QuadRule& rule)
{
    const Cell& c = mesh.cell(cell);
    CellBasis basis(c.centroid, c.diameter, degree);
    if (orthonormal)
        basis.orthonormalize(rule);
    return basis;
}

void CellBasis::orthonormalize(const QuadRule& rule)
{
    for (int pass = 0; pass < 2; ++pass) {
        const Eigen::MatrixXd factor = cholesky_inverse_factor(gram(rule));
        transform_ = orthonormal_ ? Eigen::MatrixXd(factor * transform_) : factor;
        orthonormal_ = true;
    }
}

Eigen::VectorXd CellBasis::monomials(const Point& x) const
{
    const double xi = (x.x() - center_.x()) / scale_;
    const double eta = (x.y() - center_.y()) / scale_;
    Eigen::VectorXd m(size());
    std::size_t idx = 0;
    for (int d = 0; d <= degree_; ++d)
        for (int i = 0; i <= d; ++i)
            m[idx++] = std::pow(xi, d - i) * std::pow(eta, i);
    return m;
}

Eigen::MatrixXd CellBasis::monomial_gradients(const Point& x) const
{
    const double xi = (x.x() - center_.x()) / scale_;
    const double eta = (x.y() - center_.y()) / scale_;
    Eigen::MatrixXd g(size(), 2);
    std::size_t idx = 0;
    for (int d = 0; d <= degree_; ++d) {
        for (int i = 0; i <= d; ++i) {
            const int a = d - i, b = i;
            g(idx, 0) = a == 0 ? 0.0 : a * std::pow(xi, a - 1) * std::pow(eta, b) / scale_;
            g(idx, 1) = b == 0 ? 0.0 : b * std::pow(xi, a) * std::pow(eta, b - 1) / scale_;
            ++idx;
        }
    }
    return g;
}

Eigen::VectorXd CellBasis::values(const Point& x) const
{
    return orthonormal_ ? Eigen::VectorXd(transform_ * monomials(x)) : monomials(x);
}

Eigen::MatrixXd CellBasis::gradients(const Point& x) const
{
    return orthonormal_ ? Eigen::MatrixXd(transform_ * monomial_gradients(x)) : monomial_gradients(x);
}

Eigen::MatrixXd CellBasis::values(const QuadRule& rule) const
{
    Eigen::MatrixXd v(size(), rule.size());
    for (std::size_t q = 0; q < rule.size(); ++q)
        v.col(q) = values(rule.points[q]);
    return v;
}

Eigen::MatrixXd CellBasis::derivatives(const QuadRule& rule, int axis) const
{
    Eigen::MatrixXd v(size(), rule.size());
    for (std::size_t q = 0; q < rule.size(); ++q)
        v.col(q) = gradients(rule.points[q]).col(axis);
    return v;
}

Eigen::MatrixXd CellBasis::gram(const QuadRule& rule) const
{
    const Eigen::MatrixXd v = values(rule);
    const Eigen::Map<const Eigen::VectorXd> w(rule.weights.data(), static_cast<Eigen::Index>(rule.size()));
    return v * w.asDiagonal() * v.transpose();
}

double CellBasis::evaluate(const Eigen::VectorXd& coeffs, const Point& x) const
{
    return coeffs.dot(values(x).head(coeffs.size()));
}

FaceBasis::FaceBasis(Point midpoint, Point tangent, double scale, int degree)
    : midpoint_(std::move(midpoint)), tangent_(std::move(tangent)), scale_(scale), degree_(degree)
{}

FaceBasis FaceBasis::on_face(const PolytopalMesh& mesh, std::size_t face, int degree, bool orthonormal,
                             const QuadRule& rule)
{
    const Face& f = mesh.face(face);
    FaceBasis basis(f.midpoint, f.tangent(), f.measure, degree);
    if (orthonormal)
        basis.orthonormalize(rule);
    return basis;
}

void FaceBasis::orthonormalize(const QuadRule& rule)
{
    for (int pass = 0; pass < 2; ++pass) {
        const Eigen::MatrixXd factor = cholesky_inverse_factor(gram(rule));
        transform_ = orthonormal_ ? Eigen::MatrixXd(factor * transform_) : factor;
        orthonormal_ = true;
    }
}

Eigen::VectorXd FaceBasis::monomials(const Point& x) const
{
    const double s = (x - midpoint_).dot(tangent_) / scale_;
    Eigen::VectorXd m(size());
    double p = 1.0;
    for (int i = 0; i <= degree_; ++i) {
        m[i] = p;
        p *= s;
    }
    return m;
}

Eigen::VectorXd FaceBasis::values(const Point& x) const
{
    return orthonormal_ ? Eigen::VectorXd(transform_ * monomials(x)) : monomials(x);
}

Eigen::MatrixXd FaceBasis::values(const QuadRule& rule) const
{
    Eigen::MatrixXd v(size(), rule.size());
    for (std::size_t q = 0; q < rule.size(); ++q)
        v.col(q) = values(rule.points[q]);
    return v;
}

Eigen::MatrixXd FaceBasis::gram(const QuadRule& rule) const
{
    const Eigen::MatrixXd v = values(rule);
    const Eigen::Map<const Eigen::VectorXd> w(rule.weights.data(), static_cast<Eigen::Index>(rule.size()));
    return v * w.asDiagonal() * v.transpose();
}

double FaceBasis::evaluate(const Eigen::VectorXd& coeffs, const Point& x) const
{
    return coeffs.dot(values(x));
}

Eigen::VectorXd l2_project(const CellBasis& basis, const QuadRule& rule, const ScalarField& f, std::size_t dim)
{
    if (dim == 0)
        dim = basis.size();
    const Eigen::MatrixXd v = basis.values(rule).topRows(static_cast<Eigen::Index>(dim));
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t q = 0; q < rule.size(); ++q) {
        rhs += rule.weights[q] * f(rule.points[q]) * v.col(q);
        gram += rule.weights[q] * v.col(q) * v.col(q).transpose();
    }
    return checked_factor(gram).solve(rhs);
}

Eigen::VectorXd l2_project(const FaceBasis& basis, const QuadRule& rule, const ScalarField& f)
{
    const Eigen::MatrixXd v = basis.values(rule);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(v.rows());
    for (std::size_t q = 0; q < rule.size(); ++q)
        rhs += rule.weights[q] * f(rule.points[q]) * v.col(q);
    return checked_factor(basis.gram(rule)).solve(rhs);
}

Eigen::VectorXd l2_project_cell(const PolytopalMesh& mesh, std::size_t cell, const ScalarField& f, int degree)
{
    const QuadRule rule = cell_quadrature(mesh, cell, 2 * degree + 4);
    const CellBasis basis = CellBasis::on_cell(mesh, cell, degree, false, rule);
    return l2_project(basis, rule, f);
}

Eigen::VectorXd l2_project_face(const PolytopalMesh& mesh, std::size_t face, const ScalarField& f, int degree)
{
    const QuadRule rule = face_quadrature(mesh, face, 2 * degree + 4);
    const FaceBasis basis = FaceBasis::on_face(mesh, face, degree, false, rule);
    return l2_project(basis, rule, f);
}

PatchFluctuation::PatchFluctuation(const PolytopalMesh& mesh, const MacroPatch& patch, int k, int quad_degree)
    : patch_(&patch), degree_(k - 1), basis_(patch.centroid, patch.diameter, std::max(k - 1, 0))
{
    for (auto t : patch.cells)
        rules_.push_back(cell_quadrature(mesh, t, quad_degree));
    if (degree_ < 0)
        return;
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(basis_.size(), basis_.size());
    for (const auto& rule : rules_) {
        basis_values_.push_back(basis_.values(rule));
        gram += basis_.gram(rule);
    }
    gram_ = checked_factor(gram);
}

Eigen::VectorXd PatchFluctuation::project(const std::vector<Eigen::VectorXd>& samples) const
{
    if (degree_ < 0)
        return Eigen::VectorXd();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(basis_.size());
    for (std::size_t i = 0; i < rules_.size(); ++i) {
        const Eigen::Map<const Eigen::VectorXd> w(rules_[i].weights.data(),
                                                  static_cast<Eigen::Index>(rules_[i].size()));
        rhs += basis_values_[i] * w.cwiseProduct(samples.at(i));
    }
    return gram_.solve(rhs);
}

std::vector<Eigen::VectorXd> PatchFluctuation::apply(const std::vector<Eigen::VectorXd>& samples) const
{
    if (degree_ < 0)
        return samples;
    const Eigen::VectorXd coeffs = project(samples);
    std::vector<Eigen::VectorXd> out;
    out.reserve(samples.size());
    for (std::size_t i = 0; i < rules_.size(); ++i)
        out.push_back(samples[i] - basis_values_[i].transpose() * coeffs);
    return out;
}

Eigen::MatrixXd PatchFluctuation::fluctuation_gram(const std::vector<Eigen::MatrixXd>& cell_values) const
{
    Eigen::Index total = 0;
    for (const auto& v : cell_values)
        total += v.rows();
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(total, total);
    Eigen::MatrixXd cross(static_cast<Eigen::Index>(basis_.size()), total);
    Eigen::Index offset = 0;
    for (std::size_t i = 0; i < cell_values.size(); ++i) {
        const auto& v = cell_values[i];
        const Eigen::Map<const Eigen::VectorXd> w(rules_[i].weights.data(),
                                                  static_cast<Eigen::Index>(rules_[i].size()));
        q.block(offset, offset, v.rows(), v.rows()) = v * w.asDiagonal() * v.transpose();
        if (degree_ >= 0)
            cross.middleCols(offset, v.rows()) = basis_values_[i] * w.asDiagonal() * v.transpose();
        offset += v.rows();
    }
    if (degree_ >= 0)
        q -= cross.transpose() * gram_.solve(cross);
    return 0.5 * (q + q.transpose());
}

}  // namespace lpshho
