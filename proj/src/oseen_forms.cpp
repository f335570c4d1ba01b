#include "lpshho/oseen_forms.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lpshho {

void OseenCoefficients::validate() const
{
    if (!(epsilon > 0.0))
        throw std::invalid_argument("viscosity must be positive");
    if (!(sigma > 0.0))
        throw std::invalid_argument("reaction coefficient must be positive");
    if (!advection || !force)
        throw std::invalid_argument("advection and force fields are required");
}

namespace {

Eigen::Matrix2d jacobian(const OseenCoefficients& coeffs, const Point& x, double step)
{
    if (coeffs.advection_gradient)
        return coeffs.advection_gradient(x);
    Eigen::Matrix2d J;
    for (int d = 0; d < 2; ++d) {
        Point e = Point::Zero();
        e[d] = step;
        J.col(d) = (coeffs.advection(x + e) - coeffs.advection(x - e)) / (2.0 * step);
    }
    return J;
}

}  // namespace

double max_advection_divergence(const HybridSpace& space, const OseenCoefficients& coeffs)
{
    double worst = 0.0;
    for (const auto& pack : space.packs())
        for (const auto& x : pack.rule.points)
            worst = std::max(worst, std::abs(jacobian(coeffs, x, 1e-6 * pack.diameter).trace()));
    return worst;
}

double StabilisationParams::gamma_ratio() const
{
    double r = 0.0;
    for (std::size_t m = 0; m < gamma.size(); ++m)
        r = std::max(r, gamma[m] / std::min(tau[m], rho[m]));
    return r;
}

StabilisationParams build_params(const PolytopalMesh& mesh, const MacroDecomposition& macro,
                                 const OseenCoefficients& coeffs, const StabilisationConstants& constants,
                                 int quad_degree)
{
    coeffs.validate();
    StabilisationParams p;
    p.constants = constants;
    const std::size_t n = macro.patches.size();
    p.b_patch.resize(n);
    p.b_sup.resize(n);
    p.b_lip.resize(n);
    p.h.resize(n);
    p.tau.resize(n);
    p.rho.resize(n);
    p.gamma.resize(n);

    const double eps = coeffs.epsilon;
    const double sigma = coeffs.sigma;
    for (std::size_t m = 0; m < n; ++m) {
        const MacroPatch& patch = macro.patches[m];
        Eigen::Vector2d integral = Eigen::Vector2d::Zero();
        double sup = 0.0, lip = 0.0;
        for (auto t : patch.cells) {
            const QuadRule rule = cell_quadrature(mesh, t, quad_degree);
            const double step = 1e-6 * patch.diameter;
            for (std::size_t q = 0; q < rule.size(); ++q) {
                const Eigen::Vector2d b = coeffs.advection(rule.points[q]);
                integral += rule.weights[q] * b;
                sup = std::max(sup, b.norm());
                lip = std::max(lip, jacobian(coeffs, rule.points[q], step).norm());
            }
        }
        const double hM = patch.diameter;
        p.b_patch[m] = integral / patch.measure;
        p.b_sup[m] = sup;
        p.b_lip[m] = lip;
        p.h[m] = hM;
        p.tau[m] = constants.c_tau * hM / std::max(sup, constants.eps_guard);
        p.rho[m] = constants.c_rho * hM;
        p.gamma[m] = hM * hM / (eps + (1.0 + sup) * hM + sigma * hM * hM);
        p.omega = std::max(p.omega, hM * hM * lip / (eps + sigma * hM * hM));
    }
    return p;
}

Eigen::MatrixXd local_viscous_block(const CellOperatorPack& pack, double epsilon)
{
    return epsilon * vector_block(pack.layout, pack.consistent + pack.stabilisation);
}

Eigen::MatrixXd local_stabilisation_block(const CellOperatorPack& pack, double epsilon)
{
    return epsilon * vector_block(pack.layout, pack.stabilisation);
}

Eigen::MatrixXd local_convection_block(const CellOperatorPack& pack, double sigma)
{
    const LocalLayout& L = pack.layout;
    const auto nk = static_cast<Eigen::Index>(L.cell_dim);
    const Eigen::MatrixXd mk = pack.mass_pk();

    // -(w_T, G v)_T: row = test unknowns of v, column = trial cell unknowns of w.
    Eigen::MatrixXd scalar = pack.upwind;
    scalar.leftCols(nk) -= (mk * pack.advection).transpose();
    scalar.topLeftCorner(nk, nk) += sigma * mk;
    return vector_block(L, scalar);
}

Eigen::MatrixXd local_pressure_coupling(const CellOperatorPack& pack)
{
    return -pack.mass_pk() * pack.divergence;
}

Eigen::MatrixXd normal_jump_block(const CellOperatorPack& pack)
{
    return pack.normal_jump;
}

namespace {

// Q = fluctuation Gram on the P^k cell coefficients of the patch.
Eigen::MatrixXd patch_fluctuation_gram(const PatchFluctuation& fluctuation,
                                       const std::vector<const CellOperatorPack*>& packs)
{
    if (packs.size() != fluctuation.num_cells())
        throw std::invalid_argument("patch/pack count mismatch");
    std::vector<Eigen::MatrixXd> values;
    values.reserve(packs.size());
    for (std::size_t i = 0; i < packs.size(); ++i) {
        if (packs[i]->rule.size() != fluctuation.rule(i).size())
            throw std::invalid_argument("pack and patch quadrature differ");
        values.push_back(packs[i]->values.topRows(static_cast<Eigen::Index>(packs[i]->layout.cell_dim)));
    }
    return fluctuation.fluctuation_gram(values);
}

}  // namespace

Eigen::MatrixXd lps_block(const PatchFluctuation& fluctuation, const std::vector<const CellOperatorPack*>& packs,
                          const Eigen::Vector2d& b_patch, double tau)
{
    const Eigen::MatrixXd Q = patch_fluctuation_gram(fluctuation, packs);

    Eigen::Index rows = 0, scalar_cols = 0, vector_cols = 0;
    for (const auto* p : packs) {
        rows += static_cast<Eigen::Index>(p->layout.cell_dim);
        scalar_cols += static_cast<Eigen::Index>(p->layout.scalar_size());
        vector_cols += static_cast<Eigen::Index>(p->layout.vector_size());
    }
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(rows, scalar_cols);
    Eigen::Index r = 0, c = 0;
    for (const auto* p : packs) {
        const Eigen::MatrixXd op = constant_advection_operator(*p, b_patch);
        G.block(r, c, op.rows(), op.cols()) = op;
        r += op.rows();
        c += op.cols();
    }
    const Eigen::MatrixXd scalar = tau * (G.transpose() * Q * G);

    // Scalar stacked index -> vector stacked index, per component.
    std::vector<std::array<Eigen::Index, 2>> to_vector;
    Eigen::Index voff = 0;
    for (const auto* p : packs) {
        for (std::size_t s = 0; s < p->layout.scalar_size(); ++s)
            to_vector.push_back({voff + static_cast<Eigen::Index>(p->layout.vector_index(0, s)),
                                 voff + static_cast<Eigen::Index>(p->layout.vector_index(1, s))});
        voff += static_cast<Eigen::Index>(p->layout.vector_size());
    }
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(vector_cols, vector_cols);
    for (Eigen::Index i = 0; i < scalar_cols; ++i)
        for (Eigen::Index j = 0; j < scalar_cols; ++j)
            for (int comp = 0; comp < 2; ++comp)
                out(to_vector[i][comp], to_vector[j][comp]) = scalar(i, j);
    return out;
}

Eigen::MatrixXd pressure_gradient_block(const PatchFluctuation& fluctuation,
                                        const std::vector<const CellOperatorPack*>& packs, double rho)
{
    const Eigen::MatrixXd Q = patch_fluctuation_gram(fluctuation, packs);
    const Eigen::Index n = Q.rows();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (int comp = 0; comp < 2; ++comp) {
        Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(n, n);
        Eigen::Index off = 0;
        for (const auto* p : packs) {
            const auto& g = p->pressure_gradient[comp];
            grad.block(off, off, g.rows(), g.cols()) = g;
            off += g.rows();
        }
        out += grad.transpose() * Q * grad;
    }
    return rho * out;
}

}  // namespace lpshho
