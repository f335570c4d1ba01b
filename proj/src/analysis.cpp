#include "lpshho/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lpshho {

NormEvaluator::NormEvaluator(const HybridSpace& space, const OseenCoefficients& coeffs,
                             const MacroDecomposition& macro, const StabilisationParams& params,
                             const DiscreteForms& forms)
    : space_(&space), coeffs_(&coeffs), macro_(&macro), params_(&params), forms_(&forms)
{}

namespace {

Eigen::VectorXd cell_part(const CellOperatorPack& pack, const Eigen::VectorXd& scalar)
{
    return scalar.head(static_cast<Eigen::Index>(pack.layout.cell_dim));
}

double quadratic(const SparseMatrix& m, const Eigen::VectorXd& x)
{
    return x.dot(m * x);
}

double safe_sqrt(double v)
{
    return std::sqrt(std::max(v, 0.0));
}

}  // namespace

double NormEvaluator::norm_1h(const Eigen::VectorXd& u) const
{
    double sum = 0.0;
    for (std::size_t t = 0; t < space_->mesh().num_cells(); ++t) {
        const CellOperatorPack& pack = space_->pack(t);
        const auto nk = static_cast<Eigen::Index>(pack.layout.cell_dim);
        const Eigen::VectorXd block = space_->gather(t, u);
        for (int c = 0; c < 2; ++c) {
            const Eigen::VectorXd s = scalar_component(pack.layout, block, c);
            const Eigen::VectorXd sc = cell_part(pack, s);
            sum += sc.dot(pack.stiffness.topLeftCorner(nk, nk) * sc) + s.dot(pack.jump * s);
        }
    }
    return safe_sqrt(sum);
}

double NormEvaluator::norm_eps(const Eigen::VectorXd& u) const
{
    double sum = 0.0;
    for (std::size_t t = 0; t < space_->mesh().num_cells(); ++t) {
        const Eigen::VectorXd block = space_->gather(t, u);
        sum += block.dot(local_viscous_block(space_->pack(t), coeffs_->epsilon) * block);
    }
    return safe_sqrt(sum);
}

double NormEvaluator::norm_b(const Eigen::VectorXd& u) const
{
    double sum = 0.0;
    for (std::size_t t = 0; t < space_->mesh().num_cells(); ++t) {
        const CellOperatorPack& pack = space_->pack(t);
        const Eigen::VectorXd block = space_->gather(t, u);
        for (int c = 0; c < 2; ++c) {
            const Eigen::VectorXd s = scalar_component(pack.layout, block, c);
            const Eigen::VectorXd vals = pack.values.topRows(static_cast<Eigen::Index>(pack.layout.cell_dim)).transpose() *
                                         cell_part(pack, s);
            for (std::size_t q = 0; q < pack.rule.size(); ++q)
                sum += coeffs_->sigma * pack.rule.weights[q] * vals[static_cast<Eigen::Index>(q)] * vals[static_cast<Eigen::Index>(q)];
            for (const FaceData& fd : pack.faces) {
                const Eigen::VectorXd jump = fd.difference * s;
                for (std::size_t q = 0; q < fd.rule.size(); ++q) {
                    const auto qi = static_cast<Eigen::Index>(q);
                    sum += 0.5 * fd.rule.weights[q] * std::abs(fd.flux[qi]) * jump[qi] * jump[qi];
                }
            }
        }
    }
    return safe_sqrt(sum);
}

double NormEvaluator::norm_st(const Eigen::VectorXd& u, const Eigen::VectorXd& p) const
{
    return safe_sqrt(quadratic(forms_->lps, u) + quadratic(forms_->normal_jump, u) + quadratic(forms_->pressure_stab, p));
}

double NormEvaluator::norm_supg(const Eigen::VectorXd& u, const Eigen::VectorXd& p) const
{
    double sum = 0.0;
    for (std::size_t m = 0; m < macro_->patches.size(); ++m) {
        double patch = 0.0;
        for (auto t : macro_->patches[m].cells) {
            const CellOperatorPack& pack = space_->pack(t);
            const Eigen::VectorXd block = space_->gather(t, u);
            const Eigen::VectorXd pt = space_->gather_pressure(t, p);
            const Eigen::MatrixXd mk = pack.mass_pk();
            for (int c = 0; c < 2; ++c) {
                const Eigen::VectorXd g =
                    pack.advection * scalar_component(pack.layout, block, c) + pack.pressure_gradient[c] * pt;
                patch += g.dot(mk * g);
            }
        }
        sum += params_->gamma[m] * patch;
    }
    return safe_sqrt(sum);
}

double NormEvaluator::pressure_l2(const Eigen::VectorXd& p) const
{
    return safe_sqrt(quadratic(forms_->pressure_mass, p));
}

double NormEvaluator::velocity_l2(const Eigen::VectorXd& u) const
{
    double sum = 0.0;
    for (std::size_t t = 0; t < space_->mesh().num_cells(); ++t) {
        const CellOperatorPack& pack = space_->pack(t);
        const Eigen::VectorXd block = space_->gather(t, u);
        const Eigen::MatrixXd mk = pack.mass_pk();
        for (int c = 0; c < 2; ++c) {
            const Eigen::VectorXd sc = cell_part(pack, scalar_component(pack.layout, block, c));
            sum += sc.dot(mk * sc);
        }
    }
    return safe_sqrt(sum);
}

double NormEvaluator::norm_lp(const Eigen::VectorXd& u, const Eigen::VectorXd& p) const
{
    const double e = norm_eps(u), b = norm_b(u), st = norm_st(u, p), supg = norm_supg(u, p), pl = pressure_l2(p);
    return safe_sqrt(e * e + b * b + st * st + supg * supg / (1.0 + params_->omega) +
                     (coeffs_->epsilon + coeffs_->sigma) * pl * pl);
}

double NormEvaluator::bilinear(const Eigen::VectorXd& u, const Eigen::VectorXd& p, const Eigen::VectorXd& v,
                               const Eigen::VectorXd& q) const
{
    const DiscreteForms& f = *forms_;
    const Eigen::VectorXd Au = f.viscous * u + f.convection * u + f.lps * u + f.normal_jump * u;
    return v.dot(Au) + q.dot(f.pressure_stab * p) + p.dot(f.coupling * v) - q.dot(f.coupling * u);
}

void clear_boundary(const HybridSpace& space, Eigen::VectorXd& u)
{
    const PolytopalMesh& mesh = space.mesh();
    const auto n = static_cast<Eigen::Index>(2 * space.face_dim());
    for (std::size_t f = 0; f < mesh.num_faces(); ++f)
        if (mesh.face(f).is_boundary())
            u.segment(static_cast<Eigen::Index>(space.face_offset(f)), n).setZero();
}

ErrorReport compute_errors(const NormEvaluator& norms, const Eigen::VectorXd& velocity, const Eigen::VectorXd& pressure,
                           const VectorField& exact_u, const ScalarField& exact_p)
{
    const HybridSpace& space = norms.space();
    const Eigen::VectorXd eu = space.interpolate(exact_u) - velocity;
    const Eigen::VectorXd ep = space.project_pressure(exact_p) - pressure;

    ErrorReport r;
    r.h = space.mesh().h();
    r.err_eps = norms.norm_eps(eu);
    r.err_b = norms.norm_b(eu);
    r.err_st = norms.norm_st(eu, ep);
    r.err_supg = norms.norm_supg(eu, ep);
    r.err_pressure = norms.pressure_l2(ep);
    r.err_lp = norms.norm_lp(eu, ep);

    double lu = 0.0, lp = 0.0;
    for (std::size_t t = 0; t < space.mesh().num_cells(); ++t) {
        const CellOperatorPack& pack = space.pack(t);
        for (std::size_t q = 0; q < pack.rule.size(); ++q) {
            const Point& x = pack.rule.points[q];
            const double w = pack.rule.weights[q];
            lu += w * (exact_u(x) - space.evaluate_velocity(t, velocity, x)).squaredNorm();
            const double d = exact_p(x) - space.evaluate_pressure(t, pressure, x);
            lp += w * d * d;
        }
    }
    r.l2_velocity = std::sqrt(lu);
    r.l2_pressure = std::sqrt(lp);
    return r;
}

std::vector<std::optional<double>> compute_rate(const std::vector<std::pair<double, double>>& h_err)
{
    std::vector<std::optional<double>> rates(h_err.size());
    for (std::size_t i = 1; i < h_err.size(); ++i) {
        const auto [h0, e0] = h_err[i - 1];
        const auto [h1, e1] = h_err[i];
        if (!(e0 > 0.0) || !(e1 > 0.0) || !(h0 > 0.0) || !(h1 > 0.0) || h0 == h1)
            continue;
        rates[i] = std::log(e1 / e0) / std::log(h1 / h0);
    }
    return rates;
}

void fill_rates(std::vector<ErrorReport>& reports)
{
    std::vector<std::pair<double, double>> lp, supg;
    for (const auto& r : reports) {
        lp.emplace_back(r.h, r.err_lp);
        supg.emplace_back(r.h, r.err_supg);
    }
    const auto rl = compute_rate(lp);
    const auto rs = compute_rate(supg);
    for (std::size_t i = 0; i < reports.size(); ++i) {
        reports[i].rate_lp = rl[i];
        reports[i].rate_supg = rs[i];
    }
}

namespace {

SparseMatrix broken_h1_gram(const HybridSpace& space)
{
    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t t = 0; t < space.mesh().num_cells(); ++t) {
        const CellOperatorPack& pack = space.pack(t);
        const auto nk = static_cast<Eigen::Index>(pack.layout.cell_dim);
        Eigen::MatrixXd scalar = pack.jump;
        scalar.topLeftCorner(nk, nk) += pack.stiffness.topLeftCorner(nk, nk);
        const Eigen::MatrixXd local = vector_block(pack.layout, scalar);
        const auto map = space.local_to_global(t);
        for (Eigen::Index i = 0; i < local.rows(); ++i)
            for (Eigen::Index j = 0; j < local.cols(); ++j)
                if (local(i, j) != 0.0)
                    trip.emplace_back(static_cast<int>(map[i]), static_cast<int>(map[j]), local(i, j));
    }
    const auto n = static_cast<Eigen::Index>(space.num_velocity());
    SparseMatrix K(n, n);
    K.setFromTriplets(trip.begin(), trip.end());
    return K;
}

}  // namespace

std::optional<double> infsup_diagnostic(const HybridSpace& space, const DiscreteForms& forms, std::size_t max_unknowns)
{
    const DofMap dofs(space);
    const auto nf = static_cast<Eigen::Index>(dofs.num_velocity());
    const auto np = static_cast<Eigen::Index>(dofs.num_pressure());
    if (dofs.num_velocity() + dofs.num_pressure() > max_unknowns)
        throw DiagnosticError("inf-sup diagnostic is dense; " + std::to_string(dofs.num_velocity() + dofs.num_pressure()) +
                              " unknowns exceed the limit of " + std::to_string(max_unknowns) + ", use a smaller mesh");
    if (np <= 1)
        return std::nullopt;

    const SparseMatrix Kh = broken_h1_gram(space);
    Eigen::MatrixXd K(nf, nf), B(np, nf);
    const Eigen::MatrixXd Kd = Eigen::MatrixXd(Kh);
    const Eigen::MatrixXd Bd = Eigen::MatrixXd(forms.coupling);
    for (Eigen::Index j = 0; j < nf; ++j) {
        const auto hj = static_cast<Eigen::Index>(dofs.hybrid(static_cast<std::size_t>(j)));
        for (Eigen::Index i = 0; i < nf; ++i)
            K(i, j) = Kd(static_cast<Eigen::Index>(dofs.hybrid(static_cast<std::size_t>(i))), hj);
        B.col(j) = Bd.col(hj);
    }
    const Eigen::LDLT<Eigen::MatrixXd> Kf(K);
    if (Kf.info() != Eigen::Success)
        throw DiagnosticError("broken H1 Gram matrix is singular");
    const Eigen::MatrixXd S = B * Kf.solve(B.transpose());

    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(forms.pressure_weights);
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(np, np);
    const Eigen::MatrixXd Z = Q.rightCols(np - 1);
    const Eigen::MatrixXd M = Eigen::MatrixXd(forms.pressure_mass);
    const Eigen::MatrixXd Sz = Z.transpose() * S * Z;
    const Eigen::MatrixXd Mz = Z.transpose() * M * Z;
    const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (Sz + Sz.transpose()),
                                                                       0.5 * (Mz + Mz.transpose()));
    if (eig.info() != Eigen::Success)
        throw DiagnosticError("generalized eigenproblem failed");
    return safe_sqrt(eig.eigenvalues().minCoeff());
}

double poincare_ratio(const NormEvaluator& norms, const Eigen::VectorXd& u)
{
    const double d = norms.norm_1h(u);
    return d > 0.0 ? norms.velocity_l2(u) / d : 0.0;
}

}  // namespace lpshho
