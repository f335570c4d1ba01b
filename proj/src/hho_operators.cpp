#include "lpshho/hho_operators.hpp"

#include <cmath>

namespace lpshho {

Eigen::MatrixXd vector_block(const LocalLayout& layout, const Eigen::MatrixXd& scalar)
{
    const std::size_t ns = layout.scalar_size();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(layout.vector_size(), layout.vector_size());
    for (int c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < ns; ++i)
            for (std::size_t j = 0; j < ns; ++j)
                out(layout.vector_index(c, i), layout.vector_index(c, j)) = scalar(i, j);
    return out;
}

Eigen::MatrixXd vector_operator(const LocalLayout& layout, const Eigen::MatrixXd& scalar)
{
    const std::size_t ns = layout.scalar_size();
    const Eigen::Index m = scalar.rows();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2 * m, layout.vector_size());
    for (int c = 0; c < 2; ++c)
        for (Eigen::Index i = 0; i < m; ++i)
            for (std::size_t j = 0; j < ns; ++j)
                out(c * m + i, layout.vector_index(c, j)) = scalar(i, j);
    return out;
}

Eigen::VectorXd scalar_component(const LocalLayout& layout, const Eigen::VectorXd& block, int comp)
{
    Eigen::VectorXd out(layout.scalar_size());
    for (std::size_t s = 0; s < layout.scalar_size(); ++s)
        out[s] = block[layout.vector_index(comp, s)];
    return out;
}

namespace {

Eigen::Map<const Eigen::VectorXd> weights_of(const QuadRule& rule)
{
    return {rule.weights.data(), static_cast<Eigen::Index>(rule.size())};
}

}  // namespace

CellOperatorPack build_pack(const PolytopalMesh& mesh, std::size_t t, int k, const VectorField& advection,
                            const PackOptions& options)
{
    if (k < 0)
        throw std::invalid_argument("polynomial degree must be non-negative");
    const Cell& cell = mesh.cell(t);
    const int qdeg = options.quad_degree >= 0 ? options.quad_degree : 2 * k + 4;
    const bool ortho = options.orthonormalize >= 0 ? options.orthonormalize != 0 : k >= 2;

    CellOperatorPack pack;
    pack.cell = t;
    pack.layout = LocalLayout(k, cell.faces.size());
    pack.diameter = cell.diameter;
    pack.measure = cell.measure;
    const LocalLayout& L = pack.layout;
    const auto nk = static_cast<Eigen::Index>(L.cell_dim);
    const auto kf = static_cast<Eigen::Index>(L.face_dim);
    const auto ns = static_cast<Eigen::Index>(L.scalar_size());
    const auto nv = static_cast<Eigen::Index>(L.vector_size());

    pack.rule = cell_quadrature(mesh, t, qdeg);
    pack.basis = CellBasis::on_cell(mesh, t, k + 1, ortho, pack.rule);
    const auto nk1 = static_cast<Eigen::Index>(pack.basis.size());
    pack.values = pack.basis.values(pack.rule);
    pack.dx = pack.basis.derivatives(pack.rule, 0);
    pack.dy = pack.basis.derivatives(pack.rule, 1);
    const auto w = weights_of(pack.rule);
    pack.mass = pack.values * w.asDiagonal() * pack.values.transpose();
    pack.stiffness = pack.dx * w.asDiagonal() * pack.dx.transpose() + pack.dy * w.asDiagonal() * pack.dy.transpose();
    pack.mass_k.compute(pack.mass_pk());

    const Eigen::MatrixXd vk = pack.values.topRows(nk);
    pack.derivative_x = vk * w.asDiagonal() * pack.dx.topRows(nk).transpose();
    pack.derivative_y = vk * w.asDiagonal() * pack.dy.topRows(nk).transpose();
    pack.pressure_gradient[0] = pack.mass_k.solve(pack.derivative_x);
    pack.pressure_gradient[1] = pack.mass_k.solve(pack.derivative_y);

    // Volume part of the advective derivative, (b . grad phi_j, phi_i)_T.
    Eigen::MatrixXd adv_volume = Eigen::MatrixXd::Zero(nk, nk);
    for (std::size_t q = 0; q < pack.rule.size(); ++q) {
        const Eigen::Vector2d b = advection(pack.rule.points[q]);
        adv_volume += w[q] * vk.col(q) * (b.x() * pack.dx.col(q).head(nk) + b.y() * pack.dy.col(q).head(nk)).transpose();
    }

    Eigen::MatrixXd recon_rhs = Eigen::MatrixXd::Zero(nk1, ns);
    recon_rhs.leftCols(nk) = pack.stiffness.leftCols(nk);
    pack.face_flux = Eigen::MatrixXd::Zero(nk, ns);
    Eigen::MatrixXd div_raw = Eigen::MatrixXd::Zero(nk, nv);
    div_raw.middleCols(0, nk) = pack.derivative_x;
    div_raw.middleCols(nk, nk) = pack.derivative_y;
    pack.upwind = Eigen::MatrixXd::Zero(ns, ns);
    pack.abs_flux = Eigen::MatrixXd::Zero(ns, ns);
    pack.jump = Eigen::MatrixXd::Zero(ns, ns);
    pack.normal_jump = Eigen::MatrixXd::Zero(nv, nv);

    for (std::size_t i = 0; i < cell.faces.size(); ++i) {
        const std::size_t f = cell.faces[i];
        FaceData fd;
        fd.face = f;
        fd.normal = mesh.outward_normal(t, f);
        fd.measure = mesh.face(f).measure;
        fd.rule = face_quadrature(mesh, f, qdeg);
        fd.basis = FaceBasis::on_face(mesh, f, k, ortho, fd.rule);
        const auto nq = static_cast<Eigen::Index>(fd.rule.size());
        const auto wf = weights_of(fd.rule);
        fd.cell_values.resize(nk1, nq);
        fd.normal_derivatives.resize(nk1, nq);
        fd.flux.resize(nq);
        for (Eigen::Index q = 0; q < nq; ++q) {
            const Point& x = fd.rule.points[q];
            fd.cell_values.col(q) = pack.basis.values(x);
            fd.normal_derivatives.col(q) = pack.basis.gradients(x) * fd.normal;
            fd.flux[q] = advection(x).dot(fd.normal);
        }
        fd.face_values = fd.basis.values(fd.rule);
        fd.mass = fd.face_values * wf.asDiagonal() * fd.face_values.transpose();
        fd.cross = fd.cell_values * wf.asDiagonal() * fd.face_values.transpose();
        fd.trace_projection = fd.mass.ldlt().solve(fd.cross.transpose());

        const Eigen::Index off = nk + static_cast<Eigen::Index>(i) * kf;
        fd.difference = Eigen::MatrixXd::Zero(nq, ns);
        fd.difference.leftCols(nk) = fd.cell_values.topRows(nk).transpose();
        fd.difference.middleCols(off, kf) = -fd.face_values.transpose();

        // (v_F - v_T, grad w . n)_F
        recon_rhs.leftCols(nk) -= fd.normal_derivatives * wf.asDiagonal() * fd.cell_values.topRows(nk).transpose();
        recon_rhs.middleCols(off, kf) += fd.normal_derivatives * wf.asDiagonal() * fd.face_values.transpose();

        // (b_TF (v_F - v_T), phi_i)_F
        const Eigen::VectorXd wb = wf.cwiseProduct(fd.flux);
        pack.face_flux -= fd.cell_values.topRows(nk) * wb.asDiagonal() * fd.difference;

        for (int c = 0; c < 2; ++c) {
            const double n_c = fd.normal[c];
            div_raw.middleCols(c * nk, nk) -=
                n_c * (fd.cell_values.topRows(nk) * wf.asDiagonal() * fd.cell_values.topRows(nk).transpose());
            for (Eigen::Index j = 0; j < kf; ++j)
                div_raw.col(static_cast<Eigen::Index>(L.face_index(i, c, j))) +=
                    n_c * (fd.cell_values.topRows(nk) * wf.asDiagonal() * fd.face_values.row(j).transpose());
        }

        Eigen::VectorXd negative(nq), half_abs(nq);
        for (Eigen::Index q = 0; q < nq; ++q) {
            negative[q] = 0.5 * (std::abs(fd.flux[q]) - fd.flux[q]) * wf[q];
            half_abs[q] = 0.5 * std::abs(fd.flux[q]) * wf[q];
        }
        pack.upwind += fd.difference.transpose() * negative.asDiagonal() * fd.difference;
        pack.abs_flux += fd.difference.transpose() * half_abs.asDiagonal() * fd.difference;
        const Eigen::MatrixXd diff_gram = fd.difference.transpose() * wf.asDiagonal() * fd.difference;
        pack.jump += diff_gram / fd.measure;
        for (int c = 0; c < 2; ++c)
            for (int d = 0; d < 2; ++d)
                for (Eigen::Index a = 0; a < ns; ++a)
                    for (Eigen::Index b = 0; b < ns; ++b)
                        pack.normal_jump(L.vector_index(c, a), L.vector_index(d, b)) +=
                            fd.normal[c] * fd.normal[d] * diff_gram(a, b);

        pack.faces.push_back(std::move(fd));
    }

    Eigen::MatrixXd adv_raw = pack.face_flux;
    adv_raw.leftCols(nk) += adv_volume;
    pack.advection = pack.mass_k.solve(adv_raw);
    pack.divergence = pack.mass_k.solve(div_raw);

    // Gradient system on the complement of constants; the first basis
    // function is constant so row/column 0 of the stiffness vanish.
    pack.reconstruction = Eigen::MatrixXd::Zero(nk1, ns);
    const Eigen::Index nr = nk1 - 1;
    Eigen::LDLT<Eigen::MatrixXd> stiff(pack.stiffness.bottomRightCorner(nr, nr));
    if (stiff.info() != Eigen::Success || stiff.vectorD().minCoeff() <= 0.0)
        throw ProjectionError("singular reconstruction system on cell " + std::to_string(t));
    pack.reconstruction.bottomRows(nr) = stiff.solve(recon_rhs.bottomRows(nr));
    const Eigen::VectorXd means = pack.values * w;  // (phi_i, 1)_T
    Eigen::RowVectorXd target = Eigen::RowVectorXd::Zero(ns);
    target.head(nk) = means.head(nk).transpose();
    pack.reconstruction.row(0) =
        (target - means.tail(nr).transpose() * pack.reconstruction.bottomRows(nr)) / means[0];
    pack.consistent = pack.reconstruction.transpose() * pack.stiffness * pack.reconstruction;

    // S_T: delta_F = v_F - pi_F(v_T + (r - pi_T^k r)) on each face.
    Eigen::MatrixXd cell_part = Eigen::MatrixXd::Zero(nk1, ns);
    cell_part.topLeftCorner(nk, nk).setIdentity();
    const Eigen::MatrixXd proj_r = pack.mass_k.solve(pack.mass.topRows(nk) * pack.reconstruction);
    Eigen::MatrixXd high = pack.reconstruction;
    high.topRows(nk) -= proj_r;
    cell_part += high;
    pack.stabilisation = Eigen::MatrixXd::Zero(ns, ns);
    for (std::size_t i = 0; i < pack.faces.size(); ++i) {
        const FaceData& fd = pack.faces[i];
        Eigen::MatrixXd delta = -fd.trace_projection * cell_part;
        delta.middleCols(nk + static_cast<Eigen::Index>(i) * kf, kf) += Eigen::MatrixXd::Identity(kf, kf);
        pack.stabilisation += delta.transpose() * fd.mass * delta;
    }
    pack.stabilisation /= cell.diameter;
    return pack;
}

Eigen::MatrixXd constant_advection_operator(const CellOperatorPack& pack, const Eigen::Vector2d& b)
{
    Eigen::MatrixXd raw = pack.face_flux;
    const auto nk = static_cast<Eigen::Index>(pack.layout.cell_dim);
    raw.leftCols(nk) += b.x() * pack.derivative_x + b.y() * pack.derivative_y;
    return pack.mass_k.solve(raw);
}

Eigen::VectorXd interpolate(const CellOperatorPack& pack, const VectorField& v)
{
    const LocalLayout& L = pack.layout;
    Eigen::VectorXd block(L.vector_size());
    for (int c = 0; c < 2; ++c) {
        const ScalarField vc = [&v, c](const Point& x) { return v(x)[c]; };
        block.segment(L.cell_index(c, 0), L.cell_dim) = l2_project(pack.basis, pack.rule, vc, L.cell_dim);
        for (std::size_t i = 0; i < pack.faces.size(); ++i)
            block.segment(L.face_index(i, c, 0), L.face_dim) = l2_project(pack.faces[i].basis, pack.faces[i].rule, vc);
    }
    return block;
}

Eigen::MatrixXd velocity_reconstruction(const CellOperatorPack& pack, const Eigen::VectorXd& block)
{
    Eigen::MatrixXd out(pack.basis.size(), 2);
    for (int c = 0; c < 2; ++c)
        out.col(c) = pack.reconstruction * scalar_component(pack.layout, block, c);
    return out;
}

Eigen::MatrixXd advection_reconstruction(const CellOperatorPack& pack, const Eigen::VectorXd& block)
{
    Eigen::MatrixXd out(pack.layout.cell_dim, 2);
    for (int c = 0; c < 2; ++c)
        out.col(c) = pack.advection * scalar_component(pack.layout, block, c);
    return out;
}

Eigen::MatrixXd advection_reconstruction(const CellOperatorPack& pack, const Eigen::VectorXd& block,
                                         const Eigen::Vector2d& constant_b)
{
    const Eigen::MatrixXd op = constant_advection_operator(pack, constant_b);
    Eigen::MatrixXd out(pack.layout.cell_dim, 2);
    for (int c = 0; c < 2; ++c)
        out.col(c) = op * scalar_component(pack.layout, block, c);
    return out;
}

Eigen::VectorXd divergence_reconstruction(const CellOperatorPack& pack, const Eigen::VectorXd& block)
{
    return pack.divergence * block;
}

HybridSpace::HybridSpace(const PolytopalMesh& mesh, int k, VectorField advection, const PackOptions& options)
    : mesh_(&mesh), k_(k), quad_degree_(options.quad_degree >= 0 ? options.quad_degree : 2 * k + 4),
      advection_(std::move(advection))
{
    packs_.reserve(mesh.num_cells());
    for (std::size_t t = 0; t < mesh.num_cells(); ++t)
        packs_.push_back(build_pack(mesh, t, k, advection_, options));
}

std::size_t HybridSpace::num_velocity() const noexcept
{
    return 2 * cell_dim() * mesh_->num_cells() + 2 * face_dim() * mesh_->num_faces();
}

std::vector<std::size_t> HybridSpace::local_to_global(std::size_t t) const
{
    const CellOperatorPack& p = packs_.at(t);
    const LocalLayout& L = p.layout;
    std::vector<std::size_t> map(L.vector_size());
    for (int c = 0; c < 2; ++c) {
        for (std::size_t i = 0; i < L.cell_dim; ++i)
            map[L.cell_index(c, i)] = cell_offset(t) + c * L.cell_dim + i;
        for (std::size_t fi = 0; fi < p.faces.size(); ++fi)
            for (std::size_t j = 0; j < L.face_dim; ++j)
                map[L.face_index(fi, c, j)] = face_offset(p.faces[fi].face) + c * L.face_dim + j;
    }
    return map;
}

Eigen::VectorXd HybridSpace::gather(std::size_t t, const Eigen::VectorXd& velocity) const
{
    const auto map = local_to_global(t);
    Eigen::VectorXd out(map.size());
    for (std::size_t i = 0; i < map.size(); ++i)
        out[i] = velocity[map[i]];
    return out;
}

Eigen::VectorXd HybridSpace::gather_pressure(std::size_t t, const Eigen::VectorXd& pressure) const
{
    return pressure.segment(pressure_offset(t), cell_dim());
}

Eigen::VectorXd HybridSpace::interpolate(const VectorField& v) const
{
    Eigen::VectorXd out = Eigen::VectorXd::Zero(num_velocity());
    for (std::size_t t = 0; t < packs_.size(); ++t) {
        const Eigen::VectorXd local = lpshho::interpolate(packs_[t], v);
        const auto map = local_to_global(t);
        for (std::size_t i = 0; i < map.size(); ++i)
            out[map[i]] = local[i];
    }
    return out;
}

Eigen::VectorXd HybridSpace::project_pressure(const ScalarField& p) const
{
    Eigen::VectorXd out(num_pressure());
    for (std::size_t t = 0; t < packs_.size(); ++t)
        out.segment(pressure_offset(t), cell_dim()) = l2_project(packs_[t].basis, packs_[t].rule, p, cell_dim());
    return out;
}

void HybridSpace::set_boundary_values(Eigen::VectorXd& velocity, const VectorField& g) const
{
    for (const auto& pack : packs_) {
        for (const auto& fd : pack.faces) {
            if (!mesh_->face(fd.face).is_boundary())
                continue;
            for (int c = 0; c < 2; ++c) {
                const ScalarField gc = [&g, c](const Point& x) { return g(x)[c]; };
                velocity.segment(face_offset(fd.face) + c * face_dim(), face_dim()) = l2_project(fd.basis, fd.rule, gc);
            }
        }
    }
}

Eigen::Vector2d HybridSpace::evaluate_velocity(std::size_t t, const Eigen::VectorXd& velocity, const Point& x) const
{
    const CellOperatorPack& p = packs_.at(t);
    const Eigen::VectorXd phi = p.basis.values(x).head(cell_dim());
    return {phi.dot(velocity.segment(cell_offset(t), cell_dim())),
            phi.dot(velocity.segment(cell_offset(t) + cell_dim(), cell_dim()))};
}

double HybridSpace::evaluate_pressure(std::size_t t, const Eigen::VectorXd& pressure, const Point& x) const
{
    const CellOperatorPack& p = packs_.at(t);
    return p.basis.values(x).head(cell_dim()).dot(pressure.segment(pressure_offset(t), cell_dim()));
}

}  // namespace lpshho
