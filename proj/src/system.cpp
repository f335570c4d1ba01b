#include "lpshho/system.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include <Eigen/SparseLU>

namespace lpshho {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void scatter(Triplets& out, const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols,
             const Eigen::MatrixXd& local)
{
    for (Eigen::Index i = 0; i < local.rows(); ++i)
        for (Eigen::Index j = 0; j < local.cols(); ++j)
            if (local(i, j) != 0.0)
                out.emplace_back(static_cast<int>(rows[i]), static_cast<int>(cols[j]), local(i, j));
}

SparseMatrix from_triplets(std::size_t rows, std::size_t cols, const Triplets& t)
{
    SparseMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
}

std::vector<std::size_t> pressure_indices(const HybridSpace& space, std::size_t t)
{
    std::vector<std::size_t> out(space.cell_dim());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = space.pressure_offset(t) + i;
    return out;
}

}  // namespace

DiscreteForms assemble_forms(const HybridSpace& space, const MacroDecomposition& macro,
                             const OseenCoefficients& coeffs, const StabilisationParams& params)
{
    coeffs.validate();
    const PolytopalMesh& mesh = space.mesh();
    if (mesh.num_cells() == 0)
        throw AssemblyError("empty mesh");
    if (params.tau.size() != macro.patches.size())
        throw AssemblyError("stabilisation parameters do not match the macro decomposition");

    const std::size_t nv = space.num_velocity();
    const std::size_t np = space.num_pressure();
    const std::size_t nk = space.cell_dim();

    Triplets visc, conv, lps, nj, cpl, pst, pm;
    DiscreteForms forms;
    forms.load = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nv));
    forms.pressure_weights = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(np));

    for (std::size_t t = 0; t < mesh.num_cells(); ++t) {
        const CellOperatorPack& pack = space.pack(t);
        const auto map = space.local_to_global(t);
        const auto pmap = pressure_indices(space, t);

        scatter(visc, map, map, local_viscous_block(pack, coeffs.epsilon));
        scatter(conv, map, map, local_convection_block(pack, coeffs.sigma));
        scatter(nj, map, map, normal_jump_block(pack));
        scatter(cpl, pmap, map, local_pressure_coupling(pack));
        const Eigen::MatrixXd mk = pack.mass_pk();
        scatter(pm, pmap, pmap, mk);

        const Eigen::MatrixXd phi = pack.values.topRows(static_cast<Eigen::Index>(nk));
        Eigen::MatrixXd f(2, static_cast<Eigen::Index>(pack.rule.size()));
        for (std::size_t q = 0; q < pack.rule.size(); ++q)
            f.col(static_cast<Eigen::Index>(q)) = pack.rule.weights[q] * coeffs.force(pack.rule.points[q]);
        for (int c = 0; c < 2; ++c) {
            const Eigen::VectorXd lc = phi * f.row(c).transpose();
            for (std::size_t i = 0; i < nk; ++i)
                forms.load[static_cast<Eigen::Index>(space.cell_offset(t) + c * nk + i)] += lc[static_cast<Eigen::Index>(i)];
        }
        const Eigen::VectorXd w = phi * Eigen::Map<const Eigen::VectorXd>(pack.rule.weights.data(),
                                                                         static_cast<Eigen::Index>(pack.rule.size()));
        forms.pressure_weights.segment(static_cast<Eigen::Index>(space.pressure_offset(t)), static_cast<Eigen::Index>(nk)) = w;
    }

    for (std::size_t m = 0; m < macro.patches.size(); ++m) {
        const MacroPatch& patch = macro.patches[m];
        const PatchFluctuation fluct(mesh, patch, space.degree(), space.quad_degree());
        std::vector<const CellOperatorPack*> packs;
        std::vector<std::size_t> vmap, pmap;
        for (auto t : patch.cells) {
            packs.push_back(&space.pack(t));
            const auto lm = space.local_to_global(t);
            vmap.insert(vmap.end(), lm.begin(), lm.end());
            const auto lp = pressure_indices(space, t);
            pmap.insert(pmap.end(), lp.begin(), lp.end());
        }
        scatter(lps, vmap, vmap, lps_block(fluct, packs, params.b_patch[m], params.tau[m]));
        scatter(pst, pmap, pmap, pressure_gradient_block(fluct, packs, params.rho[m]));
    }

    forms.viscous = from_triplets(nv, nv, visc);
    forms.convection = from_triplets(nv, nv, conv);
    forms.lps = from_triplets(nv, nv, lps);
    forms.normal_jump = from_triplets(nv, nv, nj);
    forms.coupling = from_triplets(np, nv, cpl);
    forms.pressure_stab = from_triplets(np, np, pst);
    forms.pressure_mass = from_triplets(np, np, pm);
    return forms;
}

DofMap::DofMap(const HybridSpace& space)
{
    const PolytopalMesh& mesh = space.mesh();
    velocity_map_.assign(space.num_velocity(), -1);
    const std::size_t cell_block = 2 * space.cell_dim();
    for (std::size_t t = 0; t < mesh.num_cells(); ++t)
        for (std::size_t i = 0; i < cell_block; ++i) {
            velocity_map_[space.cell_offset(t) + i] = static_cast<long>(free_.size());
            free_.push_back(space.cell_offset(t) + i);
            cell_of_.push_back(static_cast<long>(t));
        }
    const std::size_t face_block = 2 * space.face_dim();
    for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
        if (mesh.face(f).is_boundary())
            continue;
        for (std::size_t i = 0; i < face_block; ++i) {
            velocity_map_[space.face_offset(f) + i] = static_cast<long>(free_.size());
            free_.push_back(space.face_offset(f) + i);
            cell_of_.push_back(-1);
        }
    }
    num_velocity_ = free_.size();
    num_pressure_ = space.num_pressure();
}

GlobalSystem assemble(const HybridSpace& space, const DiscreteForms& forms, const AssemblyOptions& options)
{
    if (space.mesh().num_cells() == 0)
        throw AssemblyError("empty mesh");
    const auto nvh = static_cast<Eigen::Index>(space.num_velocity());
    const auto np = static_cast<Eigen::Index>(space.num_pressure());
    if (forms.viscous.rows() != nvh || forms.coupling.rows() != np || forms.load.size() != nvh)
        throw AssemblyError("forms were assembled on a different space");

    GlobalSystem sys;
    sys.dofs = DofMap(space);
    const DofMap& dofs = sys.dofs;
    const auto nf = static_cast<Eigen::Index>(dofs.num_velocity());
    const auto n = static_cast<Eigen::Index>(dofs.num_unknowns());

    // Restriction to free velocity unknowns.
    SparseMatrix P(nvh, nf);
    {
        Triplets t;
        for (Eigen::Index i = 0; i < nf; ++i)
            t.emplace_back(static_cast<int>(dofs.hybrid(static_cast<std::size_t>(i))), static_cast<int>(i), 1.0);
        P.setFromTriplets(t.begin(), t.end());
    }

    const SparseMatrix A = forms.viscous + forms.convection + forms.lps + forms.normal_jump;
    const SparseMatrix Aff = P.transpose() * A * P;
    const SparseMatrix Bf = forms.coupling * P;

    sys.boundary_velocity = Eigen::VectorXd::Zero(nvh);
    if (options.dirichlet)
        space.set_boundary_values(sys.boundary_velocity, *options.dirichlet);

    Triplets t;
    t.reserve(static_cast<std::size_t>(Aff.nonZeros() + 2 * Bf.nonZeros() + forms.pressure_stab.nonZeros() + 2 * np));
    for (Eigen::Index c = 0; c < Aff.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(Aff, c); it; ++it)
            t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (Eigen::Index c = 0; c < Bf.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(Bf, c); it; ++it) {
            t.emplace_back(static_cast<int>(it.col()), static_cast<int>(nf + it.row()), it.value());
            t.emplace_back(static_cast<int>(nf + it.row()), static_cast<int>(it.col()), -it.value());
        }
    for (Eigen::Index c = 0; c < forms.pressure_stab.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(forms.pressure_stab, c); it; ++it)
            t.emplace_back(static_cast<int>(nf + it.row()), static_cast<int>(nf + it.col()), it.value());
    const auto lambda = static_cast<int>(dofs.multiplier());
    for (Eigen::Index j = 0; j < np; ++j) {
        const double w = forms.pressure_weights[j];
        t.emplace_back(lambda, static_cast<int>(nf + j), w);
        t.emplace_back(static_cast<int>(nf + j), lambda, w);
    }
    sys.matrix = from_triplets(static_cast<std::size_t>(n), static_cast<std::size_t>(n), t);
    sys.nnz = static_cast<std::size_t>(sys.matrix.nonZeros());

    sys.rhs = Eigen::VectorXd::Zero(n);
    sys.rhs.head(nf) = P.transpose() * forms.load;
    if (options.dirichlet) {
        const Eigen::VectorXd& g = sys.boundary_velocity;
        sys.rhs.head(nf) -= P.transpose() * (A * g);
        sys.rhs.segment(nf, np) += forms.coupling * g;
    }

    const SparseMatrix up = sys.matrix.block(0, nf, nf, np);
    const SparseMatrix pu = sys.matrix.block(nf, 0, np, nf);
    const SparseMatrix sum = SparseMatrix(up.transpose()) + pu;
    double worst = 0.0;
    for (Eigen::Index c = 0; c < sum.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(sum, c); it; ++it)
            worst = std::max(worst, std::abs(it.value()));
    sys.coupling_antisymmetry = worst;
    return sys;
}

Solution unpack(const GlobalSystem& system, const Eigen::VectorXd& x, const Eigen::VectorXd& pressure_weights)
{
    const DofMap& dofs = system.dofs;
    Solution s;
    s.velocity = system.boundary_velocity;
    for (std::size_t i = 0; i < dofs.num_velocity(); ++i)
        s.velocity[static_cast<Eigen::Index>(dofs.hybrid(i))] = x[static_cast<Eigen::Index>(i)];
    s.pressure = x.segment(static_cast<Eigen::Index>(dofs.pressure_offset()), static_cast<Eigen::Index>(dofs.num_pressure()));
    s.multiplier = x[static_cast<Eigen::Index>(dofs.multiplier())];
    const double bnorm = system.rhs.norm();
    const double r = (system.matrix * x - system.rhs).norm();
    s.residual = bnorm > 0.0 ? r / bnorm : r;
    const double area = pressure_weights.size() > 0 ? pressure_weights.sum() : 0.0;
    s.pressure_mean = area != 0.0 ? pressure_weights.dot(s.pressure) / area : 0.0;
    return s;
}

namespace {

Eigen::VectorXd lu_solve(const SparseMatrix& matrix, const Eigen::VectorXd& rhs)
{
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(matrix);
    lu.factorize(matrix);
    if (lu.info() != Eigen::Success)
        throw SolverError("sparse LU factorization failed: " + lu.lastErrorMessage());
    Eigen::VectorXd x = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !x.allFinite())
        throw SolverError("sparse LU solve failed");
    return x;
}

}  // namespace

Solution solve(const GlobalSystem& system, const Eigen::VectorXd& pressure_weights)
{
    return unpack(system, lu_solve(system.matrix, system.rhs), pressure_weights);
}

CondensedSystem static_condensation(const GlobalSystem& system)
{
    const DofMap& dofs = system.dofs;
    const auto n = static_cast<Eigen::Index>(dofs.num_unknowns());
    if (system.matrix.rows() != n)
        throw AssemblyError("system matrix does not match its DofMap");

    CondensedSystem c;
    std::vector<long> position(static_cast<std::size_t>(n), -1);  // index inside eliminated / retained
    std::vector<char> is_interior(static_cast<std::size_t>(n), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        if (u < dofs.num_velocity() && dofs.cell_of(u) >= 0) {
            is_interior[u] = 1;
            position[u] = static_cast<long>(c.eliminated.size());
            c.eliminated.push_back(u);
        } else {
            position[u] = static_cast<long>(c.retained.size());
            c.retained.push_back(u);
        }
    }
    const auto ni = static_cast<Eigen::Index>(c.eliminated.size());
    const auto nr = static_cast<Eigen::Index>(c.retained.size());

    Triplets tII, tIR, tRI, tRR;
    for (Eigen::Index col = 0; col < system.matrix.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(system.matrix, col); it; ++it) {
            const auto r = static_cast<std::size_t>(it.row());
            const auto cc = static_cast<std::size_t>(it.col());
            const int pr = static_cast<int>(position[r]);
            const int pc = static_cast<int>(position[cc]);
            if (is_interior[r] && is_interior[cc]) {
                if (dofs.cell_of(r) != dofs.cell_of(cc))
                    throw AssemblyError("cell unknowns of cells " + std::to_string(dofs.cell_of(r)) + " and " +
                                        std::to_string(dofs.cell_of(cc)) +
                                        " are coupled; static condensation needs a block-diagonal cell block");
                tII.emplace_back(pr, pc, it.value());
            } else if (is_interior[r]) {
                tIR.emplace_back(pr, pc, it.value());
            } else if (is_interior[cc]) {
                tRI.emplace_back(pr, pc, it.value());
            } else {
                tRR.emplace_back(pr, pc, it.value());
            }
        }
    const SparseMatrix AII = from_triplets(static_cast<std::size_t>(ni), static_cast<std::size_t>(ni), tII);
    c.interior_coupling = from_triplets(static_cast<std::size_t>(ni), static_cast<std::size_t>(nr), tIR);
    const SparseMatrix ARI = from_triplets(static_cast<std::size_t>(nr), static_cast<std::size_t>(ni), tRI);
    const SparseMatrix ARR = from_triplets(static_cast<std::size_t>(nr), static_cast<std::size_t>(nr), tRR);

    // Cell blocks are contiguous in the eliminated numbering.
    Triplets tinv;
    Eigen::Index start = 0;
    while (start < ni) {
        const long cell = dofs.cell_of(c.eliminated[static_cast<std::size_t>(start)]);
        Eigen::Index end = start;
        while (end < ni && dofs.cell_of(c.eliminated[static_cast<std::size_t>(end)]) == cell)
            ++end;
        const Eigen::MatrixXd block = Eigen::MatrixXd(AII.block(start, start, end - start, end - start));
        const Eigen::FullPivLU<Eigen::MatrixXd> lu(block);
        if (!lu.isInvertible())
            throw AssemblyError("local cell block of cell " + std::to_string(cell) + " is singular");
        const Eigen::MatrixXd inv = lu.inverse();
        for (Eigen::Index i = 0; i < inv.rows(); ++i)
            for (Eigen::Index j = 0; j < inv.cols(); ++j)
                tinv.emplace_back(static_cast<int>(start + i), static_cast<int>(start + j), inv(i, j));
        start = end;
    }
    c.interior_inverse = from_triplets(static_cast<std::size_t>(ni), static_cast<std::size_t>(ni), tinv);

    c.interior_rhs.resize(ni);
    for (Eigen::Index i = 0; i < ni; ++i)
        c.interior_rhs[i] = system.rhs[static_cast<Eigen::Index>(c.eliminated[static_cast<std::size_t>(i)])];
    Eigen::VectorXd bR(nr);
    for (Eigen::Index i = 0; i < nr; ++i)
        bR[i] = system.rhs[static_cast<Eigen::Index>(c.retained[static_cast<std::size_t>(i)])];

    const SparseMatrix X = ARI * c.interior_inverse;
    c.matrix = ARR - SparseMatrix(X * c.interior_coupling);
    c.matrix.prune(0.0);
    c.matrix.makeCompressed();
    c.rhs = bR - X * c.interior_rhs;
    return c;
}

Eigen::VectorXd CondensedSystem::recover(const Eigen::VectorXd& reduced_solution, std::size_t full_size) const
{
    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(full_size));
    const Eigen::VectorXd xi = interior_inverse * (interior_rhs - interior_coupling * reduced_solution);
    for (std::size_t i = 0; i < retained.size(); ++i)
        x[static_cast<Eigen::Index>(retained[i])] = reduced_solution[static_cast<Eigen::Index>(i)];
    for (std::size_t i = 0; i < eliminated.size(); ++i)
        x[static_cast<Eigen::Index>(eliminated[i])] = xi[static_cast<Eigen::Index>(i)];
    return x;
}

Solution solve_condensed(const GlobalSystem& system, const Eigen::VectorXd& pressure_weights)
{
    const CondensedSystem c = static_condensation(system);
    const Eigen::VectorXd xr = lu_solve(c.matrix, c.rhs);
    return unpack(system, c.recover(xr, system.dofs.num_unknowns()), pressure_weights);
}

void dump_system(const GlobalSystem& system, std::ostream& out)
{
    const auto precision = out.precision(17);
    out << "% " << system.matrix.rows() << ' ' << system.matrix.cols() << ' ' << system.matrix.nonZeros() << '\n';
    const Eigen::SparseMatrix<double, Eigen::RowMajor> rows = system.matrix;
    for (Eigen::Index r = 0; r < rows.outerSize(); ++r)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(rows, r); it; ++it)
            out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    out << '\n';
    for (Eigen::Index i = 0; i < system.rhs.size(); ++i)
        out << system.rhs[i] << '\n';
    out.precision(precision);
}

}  // namespace lpshho
