#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "lpshho/hho_operators.hpp"
#include "lpshho/mesh.hpp"
#include "lpshho/oseen_forms.hpp"

namespace lpshho {

using SparseMatrix = Eigen::SparseMatrix<double>;

class AssemblyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every bilinear form of the scheme assembled on the full hybrid space
/// (boundary faces included). Rows index test functions, columns trial.
struct DiscreteForms {
    SparseMatrix viscous;         // A_{eps,h}
    SparseMatrix convection;      // A_{b,h}
    SparseMatrix lps;             // A_{S,h}
    SparseMatrix normal_jump;     // A_{N,h}
    SparseMatrix coupling;        // B_h(v, q) = q^T coupling v
    SparseMatrix pressure_stab;   // B_{G,h}
    SparseMatrix pressure_mass;   // (p, q)
    Eigen::VectorXd load;         // (f, v_T) per velocity unknown
    Eigen::VectorXd pressure_weights;  // (1, q)_T per pressure unknown
};

/// Global block matrices of the scheme on `space`. The packs and the
/// fluctuation quadrature share space.quad_degree().
DiscreteForms assemble_forms(const HybridSpace& space, const MacroDecomposition& macro,
                             const OseenCoefficients& coeffs, const StabilisationParams& params);

/// Unknown numbering of the linear system: free velocity unknowns (cell
/// unknowns and interior-face unknowns), then pressure, then one Lagrange
/// multiplier for the zero-mean constraint.
class DofMap {
public:
    DofMap() = default;
    explicit DofMap(const HybridSpace& space);

    std::size_t num_unknowns() const noexcept { return num_velocity_ + num_pressure_ + 1; }
    std::size_t num_velocity() const noexcept { return num_velocity_; }
    std::size_t num_pressure() const noexcept { return num_pressure_; }
    std::size_t pressure_offset() const noexcept { return num_velocity_; }
    std::size_t multiplier() const noexcept { return num_velocity_ + num_pressure_; }
    /// System index of a hybrid velocity unknown; nullopt for boundary faces.
    std::optional<std::size_t> velocity(std::size_t hybrid_index) const
    {
        const long idx = velocity_map_.at(hybrid_index);
        return idx < 0 ? std::nullopt : std::optional<std::size_t>(static_cast<std::size_t>(idx));
    }
    /// Hybrid index of a free velocity unknown.
    std::size_t hybrid(std::size_t system_index) const { return free_.at(system_index); }
    const std::vector<std::size_t>& free_velocity() const noexcept { return free_; }
    /// Owning cell of a system velocity unknown, or -1 for face unknowns.
    long cell_of(std::size_t system_index) const { return cell_of_.at(system_index); }
    std::size_t hybrid_velocity_size() const noexcept { return velocity_map_.size(); }

private:
    std::vector<long> velocity_map_;
    std::vector<std::size_t> free_;
    std::vector<long> cell_of_;
    std::size_t num_velocity_ = 0;
    std::size_t num_pressure_ = 0;
};

struct AssemblyOptions {
    /// Lifted mode: boundary face unknowns are set to pi_F^k g and moved to
    /// the right-hand side instead of being zero.
    std::optional<VectorField> dirichlet;
};

struct GlobalSystem {
    SparseMatrix matrix;
    Eigen::VectorXd rhs;
    DofMap dofs;
    Eigen::VectorXd boundary_velocity;  // hybrid vector holding prescribed boundary values
    std::size_t nnz = 0;
    /// max |A_pu + A_up^T|, zero when the +/- B_h blocks are exact negatives
    double coupling_antisymmetry = 0.0;
};

GlobalSystem assemble(const HybridSpace& space, const DiscreteForms& forms, const AssemblyOptions& options = {});

struct Solution {
    Eigen::VectorXd velocity;  // full hybrid vector
    Eigen::VectorXd pressure;
    double multiplier = 0.0;
    double residual = 0.0;  // ||Ax - b|| / ||b|| (absolute when b = 0)
    double pressure_mean = 0.0;
};

/// Maps a system vector back to hybrid velocity and pressure.
Solution unpack(const GlobalSystem& system, const Eigen::VectorXd& x, const Eigen::VectorXd& pressure_weights);

/// Sparse LU solve. Throws SolverError if the factorization fails.
Solution solve(const GlobalSystem& system, const Eigen::VectorXd& pressure_weights);

/// Schur complement onto face velocities, pressures and the multiplier after
/// cellwise elimination of cell velocity unknowns.
struct CondensedSystem {
    SparseMatrix matrix;
    Eigen::VectorXd rhs;
    std::vector<std::size_t> eliminated;  // system indices of cell velocity unknowns
    std::vector<std::size_t> retained;    // the remaining system indices
    SparseMatrix interior_inverse;        // block-diagonal A_II^{-1}
    SparseMatrix interior_coupling;       // A_IR
    Eigen::VectorXd interior_rhs;         // b_I

    std::size_t num_unknowns() const noexcept { return retained.size(); }
    /// x_I = A_II^{-1}(b_I - A_IR x_R), scattered into a full system vector.
    Eigen::VectorXd recover(const Eigen::VectorXd& reduced_solution, std::size_t full_size) const;
};

/// Throws AssemblyError when cell unknowns couple across cells (e.g.
/// vertex-patch LPS) or a cell block is singular.
CondensedSystem static_condensation(const GlobalSystem& system);

Solution solve_condensed(const GlobalSystem& system, const Eigen::VectorXd& pressure_weights);

/// Coordinate text dump: "row col value" lines for the matrix, a blank line,
/// then one right-hand-side value per line.
void dump_system(const GlobalSystem& system, std::ostream& out);

}  // namespace lpshho
