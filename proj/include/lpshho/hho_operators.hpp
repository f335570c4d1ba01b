#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "lpshho/basis.hpp"
#include "lpshho/mesh.hpp"
#include "lpshho/quadrature.hpp"

namespace lpshho {

/// Index layout of one cell's hybrid unknowns U_T^k.
///
/// Scalar layout: [cell P^k | face_0 P^k | face_1 P^k | ...].
/// Vector layout: [cell x | cell y | face_0 x | face_0 y | face_1 x | ...].
struct LocalLayout {
    int k = 0;
    std::size_t cell_dim = 0;  // dim P^k(T)
    std::size_t face_dim = 0;  // dim P^k(F) = k + 1
    std::size_t num_faces = 0;

    LocalLayout() = default;
    LocalLayout(int degree, std::size_t faces)
        : k(degree), cell_dim(dim_p2(degree)), face_dim(static_cast<std::size_t>(degree + 1)), num_faces(faces)
    {}

    std::size_t scalar_size() const noexcept { return cell_dim + num_faces * face_dim; }
    std::size_t vector_size() const noexcept { return 2 * scalar_size(); }

    std::size_t cell_index(int comp, std::size_t i) const noexcept { return comp * cell_dim + i; }
    std::size_t face_index(std::size_t face, int comp, std::size_t j) const noexcept
    {
        return 2 * cell_dim + face * 2 * face_dim + comp * face_dim + j;
    }
    /// Vector index of scalar local index `s` for component `comp`.
    std::size_t vector_index(int comp, std::size_t s) const noexcept
    {
        if (s < cell_dim)
            return cell_index(comp, s);
        const std::size_t f = (s - cell_dim) / face_dim;
        return face_index(f, comp, (s - cell_dim) % face_dim);
    }
};

/// Block-diagonal copy of a scalar (ns x ns) matrix onto both components.
Eigen::MatrixXd vector_block(const LocalLayout& layout, const Eigen::MatrixXd& scalar);
/// Scalar (m x ns) operator applied componentwise: result is (2m x nv), rows
/// [component x | component y].
Eigen::MatrixXd vector_operator(const LocalLayout& layout, const Eigen::MatrixXd& scalar);
/// Scalar component `comp` of a vector local block.
Eigen::VectorXd scalar_component(const LocalLayout& layout, const Eigen::VectorXd& block, int comp);

struct PackOptions {
    int quad_degree = -1;     // default 2k + 4
    int orthonormalize = -1;  // default: on for k >= 2
};

struct FaceData {
    std::size_t face = 0;
    Point normal = Point::Zero();  // out of this cell
    double measure = 0.0;
    QuadRule rule;
    FaceBasis basis;
    Eigen::MatrixXd cell_values;  // nk1 x nq, cell basis traced on the face
    Eigen::MatrixXd normal_derivatives;  // nk1 x nq, grad(phi) . n
    Eigen::MatrixXd face_values;  // kf x nq
    Eigen::VectorXd flux;         // b . n at the face points
    Eigen::MatrixXd mass;         // kf x kf
    Eigen::MatrixXd cross;        // nk1 x kf: int phi_i psi_j
    Eigen::MatrixXd trace_projection;  // kf x nk1: pi_F of a cell polynomial
    /// (v_T - v_F) at the face points as a map on scalar local unknowns (nq x ns).
    Eigen::MatrixXd difference;
};

/// Per-cell operator matrices. Every matrix acts on local coefficient
/// vectors in the layout above; scalar operators apply to each velocity
/// component separately.
struct CellOperatorPack {
    std::size_t cell = 0;
    LocalLayout layout;
    double diameter = 0.0;
    double measure = 0.0;

    CellBasis basis;  // degree k + 1; the first cell_dim functions span P^k
    QuadRule rule;
    Eigen::MatrixXd values;  // nk1 x nq
    Eigen::MatrixXd dx, dy;  // nk1 x nq
    std::vector<FaceData> faces;

    Eigen::MatrixXd mass;       // nk1 x nk1
    Eigen::MatrixXd stiffness;  // nk1 x nk1
    Eigen::LDLT<Eigen::MatrixXd> mass_k;  // factor of the P^k block

    Eigen::MatrixXd reconstruction;  // nk1 x ns (scalar r_T^{k+1})
    Eigen::MatrixXd consistent;      // ns x ns: (grad r, grad r)_T
    Eigen::MatrixXd stabilisation;   // ns x ns: h_T^{-1} sum_F (pi_F delta, pi_F delta)_F
    Eigen::MatrixXd derivative_x, derivative_y;  // nk x nk: (d_c phi_j, phi_i)_T on P^k
    Eigen::MatrixXd face_flux;       // nk x ns: sum_F (b_TF (v_F - v_T), phi_i)_F
    Eigen::MatrixXd advection;       // nk x ns: scalar G_{b,T}^k
    Eigen::MatrixXd divergence;      // nk x nv: D_T^k
    Eigen::MatrixXd upwind;          // ns x ns: sum_F (b_TF^- (w_F - w_T), v_F - v_T)_F
    Eigen::MatrixXd abs_flux;        // ns x ns: sum_F (|b_TF|/2 (w_F - w_T), v_F - v_T)_F
    Eigen::MatrixXd jump;            // ns x ns: sum_F h_F^{-1} (w_F - w_T, v_F - v_T)_F
    Eigen::MatrixXd normal_jump;     // nv x nv: sum_F ((v_T - v_F).n, (w_T - w_F).n)_F
    std::array<Eigen::MatrixXd, 2> pressure_gradient;  // nk x nk: d_c q in P^k coefficients

    Eigen::MatrixXd mass_pk() const { return mass.topLeftCorner(layout.cell_dim, layout.cell_dim); }
};

CellOperatorPack build_pack(const PolytopalMesh& mesh, std::size_t cell, int k, const VectorField& advection,
                            const PackOptions& options = {});

/// Scalar G_{b_M,T}^k for a constant advection vector (nk x ns).
Eigen::MatrixXd constant_advection_operator(const CellOperatorPack& pack, const Eigen::Vector2d& b);

/// I_T^k v: componentwise L2 projections onto the cell and face spaces.
Eigen::VectorXd interpolate(const CellOperatorPack& pack, const VectorField& v);

/// Coefficients (nk1 x 2) of r_T^{k+1} in pack.basis.
Eigen::MatrixXd velocity_reconstruction(const CellOperatorPack& pack, const Eigen::VectorXd& block);
/// Coefficients (nk x 2) of G_{b,T}^k in the P^k part of pack.basis.
Eigen::MatrixXd advection_reconstruction(const CellOperatorPack& pack, const Eigen::VectorXd& block);
Eigen::MatrixXd advection_reconstruction(const CellOperatorPack& pack, const Eigen::VectorXd& block,
                                         const Eigen::Vector2d& constant_b);
/// Coefficients (nk) of D_T^k.
Eigen::VectorXd divergence_reconstruction(const CellOperatorPack& pack, const Eigen::VectorXd& block);

/// Global hybrid space U_h^k on a mesh (boundary faces included) together
/// with the equal-order broken pressure space.
///
/// Velocity numbering: cell t at 2*nk*t, face f at 2*nk*Nc + 2*kf*f, each
/// block component-major. Pressure numbering: cell t at nk*t.
class HybridSpace {
public:
    HybridSpace(const PolytopalMesh& mesh, int k, VectorField advection, const PackOptions& options = {});

    const PolytopalMesh& mesh() const noexcept { return *mesh_; }
    int degree() const noexcept { return k_; }
    std::size_t cell_dim() const noexcept { return dim_p2(k_); }
    std::size_t face_dim() const noexcept { return static_cast<std::size_t>(k_ + 1); }
    const CellOperatorPack& pack(std::size_t t) const { return packs_.at(t); }
    const std::vector<CellOperatorPack>& packs() const noexcept { return packs_; }
    const VectorField& advection() const noexcept { return advection_; }
    int quad_degree() const noexcept { return quad_degree_; }

    std::size_t num_velocity() const noexcept;
    std::size_t num_pressure() const noexcept { return cell_dim() * mesh_->num_cells(); }
    std::size_t cell_offset(std::size_t t) const noexcept { return 2 * cell_dim() * t; }
    std::size_t face_offset(std::size_t f) const noexcept
    {
        return 2 * cell_dim() * mesh_->num_cells() + 2 * face_dim() * f;
    }
    std::size_t pressure_offset(std::size_t t) const noexcept { return cell_dim() * t; }

    /// Global velocity index of every local vector unknown of cell t.
    std::vector<std::size_t> local_to_global(std::size_t t) const;
    Eigen::VectorXd gather(std::size_t t, const Eigen::VectorXd& velocity) const;
    Eigen::VectorXd gather_pressure(std::size_t t, const Eigen::VectorXd& pressure) const;

    /// I_h^k v.
    Eigen::VectorXd interpolate(const VectorField& v) const;
    /// pi_h^k p.
    Eigen::VectorXd project_pressure(const ScalarField& p) const;
    /// Sets only the boundary-face unknowns of `velocity` to pi_F^k g.
    void set_boundary_values(Eigen::VectorXd& velocity, const VectorField& g) const;

    Eigen::Vector2d evaluate_velocity(std::size_t t, const Eigen::VectorXd& velocity, const Point& x) const;
    double evaluate_pressure(std::size_t t, const Eigen::VectorXd& pressure, const Point& x) const;

private:
    const PolytopalMesh* mesh_;
    int k_;
    int quad_degree_;
    VectorField advection_;
    std::vector<CellOperatorPack> packs_;
};

}  // namespace lpshho
