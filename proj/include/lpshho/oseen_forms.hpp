#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "lpshho/basis.hpp"
#include "lpshho/hho_operators.hpp"
#include "lpshho/mesh.hpp"

namespace lpshho {

using TensorField = std::function<Eigen::Matrix2d(const Point&)>;

/// Data of -eps Lap u + (b . grad) u + sigma u + grad p = f, div u = 0.
struct OseenCoefficients {
    double epsilon = 1.0;
    double sigma = 1.0;
    VectorField advection = [](const Point&) { return Eigen::Vector2d(1.0, 1.0); };
    /// Optional analytic Jacobian of b, rows = components. Empty: finite differences.
    TensorField advection_gradient;
    VectorField force = [](const Point&) { return Eigen::Vector2d::Zero(); };

    /// Throws std::invalid_argument unless epsilon > 0 and sigma > 0.
    void validate() const;
};

/// Largest |div b| at the cell quadrature points of `space`. Callers warn
/// above 1e-10.
double max_advection_divergence(const HybridSpace& space, const OseenCoefficients& coeffs);

struct StabilisationConstants {
    double c_tau = 1.0;
    double c_rho = 1.0;
    double eps_guard = 1e-12;
};

/// Patchwise parameters of the LPS scheme and of its analysis norms.
struct StabilisationParams {
    StabilisationConstants constants;
    std::vector<Eigen::Vector2d> b_patch;  // b_M, mean of b over M
    std::vector<double> b_sup;             // ||b||_{0,inf,M}
    std::vector<double> b_lip;             // |b|_{1,inf,M}
    std::vector<double> h;                 // h_M
    std::vector<double> tau;
    std::vector<double> rho;
    std::vector<double> gamma;
    double omega = 0.0;

    /// max_M gamma_M / min(tau_M, rho_M); the constant hidden in gamma_M <~ min(tau_M, rho_M).
    double gamma_ratio() const;
};

StabilisationParams build_params(const PolytopalMesh& mesh, const MacroDecomposition& macro,
                                 const OseenCoefficients& coeffs, const StabilisationConstants& constants = {},
                                 int quad_degree = 8);

/// A_{eps,T}: eps (grad r w, grad r v)_T + S_{eps,T}(w, v), on the vector layout.
Eigen::MatrixXd local_viscous_block(const CellOperatorPack& pack, double epsilon);
/// S_{eps,T} alone.
Eigen::MatrixXd local_stabilisation_block(const CellOperatorPack& pack, double epsilon);

/// A_{b,T}(w, v) = -(w_T, G_{b,T} v)_T + sum_F (b_TF^- (w_F - w_T), v_F - v_T)_F + sigma (w_T, v_T)_T.
/// Rows index the test function v, columns the trial w.
Eigen::MatrixXd local_convection_block(const CellOperatorPack& pack, double sigma);

/// Matrix Bloc (nk x nv) with -(D_T v, q)_T = q^T Bloc v.
Eigen::MatrixXd local_pressure_coupling(const CellOperatorPack& pack);

/// sum_F ((v_T - v_F).n, (w_T - w_F).n)_F.
Eigen::MatrixXd normal_jump_block(const CellOperatorPack& pack);

/// tau_M (K_M G_{b_M,M} v, K_M G_{b_M,M} w)_M on the patch cells' stacked
/// vector blocks (in patch.cells order). `packs[i]` must belong to the i-th
/// patch cell and be built with the fluctuation's quadrature degree.
Eigen::MatrixXd lps_block(const PatchFluctuation& fluctuation, const std::vector<const CellOperatorPack*>& packs,
                          const Eigen::Vector2d& b_patch, double tau);

/// rho_M (K_M grad_h q, K_M grad_h r)_M on stacked patch pressure coefficients.
Eigen::MatrixXd pressure_gradient_block(const PatchFluctuation& fluctuation,
                                        const std::vector<const CellOperatorPack*>& packs, double rho);

}  // namespace lpshho
