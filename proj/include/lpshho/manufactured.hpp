#pragma once

#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "lpshho/basis.hpp"
#include "lpshho/oseen_forms.hpp"

namespace lpshho {

enum class CaseKind { smooth, layer, patch };

CaseKind parse_case(std::string_view name);
std::string_view to_string(CaseKind kind);

/// Exact Oseen solution with closed-form derivatives. grad_u(x)(i, j) = d_j u_i.
struct ManufacturedCase {
    CaseKind kind = CaseKind::smooth;
    double epsilon = 1.0;
    double sigma = 1.0;
    Eigen::Vector2d b = Eigen::Vector2d(1.0, 1.0);
    VectorField u;
    TensorField grad_u;
    VectorField laplacian_u;
    ScalarField p;
    VectorField grad_p;
    /// Exact solution vanishes on the boundary of the unit square.
    bool homogeneous = true;

    /// -eps Lap u + (b . grad) u + sigma u + grad p
    Eigen::Vector2d force(const Point& x) const;
    OseenCoefficients coefficients() const;
};

/// Stream function x^2 y^2 (x-1)^2 (y-1)^2, p = 2 cos x sin y - 2 sin 1 (1 - cos 1).
ManufacturedCase case_smooth(double epsilon = 1e-8);
/// Boundary layer of width ~ sqrt(eps): stream function
/// x^2 y^2 (e^{l(x-1)} - 1)^2 (e^{l(y-1)} - 1)^2 with l = 1/(2 sqrt eps).
ManufacturedCase case_boundary_layer(double epsilon = 1e-2);
/// u = (y, x), p = x + y - 1, reproduced exactly for k >= 1.
ManufacturedCase case_patch(double epsilon = 1.0);

ManufacturedCase make_case(CaseKind kind, double epsilon, double sigma = 1.0);

}  // namespace lpshho
