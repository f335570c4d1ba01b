#pragma once

#include <cstddef>
#include <vector>

#include "lpshho/mesh.hpp"

namespace lpshho {

struct QuadRule {
    std::vector<Point> points;
    std::vector<double> weights;
    int exactness = 0;

    std::size_t size() const noexcept { return points.size(); }
    double total_weight() const noexcept;
};

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Rule on the triangle (a, b, c) exact for total degree `degree`, from a
/// collapsed tensor Gauss-Legendre product.
QuadRule triangle_quadrature(const Point& a, const Point& b, const Point& c, int degree);

/// Fan sub-triangulation from the centroid. Throws MeshValidationError if
/// the cell is not star-shaped with respect to its centroid.
QuadRule cell_quadrature(const PolytopalMesh& mesh, std::size_t cell, int degree);

QuadRule segment_quadrature(const Point& a, const Point& b, int degree);
QuadRule face_quadrature(const PolytopalMesh& mesh, std::size_t face, int degree);

}  // namespace lpshho
