#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace lpshho {

using Point = Eigen::Vector2d;

class MeshError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a mesh file cannot be parsed; the message names the offending
/// line or field.
class MeshParseError : public MeshError {
public:
    using MeshError::MeshError;
};

/// Raised when a cell is not a valid counter-clockwise simple polygon.
class MeshValidationError : public MeshError {
public:
    MeshValidationError(std::size_t cell, const std::string& what)
        : MeshError("cell " + std::to_string(cell) + ": " + what), cell_(cell)
    {}
    std::size_t cell() const noexcept { return cell_; }

private:
    std::size_t cell_;
};

struct Face {
    std::size_t v0 = 0, v1 = 0;  // tangent runs v0 -> v1
    std::size_t owner = 0;
    std::optional<std::size_t> neighbor;
    Point normal = Point::Zero();  // unit, out of the owner
    Point midpoint = Point::Zero();
    double measure = 0.0;

    bool is_boundary() const noexcept { return !neighbor.has_value(); }
    Point tangent() const noexcept { return Point(-normal.y(), normal.x()); }
};

struct Cell {
    std::vector<std::size_t> vertices;  // counter-clockwise
    std::vector<std::size_t> faces;     // faces[i] joins vertices[i], vertices[i+1]
    Point centroid = Point::Zero();
    double measure = 0.0;
    double diameter = 0.0;
};

/// Polygonal decomposition of a planar domain. Immutable once built.
class PolytopalMesh {
public:
    PolytopalMesh() = default;

    /// Builds faces, normals and geometric quantities from vertex and cell
    /// lists. Throws MeshValidationError for non-CCW or self-intersecting cells.
    PolytopalMesh(std::vector<Point> vertices,
                  std::vector<std::vector<std::size_t>> cells);

    const std::vector<Point>& vertices() const noexcept { return vertices_; }
    const std::vector<Cell>& cells() const noexcept { return cells_; }
    const std::vector<Face>& faces() const noexcept { return faces_; }
    const Cell& cell(std::size_t t) const { return cells_.at(t); }
    const Face& face(std::size_t f) const { return faces_.at(f); }
    std::size_t num_cells() const noexcept { return cells_.size(); }
    std::size_t num_faces() const noexcept { return faces_.size(); }
    std::size_t num_boundary_faces() const noexcept;
    std::size_t num_interior_faces() const noexcept
    {
        return faces_.size() - num_boundary_faces();
    }

    /// Outward unit normal of face `f` seen from cell `t`.
    Point outward_normal(std::size_t t, std::size_t f) const;
    /// +1 when `t` owns `f`, -1 when it is the neighbor.
    double orientation(std::size_t t, std::size_t f) const;

    /// Max cell diameter.
    double h() const noexcept;
    /// sqrt(min h_F / h_T) over all cell/face pairs.
    double regularity() const;
    std::size_t max_faces_per_cell() const noexcept;
    double total_measure() const noexcept;
    /// Vertex indices lying on at least one boundary face.
    std::vector<bool> boundary_vertices() const;

private:
    std::vector<Point> vertices_;
    std::vector<Cell> cells_;
    std::vector<Face> faces_;
};

enum class MeshFamily { triangular, cartesian, hexagonal };

MeshFamily parse_family(std::string_view name);
std::string_view to_string(MeshFamily family);

/// Unit-square meshes. Cartesian and triangular level l use a 2^(l+1) grid;
/// hexagonal level l uses 2^(l+1) hexagon columns clipped to the square.
PolytopalMesh generate_mesh(MeshFamily family, int level);

/// Reads the JSON polygon format {"vertices": [[x,y],...], "cells": [[i,...],...]}.
PolytopalMesh load_mesh(const std::string& path);
PolytopalMesh parse_mesh(std::string_view json_text);
/// Canonical JSON: vertex list unchanged, each cell rotated to start at its
/// smallest vertex index.
std::string serialize_mesh(const PolytopalMesh& mesh);

struct MacroPatch {
    std::vector<std::size_t> cells;
    double diameter = 0.0;
    Point centroid = Point::Zero();
    double measure = 0.0;
};

enum class MacroMode { trivial, vertex_patch };

MacroMode parse_macro_mode(std::string_view name);

struct MacroDecomposition {
    MacroMode mode = MacroMode::trivial;
    std::vector<MacroPatch> patches;
    /// max over patches of the number of patches sharing a cell with it (itself included)
    std::size_t max_overlap = 0;
    /// max over patches and member cells of h_M / h_T
    double diameter_ratio = 0.0;
};

/// Trivial mode gives one patch per cell. Vertex-patch mode gives one patch
/// per interior vertex; cells touching no interior vertex get a singleton
/// patch so the patches always cover the mesh.
MacroDecomposition build_macro_decomposition(const PolytopalMesh& mesh, MacroMode mode);

}  // namespace lpshho
