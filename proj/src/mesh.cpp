#include "lpshho/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace lpshho {

namespace {

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

bool segments_intersect(const Point& p1, const Point& p2, const Point& q1, const Point& q2)
{
    const double tol = 1e-14;
    const double d1 = cross(q2 - q1, p1 - q1);
    const double d2 = cross(q2 - q1, p2 - q1);
    const double d3 = cross(p2 - p1, q1 - p1);
    const double d4 = cross(p2 - p1, q2 - p1);
    if (((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol)) &&
        ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol)))
        return true;
    auto on_segment = [&](const Point& a, const Point& b, const Point& c, double d) {
        return std::abs(d) <= tol && c.x() >= std::min(a.x(), b.x()) - tol &&
               c.x() <= std::max(a.x(), b.x()) + tol && c.y() >= std::min(a.y(), b.y()) - tol &&
               c.y() <= std::max(a.y(), b.y()) + tol;
    };
    return on_segment(q1, q2, p1, d1) || on_segment(q1, q2, p2, d2) ||
           on_segment(p1, p2, q1, d3) || on_segment(p1, p2, q2, d4);
}

void validate_cell(std::size_t t, const std::vector<std::size_t>& ids, const std::vector<Point>& vertices)
{
    const std::size_t n = ids.size();
    if (n < 3)
        throw MeshValidationError(t, "fewer than 3 vertices");
    for (auto v : ids)
        if (v >= vertices.size())
            throw MeshValidationError(t, "vertex index " + std::to_string(v) + " out of range");
    std::set<std::size_t> unique(ids.begin(), ids.end());
    if (unique.size() != n)
        throw MeshValidationError(t, "repeated vertex");

    double twice_area = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        twice_area += cross(vertices[ids[i]], vertices[ids[(i + 1) % n]]);
    if (twice_area <= 0.0)
        throw MeshValidationError(t, "not counter-clockwise (signed area " +
                                         std::to_string(0.5 * twice_area) + ")");

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (j == i + 1 || (i == 0 && j == n - 1))
                continue;
            if (segments_intersect(vertices[ids[i]], vertices[ids[(i + 1) % n]], vertices[ids[j]],
                                   vertices[ids[(j + 1) % n]]))
                throw MeshValidationError(t, "self-intersecting boundary (edges " + std::to_string(i) +
                                                 " and " + std::to_string(j) + ")");
        }
    }
}

}  // namespace

PolytopalMesh::PolytopalMesh(std::vector<Point> vertices, std::vector<std::vector<std::size_t>> cells)
    : vertices_(std::move(vertices))
{
    if (cells.empty())
        throw MeshError("mesh has no cells");

    std::map<std::pair<std::size_t, std::size_t>, std::size_t> edge_to_face;
    cells_.reserve(cells.size());
    for (std::size_t t = 0; t < cells.size(); ++t) {
        validate_cell(t, cells[t], vertices_);
        Cell c;
        c.vertices = std::move(cells[t]);
        const std::size_t n = c.vertices.size();

        double area2 = 0.0;
        Point moment = Point::Zero();
        for (std::size_t i = 0; i < n; ++i) {
            const Point& a = vertices_[c.vertices[i]];
            const Point& b = vertices_[c.vertices[(i + 1) % n]];
            const double w = cross(a, b);
            area2 += w;
            moment += w * (a + b);
        }
        c.measure = 0.5 * area2;
        c.centroid = moment / (3.0 * area2);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                c.diameter = std::max(c.diameter, (vertices_[c.vertices[i]] - vertices_[c.vertices[j]]).norm());

        c.faces.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t a = c.vertices[i];
            const std::size_t b = c.vertices[(i + 1) % n];
            const auto key = std::minmax(a, b);
            auto it = edge_to_face.find({key.first, key.second});
            if (it == edge_to_face.end()) {
                Face f;
                f.v0 = a;
                f.v1 = b;
                f.owner = t;
                const Point d = vertices_[b] - vertices_[a];
                f.measure = d.norm();
                f.normal = Point(d.y(), -d.x()) / f.measure;
                f.midpoint = 0.5 * (vertices_[a] + vertices_[b]);
                edge_to_face.emplace(std::pair{key.first, key.second}, faces_.size());
                c.faces[i] = faces_.size();
                faces_.push_back(f);
            } else {
                Face& f = faces_[it->second];
                if (f.neighbor)
                    throw MeshValidationError(t, "edge shared by more than two cells");
                if (f.owner == t)
                    throw MeshValidationError(t, "edge appears twice in the same cell");
                if (f.v0 != b || f.v1 != a)
                    throw MeshValidationError(t, "orientation inconsistent with cell " + std::to_string(f.owner));
                f.neighbor = t;
                c.faces[i] = it->second;
            }
        }
        cells_.push_back(std::move(c));
    }
}

std::size_t PolytopalMesh::num_boundary_faces() const noexcept
{
    return static_cast<std::size_t>(
        std::count_if(faces_.begin(), faces_.end(), [](const Face& f) { return f.is_boundary(); }));
}

Point PolytopalMesh::outward_normal(std::size_t t, std::size_t f) const
{
    return orientation(t, f) * faces_.at(f).normal;
}

double PolytopalMesh::orientation(std::size_t t, std::size_t f) const
{
    const Face& face = faces_.at(f);
    if (face.owner == t)
        return 1.0;
    if (face.neighbor && *face.neighbor == t)
        return -1.0;
    throw MeshError("face " + std::to_string(f) + " is not a face of cell " + std::to_string(t));
}

double PolytopalMesh::h() const noexcept
{
    double h = 0.0;
    for (const auto& c : cells_)
        h = std::max(h, c.diameter);
    return h;
}

double PolytopalMesh::regularity() const
{
    double ratio = 1.0;
    for (const auto& c : cells_)
        for (auto f : c.faces)
            ratio = std::min(ratio, faces_[f].measure / c.diameter);
    return std::sqrt(ratio);
}

std::size_t PolytopalMesh::max_faces_per_cell() const noexcept
{
    std::size_t n = 0;
    for (const auto& c : cells_)
        n = std::max(n, c.faces.size());
    return n;
}

double PolytopalMesh::total_measure() const noexcept
{
    double s = 0.0;
    for (const auto& c : cells_)
        s += c.measure;
    return s;
}

std::vector<bool> PolytopalMesh::boundary_vertices() const
{
    std::vector<bool> on_boundary(vertices_.size(), false);
    for (const auto& f : faces_)
        if (f.is_boundary())
            on_boundary[f.v0] = on_boundary[f.v1] = true;
    return on_boundary;
}

MeshFamily parse_family(std::string_view name)
{
    if (name == "triangular")
        return MeshFamily::triangular;
    if (name == "cartesian")
        return MeshFamily::cartesian;
    if (name == "hexagonal")
        return MeshFamily::hexagonal;
    throw std::invalid_argument("unknown mesh family '" + std::string(name) + "'");
}

std::string_view to_string(MeshFamily family)
{
    switch (family) {
    case MeshFamily::triangular: return "triangular";
    case MeshFamily::cartesian: return "cartesian";
    case MeshFamily::hexagonal: return "hexagonal";
    }
    return "unknown";
}

namespace {

using LatticePoint = std::array<long long, 2>;
using LatticePolygon = std::vector<LatticePoint>;

// Polygons given on an integer lattice with spacing (sx, sy); shared
// vertices are merged exactly.
PolytopalMesh mesh_from_lattice(const std::vector<LatticePolygon>& polygons, double sx, double sy)
{
    std::map<LatticePoint, std::size_t> index;
    std::vector<Point> vertices;
    std::vector<std::vector<std::size_t>> cells;
    cells.reserve(polygons.size());
    for (const auto& poly : polygons) {
        std::vector<std::size_t> ids;
        for (const auto& p : poly) {
            auto [it, inserted] = index.try_emplace(p, vertices.size());
            if (inserted)
                vertices.emplace_back(static_cast<double>(p[0]) * sx, static_cast<double>(p[1]) * sy);
            ids.push_back(it->second);
        }
        cells.push_back(std::move(ids));
    }
    return PolytopalMesh(std::move(vertices), std::move(cells));
}

// Sutherland-Hodgman clip of a convex lattice polygon against the box [0,X]x[0,Y].
// All crossings of the hexagonal lattice with the box lie on lattice points.
LatticePolygon clip_to_box(const LatticePolygon& poly, long long X, long long Y)
{
    auto clip = [](const LatticePolygon& in, auto inside, auto intersect) {
        LatticePolygon out;
        for (std::size_t i = 0; i < in.size(); ++i) {
            const auto& cur = in[i];
            const auto& prev = in[(i + in.size() - 1) % in.size()];
            if (inside(cur)) {
                if (!inside(prev))
                    out.push_back(intersect(prev, cur));
                out.push_back(cur);
            } else if (inside(prev)) {
                out.push_back(intersect(prev, cur));
            }
        }
        LatticePolygon dedup;
        for (const auto& p : out)
            if (dedup.empty() || dedup.back() != p)
                dedup.push_back(p);
        while (dedup.size() > 1 && dedup.front() == dedup.back())
            dedup.pop_back();
        return dedup;
    };
    auto cut = [](int axis, long long value) {
        return [axis, value](const LatticePoint& a, const LatticePoint& b) {
            const int other = 1 - axis;
            LatticePoint p{};
            p[axis] = value;
            const long long num = (value - a[axis]) * (b[other] - a[other]);
            const long long den = b[axis] - a[axis];
            if (num % den != 0)
                throw MeshError("hexagonal clip left the lattice");
            p[other] = a[other] + num / den;
            return p;
        };
    };
    LatticePolygon p = poly;
    p = clip(p, [](const LatticePoint& q) { return q[0] >= 0; }, cut(0, 0));
    p = clip(p, [X](const LatticePoint& q) { return q[0] <= X; }, cut(0, X));
    p = clip(p, [](const LatticePoint& q) { return q[1] >= 0; }, cut(1, 0));
    p = clip(p, [Y](const LatticePoint& q) { return q[1] <= Y; }, cut(1, Y));
    return p;
}

}  // namespace

PolytopalMesh generate_mesh(MeshFamily family, int level)
{
    if (level < 0)
        throw std::invalid_argument("mesh level must be non-negative");
    const long long n = 1LL << (level + 1);
    std::vector<LatticePolygon> polys;

    switch (family) {
    case MeshFamily::cartesian:
        for (long long j = 0; j < n; ++j)
            for (long long i = 0; i < n; ++i)
                polys.push_back({{i, j}, {i + 1, j}, {i + 1, j + 1}, {i, j + 1}});
        return mesh_from_lattice(polys, 1.0 / n, 1.0 / n);

    case MeshFamily::triangular:
        for (long long j = 0; j < n; ++j)
            for (long long i = 0; i < n; ++i) {
                polys.push_back({{i, j}, {i + 1, j}, {i + 1, j + 1}});
                polys.push_back({{i, j}, {i + 1, j + 1}, {i, j + 1}});
            }
        return mesh_from_lattice(polys, 1.0 / n, 1.0 / n);

    case MeshFamily::hexagonal: {
        // Flat-top hexagons: column spacing dx = 1/n, half-width a = 2dx/3,
        // half-height dy/2 with dy = 1/n. Lattice units: dx/3 along x, dy/2 along y.
        const long long X = 3 * n, Y = 2 * n;
        for (long long j = 0; j <= n; ++j) {
            const bool odd = (j % 2) != 0;
            const long long rows = odd ? n : n + 1;
            for (long long i = 0; i < rows; ++i) {
                const long long cx = 3 * j;
                const long long cy = odd ? 2 * i + 1 : 2 * i;
                LatticePolygon hex{{cx + 2, cy}, {cx + 1, cy + 1}, {cx - 1, cy + 1},
                                   {cx - 2, cy}, {cx - 1, cy - 1}, {cx + 1, cy - 1}};
                auto clipped = clip_to_box(hex, X, Y);
                if (clipped.size() >= 3)
                    polys.push_back(std::move(clipped));
            }
        }
        return mesh_from_lattice(polys, 1.0 / X, 1.0 / Y);
    }
    }
    throw std::invalid_argument("unknown mesh family");
}

PolytopalMesh parse_mesh(std::string_view text)
{
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw MeshParseError(std::string("malformed mesh file: ") + e.what());
    }
    if (!doc.is_object())
        throw MeshParseError("mesh file: top level must be an object");
    for (const char* field : {"vertices", "cells"})
        if (!doc.contains(field) || !doc[field].is_array())
            throw MeshParseError(std::string("mesh file: missing or non-array field '") + field + "'");

    std::vector<Point> vertices;
    const auto& jv = doc["vertices"];
    for (std::size_t i = 0; i < jv.size(); ++i) {
        const auto& p = jv[i];
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
            throw MeshParseError("mesh file: field 'vertices[" + std::to_string(i) + "]' must be [x, y]");
        vertices.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    std::vector<std::vector<std::size_t>> cells;
    const auto& jc = doc["cells"];
    for (std::size_t t = 0; t < jc.size(); ++t) {
        const auto& c = jc[t];
        if (!c.is_array())
            throw MeshParseError("mesh file: field 'cells[" + std::to_string(t) + "]' must be an array");
        std::vector<std::size_t> ids;
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (!c[i].is_number_unsigned())
                throw MeshParseError("mesh file: field 'cells[" + std::to_string(t) + "][" + std::to_string(i) +
                                     "]' must be a non-negative integer");
            ids.push_back(c[i].get<std::size_t>());
        }
        cells.push_back(std::move(ids));
    }
    return PolytopalMesh(std::move(vertices), std::move(cells));
}

PolytopalMesh load_mesh(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw MeshParseError("cannot open mesh file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_mesh(buffer.str());
}

std::string serialize_mesh(const PolytopalMesh& mesh)
{
    using nlohmann::json;
    json doc;
    doc["vertices"] = json::array();
    for (const auto& v : mesh.vertices())
        doc["vertices"].push_back({v.x(), v.y()});
    doc["cells"] = json::array();
    for (const auto& c : mesh.cells()) {
        std::vector<std::size_t> ids = c.vertices;
        std::rotate(ids.begin(), std::min_element(ids.begin(), ids.end()), ids.end());
        doc["cells"].push_back(ids);
    }
    return doc.dump();
}

MacroMode parse_macro_mode(std::string_view name)
{
    if (name == "trivial")
        return MacroMode::trivial;
    if (name == "vertex" || name == "vertex_patch")
        return MacroMode::vertex_patch;
    throw std::invalid_argument("unknown macro mode '" + std::string(name) + "'");
}

MacroDecomposition build_macro_decomposition(const PolytopalMesh& mesh, MacroMode mode)
{
    MacroDecomposition macro;
    macro.mode = mode;
    std::vector<std::vector<std::size_t>> groups;

    if (mode == MacroMode::trivial) {
        for (std::size_t t = 0; t < mesh.num_cells(); ++t)
            groups.push_back({t});
    } else {
        std::vector<std::vector<std::size_t>> incident(mesh.vertices().size());
        for (std::size_t t = 0; t < mesh.num_cells(); ++t)
            for (auto v : mesh.cell(t).vertices)
                incident[v].push_back(t);
        const auto on_boundary = mesh.boundary_vertices();
        std::vector<bool> covered(mesh.num_cells(), false);
        for (std::size_t v = 0; v < incident.size(); ++v) {
            if (on_boundary[v] || incident[v].empty())
                continue;
            for (auto t : incident[v])
                covered[t] = true;
            groups.push_back(incident[v]);
        }
        for (std::size_t t = 0; t < mesh.num_cells(); ++t)
            if (!covered[t])
                groups.push_back({t});
    }

    std::vector<std::vector<std::size_t>> patches_of_cell(mesh.num_cells());
    for (std::size_t m = 0; m < groups.size(); ++m) {
        MacroPatch patch;
        patch.cells = groups[m];
        std::vector<std::size_t> verts;
        Point moment = Point::Zero();
        for (auto t : patch.cells) {
            const Cell& c = mesh.cell(t);
            patch.measure += c.measure;
            moment += c.measure * c.centroid;
            verts.insert(verts.end(), c.vertices.begin(), c.vertices.end());
            patches_of_cell[t].push_back(m);
        }
        patch.centroid = moment / patch.measure;
        for (std::size_t i = 0; i < verts.size(); ++i)
            for (std::size_t j = i + 1; j < verts.size(); ++j)
                patch.diameter =
                    std::max(patch.diameter, (mesh.vertices()[verts[i]] - mesh.vertices()[verts[j]]).norm());
        for (auto t : patch.cells)
            macro.diameter_ratio = std::max(macro.diameter_ratio, patch.diameter / mesh.cell(t).diameter);
        macro.patches.push_back(std::move(patch));
    }

    for (const auto& patch : macro.patches) {
        std::set<std::size_t> touching;
        for (auto t : patch.cells)
            touching.insert(patches_of_cell[t].begin(), patches_of_cell[t].end());
        macro.max_overlap = std::max(macro.max_overlap, touching.size());
    }
    return macro;
}

}  // namespace lpshho
