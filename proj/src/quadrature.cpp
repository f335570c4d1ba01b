#include "lpshho/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace lpshho {

double QuadRule::total_weight() const noexcept
{
    double s = 0.0;
    for (double w : weights)
        s += w;
    return s;
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights)
{
    static std::mutex mutex;
    static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) {
        std::vector<double> x(n), w(n);
        for (int i = 0; i < n; ++i) {
            // Newton on P_n from the Chebyshev-like initial guess
            double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int iter = 0; iter < 100; ++iter) {
                double p0 = 1.0, p1 = 0.0;
                for (int j = 1; j <= n; ++j) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
                }
                dp = n * (z * p0 - p1) / (z * z - 1.0);
                const double dz = p0 / dp;
                z -= dz;
                if (std::abs(dz) < 1e-16)
                    break;
            }
            x[i] = z;
            w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
        it = cache.emplace(n, std::pair{std::move(x), std::move(w)}).first;
    }
    nodes = it->second.first;
    weights = it->second.second;
}

QuadRule triangle_quadrature(const Point& a, const Point& b, const Point& c, int degree)
{
    // Duffy map (s, t) in [0,1]^2 -> a + s (b - a) + s t (c - b), Jacobian 2|T| s.
    // The s-direction carries one extra degree from the Jacobian.
    const int n = std::max(1, (degree + 2 + 1) / 2);
    std::vector<double> x, w;
    gauss_legendre(n, x, w);
    const double area = 0.5 * std::abs((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());

    QuadRule rule;
    rule.exactness = degree;
    rule.points.reserve(n * n);
    rule.weights.reserve(n * n);
    for (int i = 0; i < n; ++i) {
        const double s = 0.5 * (x[i] + 1.0);
        for (int j = 0; j < n; ++j) {
            const double t = 0.5 * (x[j] + 1.0);
            rule.points.push_back(a + s * (b - a) + s * t * (c - b));
            rule.weights.push_back(0.25 * w[i] * w[j] * 2.0 * area * s);
        }
    }
    return rule;
}

QuadRule cell_quadrature(const PolytopalMesh& mesh, std::size_t cell, int degree)
{
    const Cell& c = mesh.cell(cell);
    const auto& verts = mesh.vertices();
    QuadRule rule;
    rule.exactness = degree;
    const std::size_t n = c.vertices.size();
    if (n == 3) {
        return triangle_quadrature(verts[c.vertices[0]], verts[c.vertices[1]], verts[c.vertices[2]], degree);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const Point& p = verts[c.vertices[i]];
        const Point& q = verts[c.vertices[(i + 1) % n]];
        const double twice_area = (p - c.centroid).x() * (q - c.centroid).y() - (p - c.centroid).y() * (q - c.centroid).x();
        if (twice_area <= 1e-14 * c.diameter * c.diameter)
            throw MeshValidationError(cell, "not star-shaped with respect to its centroid");
        auto sub = triangle_quadrature(c.centroid, p, q, degree);
        rule.points.insert(rule.points.end(), sub.points.begin(), sub.points.end());
        rule.weights.insert(rule.weights.end(), sub.weights.begin(), sub.weights.end());
    }
    return rule;
}

QuadRule segment_quadrature(const Point& a, const Point& b, int degree)
{
    const int n = std::max(1, (degree + 2) / 2);
    std::vector<double> x, w;
    gauss_legendre(n, x, w);
    const double len = (b - a).norm();
    QuadRule rule;
    rule.exactness = degree;
    for (int i = 0; i < n; ++i) {
        rule.points.push_back(a + 0.5 * (x[i] + 1.0) * (b - a));
        rule.weights.push_back(0.5 * w[i] * len);
    }
    return rule;
}

QuadRule face_quadrature(const PolytopalMesh& mesh, std::size_t face, int degree)
{
    const Face& f = mesh.face(face);
    return segment_quadrature(mesh.vertices()[f.v0], mesh.vertices()[f.v1], degree);
}

}  // namespace lpshho
