#include "lpshho/manufactured.hpp"

#include <array>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

namespace lpshho {

CaseKind parse_case(std::string_view name)
{
    if (name == "smooth")
        return CaseKind::smooth;
    if (name == "layer" || name == "boundary_layer")
        return CaseKind::layer;
    if (name == "patch" || name == "patch_test")
        return CaseKind::patch;
    throw std::invalid_argument("unknown case '" + std::string(name) + "'");
}

std::string_view to_string(CaseKind kind)
{
    switch (kind) {
    case CaseKind::smooth: return "smooth";
    case CaseKind::layer: return "layer";
    case CaseKind::patch: return "patch";
    }
    return "?";
}

Eigen::Vector2d ManufacturedCase::force(const Point& x) const
{
    return -epsilon * laplacian_u(x) + grad_u(x) * b + sigma * u(x) + grad_p(x);
}

OseenCoefficients ManufacturedCase::coefficients() const
{
    OseenCoefficients c;
    c.epsilon = epsilon;
    c.sigma = sigma;
    const Eigen::Vector2d bb = b;
    c.advection = [bb](const Point&) { return bb; };
    c.advection_gradient = [](const Point&) { return Eigen::Matrix2d::Zero().eval(); };
    auto self = std::make_shared<ManufacturedCase>(*this);
    c.force = [self](const Point& x) { return self->force(x); };
    return c;
}

namespace {

/// Values and first three derivatives of a one-dimensional factor.
using Profile = std::function<std::array<double, 4>(double)>;

/// u = curl(A(x) B(y)) = (A B', -A' B).
void set_stream_function(ManufacturedCase& c, const Profile& A, const Profile& B)
{
    c.u = [A, B](const Point& x) {
        const auto a = A(x.x());
        const auto b = B(x.y());
        return Eigen::Vector2d(a[0] * b[1], -a[1] * b[0]);
    };
    c.grad_u = [A, B](const Point& x) {
        const auto a = A(x.x());
        const auto b = B(x.y());
        Eigen::Matrix2d g;
        g << a[1] * b[1], a[0] * b[2], -a[2] * b[0], -a[1] * b[1];
        return g;
    };
    c.laplacian_u = [A, B](const Point& x) {
        const auto a = A(x.x());
        const auto b = B(x.y());
        return Eigen::Vector2d(a[2] * b[1] + a[0] * b[3], -(a[3] * b[0] + a[1] * b[2]));
    };
}

std::array<double, 4> quartic_bump(double t)
{
    // t^2 (t-1)^2
    return {t * t * (t - 1) * (t - 1), 4 * t * t * t - 6 * t * t + 2 * t, 12 * t * t - 12 * t + 2, 24 * t - 12};
}

}  // namespace

ManufacturedCase case_smooth(double epsilon)
{
    ManufacturedCase c;
    c.kind = CaseKind::smooth;
    c.epsilon = epsilon;
    set_stream_function(c, quartic_bump, quartic_bump);
    const double mean = 2.0 * std::sin(1.0) * (1.0 - std::cos(1.0));
    c.p = [mean](const Point& x) { return 2.0 * std::cos(x.x()) * std::sin(x.y()) - mean; };
    c.grad_p = [](const Point& x) {
        return Eigen::Vector2d(-2.0 * std::sin(x.x()) * std::sin(x.y()), 2.0 * std::cos(x.x()) * std::cos(x.y()));
    };
    return c;
}

ManufacturedCase case_boundary_layer(double epsilon)
{
    if (!(epsilon > 0.0))
        throw std::invalid_argument("boundary layer case needs epsilon > 0");
    ManufacturedCase c;
    c.kind = CaseKind::layer;
    c.epsilon = epsilon;
    const double l = 1.0 / (2.0 * std::sqrt(epsilon));
    // t^2 (e^{l(t-1)} - 1)^2
    const Profile g = [l](double t) -> std::array<double, 4> {
        const double E = std::exp(l * (t - 1.0));
        const double h = E - 1.0, h1 = l * E, h2 = l * l * E, h3 = l * l * l * E;
        const double c0 = h * h, c1 = 2 * h * h1, c2 = 2 * h1 * h1 + 2 * h * h2, c3 = 6 * h1 * h2 + 2 * h * h3;
        return {t * t * c0, 2 * t * c0 + t * t * c1, 2 * c0 + 4 * t * c1 + t * t * c2,
                6 * c1 + 6 * t * c2 + t * t * c3};
    };
    set_stream_function(c, g, g);
    const double e1 = std::exp(1.0) - 1.0;
    c.p = [e1](const Point& x) { return std::exp(x.x() + x.y()) - e1 * e1; };
    c.grad_p = [](const Point& x) {
        const double e = std::exp(x.x() + x.y());
        return Eigen::Vector2d(e, e);
    };
    return c;
}

ManufacturedCase case_patch(double epsilon)
{
    ManufacturedCase c;
    c.kind = CaseKind::patch;
    c.epsilon = epsilon;
    c.homogeneous = false;
    c.u = [](const Point& x) { return Eigen::Vector2d(x.y(), x.x()); };
    c.grad_u = [](const Point&) {
        Eigen::Matrix2d g;
        g << 0, 1, 1, 0;
        return g;
    };
    c.laplacian_u = [](const Point&) { return Eigen::Vector2d::Zero().eval(); };
    c.p = [](const Point& x) { return x.x() + x.y() - 1.0; };
    c.grad_p = [](const Point&) { return Eigen::Vector2d(1.0, 1.0); };
    return c;
}

ManufacturedCase make_case(CaseKind kind, double epsilon, double sigma)
{
    ManufacturedCase c;
    switch (kind) {
    case CaseKind::smooth: c = case_smooth(epsilon); break;
    case CaseKind::layer: c = case_boundary_layer(epsilon); break;
    case CaseKind::patch: c = case_patch(epsilon); break;
    }
    c.sigma = sigma;
    return c;
}

}  // namespace lpshho
