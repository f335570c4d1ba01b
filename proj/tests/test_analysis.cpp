#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "lpshho/analysis.hpp"
#include "lpshho/manufactured.hpp"

using namespace lpshho;

namespace {

const MeshFamily families[] = {MeshFamily::triangular, MeshFamily::cartesian, MeshFamily::hexagonal};

struct Discretisation {
    PolytopalMesh mesh;
    OseenCoefficients coeffs;
    MacroDecomposition macro;
    HybridSpace space;
    StabilisationParams params;
    DiscreteForms forms;
    NormEvaluator norms;

    Discretisation(PolytopalMesh m, OseenCoefficients c, int k, MacroMode mode = MacroMode::trivial)
        : mesh(std::move(m)),
          coeffs(std::move(c)),
          macro(build_macro_decomposition(mesh, mode)),
          space(mesh, k, coeffs.advection),
          params(build_params(mesh, macro, coeffs, {}, space.quad_degree())),
          forms(assemble_forms(space, macro, coeffs, params)),
          norms(space, coeffs, macro, params, forms)
    {}
    Discretisation(const Discretisation&) = delete;
};

OseenCoefficients coefficients(double eps, Eigen::Vector2d b = {1.0, 1.0}, double sigma = 1.0)
{
    OseenCoefficients c;
    c.epsilon = eps;
    c.sigma = sigma;
    c.advection = [b](const Point&) { return b; };
    return c;
}

Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937& rng)
{
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v[i] = d(rng);
    return v;
}

double quadratic(const SparseMatrix& A, const Eigen::VectorXd& x)
{
    return x.dot(A * x);
}

}  // namespace

TEST(Norms, ZeroAndConstants)
{
    const Discretisation s(generate_mesh(MeshFamily::hexagonal, 1), coefficients(1e-3, {1.0, -0.5}, 2.0), 1);
    const Eigen::VectorXd z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.space.num_velocity()));
    const Eigen::VectorXd zp = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.space.num_pressure()));
    EXPECT_EQ(s.norms.norm_1h(z), 0.0);
    EXPECT_EQ(s.norms.norm_eps(z), 0.0);
    EXPECT_EQ(s.norms.norm_b(z), 0.0);
    EXPECT_EQ(s.norms.norm_st(z, zp), 0.0);
    EXPECT_EQ(s.norms.norm_supg(z, zp), 0.0);
    EXPECT_EQ(s.norms.norm_lp(z, zp), 0.0);

    const Eigen::Vector2d c(0.75, -2.0);
    const Eigen::VectorXd uc = s.space.interpolate([c](const Point&) { return c; });
    EXPECT_LE(std::pow(s.norms.norm_1h(uc), 2), 1e-12);
    EXPECT_NEAR(std::pow(s.norms.norm_b(uc), 2), 2.0 * 1.0 * c.squaredNorm(), 1e-12);
}

TEST(Norms, EpsNormMatchesAssembledViscousForm)
{
    std::mt19937 rng(1);
    for (auto fam : families) {
        const Discretisation s(generate_mesh(fam, 1), coefficients(0.37), 2);
        for (int trial = 0; trial < 3; ++trial) {
            const Eigen::VectorXd u = random_vector(static_cast<Eigen::Index>(s.space.num_velocity()), rng);
            const double a = quadratic(s.forms.viscous, u);
            EXPECT_NEAR(std::pow(s.norms.norm_eps(u), 2), a, 1e-11 * a);
        }
    }
}

TEST(Norms, SupgZeroCases)
{
    const Discretisation s(generate_mesh(MeshFamily::triangular, 1), coefficients(1e-8), 1);
    std::mt19937 rng(2);
    const Eigen::VectorXd z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.space.num_velocity()));
    Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.space.num_pressure()));
    for (std::size_t t = 0; t < s.mesh.num_cells(); ++t)
        p[static_cast<Eigen::Index>(s.space.pressure_offset(t))] = random_vector(1, rng)[0];
    EXPECT_LE(s.norms.norm_supg(z, p), 1e-12);
    EXPECT_EQ(s.norms.norm_supg(z, Eigen::VectorXd::Zero(p.size())), 0.0);
}

TEST(Norms, SupgDirectQuadrature)
{
    const Eigen::Vector2d b(1.0, 0.5);
    for (auto fam : families)
        for (int k = 1; k <= 2; ++k) {
            const Discretisation s(generate_mesh(fam, 1), coefficients(1e-8, b), k);
            // v = (x^k - y, x y^{k-1}), b . grad v by hand.
            const VectorField v = [k](const Point& x) {
                return Eigen::Vector2d(std::pow(x.x(), k) - x.y(), x.x() * std::pow(x.y(), k - 1));
            };
            const VectorField bgrad = [k, b](const Point& x) {
                const double dx0 = k * std::pow(x.x(), k - 1), dy0 = -1.0;
                const double dx1 = std::pow(x.y(), k - 1), dy1 = k == 1 ? 0.0 : x.x() * (k - 1) * std::pow(x.y(), k - 2);
                return Eigen::Vector2d(b.x() * dx0 + b.y() * dy0, b.x() * dx1 + b.y() * dy1);
            };
            double sum = 0.0;
            for (std::size_t m = 0; m < s.macro.patches.size(); ++m)
                for (auto t : s.macro.patches[m].cells) {
                    const QuadRule rule = cell_quadrature(s.mesh, t, 2 * k + 2);
                    for (std::size_t q = 0; q < rule.size(); ++q)
                        sum += s.params.gamma[m] * rule.weights[q] * bgrad(rule.points[q]).squaredNorm();
                }
            const Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.space.num_pressure()));
            EXPECT_NEAR(s.norms.norm_supg(s.space.interpolate(v), p), std::sqrt(sum), 1e-11);
        }
}

TEST(Norms, LpIsSumOfComponents)
{
    std::mt19937 rng(3);
    auto c = coefficients(1e-2);
    c.advection = [](const Point& x) { return Eigen::Vector2d(1.0 + x.y(), 1.0 - x.x()); };
    const Discretisation s(generate_mesh(MeshFamily::cartesian, 1), c, 1);
    ASSERT_GT(s.params.omega, 0.0);
    for (int trial = 0; trial < 3; ++trial) {
        Eigen::VectorXd u = random_vector(static_cast<Eigen::Index>(s.space.num_velocity()), rng);
        clear_boundary(s.space, u);
        const Eigen::VectorXd p = random_vector(static_cast<Eigen::Index>(s.space.num_pressure()), rng);
        const double supg = s.norms.norm_supg(u, p);
        const double expected = std::pow(s.norms.norm_eps(u), 2) + std::pow(s.norms.norm_b(u), 2) +
                                std::pow(s.norms.norm_st(u, p), 2) + supg * supg / (1.0 + s.params.omega) +
                                (c.epsilon + c.sigma) * std::pow(s.norms.pressure_l2(p), 2);
        EXPECT_NEAR(std::pow(s.norms.norm_lp(u, p), 2), expected, 1e-12 * expected);

        // A seminorm: triangle inequality and homogeneity.
        Eigen::VectorXd w = random_vector(u.size(), rng);
        clear_boundary(s.space, w);
        const Eigen::VectorXd r = random_vector(p.size(), rng);
        EXPECT_LE(s.norms.norm_lp(u + w, p + r), s.norms.norm_lp(u, p) + s.norms.norm_lp(w, r) + 1e-12);
        EXPECT_NEAR(s.norms.norm_lp(-3.0 * u, -3.0 * p), 3.0 * s.norms.norm_lp(u, p), 1e-12);
    }
}

TEST(Norms, ConstantAdvectionHasUnitSupgWeight)
{
    const Discretisation s(generate_mesh(MeshFamily::triangular, 1), coefficients(1e-2), 1);
    EXPECT_EQ(s.params.omega, 0.0);
}

TEST(Norms, BilinearMatchesCoercivityIdentity)
{
    std::mt19937 rng(4);
    for (auto fam : families) {
        auto c = coefficients(1e-3);
        c.advection = [](const Point& x) { return Eigen::Vector2d(std::sin(x.y()), std::cos(x.x())); };
        const Discretisation s(generate_mesh(fam, 1), c, 1, MacroMode::vertex_patch);
        Eigen::VectorXd u = random_vector(static_cast<Eigen::Index>(s.space.num_velocity()), rng);
        clear_boundary(s.space, u);
        const Eigen::VectorXd p = random_vector(static_cast<Eigen::Index>(s.space.num_pressure()), rng);
        const double rhs = std::pow(s.norms.norm_eps(u), 2) + std::pow(s.norms.norm_b(u), 2) + std::pow(s.norms.norm_st(u, p), 2);
        EXPECT_NEAR(s.norms.bilinear(u, p, u, p), rhs, 1e-10 * rhs);
    }
}

TEST(Errors, SelfComparisonIsZero)
{
    for (auto fam : families)
        for (int k = 0; k <= 2; ++k) {
            const Discretisation s(generate_mesh(fam, 1), coefficients(1e-2), k);
            const VectorField u = [k](const Point& x) {
                return Eigen::Vector2d(std::pow(x.x() + x.y(), k) - 0.5, std::pow(x.x(), k) * 2.0);
            };
            const ScalarField p = [k](const Point& x) { return std::pow(x.y(), k) - 1.0; };
            const ErrorReport r = compute_errors(s.norms, s.space.interpolate(u), s.space.project_pressure(p), u, p);
            EXPECT_LE(r.err_lp, 1e-10);
            EXPECT_LE(r.err_supg, 1e-10);
            EXPECT_LE(r.l2_velocity, 1e-10);
            EXPECT_LE(r.l2_pressure, 1e-10);
            EXPECT_NEAR(r.h, s.mesh.h(), 0.0);
        }
}

TEST(Rates, Arithmetic)
{
    auto r = compute_rate({{0.1, 1e-2}, {0.05, 3.5e-3}});
    ASSERT_EQ(r.size(), 2u);
    EXPECT_FALSE(r[0].has_value());
    EXPECT_NEAR(*r[1], std::log(1e-2 / 3.5e-3) / std::log(2.0), 1e-14);
    EXPECT_NEAR(*r[1], 1.5146, 5e-5);
    EXPECT_NEAR(*compute_rate({{0.2, 4.0}, {0.1, 2.0}})[1], 1.0, 1e-14);
    EXPECT_NEAR(*compute_rate({{0.2, 4.0}, {0.1, 4.0}})[1], 0.0, 1e-14);
    EXPECT_FALSE(compute_rate({{0.2, 0.0}, {0.1, 1.0}})[1].has_value());
    EXPECT_FALSE(compute_rate({{0.2, 1.0}, {0.1, 0.0}})[1].has_value());

    std::vector<ErrorReport> reports(3);
    for (int i = 0; i < 3; ++i) {
        reports[i].h = std::pow(0.5, i);
        reports[i].err_lp = std::pow(0.5, 1.5 * i);
        reports[i].err_supg = std::pow(0.5, 2.0 * i);
    }
    fill_rates(reports);
    EXPECT_FALSE(reports[0].rate_lp.has_value());
    EXPECT_NEAR(*reports[2].rate_lp, 1.5, 1e-14);
    EXPECT_NEAR(*reports[2].rate_supg, 2.0, 1e-14);
}

TEST(InfSup, PositiveAndStable)
{
    std::vector<double> values;
    for (int level = 0; level <= 3; ++level) {
        const Discretisation s(generate_mesh(MeshFamily::cartesian, level), coefficients(1e-2), 0);
        const auto beta = infsup_diagnostic(s.space, s.forms);
        ASSERT_TRUE(beta.has_value());
        EXPECT_GT(*beta, 0.0);
        values.push_back(*beta);
    }
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    EXPECT_LE(*hi / *lo, 2.0);
    RecordProperty("infsup_level3", std::to_string(values.back()));
}

TEST(InfSup, SingleCellIsNotApplicable)
{
    const PolytopalMesh m({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2, 3}});
    const Discretisation s(m, coefficients(1.0), 0);
    EXPECT_FALSE(infsup_diagnostic(s.space, s.forms).has_value());
    const Discretisation big(generate_mesh(MeshFamily::triangular, 3), coefficients(1.0), 1);
    EXPECT_THROW(infsup_diagnostic(big.space, big.forms, 100), DiagnosticError);
}

TEST(Diagnostics, PoincareAndGammaRatio)
{
    std::mt19937 rng(8);
    for (int level = 0; level <= 2; ++level) {
        const Discretisation s(generate_mesh(MeshFamily::hexagonal, level), coefficients(1e-8), 1);
        Eigen::VectorXd u = random_vector(static_cast<Eigen::Index>(s.space.num_velocity()), rng);
        clear_boundary(s.space, u);
        const double ratio = poincare_ratio(s.norms, u);
        EXPECT_GT(ratio, 0.0);
        EXPECT_LT(ratio, 1.0);
        // Smooth interpolant: the ratio approaches the continuous one from below.
        const Eigen::VectorXd smooth = s.space.interpolate([](const Point& x) {
            const double v = std::sin(M_PI * x.x()) * std::sin(M_PI * x.y());
            return Eigen::Vector2d(v, v);
        });
        Eigen::VectorXd s0 = smooth;
        clear_boundary(s.space, s0);
        EXPECT_LT(poincare_ratio(s.norms, s0), 1.0 / (M_PI * std::sqrt(2.0)) * 1.2);
        const double g = s.params.gamma_ratio();
        EXPECT_TRUE(std::isfinite(g));
        EXPECT_GT(g, 0.0);
        RecordProperty("gamma_ratio_level" + std::to_string(level), std::to_string(g));
    }
}

TEST(Diagnostics, NormEquivalenceRatioBounded)
{
    std::mt19937 rng(12);
    double lo = 1e300, hi = 0.0;
    for (auto fam : families)
        for (int level = 0; level <= 2; ++level) {
            const double eps = 1e-3;
            const Discretisation s(generate_mesh(fam, level), coefficients(eps), 1);
            for (int trial = 0; trial < 5; ++trial) {
                Eigen::VectorXd u = random_vector(static_cast<Eigen::Index>(s.space.num_velocity()), rng);
                clear_boundary(s.space, u);
                const double ratio = std::pow(s.norms.norm_eps(u), 2) / (eps * std::pow(s.norms.norm_1h(u), 2));
                lo = std::min(lo, ratio);
                hi = std::max(hi, ratio);
            }
        }
    EXPECT_GT(lo, 0.0);
    EXPECT_LT(hi / lo, 1e3);
    RecordProperty("c1", std::to_string(lo));
    RecordProperty("c2", std::to_string(hi));
}
