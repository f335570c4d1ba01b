#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "lpshho/harness.hpp"

using namespace lpshho;
namespace fs = std::filesystem;

namespace {

const MeshFamily families[] = {MeshFamily::triangular, MeshFamily::cartesian, MeshFamily::hexagonal};

std::vector<Point> random_points(int n, unsigned seed)
{
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    std::vector<Point> pts;
    for (int i = 0; i < n; ++i)
        pts.emplace_back(d(rng), d(rng));
    return pts;
}

// Central differences, independent of the closed-form callbacks.
Eigen::Matrix2d fd_gradient(const VectorField& u, const Point& x, double h = 1e-5)
{
    Eigen::Matrix2d g;
    for (int j = 0; j < 2; ++j) {
        Point e = Point::Zero();
        e[j] = h;
        g.col(j) = (u(x + e) - u(x - e)) / (2 * h);
    }
    return g;
}

Eigen::Vector2d fd_laplacian(const VectorField& u, const Point& x, double h = 1e-4)
{
    const Point ex(h, 0), ey(0, h);
    return (u(x + ex) + u(x - ex) + u(x + ey) + u(x - ey) - 4.0 * u(x)) / (h * h);
}

double mean_over_square(const ScalarField& f)
{
    const auto m = generate_mesh(MeshFamily::cartesian, 2);
    double s = 0.0;
    for (std::size_t t = 0; t < m.num_cells(); ++t) {
        const QuadRule r = cell_quadrature(m, t, 14);
        for (std::size_t q = 0; q < r.size(); ++q)
            s += r.weights[q] * f(r.points[q]);
    }
    return s;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch_dir(const std::string& name)
{
    const fs::path d = fs::temp_directory_path() / ("lpshho_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST(Cases, SmoothProperties)
{
    const ManufacturedCase c = case_smooth();
    EXPECT_LE(c.u({0.5, 0.5}).norm(), 1e-15);
    EXPECT_NEAR(mean_over_square(c.p), 0.0, 1e-12);
    for (const Point& x : random_points(100, 1))
        EXPECT_NEAR(c.grad_u(x).trace(), 0.0, 1e-12);
    // Printed closed form of u.
    const Point x(0.3, 0.8);
    const double X = x.x(), Y = x.y();
    EXPECT_NEAR(c.u(x).x(), 2 * X * X * Y * (2 * Y - 1) * (X - 1) * (X - 1) * (Y - 1), 1e-15);
    EXPECT_NEAR(c.u(x).y(), -2 * X * Y * Y * (2 * X - 1) * (X - 1) * (Y - 1) * (Y - 1), 1e-15);
    EXPECT_TRUE(c.homogeneous);
}

TEST(Cases, BoundaryLayerProperties)
{
    const ManufacturedCase c = case_boundary_layer(1e-2);
    EXPECT_NEAR(mean_over_square(c.p), 0.0, 1e-10);
    for (const Point& x : random_points(100, 2))
        EXPECT_NEAR(c.grad_u(x).trace(), 0.0, 1e-12);
    // u vanishes on the boundary.
    double worst = 0.0;
    const auto m = generate_mesh(MeshFamily::cartesian, 2);
    for (std::size_t f = 0; f < m.num_faces(); ++f) {
        if (!m.face(f).is_boundary())
            continue;
        for (const Point& x : face_quadrature(m, f, 8).points)
            worst = std::max(worst, c.u(x).norm());
    }
    EXPECT_LE(worst, 1e-10);

    // lambda = 5 and u = (d psi/dy, -d psi/dx).
    const double l = 5.0;
    const auto psi = [l](const Point& x) {
        return std::pow(x.x() * x.y() * (std::exp(l * (x.x() - 1)) - 1) * (std::exp(l * (x.y() - 1)) - 1), 2);
    };
    for (const Point& x : random_points(20, 3)) {
        const double h = 1e-5;
        const double dpx = (psi(x + Point(h, 0)) - psi(x - Point(h, 0))) / (2 * h);
        const double dpy = (psi(x + Point(0, h)) - psi(x - Point(0, h))) / (2 * h);
        EXPECT_NEAR(c.u(x).x(), dpy, 1e-8);
        EXPECT_NEAR(c.u(x).y(), -dpx, 1e-8);
    }
}

TEST(Cases, DerivativesAgainstFiniteDifferences)
{
    for (const ManufacturedCase& c : {case_smooth(1e-3), case_boundary_layer(1e-2), case_patch(1.0)}) {
        for (const Point& x : random_points(100, 4)) {
            const Eigen::Matrix2d g = fd_gradient(c.u, x);
            const double scale = 1.0 + c.grad_u(x).norm();
            EXPECT_LE((c.grad_u(x) - g).norm(), 1e-7 * scale) << to_string(c.kind);
            EXPECT_LE((c.laplacian_u(x) - fd_laplacian(c.u, x)).norm(), 1e-4 * (1.0 + c.laplacian_u(x).norm()))
                << to_string(c.kind);
            const double h = 1e-6;
            const Eigen::Vector2d gp((c.p(x + Point(h, 0)) - c.p(x - Point(h, 0))) / (2 * h),
                                     (c.p(x + Point(0, h)) - c.p(x - Point(0, h))) / (2 * h));
            EXPECT_LE((c.grad_p(x) - gp).norm(), 1e-7 * (1.0 + gp.norm()));

            // PDE residual from the callbacks, and from finite differences.
            const Eigen::Vector2d lhs = -c.epsilon * c.laplacian_u(x) + c.grad_u(x) * c.b + c.sigma * c.u(x) + c.grad_p(x);
            EXPECT_LE((lhs - c.force(x)).norm(), 1e-10 * (1.0 + lhs.norm()));
            const Eigen::Vector2d fd = -c.epsilon * fd_laplacian(c.u, x) + g * c.b + c.sigma * c.u(x) + gp;
            EXPECT_LE((fd - c.force(x)).norm(), 1e-4 * (1.0 + fd.norm()));
        }
    }
}

TEST(Cases, Parsing)
{
    EXPECT_EQ(parse_case("smooth"), CaseKind::smooth);
    EXPECT_EQ(parse_case("layer"), CaseKind::layer);
    EXPECT_EQ(parse_case("patch"), CaseKind::patch);
    EXPECT_THROW(parse_case("cavity"), std::invalid_argument);
    EXPECT_FALSE(case_patch().homogeneous);
    EXPECT_EQ(make_case(CaseKind::layer, 1e-2, 2.0).sigma, 2.0);
}

TEST(RunCase, PatchTestIsExact)
{
    for (auto fam : families)
        for (double eps : {1.0, 1e-4}) {
            RunOptions opt;
            opt.k = 1;
            const RunResult r = run_case(generate_mesh(fam, 1), case_patch(eps), opt);
            EXPECT_LE(r.report.err_lp, 1e-7) << to_string(fam);
            EXPECT_LE(r.solution.residual, 1e-9);
        }
}

TEST(RunCase, CondensedReportsFewerUnknowns)
{
    const auto mesh = generate_mesh(MeshFamily::cartesian, 1);
    RunOptions opt;
    opt.k = 1;
    const RunResult a = run_case(mesh, case_smooth(), opt);
    opt.condense = true;
    const RunResult b = run_case(mesh, case_smooth(), opt);
    EXPECT_EQ(a.ndof - b.ndof, 2 * 3 * mesh.num_cells());
    EXPECT_NEAR(a.report.err_lp, b.report.err_lp, 1e-9 * a.report.err_lp);
    EXPECT_GT(a.gamma_ratio, 0.0);
}

TEST(Study, CsvFilesAndDeterminism)
{
    const fs::path dir = scratch_dir("study");
    StudyConfig cfg;
    cfg.kind = CaseKind::smooth;
    cfg.family = MeshFamily::triangular;
    cfg.degrees = {0, 1};
    cfg.first_level = 0;
    cfg.levels = 3;
    cfg.out_dir = dir.string();
    std::ostringstream log;
    const auto studies = run_convergence_study(cfg, log);
    ASSERT_EQ(studies.size(), 2u);
    const std::string first = slurp(dir / "smooth_triangular_k1.csv");
    const std::string plot = slurp(dir / "smooth_triangular_k1_LP.dat");

    std::istringstream in(first);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "level,h,ndof,err_LP,rate_LP,err_supg,rate_supg");
    std::getline(in, line);
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 6);
    EXPECT_EQ(line.substr(line.size() - 1), ",");  // undefined first rate
    int rows = 1;
    while (std::getline(in, line))
        ++rows;
    EXPECT_EQ(rows, 3);
    EXPECT_FALSE(plot.empty());
    EXPECT_TRUE(studies[1].reports[2].rate_lp.has_value());

    run_convergence_study(cfg, log);
    EXPECT_EQ(slurp(dir / "smooth_triangular_k1.csv"), first);
    EXPECT_EQ(format_csv(studies[1].reports), first);
    fs::remove_all(dir);
}

TEST(Study, InvalidConfig)
{
    std::ostringstream log;
    StudyConfig cfg;
    cfg.degrees.clear();
    EXPECT_THROW(run_convergence_study(cfg, log), std::invalid_argument);
    cfg.degrees = {1};
    cfg.levels = 0;
    EXPECT_THROW(run_convergence_study(cfg, log), std::invalid_argument);
}

TEST(Study, MeshFileAndSystemDump)
{
    const fs::path dir = scratch_dir("meshfile");
    {
        std::ofstream out(dir / "square4.json");
        out << serialize_mesh(generate_mesh(MeshFamily::cartesian, 0));
    }
    StudyConfig cfg;
    cfg.kind = CaseKind::patch;
    cfg.epsilon = 1.0;
    cfg.mesh_file = (dir / "square4.json").string();
    cfg.out_dir = dir.string();
    cfg.dump_system = true;
    std::ostringstream log;
    const auto studies = run_convergence_study(cfg, log);
    ASSERT_EQ(studies[0].reports.size(), 1u);
    EXPECT_LE(studies[0].reports[0].err_lp, 1e-7);
    EXPECT_TRUE(fs::exists(dir / "patch_square4_k1.csv"));
    bool dumped = false;
    for (const auto& e : fs::directory_iterator(dir))
        dumped = dumped || e.path().string().find(".system.txt") != std::string::npos;
    EXPECT_TRUE(dumped);
    fs::remove_all(dir);
}

#ifdef LPSHHO_CLI
namespace {

int run_cli(const std::string& args, std::string* output = nullptr)
{
    const std::string cmd = std::string(LPSHHO_CLI) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe)
        return -1;
    char buf[512];
    std::string text;
    while (std::fgets(buf, sizeof buf, pipe))
        text += buf;
    const int status = pclose(pipe);
    if (output)
        *output = text;
    return status;
}

}  // namespace

TEST(Cli, SmoothCartesianFourRows)
{
    const fs::path dir = scratch_dir("cli");
    ASSERT_EQ(run_cli("--case smooth --family cartesian --k 1 --levels 4 --epsilon 1e-8 --out " + dir.string()), 0);
    std::ifstream in(dir / "smooth_cartesian_k1.csv");
    std::string line;
    int n = 0;
    while (std::getline(in, line))
        ++n;
    EXPECT_EQ(n, 5);
    fs::remove_all(dir);
}

TEST(Cli, PatchSummary)
{
    const fs::path dir = scratch_dir("cli_patch");
    std::string out;
    ASSERT_EQ(run_cli("--case patch --family triangular --k 1 --out " + dir.string(), &out), 0) << out;
    EXPECT_NE(out.find("exact to tolerance"), std::string::npos) << out;
    fs::remove_all(dir);
}

TEST(Cli, RejectsBadInput)
{
    EXPECT_NE(run_cli("--case smooth --bogus"), 0);
    EXPECT_NE(run_cli("--case cavity"), 0);
    EXPECT_NE(run_cli("--case smooth --macro vertex --condense"), 0);
}

TEST(Cli, HexagonalDegreeThree)
{
    const fs::path dir = scratch_dir("cli_hex");
    std::string out;
    ASSERT_EQ(run_cli("--case smooth --family hexagonal --k 3 --levels 3 --out " + dir.string(), &out), 0) << out;
    std::ifstream in(dir / "smooth_hexagonal_k3.csv");
    std::string line, last;
    while (std::getline(in, line))
        last = line;
    // level,h,ndof,err_LP,rate_LP,...
    std::vector<std::string> fields;
    std::stringstream s(last);
    while (std::getline(s, line, ','))
        fields.push_back(line);
    ASSERT_GE(fields.size(), 5u);
    const double rate = std::stod(fields[4]);
    RecordProperty("rate_LP_k3", fields[4]);
    EXPECT_GT(rate, 3.0) << out;
    fs::remove_all(dir);
}
#endif
