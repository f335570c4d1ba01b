#include "lpshho/harness.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace lpshho {

RunResult run_case(const PolytopalMesh& mesh, const ManufacturedCase& mc, const RunOptions& options, std::ostream* dump)
{
    const OseenCoefficients coeffs = mc.coefficients();
    const MacroDecomposition macro = build_macro_decomposition(mesh, options.macro);
    const HybridSpace space(mesh, options.k, coeffs.advection, options.pack);
    const StabilisationParams params = build_params(mesh, macro, coeffs, options.constants, space.quad_degree());
    const DiscreteForms forms = assemble_forms(space, macro, coeffs, params);

    AssemblyOptions ao;
    if (!mc.homogeneous)
        ao.dirichlet = mc.u;
    const GlobalSystem system = assemble(space, forms, ao);
    if (dump)
        dump_system(system, *dump);

    RunResult r;
    r.nnz = system.nnz;
    if (options.condense) {
        r.solution = solve_condensed(system, forms.pressure_weights);
        r.ndof = system.dofs.num_unknowns() - 2 * space.cell_dim() * mesh.num_cells();
    } else {
        r.solution = solve(system, forms.pressure_weights);
        r.ndof = system.dofs.num_unknowns();
    }
    if (!(r.solution.residual <= 1e-9))
        throw SolverError("relative residual " + std::to_string(r.solution.residual) + " exceeds 1e-9");

    const NormEvaluator norms(space, coeffs, macro, params, forms);
    r.report = compute_errors(norms, r.solution.velocity, r.solution.pressure, mc.u, mc.p);
    r.report.ndof = r.ndof;
    r.gamma_ratio = params.gamma_ratio();
    r.omega = params.omega;
    return r;
}

namespace {

std::string number(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10e", v);
    return buf;
}

std::string rate(const std::optional<double>& r)
{
    if (!r)
        return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", *r);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << text;
}

}  // namespace

std::string format_csv(const std::vector<ErrorReport>& reports)
{
    std::ostringstream s;
    s << csv_header << '\n';
    for (const auto& r : reports)
        s << r.level << ',' << number(r.h) << ',' << r.ndof << ',' << number(r.err_lp) << ',' << rate(r.rate_lp)
          << ',' << number(r.err_supg) << ',' << rate(r.rate_supg) << '\n';
    return s.str();
}

std::vector<StudyResult> run_convergence_study(const StudyConfig& config, std::ostream& log)
{
    if (config.degrees.empty())
        throw std::invalid_argument("no polynomial degree given");
    if (config.levels < 1)
        throw std::invalid_argument("at least one level is required");

    std::vector<PolytopalMesh> meshes;
    if (config.mesh_file) {
        meshes.push_back(load_mesh(*config.mesh_file));
    } else {
        for (int l = 0; l < config.levels; ++l)
            meshes.push_back(generate_mesh(config.family, config.first_level + l));
    }

    const ManufacturedCase mc = make_case(config.kind, config.epsilon, config.sigma);
    const std::string family = config.mesh_file ? std::filesystem::path(*config.mesh_file).stem().string()
                                                : std::string(to_string(config.family));
    const std::string stem = std::string(to_string(config.kind)) + "_" + family;
    if (!config.out_dir.empty())
        std::filesystem::create_directories(config.out_dir);

    std::vector<StudyResult> studies;
    for (int k : config.degrees) {
        StudyResult study;
        study.k = k;
        for (std::size_t i = 0; i < meshes.size(); ++i) {
            const int level = config.mesh_file ? 0 : config.first_level + static_cast<int>(i);
            RunOptions opt;
            opt.k = k;
            opt.constants = config.constants;
            opt.macro = config.macro;
            opt.condense = config.condense;

            std::unique_ptr<std::ofstream> dump;
            if (config.dump_system && !config.out_dir.empty()) {
                const auto path = std::filesystem::path(config.out_dir) /
                                  (stem + "_k" + std::to_string(k) + "_l" + std::to_string(level) + ".system.txt");
                dump = std::make_unique<std::ofstream>(path);
            }
            RunResult run;
            try {
                run = run_case(meshes[i], mc, opt, dump.get());
            } catch (const std::exception& e) {
                throw std::runtime_error("k=" + std::to_string(k) + " level=" + std::to_string(level) + ": " + e.what());
            }
            run.report.level = level;
            study.reports.push_back(run.report);
            study.runs.push_back(std::move(run));
            log << "  k=" << k << " level=" << level << " h=" << number(study.reports.back().h)
                << " ndof=" << study.reports.back().ndof << " err_LP=" << number(study.reports.back().err_lp)
                << " err_supg=" << number(study.reports.back().err_supg) << '\n';
        }
        fill_rates(study.reports);

        if (!config.out_dir.empty()) {
            const std::filesystem::path dir(config.out_dir);
            const std::string base = stem + "_k" + std::to_string(k);
            study.csv_path = (dir / (base + ".csv")).string();
            write_file(study.csv_path, format_csv(study.reports));
            if (config.plot_data) {
                std::ostringstream lp, supg;
                for (const auto& r : study.reports) {
                    lp << number(r.h) << ' ' << number(r.err_lp) << '\n';
                    supg << number(r.h) << ' ' << number(r.err_supg) << '\n';
                }
                write_file(dir / (base + "_LP.dat"), lp.str());
                write_file(dir / (base + "_supg.dat"), supg.str());
            }
        }
        studies.push_back(std::move(study));
    }
    return studies;
}

}  // namespace lpshho
