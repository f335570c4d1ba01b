// Convergence studies for the LPS-stabilised hybrid scheme on the unit square.

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lpshho/harness.hpp"

namespace {

constexpr double patch_tolerance = 1e-7;

void print_table(const lpshho::StudyResult& study)
{
    std::printf("k = %d\n%6s %12s %9s %14s %8s %14s %8s\n", study.k, "level", "h", "ndof", "err_LP", "rate", "err_supg",
                "rate");
    for (const auto& r : study.reports) {
        auto rate = [](const std::optional<double>& v) { return v ? std::to_string(*v).substr(0, 6) : std::string("-"); };
        std::printf("%6d %12.4e %9zu %14.6e %8s %14.6e %8s\n", r.level, r.h, r.ndof, r.err_lp, rate(r.rate_lp).c_str(),
                    r.err_supg, rate(r.rate_supg).c_str());
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"LPS-HHO discretisation of the Oseen problem: manufactured-solution studies"};

    std::string case_name = "smooth";
    std::string family_name = "cartesian";
    std::vector<int> degrees{1};
    std::optional<int> levels;
    std::optional<double> epsilon;
    double sigma = 1.0;
    lpshho::StabilisationConstants constants;
    std::string macro_name = "trivial";
    bool condense = false;
    std::string out_dir = "results";
    std::optional<std::string> mesh_file;
    bool dump = false;

    app.add_option("--case", case_name, "Manufactured solution")->check(CLI::IsMember({"smooth", "layer", "patch"}));
    app.add_option("--family", family_name, "Mesh family")
        ->check(CLI::IsMember({"triangular", "cartesian", "hexagonal"}));
    app.add_option("--k", degrees, "Polynomial degrees")->delimiter(',')->check(CLI::Range(0, 6));
    app.add_option("--levels", levels, "Number of refinement levels, starting at level 1")->check(CLI::Range(1, 8));
    app.add_option("--epsilon", epsilon, "Viscosity (default: 1e-8 smooth, 1e-2 layer, 1 patch)")
        ->check(CLI::PositiveNumber);
    app.add_option("--sigma", sigma, "Reaction coefficient")->check(CLI::PositiveNumber);
    app.add_option("--ctau", constants.c_tau, "LPS constant c_tau")->check(CLI::NonNegativeNumber);
    app.add_option("--crho", constants.c_rho, "Pressure stabilisation constant c_rho")->check(CLI::NonNegativeNumber);
    app.add_option("--macro", macro_name, "Macro patches")->check(CLI::IsMember({"trivial", "vertex"}));
    app.add_flag("--condense", condense, "Eliminate cell velocity unknowns before solving");
    app.add_option("--out", out_dir, "Output directory for CSV and plot data");
    app.add_option("--mesh-file", mesh_file, "JSON mesh to use instead of a generated family")->check(CLI::ExistingFile);
    app.add_flag("--dump-system", dump, "Write each assembled system in coordinate text format");

    CLI11_PARSE(app, argc, argv);

    lpshho::StudyConfig config;
    try {
        config.kind = lpshho::parse_case(case_name);
        config.family = lpshho::parse_family(family_name);
        config.macro = lpshho::parse_macro_mode(macro_name);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n' << app.help();
        return 2;
    }
    if (condense && config.macro != lpshho::MacroMode::trivial) {
        std::cerr << "error: --condense requires --macro trivial (vertex patches couple neighbouring cells)\n";
        return 2;
    }
    const bool patch = config.kind == lpshho::CaseKind::patch;
    config.degrees = degrees;
    config.levels = levels.value_or(patch ? 1 : 4);
    config.epsilon = epsilon.value_or(config.kind == lpshho::CaseKind::smooth ? 1e-8
                                      : config.kind == lpshho::CaseKind::layer ? 1e-2
                                                                                : 1.0);
    config.sigma = sigma;
    config.constants = constants;
    config.condense = condense;
    config.mesh_file = mesh_file;
    config.out_dir = out_dir;
    config.dump_system = dump;

    std::cout << "case=" << case_name << " family=" << (mesh_file ? *mesh_file : family_name)
              << " epsilon=" << config.epsilon << " sigma=" << sigma << " macro=" << macro_name
              << (condense ? " condensed" : "") << '\n';

    std::vector<lpshho::StudyResult> studies;
    try {
        studies = lpshho::run_convergence_study(config, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }

    bool exact = true;
    for (const auto& s : studies) {
        print_table(s);
        if (!s.csv_path.empty())
            std::cout << "wrote " << s.csv_path << '\n';
        for (const auto& r : s.reports)
            exact = exact && r.err_lp <= patch_tolerance;
    }
    if (patch) {
        for (const auto& s : studies) {
            double worst = 0.0;
            for (const auto& r : s.reports)
                worst = std::max(worst, r.err_lp);
            std::printf("patch test k=%d: max err_LP = %.3e -> %s\n", s.k, worst,
                        worst <= patch_tolerance ? "exact to tolerance" : "NOT exact");
        }
        return exact ? 0 : 1;
    }
    return 0;
}
