#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lpshho/analysis.hpp"
#include "lpshho/manufactured.hpp"
#include "lpshho/mesh.hpp"
#include "lpshho/system.hpp"

namespace lpshho {

struct RunOptions {
    int k = 1;
    StabilisationConstants constants;
    MacroMode macro = MacroMode::trivial;
    bool condense = false;
    PackOptions pack;
};

struct RunResult {
    ErrorReport report;
    Solution solution;
    std::size_t ndof = 0;     // unknowns of the solved system
    std::size_t nnz = 0;
    double gamma_ratio = 0.0;
    double omega = 0.0;
};

/// Assemble, solve and measure one manufactured case on one mesh. The
/// patch case runs in lifted-Dirichlet mode. When `dump` is set the
/// uncondensed system is written to it.
RunResult run_case(const PolytopalMesh& mesh, const ManufacturedCase& mc, const RunOptions& options,
                   std::ostream* dump = nullptr);

struct StudyConfig {
    CaseKind kind = CaseKind::smooth;
    MeshFamily family = MeshFamily::cartesian;
    std::vector<int> degrees{1};
    int first_level = 1;
    int levels = 4;
    double epsilon = 1e-8;
    double sigma = 1.0;
    StabilisationConstants constants;
    MacroMode macro = MacroMode::trivial;
    bool condense = false;
    std::optional<std::string> mesh_file;  // replaces the generated family by one mesh
    std::string out_dir;                   // empty: no files
    bool plot_data = true;
    bool dump_system = false;
};

struct StudyResult {
    int k = 0;
    std::vector<ErrorReport> reports;
    std::vector<RunResult> runs;
    std::string csv_path;
};

inline constexpr const char* csv_header = "level,h,ndof,err_LP,rate_LP,err_supg,rate_supg";

/// CSV text with the header above; undefined rates are empty fields.
std::string format_csv(const std::vector<ErrorReport>& reports);

/// One study per degree. Writes <case>_<family>_k<k>.csv (and per-series
/// plot data) under out_dir. Solver failures are rethrown with the
/// offending (k, level).
std::vector<StudyResult> run_convergence_study(const StudyConfig& config, std::ostream& log);

}  // namespace lpshho
