#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lpshho/hho_operators.hpp"
#include "lpshho/oseen_forms.hpp"
#include "lpshho/system.hpp"

namespace lpshho {

/// Discrete norms of the scheme. Holds references: the space, forms and
/// parameters must outlive the evaluator.
class NormEvaluator {
public:
    NormEvaluator(const HybridSpace& space, const OseenCoefficients& coeffs, const MacroDecomposition& macro,
                  const StabilisationParams& params, const DiscreteForms& forms);

    double norm_1h(const Eigen::VectorXd& u) const;
    double norm_eps(const Eigen::VectorXd& u) const;
    double norm_b(const Eigen::VectorXd& u) const;
    double norm_st(const Eigen::VectorXd& u, const Eigen::VectorXd& p) const;
    /// gamma_M-weighted ||G_{b,T} u + grad p||, exact b.
    double norm_supg(const Eigen::VectorXd& u, const Eigen::VectorXd& p) const;
    double norm_lp(const Eigen::VectorXd& u, const Eigen::VectorXd& p) const;
    double pressure_l2(const Eigen::VectorXd& p) const;
    double velocity_l2(const Eigen::VectorXd& u) const;

    /// A_h((u, p), (v, q)) from the global forms.
    double bilinear(const Eigen::VectorXd& u, const Eigen::VectorXd& p, const Eigen::VectorXd& v,
                    const Eigen::VectorXd& q) const;

    const HybridSpace& space() const noexcept { return *space_; }
    const StabilisationParams& params() const noexcept { return *params_; }

private:
    const HybridSpace* space_;
    const OseenCoefficients* coeffs_;
    const MacroDecomposition* macro_;
    const StabilisationParams* params_;
    const DiscreteForms* forms_;
};

/// Sets the boundary-face unknowns of a hybrid velocity to zero (projection onto U_{h,0}).
void clear_boundary(const HybridSpace& space, Eigen::VectorXd& u);

struct ErrorReport {
    int level = 0;
    double h = 0.0;
    std::size_t ndof = 0;
    double err_lp = 0.0;
    double err_supg = 0.0;
    double err_b = 0.0;
    double err_eps = 0.0;
    double err_st = 0.0;
    double err_pressure = 0.0;
    /// exact-vs-discrete L2 errors, informational
    double l2_velocity = 0.0;
    double l2_pressure = 0.0;
    std::optional<double> rate_lp;
    std::optional<double> rate_supg;
};

/// Errors of (I_h u - u_h, pi_h p - p_h).
ErrorReport compute_errors(const NormEvaluator& norms, const Eigen::VectorXd& velocity, const Eigen::VectorXd& pressure,
                           const VectorField& exact_u, const ScalarField& exact_p);

/// rates[i] = log(e_i/e_{i-1}) / log(h_i/h_{i-1}); rates[0] and pairs with a
/// non-positive error are undefined.
std::vector<std::optional<double>> compute_rate(const std::vector<std::pair<double, double>>& h_err);

/// Fills rate_lp / rate_supg of consecutive reports.
void fill_rates(std::vector<ErrorReport>& reports);

class DiagnosticError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// min over zero-mean p of sup_v B_h(v, p) / (||v||_{1,h} ||p||), on
/// U_{h,0}. nullopt when the zero-mean pressure space is trivial. Dense;
/// throws DiagnosticError above `max_unknowns` velocity unknowns.
std::optional<double> infsup_diagnostic(const HybridSpace& space, const DiscreteForms& forms,
                                        std::size_t max_unknowns = 6000);

/// ||v_T||_{L2} / ||v||_{1,h} for v in U_{h,0}.
double poincare_ratio(const NormEvaluator& norms, const Eigen::VectorXd& u);

}  // namespace lpshho
