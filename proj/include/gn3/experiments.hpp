#pragma once

// Scenario registry, the alpha sweep against the alpha = 0 reference run,
// rate studies over the sweep, manufactured-solution verification and
// energy diagnostics.

#include "gn3/monotone.hpp"
#include "gn3/norms.hpp"
#include "gn3/solver.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace gn3 {

/// Names of the three norm groups the sweep reports and fits:
///   first_estimate  : y in W1inf(H) + Linf(V),  u in Linf(H) + L2(V)
///   linear_estimate : y in W1inf(H) + Linf(V),  u in H1(H) + Linf(V) + L2(W)
///   strong_estimate : y in W1inf(V) + Linf(W)
inline constexpr const char* kFirstEstimate = "first_estimate";
inline constexpr const char* kLinearEstimate = "linear_estimate";
inline constexpr const char* kStrongEstimate = "strong_estimate";
/// Norm of the data differences ||f_a - f||_{L1(H)} + ||w0_a - w0||_V + ||v0_a - v0||_H + ||u0_a - u0||_V.
inline constexpr const char* kDataDifference = "data";

struct Scenario {
    std::string name;
    std::string description;
    double length = 1.0;
    std::size_t n_nodes = 257;
    double tau = 1e-3;
    double final_time = 1.0;
    double beta = 1.0;
    GraphSpec graph = GraphSpec::double_well();
    CouplingSpec coupling = natural_coupling(GraphSpec::double_well());
    std::function<double(double)> w0;
    std::function<double(double)> v0;
    std::function<double(double)> u0;
    /// Pointwise source f(x, t); empty means f = 0.
    std::function<double(double, double)> f;
    /// Declared rate r of the data schedule: data_a = data + a^r * profile, r = 0
    /// meaning alpha-independent data.
    double schedule_rate = 0.0;
    std::optional<double> yosida_epsilon;

    [[nodiscard]] std::size_t steps() const;
    [[nodiscard]] SpaceGrid grid() const { return SpaceGrid(length, n_nodes); }
    [[nodiscard]] SolverOptions solver_options() const;
    /// Size of the data perturbation at alpha (0 for alpha = 0 or r = 0).
    [[nodiscard]] double perturbation(double alpha) const;
    [[nodiscard]] ProblemData problem(double alpha) const;
};

/// "smooth" (double well), "obstacle", "obstacle_active" (constraint reached),
/// "logarithmic" and "stationary" (fixed point). Throws InvalidArgument for unknown names.
[[nodiscard]] Scenario find_scenario(const std::string& name);
[[nodiscard]] std::vector<std::string> scenario_names();

/// {2^-4, ..., 2^-10}.
[[nodiscard]] std::vector<double> default_alphas();

struct ErrorReport {
    double alpha = 0.0;
    /// ("y:W1inf(H)", value), ... in a fixed order.
    std::vector<std::pair<std::string, double>> errors;

    [[nodiscard]] double at(const std::string& norm_kind) const;
    /// Sum of the component norms of a group (see kFirstEstimate etc.).
    [[nodiscard]] double group(const std::string& name) const;
    friend bool operator==(const ErrorReport&, const ErrorReport&) = default;
};

[[nodiscard]] std::vector<std::string> norm_group_names();
[[nodiscard]] std::vector<std::string> norm_group_members(const std::string& name);

/// Differences y_a - y_ref and u_a - u_ref in every reported norm. Both runs
/// must share grid and tau.
[[nodiscard]] ErrorReport compare(const Trajectory& run, const Trajectory& reference);

/// Throws InvalidArgument unless there are >= 3 alphas, strictly descending, in (0, 1].
void validate_alphas(const std::vector<double>& alphas);

/// Runs the reference (alpha = 0) once and every alpha on the same grid and tau.
/// Runs may execute on up to `workers` threads; results are ordered as alphas.
/// A failing run is rethrown as NumericalFailure naming the alpha.
[[nodiscard]] std::vector<ErrorReport> sweep(const Scenario& scenario, const std::vector<double>& alphas,
                                             unsigned workers = 1);

/// Hypothesis sets of the error estimates the scenario data satisfy.
[[nodiscard]] std::vector<std::string> satisfied_hypotheses(const Scenario& scenario);

/// fit_rate per norm and per group of precomputed reports.
[[nodiscard]] RateReport rate_report(const std::vector<ErrorReport>& reports,
                                     std::vector<std::string> hypotheses = {});
[[nodiscard]] RateReport rate_study(const Scenario& scenario, const std::vector<double>& alphas, unsigned workers = 1);

struct MmsOptions {
    std::vector<double> taus{1e-2, 5e-3, 2.5e-3, 1.25e-3};
    std::size_t tau_study_nodes = 257;
    std::vector<std::size_t> node_counts{33, 65, 129, 257};
    double space_study_tau = 2e-6;
    double alpha = 0.1;
    double beta = 1.0;
    double kappa = 1.0;
    double final_time = 1.0;
    /// Replace the manufactured pair with y = u = 0 and zero sources.
    bool trivial = false;
};

struct MmsRow {
    std::string study;  ///< "tau" or "space"
    double tau = 0.0;
    std::size_t n_nodes = 0;
    double error_y = 0.0;  ///< Linf(H) error of y
    double error_u = 0.0;  ///< Linf(H) error of u
};

struct MmsTable {
    std::vector<MmsRow> rows;
    double tau_slope_y = 0.0;
    double tau_slope_u = 0.0;
    double space_slope_y = 0.0;
    double space_slope_u = 0.0;

    /// tau slopes in [0.8, 1.3] and space slopes in [1.7, 2.3].
    [[nodiscard]] bool passed() const;
};

/// Linf(H) errors of one run against the manufactured pair
/// y = (1 + t^2) cos(pi x / L), u = exp(-t) cos(pi x / L) / 2 (double well graph).
[[nodiscard]] MmsRow mms_run(const MmsOptions& options, std::size_t n_nodes, double tau);
/// Slopes are only fitted when the study has >= 3 errors above 1e-14.
[[nodiscard]] MmsTable mms_verify(const MmsOptions& options = {});

struct EnergySeries {
    std::vector<double> t;
    std::vector<double> v_H;            ///< ||v^m||_H
    std::vector<double> y_V;            ///< ||y^m||_V
    std::vector<double> alpha_grad_v;   ///< alpha tau sum_{k<=m} ||grad v^k||_H^2
    std::vector<double> u_H;            ///< ||u^m||_H
    std::vector<double> u_V_sq;         ///< tau sum_{k<=m} ||u^k||_V^2
    std::vector<double> phi;            ///< int phi_eps(u^m) (phi itself in semi-implicit mode)
    std::vector<double> xi_sq;          ///< tau sum_{k<=m} ||xi^k||_H^2
    std::vector<double> free_energy;    ///< Psi(theta^m, u^m)

    /// max_m (||v^m||^2 / 2 + beta/4 ||y^m||_V^2) + alpha tau sum ||grad v||^2.
    double first_energy = 0.0;
    /// max_m int phi_eps(u^m) + tau sum ||xi||^2.
    double second_energy = 0.0;
};

[[nodiscard]] EnergySeries energy_monitor(const Trajectory& traj, const ProblemData& data);

struct EnergyBounds {
    double alpha = 0.0;
    std::vector<std::pair<std::string, double>> terminal;  ///< terminal diagnostics and aggregates
};

/// Sup-in-time and accumulated diagnostics of each alpha run. The alpha-weighted dissipation
/// enters only through first_energy, since on its own it vanishes with alpha.
[[nodiscard]] std::vector<EnergyBounds> energy_sweep(const Scenario& scenario, const std::vector<double>& alphas,
                                                     unsigned workers = 1);

/// max/min over the sweep of one diagnostic; 1 when all values are zero and
/// infinity when only some are.
[[nodiscard]] double spread_ratio(const std::vector<EnergyBounds>& bounds, const std::string& name);

}  // namespace gn3
