#pragma once

// Time integration of the phase field system in the variables (y, u), where
// y = w + 1*u is the time-integrated enthalpy:
//
//   y_tt - alpha lap y_t - beta lap y = -alpha lap u - beta lap (1*u) + f
//   u_t  - lap u + xi + g(u) = y_t,   xi in gamma(u)
//
// with homogeneous Neumann data and y(0) = w0, y_t(0) = v0 + u0, u(0) = u0.
// alpha = 0 gives the hyperbolic limit problem.
//
// Each step is a decoupled IMEX implicit Euler step: first u (implicit in
// lap u and in the regularized graph, explicit in g and in y_t), then one
// Helmholtz solve for v = y_t that is implicit in both Laplacians.

#include "gn3/grid.hpp"
#include "gn3/monotone.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace gn3 {

/// Fills out[i] with the source at (x_i, t).
using SourceFn = std::function<void(double t, const SpaceGrid& grid, std::span<double> out)>;

[[nodiscard]] SourceFn zero_source();
/// (x, t) -> amplitude(t) * profile(x); the profile is sampled once per grid.
[[nodiscard]] SourceFn separable_source(std::function<double(double)> amplitude, std::function<double(double)> profile);

struct ProblemData {
    double alpha = 0.0;
    double beta = 1.0;
    Field w0;
    Field v0;
    Field u0;
    SourceFn f = zero_source();
    /// Extra source on the right of the u equation; empty means none.
    SourceFn u_source;
    GraphSpec graph = GraphSpec::double_well();
    CouplingSpec coupling = natural_coupling(GraphSpec::double_well());

    /// Throws InvalidArgument on 0 <= alpha <= 1, beta > 0, sizes, finiteness,
    /// or u0 outside the closure of D(gamma) / phi(u0) infinite.
    void validate(const SpaceGrid& grid) const;
};

enum class PhaseTreatment {
    Automatic,           ///< smooth graphs semi-implicit, all others Yosida
    Yosida,              ///< xi = gamma_eps(u), implicit, semismooth Newton
    SmoothSemiImplicit,  ///< gamma folded into g, linearly stabilized
};

struct SolverOptions {
    PhaseTreatment treatment = PhaseTreatment::Automatic;
    /// Yosida parameter; defaults to tau.
    std::optional<double> yosida_epsilon;
    double tolerance = 1e-10;
    int max_iterations = 100;
};

struct State {
    std::size_t step = 0;
    double t = 0.0;
    Field y;
    Field v;  ///< discrete y_t, the enthalpy
    Field u;
    Field xi;
    Field conv;  ///< discrete (1*u)(t)
};

/// y = w0, v = v0 + u0, u = u0, conv = 0; xi from the treatment that
/// (data, tau, options) resolve to.
[[nodiscard]] State initial_state(const ProblemData& data, const SpaceGrid& grid, double tau,
                                  const SolverOptions& options = {});

/// Holds the problem and scratch space for repeated steps.
class Stepper {
public:
    Stepper(ProblemData data, SpaceGrid grid, double tau, SolverOptions options = {});

    [[nodiscard]] const State& state() const noexcept { return state_; }
    [[nodiscard]] const SpaceGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] const ProblemData& data() const noexcept { return data_; }
    [[nodiscard]] double tau() const noexcept { return tau_; }
    /// Regularization actually used; 0 in semi-implicit mode.
    [[nodiscard]] double yosida_epsilon() const noexcept { return eps_; }
    [[nodiscard]] PhaseTreatment treatment() const noexcept { return treatment_; }
    /// Newton iterations of the last u step (0 in semi-implicit mode).
    [[nodiscard]] int last_iterations() const noexcept { return last_iterations_; }

    /// Advances one step. Throws NumericalFailure naming the step index when the
    /// u step does not converge.
    void advance();

    void reset(State state) { state_ = std::move(state); }

private:
    void u_step_yosida(std::span<const double> rhs);
    void u_step_semi_implicit(std::span<const double> rhs);

    ProblemData data_;
    SpaceGrid grid_;
    double tau_;
    SolverOptions options_;
    PhaseTreatment treatment_;
    double eps_;
    State state_;
    int last_iterations_ = 0;

    std::vector<double> rhs_, src_, lap_, diag_, res_, delta_, trial_, u_new_, z_;
};

/// Functional single step (allocates a fresh Stepper).
[[nodiscard]] State step(const State& state, const ProblemData& data, const SpaceGrid& grid, double tau,
                         const SolverOptions& options = {});

struct Trajectory {
    SpaceGrid grid;
    double tau = 0.0;
    double yosida_epsilon = 0.0;
    PhaseTreatment treatment = PhaseTreatment::Yosida;
    std::vector<Field> y, v, u, xi, conv;

    [[nodiscard]] std::size_t steps() const noexcept { return y.empty() ? 0 : y.size() - 1; }
    [[nodiscard]] double time(std::size_t m) const noexcept { return static_cast<double>(m) * tau; }
};

/// M steps of size tau from the initial data; time levels 0..M are stored.
[[nodiscard]] Trajectory simulate(const ProblemData& data, const SpaceGrid& grid, double tau, std::size_t steps,
                                  const SolverOptions& options = {});

struct PhysicalFields {
    Field w;      ///< thermal displacement y - 1*u
    Field theta;  ///< temperature v - u
    Field e;      ///< enthalpy v
};

[[nodiscard]] std::vector<PhysicalFields> reconstruct_physical(const Trajectory& traj);

/// Quadrature of -theta^2/2 - theta u + phi(u) + G(u) + |grad u|^2/2. With
/// eps > 0 the Moreau envelope phi_eps replaces phi. Throws DomainError when
/// phi(u) is infinite at some node.
[[nodiscard]] double free_energy(const SpaceGrid& grid, const Field& theta, const Field& u, const GraphSpec& graph,
                                 const CouplingSpec& coupling, double eps = 0.0);

/// Implicit Euler for z_t - lap z = h with Neumann closure; h[m-1] is the
/// source at t_m, so h must hold M fields. Returns levels 0..M.
[[nodiscard]] std::vector<Field> parabolic_solve(const SpaceGrid& grid, const Field& z0, std::span<const Field> h,
                                                 double tau, std::size_t steps);

/// Streaming variant: observer(m, z^m) for m = 0..M, nothing is stored.
void parabolic_solve(const SpaceGrid& grid, const Field& z0, const SourceFn& h, double tau, std::size_t steps,
                     const std::function<void(std::size_t, const Field&)>& observer);

struct ParabolicBound {
    double lhs = 0.0;  ///< max_m ||z^m||_V + sqrt(tau sum ||(z^m - z^{m-1})/tau||_H^2)
    double rhs = 0.0;  ///< ||z0||_V + sqrt(tau sum ||h^m||_H^2)
    [[nodiscard]] double ratio() const noexcept { return rhs > 0.0 ? lhs / rhs : 0.0; }
};

[[nodiscard]] ParabolicBound parabolic_stability(const SpaceGrid& grid, std::span<const Field> h,
                                                  std::span<const Field> z, double tau);

}  // namespace gn3
