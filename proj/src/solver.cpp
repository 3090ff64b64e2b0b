#include "gn3/solver.hpp"

#include "gn3/error.hpp"
#include "gn3/norms.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gn3 {

namespace {

PhaseTreatment resolve_treatment(const ProblemData& data, const SolverOptions& options) {
    if (options.treatment != PhaseTreatment::Automatic) {
        if (options.treatment == PhaseTreatment::SmoothSemiImplicit && !data.graph.smooth())
            throw InvalidArgument("semi-implicit treatment needs a smooth graph, got " + data.graph.name());
        return options.treatment;
    }
    return data.graph.smooth() ? PhaseTreatment::SmoothSemiImplicit : PhaseTreatment::Yosida;
}

double resolve_epsilon(PhaseTreatment treatment, double tau, const SolverOptions& options) {
    if (treatment == PhaseTreatment::SmoothSemiImplicit) return 0.0;
    const double eps = options.yosida_epsilon.value_or(tau);
    if (!(eps > 0.0)) throw InvalidArgument("Yosida parameter must be positive");
    return eps;
}

Field graph_selection(const GraphSpec& graph, double eps, const Field& u) {
    Field xi(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        xi[i] = eps > 0.0 ? yosida(graph, eps, u[i]) : minimal_section(graph, u[i]);
    return xi;
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

SourceFn zero_source() {
    return [](double, const SpaceGrid&, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); };
}

SourceFn separable_source(std::function<double(double)> amplitude, std::function<double(double)> profile) {
    // The cache is keyed on the grid; a copy of the SourceFn shares nothing mutable
    // with other copies once it has been sampled on its own grid.
    struct Cache {
        std::size_t n = 0;
        double length = 0.0;
        Field values;
    };
    return [amplitude = std::move(amplitude), profile = std::move(profile), cache = Cache{}](
               double t, const SpaceGrid& grid, std::span<double> out) mutable {
        if (cache.n != grid.size() || cache.length != grid.length()) {
            cache.values = grid.sample(profile);
            cache.n = grid.size();
            cache.length = grid.length();
        }
        const double a = amplitude(t);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * cache.values[i];
    };
}

void ProblemData::validate(const SpaceGrid& grid) const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must satisfy 0 <= alpha <= 1");
    if (!(beta > 0.0)) throw InvalidArgument("beta must be positive");
    grid.check(w0);
    grid.check(v0);
    grid.check(u0);
    if (!w0.all_finite() || !v0.all_finite() || !u0.all_finite()) throw InvalidArgument("initial data must be finite");
    if (!f) throw InvalidArgument("source f is not set");
    if (!coupling.gbar || !coupling.G) throw InvalidArgument("coupling functions are not set");
    const Interval dom = graph.domain();
    for (std::size_t i = 0; i < u0.size(); ++i) {
        if (u0[i] < dom.lo || u0[i] > dom.hi || !std::isfinite(potential(graph, u0[i]))) {
            std::ostringstream os;
            os << "u0 = " << u0[i] << " at node " << i << " lies outside the closure of D(gamma) for "
               << graph.name();
            throw InvalidArgument(os.str());
        }
    }
}

State initial_state(const ProblemData& data, const SpaceGrid& grid, double tau, const SolverOptions& options) {
    data.validate(grid);
    const PhaseTreatment treatment = resolve_treatment(data, options);
    const double eps = resolve_epsilon(treatment, tau, options);
    State s;
    s.y = data.w0;
    s.v = data.v0 + data.u0;
    s.u = data.u0;
    s.xi = graph_selection(data.graph, eps, data.u0);
    s.conv = grid.zeros();
    return s;
}

Stepper::Stepper(ProblemData data, SpaceGrid grid, double tau, SolverOptions options)
    : data_(std::move(data)), grid_(std::move(grid)), tau_(tau), options_(options) {
    if (!(tau_ > 0.0)) throw InvalidArgument("time step must be positive");
    treatment_ = resolve_treatment(data_, options_);
    eps_ = resolve_epsilon(treatment_, tau_, options_);
    state_ = initial_state(data_, grid_, tau_, options_);
    const std::size_t n = grid_.size();
    for (auto* buf : {&rhs_, &src_, &lap_, &diag_, &res_, &delta_, &trial_, &u_new_, &z_}) buf->assign(n, 0.0);
}

void Stepper::u_step_semi_implicit(std::span<const double> rhs) {
    // gamma + g treated as one nonlinearity N, stabilized with L >= sup N' on
    // the range of the previous iterate:
    //   (1 + tau L) u' - tau lap u' = u + tau (v - N(u) + L u + h)
    const Field& u = state_.u;
    const double L = std::max(0.0, local_lipschitz(data_.graph, u.max_abs()) + data_.coupling.lip_g);
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double nonlinear = minimal_section(data_.graph, u[i]) + data_.coupling.g(u[i]);
        trial_[i] = rhs[i] + tau_ * (L * u[i] - nonlinear);
        diag_[i] = 1.0 + tau_ * L;
    }
    solve_shifted(grid_, diag_, tau_, trial_, u_new_);
    last_iterations_ = 0;
}

void Stepper::u_step_yosida(std::span<const double> rhs) {
    // F(z) = z - tau lap z + tau gamma_eps(z) - r, r = u + tau (v - g(u) + h).
    // rhs arrives holding u + tau (v + h); g(u) is subtracted here.
    const std::size_t n = grid_.size();
    const Field& u = state_.u;
    for (std::size_t i = 0; i < n; ++i) trial_[i] = rhs[i] - tau_ * data_.coupling.g(u[i]);
    std::copy(u.begin(), u.end(), u_new_.begin());

    const double scale = std::max(1.0, max_abs(trial_));
    auto residual = [&](std::span<const double> z, std::span<double> out) {
        apply_laplacian(grid_, z, lap_);
        for (std::size_t i = 0; i < n; ++i)
            out[i] = z[i] - tau_ * lap_[i] + tau_ * yosida(data_.graph, eps_, z[i]) - trial_[i];
        return max_abs(out);
    };

    double r_norm = residual(u_new_, res_);
    int it = 0;
    while (r_norm > options_.tolerance * scale) {
        if (++it > options_.max_iterations) {
            std::ostringstream os;
            os << "u step did not converge after " << options_.max_iterations << " Newton iterations (residual "
               << r_norm << "); reduce tau/eps = " << tau_ / eps_;
            throw NumericalFailure(os.str());
        }
        for (std::size_t i = 0; i < n; ++i) {
            diag_[i] = 1.0 + tau_ * yosida_derivative(data_.graph, eps_, u_new_[i]);
            res_[i] = -res_[i];
        }
        solve_shifted(grid_, diag_, tau_, res_, delta_);
        // Backtrack on the residual; a full step is accepted whenever it helps.
        double step = 1.0;
        double next_norm = 0.0;
        for (int k = 0; k < 30; ++k) {
            for (std::size_t i = 0; i < n; ++i) z_[i] = u_new_[i] + step * delta_[i];
            next_norm = residual(z_, res_);
            if (next_norm < r_norm || k == 29) break;
            step *= 0.5;
        }
        std::swap(z_, u_new_);
        r_norm = next_norm;
    }
    last_iterations_ = it;
}

void Stepper::advance() {
    const std::size_t n = grid_.size();
    const double t_next = static_cast<double>(state_.step + 1) * tau_;
    State& s = state_;

    // (a) u step: rhs = u + tau (v + h(t_{m+1})).
    if (data_.u_source) {
        data_.u_source(t_next, grid_, src_);
    } else {
        std::fill(src_.begin(), src_.end(), 0.0);
    }
    for (std::size_t i = 0; i < n; ++i) rhs_[i] = s.u[i] + tau_ * (s.v[i] + src_[i]);
    try {
        if (treatment_ == PhaseTreatment::SmoothSemiImplicit) {
            u_step_semi_implicit(rhs_);
        } else {
            u_step_yosida(rhs_);
        }
    } catch (const NumericalFailure& e) {
        std::ostringstream os;
        os << "step " << s.step + 1 << " (t=" << t_next << "): " << e.what();
        throw NumericalFailure(os.str());
    }
    for (std::size_t i = 0; i < n; ++i) {
        s.u[i] = u_new_[i];
        s.conv[i] += tau_ * u_new_[i];
    }
    s.xi = graph_selection(data_.graph, eps_, s.u);

    // (b) v step:
    //   v' - tau (alpha + beta tau) lap v' = v + tau [beta lap (y - conv') - alpha lap u' + f(t_{m+1})]
    data_.f(t_next, grid_, src_);
    for (std::size_t i = 0; i < n; ++i) trial_[i] = s.y[i] - s.conv[i];
    apply_laplacian(grid_, trial_, lap_);
    apply_laplacian(grid_, s.u.span(), delta_);
    for (std::size_t i = 0; i < n; ++i)
        rhs_[i] = s.v[i] + tau_ * (data_.beta * lap_[i] - data_.alpha * delta_[i] + src_[i]);
    std::fill(diag_.begin(), diag_.end(), 1.0);
    solve_shifted(grid_, diag_, tau_ * (data_.alpha + data_.beta * tau_), rhs_, s.v.span());
    for (std::size_t i = 0; i < n; ++i) s.y[i] += tau_ * s.v[i];

    s.t = t_next;
    ++s.step;
}

State step(const State& state, const ProblemData& data, const SpaceGrid& grid, double tau,
           const SolverOptions& options) {
    Stepper stepper(data, grid, tau, options);
    stepper.reset(state);
    stepper.advance();
    return stepper.state();
}

Trajectory simulate(const ProblemData& data, const SpaceGrid& grid, double tau, std::size_t steps,
                    const SolverOptions& options) {
    Stepper stepper(data, grid, tau, options);
    Trajectory traj{grid, tau, stepper.yosida_epsilon(), stepper.treatment(), {}, {}, {}, {}, {}};
    for (auto* v : {&traj.y, &traj.v, &traj.u, &traj.xi, &traj.conv}) v->reserve(steps + 1);
    auto record = [&](const State& s) {
        traj.y.push_back(s.y);
        traj.v.push_back(s.v);
        traj.u.push_back(s.u);
        traj.xi.push_back(s.xi);
        traj.conv.push_back(s.conv);
    };
    record(stepper.state());
    for (std::size_t m = 0; m < steps; ++m) {
        stepper.advance();
        record(stepper.state());
    }
    return traj;
}

std::vector<PhysicalFields> reconstruct_physical(const Trajectory& traj) {
    std::vector<PhysicalFields> out;
    out.reserve(traj.y.size());
    for (std::size_t m = 0; m < traj.y.size(); ++m)
        out.push_back(PhysicalFields{traj.y[m] - traj.conv[m], traj.v[m] - traj.u[m], traj.v[m]});
    return out;
}

double free_energy(const SpaceGrid& grid, const Field& theta, const Field& u, const GraphSpec& graph,
                   const CouplingSpec& coupling, double eps) {
    grid.check(theta);
    grid.check(u);
    const auto w = grid.weights();
    double total = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double phi = eps > 0.0 ? moreau(graph, eps, u[i]) : potential(graph, u[i]);
        if (!std::isfinite(phi)) {
            std::ostringstream os;
            os << "free_energy: phi(u) is infinite at node " << i << " (u = " << u[i] << ")";
            throw DomainError(os.str());
        }
        total += w[i] * (-0.5 * theta[i] * theta[i] - theta[i] * u[i] + phi + coupling.G(u[i]));
    }
    const double g = gradient_norm(grid, u);
    return total + 0.5 * g * g;
}

std::vector<Field> parabolic_solve(const SpaceGrid& grid, const Field& z0, std::span<const Field> h, double tau,
                                   std::size_t steps) {
    if (h.size() != steps) throw InvalidArgument("parabolic_solve: need one source field per step");
    std::vector<Field> out;
    out.reserve(steps + 1);
    grid.check(z0);
    out.push_back(z0);
    for (std::size_t m = 0; m < steps; ++m) {
        grid.check(h[m]);
        Field rhs = out.back();
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += tau * h[m][i];
        out.push_back(solve_helmholtz(grid, 1.0, tau, rhs));
    }
    return out;
}

void parabolic_solve(const SpaceGrid& grid, const Field& z0, const SourceFn& h, double tau, std::size_t steps,
                     const std::function<void(std::size_t, const Field&)>& observer) {
    if (!(tau > 0.0)) throw InvalidArgument("parabolic_solve: tau must be positive");
    grid.check(z0);
    Field z = z0;
    Field rhs(grid.size());
    Field src(grid.size());
    const std::vector<double> diag(grid.size(), 1.0);
    observer(0, z);
    for (std::size_t m = 1; m <= steps; ++m) {
        h(static_cast<double>(m) * tau, grid, src.span());
        for (std::size_t i = 0; i < z.size(); ++i) rhs[i] = z[i] + tau * src[i];
        solve_shifted(grid, diag, tau, rhs.span(), z.span());
        observer(m, z);
    }
}

ParabolicBound parabolic_stability(const SpaceGrid& grid, std::span<const Field> h, std::span<const Field> z,
                                   double tau) {
    if (z.empty() || h.size() + 1 != z.size())
        throw InvalidArgument("parabolic_stability: need M sources for M + 1 levels");
    ParabolicBound b;
    double max_v = 0.0;
    for (const Field& zm : z) max_v = std::max(max_v, norm_V(grid, zm));
    double dt_sq = 0.0;
    for (std::size_t m = 1; m < z.size(); ++m) {
        const double d = norm_H(grid, z[m] - z[m - 1]) / tau;
        dt_sq += d * d;
    }
    double h_sq = 0.0;
    for (const Field& hm : h) {
        const double n = norm_H(grid, hm);
        h_sq += n * n;
    }
    b.lhs = max_v + std::sqrt(tau * dt_sq);
    b.rhs = norm_V(grid, z.front()) + std::sqrt(tau * h_sq);
    return b;
}

}  // namespace gn3
