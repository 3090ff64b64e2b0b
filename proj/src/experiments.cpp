#include "gn3/experiments.hpp"

#include "gn3/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <sstream>
#include <thread>

namespace gn3 {

namespace {

constexpr double kPi = std::numbers::pi;

// Runs task(i) for i in [0, count) on up to `workers` threads and rethrows the
// first failure (lowest index).
template <class Task>
void parallel_for(std::size_t count, unsigned workers, Task task) {
    std::vector<std::exception_ptr> failures(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                task(i);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    const unsigned n_threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_threads);
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    }
    for (auto& f : failures)
        if (f) std::rethrow_exception(f);
}

Trajectory run_alpha(const Scenario& scenario, double alpha) {
    try {
        return simulate(scenario.problem(alpha), scenario.grid(), scenario.tau, scenario.steps(),
                        scenario.solver_options());
    } catch (const NumericalFailure& e) {
        std::ostringstream os;
        os << "scenario " << scenario.name << ", alpha=" << alpha << ": " << e.what();
        throw NumericalFailure(os.str());
    }
}

std::vector<Field> differences(const std::vector<Field>& a, const std::vector<Field>& b) {
    std::vector<Field> out;
    out.reserve(a.size());
    for (std::size_t m = 0; m < a.size(); ++m) out.push_back(a[m] - b[m]);
    return out;
}

double data_difference(const Scenario& scenario, double alpha) {
    const SpaceGrid grid = scenario.grid();
    const ProblemData a = scenario.problem(alpha);
    const ProblemData ref = scenario.problem(0.0);
    double total = norm_V(grid, a.w0 - ref.w0) + norm_H(grid, a.v0 - ref.v0) + norm_V(grid, a.u0 - ref.u0);
    Field fa(grid.size());
    Field fr(grid.size());
    double l1 = 0.0;
    for (std::size_t m = 1; m <= scenario.steps(); ++m) {
        const double t = static_cast<double>(m) * scenario.tau;
        a.f(t, grid, fa.span());
        ref.f(t, grid, fr.span());
        l1 += scenario.tau * norm_H(grid, fa - fr);
    }
    return total + l1;
}

Scenario base_scenario(std::string name) {
    Scenario s;
    s.name = std::move(name);
    s.w0 = [](double x) { return std::cos(kPi * x); };
    s.v0 = [](double) { return 0.0; };
    s.u0 = [](double x) { return 0.5 * std::cos(kPi * x); };
    return s;
}

}  // namespace

std::size_t Scenario::steps() const {
    if (!(tau > 0.0) || !(final_time >= 0.0)) throw InvalidArgument("scenario needs tau > 0 and T >= 0");
    const double m = final_time / tau;
    const auto steps = static_cast<std::size_t>(std::llround(m));
    if (std::abs(static_cast<double>(steps) * tau - final_time) > 1e-12 * std::max(1.0, final_time))
        throw InvalidArgument("scenario: T is not an integer multiple of tau");
    return steps;
}

SolverOptions Scenario::solver_options() const {
    SolverOptions o;
    o.yosida_epsilon = yosida_epsilon;
    return o;
}

double Scenario::perturbation(double alpha) const {
    if (schedule_rate == 0.0 || alpha == 0.0) return 0.0;
    return std::pow(alpha, schedule_rate);
}

ProblemData Scenario::problem(double alpha) const {
    const SpaceGrid g = grid();
    const double p = perturbation(alpha);
    const double k = kPi / length;
    auto profile = [k](double x) { return std::cos(k * x); };
    ProblemData d;
    d.alpha = alpha;
    d.beta = beta;
    d.w0 = g.sample([&](double x) { return w0(x) + 0.1 * p * profile(x); });
    d.v0 = g.sample([&](double x) { return v0(x) + 0.1 * p * profile(x); });
    d.u0 = g.sample([&](double x) { return u0(x) + 0.1 * p * profile(x); });
    d.graph = graph;
    d.coupling = coupling;
    if (f) {
        d.f = [fn = f, p, profile](double t, const SpaceGrid& grid, std::span<double> out) {
            const auto x = grid.nodes();
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = fn(x[i], t) + p * profile(x[i]);
        };
    } else if (p != 0.0) {
        d.f = separable_source([p](double) { return p; }, profile);
    } else {
        d.f = zero_source();
    }
    return d;
}

Scenario find_scenario(const std::string& name) {
    if (name == "smooth") {
        Scenario s = base_scenario(name);
        s.description = "double well kappa=1, alpha-independent data";
        s.graph = GraphSpec::double_well(1.0);
        s.coupling = natural_coupling(s.graph);
        return s;
    }
    if (name == "obstacle") {
        Scenario s = base_scenario(name);
        s.description = "double obstacle [-1,1], G = 1 - u^2, data schedule rate 1/2";
        s.graph = GraphSpec::double_obstacle(-1.0, 1.0);
        s.coupling = natural_coupling(s.graph);
        s.schedule_rate = 0.5;
        return s;
    }
    if (name == "obstacle_active") {
        Scenario s = base_scenario(name);
        s.description = "double obstacle [-1,1] with data that push u onto the constraint";
        s.graph = GraphSpec::double_obstacle(-1.0, 1.0);
        s.coupling = natural_coupling(s.graph);
        s.u0 = [](double x) { return 0.9 * std::cos(kPi * x); };
        s.v0 = [](double x) { return 10.0 * std::cos(kPi * x); };
        return s;
    }
    if (name == "logarithmic") {
        Scenario s = base_scenario(name);
        s.description = "logarithmic potential kappa0=2, kappa1=1, alpha-independent data";
        s.graph = GraphSpec::logarithmic(2.0, 1.0);
        s.coupling = natural_coupling(s.graph);
        return s;
    }
    if (name == "stationary") {
        Scenario s = base_scenario(name);
        s.description = "constant w0, zero v0, u0 and f: a fixed point";
        s.graph = GraphSpec::double_well(1.0);
        s.coupling = natural_coupling(s.graph);
        s.w0 = [](double) { return 0.3; };
        s.u0 = [](double) { return 0.0; };
        return s;
    }
    throw InvalidArgument("unknown scenario '" + name + "'");
}

std::vector<std::string> scenario_names() { return {"smooth", "obstacle", "obstacle_active", "logarithmic", "stationary"}; }

std::vector<double> default_alphas() {
    std::vector<double> a;
    for (int k = 4; k <= 10; ++k) a.push_back(std::ldexp(1.0, -k));
    return a;
}

double ErrorReport::at(const std::string& norm_kind) const {
    for (const auto& [k, v] : errors)
        if (k == norm_kind) return v;
    throw InvalidArgument("error report has no norm " + norm_kind);
}

std::vector<std::string> norm_group_names() { return {kFirstEstimate, kLinearEstimate, kStrongEstimate}; }

std::vector<std::string> norm_group_members(const std::string& name) {
    if (name == kFirstEstimate) return {"y:W1inf(H)", "y:Linf(V)", "u:Linf(H)", "u:L2(V)"};
    if (name == kLinearEstimate) return {"y:W1inf(H)", "y:Linf(V)", "u:H1(H)", "u:Linf(V)", "u:L2(W)"};
    if (name == kStrongEstimate) return {"y:W1inf(V)", "y:Linf(W)"};
    throw InvalidArgument("unknown norm group " + name);
}

double ErrorReport::group(const std::string& name) const {
    double s = 0.0;
    for (const auto& member : norm_group_members(name)) s += at(member);
    return s;
}

ErrorReport compare(const Trajectory& run, const Trajectory& reference) {
    if (!(run.grid == reference.grid) || run.tau != reference.tau || run.steps() != reference.steps())
        throw InvalidArgument("compare: runs must share grid, tau and number of steps");
    const SpaceGrid& grid = run.grid;
    const double tau = run.tau;
    const auto dy = differences(run.y, reference.y);
    const auto du = differences(run.u, reference.u);
    using S = SpaceNorm;
    using T = TimeAggregation;
    const std::vector<std::pair<char, NormKind>> kinds{
        {'y', {S::H, T::W1infT}}, {'y', {S::V, T::LinfT}}, {'y', {S::V, T::W1infT}}, {'y', {S::W, T::LinfT}},
        {'u', {S::H, T::LinfT}},  {'u', {S::V, T::L2T}},   {'u', {S::H, T::H1T}},    {'u', {S::V, T::LinfT}},
        {'u', {S::W, T::L2T}},
    };
    ErrorReport report;
    for (const auto& [component, kind] : kinds) {
        const auto& levels = component == 'y' ? dy : du;
        report.errors.emplace_back(std::string(1, component) + ":" + kind.label(), bochner(grid, kind, levels, tau));
    }
    return report;
}

void validate_alphas(const std::vector<double>& alphas) {
    if (alphas.size() < 3) throw InvalidArgument("need >= 3 sweep points");
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        if (!(alphas[i] > 0.0 && alphas[i] <= 1.0)) throw InvalidArgument("sweep alphas must lie in (0, 1]");
        if (i > 0 && !(alphas[i] < alphas[i - 1])) throw InvalidArgument("sweep alphas must be strictly descending");
    }
}

std::vector<ErrorReport> sweep(const Scenario& scenario, const std::vector<double>& alphas, unsigned workers) {
    validate_alphas(alphas);
    std::vector<std::optional<Trajectory>> runs(alphas.size() + 1);
    parallel_for(alphas.size() + 1, workers,
                 [&](std::size_t i) { runs[i] = run_alpha(scenario, i == 0 ? 0.0 : alphas[i - 1]); });
    std::vector<ErrorReport> reports(alphas.size());
    parallel_for(alphas.size(), workers, [&](std::size_t i) {
        reports[i] = compare(*runs[i + 1], *runs[0]);
        reports[i].alpha = alphas[i];
        if (scenario.schedule_rate != 0.0)
            reports[i].errors.emplace_back(kDataDifference, data_difference(scenario, alphas[i]));
    });
    return reports;
}

std::vector<std::string> satisfied_hypotheses(const Scenario& scenario) {
    const double r = scenario.schedule_rate;
    std::vector<std::string> h{"convergence"};
    if (r == 0.0 || r >= 0.5) h.emplace_back(kFirstEstimate);
    if (scenario.graph.smooth() && (r == 0.0 || r >= 1.0)) h.emplace_back(kLinearEstimate);
    if (scenario.graph.smooth() && (r == 0.0 || r >= 1.0)) h.emplace_back(kStrongEstimate);
    return h;
}

RateReport rate_report(const std::vector<ErrorReport>& reports, std::vector<std::string> hypotheses) {
    if (reports.size() < 3) throw InvalidArgument("need >= 3 sweep points");
    RateReport out;
    out.hypotheses = std::move(hypotheses);
    auto add = [&](const std::string& name, auto value_of) {
        RateEntry e;
        e.norm_kind = name;
        for (const auto& r : reports) e.points.emplace_back(r.alpha, value_of(r));
        e.fit = fit_rate(e.points);
        out.entries.push_back(std::move(e));
    };
    for (const auto& group : norm_group_names()) add(group, [&](const ErrorReport& r) { return r.group(group); });
    for (const auto& [name, value] : reports.front().errors) {
        (void)value;
        add(name, [&](const ErrorReport& r) { return r.at(name); });
    }
    return out;
}

RateReport rate_study(const Scenario& scenario, const std::vector<double>& alphas, unsigned workers) {
    return rate_report(sweep(scenario, alphas, workers), satisfied_hypotheses(scenario));
}

bool MmsTable::passed() const {
    auto in = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
    return in(tau_slope_y, 0.8, 1.3) && in(tau_slope_u, 0.8, 1.3) && in(space_slope_y, 1.7, 2.3) &&
           in(space_slope_u, 1.7, 2.3);
}

MmsRow mms_run(const MmsOptions& o, std::size_t n_nodes, double tau) {
    const SpaceGrid grid(1.0, n_nodes);
    const double k = kPi / grid.length();
    const double k2 = k * k;
    const double a = o.alpha;
    const double b = o.beta;
    const double kappa = o.kappa;
    const Field c = grid.sample([k](double x) { return std::cos(k * x); });
    const double scale = o.trivial ? 0.0 : 1.0;

    // Amplitudes of y = Y(t) cos(kx) and u = U(t) cos(kx).
    auto Y = [scale](double t) { return scale * (1.0 + t * t); };
    auto U = [scale](double t) { return scale * 0.5 * std::exp(-t); };

    ProblemData d;
    d.alpha = a;
    d.beta = b;
    d.graph = GraphSpec::double_well(kappa);
    d.coupling = natural_coupling(d.graph);
    d.w0 = Y(0.0) * c;
    d.u0 = U(0.0) * c;
    d.v0 = (0.0 - U(0.0)) * c;  // y_t(0) = 0
    d.f = [=](double t, const SpaceGrid&, std::span<double> out) {
        const double e = std::exp(-t);
        const double amp = scale * (2.0 + 2.0 * a * k2 * t + b * k2 * (1.0 + t * t) - 0.5 * a * k2 * e -
                                    0.5 * b * k2 * (1.0 - e));
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = amp * c[i];
    };
    d.u_source = [=](double t, const SpaceGrid&, std::span<double> out) {
        const double e = std::exp(-t);
        const double lin = scale * (-0.5 * e + 0.5 * k2 * e + (1.0 - kappa) * 0.5 * e - 2.0 * t);
        const double cubic = scale * kappa * 0.125 * e * e * e;
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = lin * c[i] + cubic * c[i] * c[i] * c[i];
    };

    const double m_real = o.final_time / tau;
    const auto steps = static_cast<std::size_t>(std::llround(m_real));
    Stepper stepper(d, grid, tau);
    MmsRow row;
    row.tau = tau;
    row.n_nodes = n_nodes;
    Field diff(grid.size());
    auto measure = [&] {
        const State& s = stepper.state();
        const double y_amp = Y(s.t);
        const double u_amp = U(s.t);
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = s.y[i] - y_amp * c[i];
        row.error_y = std::max(row.error_y, norm_H(grid, diff));
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = s.u[i] - u_amp * c[i];
        row.error_u = std::max(row.error_u, norm_H(grid, diff));
    };
    measure();
    for (std::size_t m = 0; m < steps; ++m) {
        stepper.advance();
        measure();
    }
    return row;
}

MmsTable mms_verify(const MmsOptions& o) {
    MmsTable table;
    std::vector<std::pair<double, double>> ty, tu, sy, su;
    for (double tau : o.taus) {
        MmsRow row = mms_run(o, o.tau_study_nodes, tau);
        row.study = "tau";
        ty.emplace_back(tau, row.error_y);
        tu.emplace_back(tau, row.error_u);
        table.rows.push_back(row);
    }
    for (std::size_t n : o.node_counts) {
        MmsRow row = mms_run(o, n, o.space_study_tau);
        row.study = "space";
        const double dx = 1.0 / static_cast<double>(n - 1);
        sy.emplace_back(dx, row.error_y);
        su.emplace_back(dx, row.error_u);
        table.rows.push_back(row);
    }
    auto slope = [](const std::vector<std::pair<double, double>>& pts) {
        const auto informative = std::count_if(pts.begin(), pts.end(), [](const auto& p) { return p.second > 1e-14; });
        if (informative < 3) return 0.0;
        return fit_rate(pts).slope;
    };
    table.tau_slope_y = slope(ty);
    table.tau_slope_u = slope(tu);
    table.space_slope_y = slope(sy);
    table.space_slope_u = slope(su);
    return table;
}

EnergySeries energy_monitor(const Trajectory& traj, const ProblemData& data) {
    const SpaceGrid& grid = traj.grid;
    const double tau = traj.tau;
    const double eps = traj.yosida_epsilon;
    const auto physical = reconstruct_physical(traj);
    EnergySeries s;
    double grad_v = 0.0;
    double u_v = 0.0;
    double xi = 0.0;
    double first_max = 0.0;
    double phi_max = 0.0;
    for (std::size_t m = 0; m < traj.y.size(); ++m) {
        const double vh = norm_H(grid, traj.v[m]);
        const double yv = norm_V(grid, traj.y[m]);
        if (m > 0) {
            const double g = gradient_norm(grid, traj.v[m]);
            grad_v += tau * g * g;
            const double uv = norm_V(grid, traj.u[m]);
            u_v += tau * uv * uv;
            const double xh = norm_H(grid, traj.xi[m]);
            xi += tau * xh * xh;
        }
        double phi = 0.0;
        const auto w = grid.weights();
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double ui = traj.u[m][i];
            phi += w[i] * (eps > 0.0 ? moreau(data.graph, eps, ui) : potential(data.graph, ui));
        }
        s.t.push_back(traj.time(m));
        s.v_H.push_back(vh);
        s.y_V.push_back(yv);
        s.alpha_grad_v.push_back(data.alpha * grad_v);
        s.u_H.push_back(norm_H(grid, traj.u[m]));
        s.u_V_sq.push_back(u_v);
        s.phi.push_back(phi);
        s.xi_sq.push_back(xi);
        s.free_energy.push_back(free_energy(grid, physical[m].theta, traj.u[m], data.graph, data.coupling, eps));
        first_max = std::max(first_max, 0.5 * vh * vh + 0.25 * data.beta * yv * yv);
        phi_max = std::max(phi_max, phi);
    }
    s.first_energy = first_max + data.alpha * grad_v;
    s.second_energy = phi_max + xi;
    return s;
}

std::vector<EnergyBounds> energy_sweep(const Scenario& scenario, const std::vector<double>& alphas, unsigned workers) {
    validate_alphas(alphas);
    std::vector<EnergyBounds> out(alphas.size());
    parallel_for(alphas.size(), workers, [&](std::size_t i) {
        const ProblemData data = scenario.problem(alphas[i]);
        const Trajectory traj = run_alpha(scenario, alphas[i]);
        const EnergySeries s = energy_monitor(traj, data);
        EnergyBounds b;
        b.alpha = alphas[i];
        auto sup = [](const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); };
        b.terminal = {
            {"first_energy", s.first_energy}, {"second_energy", s.second_energy}, {"v_H_max", sup(s.v_H)},
            {"y_V_max", sup(s.y_V)},         {"u_H_max", sup(s.u_H)},           {"u_V_sq", s.u_V_sq.back()},
            {"phi_max", sup(s.phi)},         {"xi_sq", s.xi_sq.back()},
        };
        out[i] = std::move(b);
    });
    return out;
}

double spread_ratio(const std::vector<EnergyBounds>& bounds, const std::string& name) {
    double lo = kInfinity;
    double hi = 0.0;
    for (const auto& b : bounds) {
        auto it = std::find_if(b.terminal.begin(), b.terminal.end(), [&](const auto& p) { return p.first == name; });
        if (it == b.terminal.end()) throw InvalidArgument("no energy diagnostic " + name);
        lo = std::min(lo, std::abs(it->second));
        hi = std::max(hi, std::abs(it->second));
    }
    if (hi == 0.0) return 1.0;
    if (lo == 0.0) return kInfinity;
    return hi / lo;
}

}  // namespace gn3
