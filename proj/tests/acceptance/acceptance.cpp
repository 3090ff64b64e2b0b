// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "gn3/cli.hpp"
#include "gn3/experiments.hpp"
#include "gn3/monotone.hpp"
#include "gn3/norms.hpp"
#include "gn3/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace gn3;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string num(double v) {
    std::ostringstream os;
    os << std::setprecision(4) << v;
    return os.str();
}

std::vector<double> samples(std::size_t n, double lo, double hi) {
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return s;
}

double slope(const std::vector<double>& h, const std::vector<double>& e) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < h.size(); ++i) pts.emplace_back(h[i], e[i]);
    return fit_rate(pts).slope;
}

// |s - r - eps gamma(r)| cannot drop below the change of r + eps gamma(r) across one ulp of r.
double residual_floor(const GraphSpec& g, double eps, double r) {
    const double next = std::nextafter(r, r >= 0.0 ? -kInfinity : kInfinity);
    const double at = r + eps * minimal_section(g, r);
    const double step = std::abs(at - (next + eps * minimal_section(g, next)));
    return 2.0 * step + 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(at));
}

void criterion1(Outcome& o) {
    const auto start = std::chrono::steady_clock::now();
    const std::vector<GraphSpec> kinds{GraphSpec::double_obstacle(-1.0, 1.0), GraphSpec::logarithmic(2.0, 1.0),
                                       GraphSpec::double_well(1.0)};
    const auto s = samples(1000, -3.0, 3.0);
    double worst_slope = 0.0, worst_envelope = 0.0, worst_residual = 0.0, worst_derivative = 0.0;
    for (const auto& g : kinds) {
        for (double eps : {1.0, 0.1, 0.01}) {
            for (std::size_t i = 0; i < s.size(); ++i) {
                if (i > 0) {
                    const double k = (yosida(g, eps, s[i]) - yosida(g, eps, s[i - 1])) / (s[i] - s[i - 1]);
                    worst_slope = std::max({worst_slope, -k, k * eps - 1.0});
                }
                const double m = moreau(g, eps, s[i]);
                if (m < 0.0) worst_envelope = std::max(worst_envelope, -m);
                worst_envelope = std::max(worst_envelope, (m - potential(g, s[i])) / std::max(1.0, std::abs(m)));
                const double r = resolvent(g, eps, s[i]);
                if (g.single_valued() && std::abs(r) < 1.0 - 1e-14) {
                    const double res = std::abs(s[i] - r - eps * minimal_section(g, r));
                    worst_residual = std::max(worst_residual, res / (1e-10 + residual_floor(g, eps, r)));
                }
                const double h = 1e-6;
                const double fd = (moreau(g, eps, s[i] + h) - moreau(g, eps, s[i] - h)) / (2.0 * h);
                const double y = yosida(g, eps, s[i]);
                worst_derivative = std::max(worst_derivative, std::abs(fd - y) / std::max(1.0, std::abs(y)));
            }
        }
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.detail << "slope excess " << num(worst_slope) << ", envelope excess " << num(worst_envelope)
             << ", residual/(1e-10 + fp floor) " << num(worst_residual) << ", envelope derivative rel "
             << num(worst_derivative) << ", " << num(seconds) << " s";
    o.require(worst_slope <= 1e-9, "0 <= Yosida slope <= 1/eps");
    o.require(worst_envelope <= 1e-12, "0 <= phi_eps <= phi");
    o.require(worst_residual <= 1.0, "resolvent residual");
    o.require(worst_derivative <= 1e-4, "phi_eps' = gamma_eps");
    o.require(seconds < 1.0, "runtime < 1 s");
}

void criterion2(Outcome& o) {
    const auto start = std::chrono::steady_clock::now();
    const auto profile = [](double x) { return std::cos(kPi * x); };
    const auto source = separable_source([](double t) { return (kPi * kPi - 1.0) * std::exp(-t); }, profile);
    auto run = [&](std::size_t n, double tau) {
        const SpaceGrid g(1.0, n);
        const auto M = static_cast<std::size_t>(std::llround(1.0 / tau));
        double err = 0.0;
        parabolic_solve(g, g.sample(profile), source, tau, M, [&](std::size_t m, const Field& z) {
            const double t = static_cast<double>(m) * tau;
            err = std::max(err, norm_H(g, z - g.sample([&](double x) { return std::exp(-t) * profile(x); })));
        });
        return err;
    };
    std::vector<double> taus{1e-2, 5e-3, 2.5e-3, 1.25e-3}, et;
    for (double tau : taus) et.push_back(run(257, tau));
    std::vector<double> dxs, ex;
    for (std::size_t n : {17u, 33u, 65u, 129u}) {
        dxs.push_back(1.0 / static_cast<double>(n - 1));
        ex.push_back(run(n, 1e-5));
    }
    const double st = slope(taus, et), sx = slope(dxs, ex);

    const SpaceGrid g(1.0, 65);
    const double tau = 1e-2;
    const std::size_t M = 100;
    const std::vector<std::function<double(double, double)>> sources{
        [](double, double) { return 0.0; },
        [](double x, double t) { return std::sin(7 * t) * std::cos(3 * kPi * x); },
        [](double x, double t) { return 1.0 + x * t; },
        [](double x, double) { return x < 0.5 ? -2.0 : 2.0; },
    };
    const std::vector<std::function<double(double)>> initials{
        profile, [](double x) { return x * x; }, [](double) { return 0.0; }, [](double x) { return std::cos(5 * kPi * x); }};
    double ratio = 0.0;
    for (const auto& src : sources) {
        for (const auto& z0 : initials) {
            std::vector<Field> h;
            for (std::size_t m = 1; m <= M; ++m)
                h.push_back(g.sample([&](double x) { return src(x, static_cast<double>(m) * tau); }));
            const auto z = parabolic_solve(g, g.sample(z0), h, tau, M);
            ratio = std::max(ratio, parabolic_stability(g, h, z, tau).ratio());
        }
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.detail << "tau slope " << num(st) << ", dx slope " << num(sx) << ", stability ratio " << num(ratio) << ", "
             << num(seconds) << " s";
    o.require(st >= 0.8 && st <= 1.3, "tau slope in [0.8,1.3]");
    o.require(sx >= 1.7 && sx <= 2.3, "dx slope in [1.7,2.3]");
    o.require(ratio <= 10.0, "stability ratio <= 10");
    o.require(seconds < 10.0, "runtime < 10 s");
}

void criterion3(Outcome& o) {
    const auto start = std::chrono::steady_clock::now();
    const MmsTable t = mms_verify();
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.detail << "tau slopes y " << num(t.tau_slope_y) << " u " << num(t.tau_slope_u) << ", dx slopes y "
             << num(t.space_slope_y) << " u " << num(t.space_slope_u) << ", " << num(seconds) << " s";
    o.require(t.passed(), "slopes in [0.8,1.3] and [1.7,2.3]");
    o.require(seconds < 60.0, "runtime < 60 s");
}

struct Sweeps {
    RateReport smooth, obstacle;
    double smooth_seconds = 0.0;
};

Sweeps run_sweeps() {
    Sweeps s;
    const auto start = std::chrono::steady_clock::now();
    s.smooth = rate_study(find_scenario("smooth"), default_alphas(), workers());
    s.smooth_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    s.obstacle = rate_study(find_scenario("obstacle"), default_alphas(), workers());
    return s;
}

void criterion4(Outcome& o, const Sweeps& s) {
    const double slope = s.smooth.at(kLinearEstimate).fit.slope;
    o.detail << "smooth linear_estimate slope " << num(slope) << ", " << num(s.smooth_seconds) << " s";
    o.require(slope >= 0.9 && slope <= 1.2, "slope in [0.9,1.2]");
    o.require(s.smooth_seconds < 300.0, "runtime < 5 min");
}

void criterion5(Outcome& o, const Sweeps& s) {
    const double slope = s.smooth.at(kStrongEstimate).fit.slope;
    o.detail << "smooth strong_estimate slope " << num(slope);
    o.require(slope >= 0.45, "slope >= 0.45");
}

void criterion6(Outcome& o, const Sweeps& s) {
    const double slope = s.obstacle.at(kFirstEstimate).fit.slope;
    o.detail << "obstacle first_estimate slope " << num(slope);
    o.require(slope >= 0.45, "slope >= 0.45");
}

void criterion7(Outcome& o) {
    for (const char* name : {"smooth", "obstacle", "logarithmic"}) {
        const auto bounds = energy_sweep(find_scenario(name), default_alphas(), workers());
        double worst = 0.0;
        std::string which;
        for (const auto& [key, value] : bounds.front().terminal) {
            (void)value;
            const double r = spread_ratio(bounds, key);
            if (r > worst) {
                worst = r;
                which = key;
            }
        }
        o.detail << name << " max spread " << num(worst) << " (" << which << ") ";
        o.require(worst <= 2.0, std::string(name) + " spread <= 2");
    }
}

void criterion8(Outcome& o) {
    double identity = 0.0, drift = 0.0, stationary = 0.0, containment = 0.0;
    for (const char* name : {"smooth", "obstacle", "logarithmic"}) {
        const Scenario s = find_scenario(name);
        const ProblemData d = s.problem(default_alphas().front());
        const SpaceGrid g = s.grid();
        const Trajectory t = simulate(d, g, s.tau, s.steps(), s.solver_options());
        const auto phys = reconstruct_physical(t);
        Field fm(g.size());
        double gained = 0.0;
        const double mean0 = mean(g, t.v[0]);
        for (std::size_t m = 0; m <= t.steps(); ++m) {
            const Field& e = phys[m].e;
            const Field sum = phys[m].theta + t.u[m];
            identity = std::max(identity, (sum - e).max_abs() / std::max(1.0, e.max_abs()));
            if (m > 0) {
                d.f(t.time(m), g, fm.span());
                gained += s.tau * mean(g, fm);
            }
            drift = std::max(drift, std::abs(mean(g, t.v[m]) - mean0 - gained) / std::max(1.0, std::abs(mean0)));
        }
    }
    {
        Scenario s = find_scenario("stationary");
        s.final_time = 1000 * s.tau;
        const ProblemData d = s.problem(0.5);
        const Trajectory t = simulate(d, s.grid(), s.tau, s.steps(), s.solver_options());
        for (std::size_t m = 0; m <= t.steps(); ++m)
            for (auto member : {&Trajectory::y, &Trajectory::v, &Trajectory::u})
                stationary = std::max(stationary, ((t.*member)[m] - (t.*member)[0]).max_abs());
    }
    std::size_t runs = 0;
    for (const char* name : {"obstacle", "obstacle_active"}) {
        const Scenario s = find_scenario(name);
        auto alphas = default_alphas();
        alphas.push_back(0.0);
        for (double a : alphas) {
            const Trajectory t = simulate(s.problem(a), s.grid(), s.tau, s.steps(), s.solver_options());
            double dist = 0.0, xi = 0.0;
            for (std::size_t m = 0; m <= t.steps(); ++m) {
                for (double u : t.u[m]) dist = std::max({dist, -1.0 - u, u - 1.0});
                xi = std::max(xi, t.xi[m].max_abs());
            }
            containment = std::max(containment, dist - (t.yosida_epsilon * xi * (1.0 + 1e-12) + 1e-14));
            ++runs;
        }
    }
    o.detail << "e = theta + u rel " << num(identity) << ", enthalpy drift " << num(drift) << ", stationary deviation "
             << num(stationary) << " over 1000 steps, containment excess " << num(std::max(containment, 0.0)) << " on "
             << runs << " obstacle runs";
    o.require(identity <= 1e-14, "e = theta + u");
    o.require(drift <= 1e-10, "mean enthalpy conservation");
    o.require(stationary <= 1e-10, "stationary fixed point");
    o.require(containment <= 0.0, "dist(u, [-1,1]) <= eps max|xi|");
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void criterion9(Outcome& o) {
    const fs::path root = fs::temp_directory_path() / "gn3_acceptance";
    fs::remove_all(root);
    const std::vector<std::pair<std::string, std::string>> runs{
        {"trajectory.csv", "command = simulate\nscenario = obstacle_active\nN = 33\ntau = 0.01\nT = 0.5\nalpha = 0.25\n"},
        {"errors.csv", "command = sweep\nscenario = logarithmic\nN = 33\ntau = 0.01\nT = 0.5\n"},
        {"rates.csv", "command = rates\nscenario = smooth\nN = 33\ntau = 0.01\nT = 0.5\n"},
        {"mms.csv", "command = mms\nscenario = smooth\nmms.taus = 0.02, 0.01, 0.005\nmms.nodes = 9, 17, 33\n"
                    "mms.space_tau = 0.001\nT = 1\n"},
        {"energy.csv", "command = energy\nscenario = obstacle\nN = 33\ntau = 0.01\nT = 0.5\nalpha = 0.5\n"},
    };
    std::size_t identical = 0, round_trips = 0;
    for (const auto& [file, text] : runs) {
        const RunConfig c = parse_config(text);
        if (parse_config(render(c)) == c) ++round_trips;
        std::string first;
        bool same = true;
        for (unsigned w : {1u, 3u}) {
            const fs::path dir = root / (file + std::to_string(w));
            std::ostringstream out, err;
            if (run(c, {false, dir.string(), w}, out, err) != 0) same = false;
            const std::string body = slurp(dir / file);
            if (w == 1) first = body;
            else same = same && !body.empty() && body == first;
        }
        if (same) ++identical;
    }
    std::ostringstream out, err;
    const int ok = run(parse_config("command = simulate\nscenario = stationary\nN = 9\nM = 10\n"),
                       {true, (root / "ok").string(), std::nullopt}, out, err);
    const int check = run(parse_config("command = rates\nscenario = smooth\nT = 1\nalphas = 1, 0.9, 0.8\nN = 33\ntau = 0.01\n"),
                          {true, (root / "check").string(), std::nullopt}, out, err);
    const char* bad[] = {"gn3", "--bogus"};
    const int usage = main_entry(2, bad, out, err);
    int config = 0;
    try {
        (void)parse_config("command = simulate\nscenario = smooth\nT = 1\nalpha = 1.5\n");
    } catch (const ConfigError&) {
        config = 2;
    }
    const int numerical = run(parse_config("command = simulate\nscenario = obstacle_active\nT = 1\nalpha = 0.1\n"
                                           "scenario.epsilon = 1e-14\ntau = 0.1\nN = 33\n"),
                              {false, (root / "numerical").string(), std::nullopt}, out, err);
    fs::remove_all(root);
    o.detail << identical << "/" << runs.size() << " CSVs byte-identical across runs and worker counts, " << round_trips
             << "/" << runs.size() << " configs round-trip, exit codes " << ok << " " << check << " " << usage << " "
             << config << " " << numerical;
    o.require(identical == runs.size(), "byte-identical CSVs");
    o.require(round_trips == runs.size(), "config round-trip");
    o.require(ok == 0 && check == 1 && usage == 2 && config == 2 && numerical == 3, "exit codes 0 1 2 2 3");
}

bool report(int n, const std::function<void(Outcome&)>& body) {
    Outcome o;
    try {
        body(o);
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail << " [exception: " << e.what() << "]";
    }
    std::cout << "criterion " << n << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail.str() << std::endl;
    return o.pass;
}

}  // namespace

int main() {
    bool all = true;
    all &= report(1, criterion1);
    all &= report(2, criterion2);
    all &= report(3, criterion3);
    Sweeps sweeps;
    bool swept = true;
    try {
        sweeps = run_sweeps();
    } catch (const std::exception& e) {
        std::cout << "sweep failed: " << e.what() << "\n";
        swept = false;
    }
    auto needs_sweep = [&](auto fn) {
        return [&, fn](Outcome& o) {
            if (!swept) throw std::runtime_error("sweep unavailable");
            fn(o, sweeps);
        };
    };
    all &= report(4, needs_sweep(criterion4));
    all &= report(5, needs_sweep(criterion5));
    all &= report(6, needs_sweep(criterion6));
    all &= report(7, criterion7);
    all &= report(8, criterion8);
    all &= report(9, criterion9);
    return all ? 0 : 1;
}
