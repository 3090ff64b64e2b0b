#include "gn3/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

namespace gn3 {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheck = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

double parse_double(const std::string& key, const std::string& value, int line) {
    const std::string v = trim(value);
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(d))
        throw ConfigError(key + ": expected a real number, got '" + value + "'", key, line);
    return d;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& value, int line) {
    const std::string v = trim(value);
    if (v.empty() || !std::all_of(v.begin(), v.end(), [](unsigned char c) { return std::isdigit(c); }))
        throw ConfigError(key + ": expected a nonnegative integer, got '" + value + "'", key, line);
    return std::stoull(v);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

Command parse_command(const std::string& key, const std::string& value, int line) {
    const std::string v = trim(value);
    if (v == "simulate") return Command::Simulate;
    if (v == "sweep") return Command::Sweep;
    if (v == "rates") return Command::Rates;
    if (v == "mms") return Command::Mms;
    if (v == "energy") return Command::Energy;
    throw ConfigError(key + ": unknown command '" + v + "' (simulate, sweep, rates, mms, energy)", key, line);
}

template <class T>
std::string join(const std::vector<T>& values) {
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) s += ", ";
        if constexpr (std::is_same_v<T, double>) {
            s += fmt(values[i]);
        } else if constexpr (std::is_same_v<T, std::string>) {
            s += values[i];
        } else {
            s += std::to_string(values[i]);
        }
    }
    return s;
}

struct Entry {
    std::string value;
    int line;  // 0 for environment entries
};

void assign(RunConfig& c, const std::string& key, const Entry& e, bool& have_command, bool& have_scenario) {
    const std::string& v = e.value;
    const int line = e.line;
    auto& o = c.overrides;
    if (key == "command") {
        c.command = parse_command(key, v, line);
        have_command = true;
    } else if (key == "scenario") {
        c.scenario = trim(v);
        have_scenario = !c.scenario.empty();
    } else if (key == "N") {
        c.n_nodes = parse_unsigned(key, v, line);
    } else if (key == "tau") {
        c.tau = parse_double(key, v, line);
    } else if (key == "M") {
        c.steps = parse_unsigned(key, v, line);
    } else if (key == "T") {
        c.final_time = parse_double(key, v, line);
    } else if (key == "alpha") {
        c.alpha = parse_double(key, v, line);
    } else if (key == "alphas") {
        c.alphas.clear();
        for (const auto& item : split_list(v)) c.alphas.push_back(parse_double(key, item, line));
    } else if (key == "norms") {
        c.norms = split_list(v);
    } else if (key == "output") {
        c.output = trim(v);
    } else if (key == "workers") {
        c.workers = static_cast<unsigned>(parse_unsigned(key, v, line));
    } else if (key == "seed") {
        c.seed = parse_unsigned(key, v, line);
    } else if (key == "stride") {
        c.stride = parse_unsigned(key, v, line);
    } else if (key == "scenario.graph") {
        o.graph = trim(v);
    } else if (key == "scenario.beta") {
        o.beta = parse_double(key, v, line);
    } else if (key == "scenario.rate") {
        o.rate = parse_double(key, v, line);
    } else if (key == "scenario.kappa") {
        o.kappa = parse_double(key, v, line);
    } else if (key == "scenario.kappa0") {
        o.kappa0 = parse_double(key, v, line);
    } else if (key == "scenario.kappa1") {
        o.kappa1 = parse_double(key, v, line);
    } else if (key == "scenario.lo") {
        o.lo = parse_double(key, v, line);
    } else if (key == "scenario.hi") {
        o.hi = parse_double(key, v, line);
    } else if (key == "scenario.length") {
        o.length = parse_double(key, v, line);
    } else if (key == "scenario.epsilon") {
        o.epsilon = parse_double(key, v, line);
    } else if (key == "mms.taus") {
        c.mms_taus.clear();
        for (const auto& item : split_list(v)) c.mms_taus.push_back(parse_double(key, item, line));
    } else if (key == "mms.nodes") {
        c.mms_nodes.clear();
        for (const auto& item : split_list(v)) c.mms_nodes.push_back(parse_unsigned(key, item, line));
    } else if (key == "mms.space_tau") {
        c.mms_space_tau = parse_double(key, v, line);
    } else if (key == "mms.alpha") {
        c.mms_alpha = parse_double(key, v, line);
    } else {
        std::ostringstream os;
        os << "unknown key '" << key << "'";
        if (line > 0) os << " on line " << line;
        throw ConfigError(os.str(), key, line);
    }
}

void validate(const RunConfig& c, const std::map<std::string, Entry>& entries) {
    auto line_of = [&](const std::string& k) {
        auto it = entries.find(k);
        return it == entries.end() ? 0 : it->second.line;
    };
    if (c.n_nodes < 3) throw ConfigError("N: need at least 3 grid nodes", "N", line_of("N"));
    if (!(c.tau > 0.0)) throw ConfigError("tau: must be positive", "tau", line_of("tau"));
    if (c.command != Command::Mms) {
        if (!c.steps && !c.final_time)
            throw ConfigError("missing mandatory key: one of M or T is required", "M", 0);
        if (c.final_time && !(*c.final_time > 0.0))
            throw ConfigError("T: must be positive", "T", line_of("T"));
        if (c.steps && c.final_time) {
            const double mt = static_cast<double>(*c.steps) * c.tau;
            if (std::abs(mt - *c.final_time) > 1e-12 * std::abs(*c.final_time))
                throw ConfigError("M and T are inconsistent: M * tau = " + fmt(mt) + " but T = " + fmt(*c.final_time),
                                  "M,T", std::max(line_of("M"), line_of("T")));
        }
        if (!c.steps) {
            const double m = *c.final_time / c.tau;
            if (std::abs(std::round(m) * c.tau - *c.final_time) > 1e-12 * *c.final_time)
                throw ConfigError("T: not an integer multiple of tau", "T", line_of("T"));
        }
    }
    if (!(c.alpha >= 0.0 && c.alpha <= 1.0))
        throw ConfigError("alpha = " + fmt(c.alpha) + " violates the bound 0 < alpha <= 1 (alpha = 0 selects the limit problem)",
                          "alpha", line_of("alpha"));
    if (c.command == Command::Sweep || c.command == Command::Rates) {
        if (c.alphas.size() < 3) throw ConfigError("alphas: need >= 3 sweep points", "alphas", line_of("alphas"));
    }
    for (std::size_t i = 0; i < c.alphas.size(); ++i) {
        if (!(c.alphas[i] > 0.0 && c.alphas[i] <= 1.0))
            throw ConfigError("alphas: every value must satisfy 0 < alpha <= 1", "alphas", line_of("alphas"));
        if (i > 0 && !(c.alphas[i] < c.alphas[i - 1]))
            throw ConfigError("alphas: values must be strictly descending", "alphas", line_of("alphas"));
    }
    if (c.workers == 0) throw ConfigError("workers: must be at least 1", "workers", line_of("workers"));
    if (c.stride == 0) throw ConfigError("stride: must be at least 1", "stride", line_of("stride"));
    if (c.command == Command::Mms) {
        if (c.mms_taus.size() < 3) throw ConfigError("mms.taus: need >= 3 refinement levels", "mms.taus", line_of("mms.taus"));
        if (c.mms_nodes.size() < 3)
            throw ConfigError("mms.nodes: need >= 3 refinement levels", "mms.nodes", line_of("mms.nodes"));
        if (!(c.mms_alpha >= 0.0 && c.mms_alpha <= 1.0))
            throw ConfigError("mms.alpha: violates 0 <= alpha <= 1", "mms.alpha", line_of("mms.alpha"));
    }
    try {
        (void)find_scenario(c.scenario);
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("scenario: ") + e.what(), "scenario", line_of("scenario"));
    }
    if (c.overrides.graph) {
        const auto& g = *c.overrides.graph;
        if (g != "double_obstacle" && g != "logarithmic" && g != "double_well")
            throw ConfigError("scenario.graph: expected double_obstacle, logarithmic or double_well", "scenario.graph",
                              line_of("scenario.graph"));
    }
    try {
        (void)c.build_scenario();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("scenario parameters: ") + e.what(), "scenario", line_of("scenario"));
    }
}

// ---------------------------------------------------------------- commands

std::filesystem::path out_dir(const RunConfig& c, const RunOptions& o) {
    std::filesystem::path p = o.out_dir.value_or(c.output);
    std::filesystem::create_directories(p);
    return p;
}

std::ofstream open_csv(const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw InvalidArgument("cannot open " + path.string() + " for writing");
    f << std::setprecision(17);
    return f;
}

bool norm_selected(const RunConfig& c, const std::string& name) {
    return std::find(c.norms.begin(), c.norms.end(), "all") != c.norms.end() ||
           std::find(c.norms.begin(), c.norms.end(), name) != c.norms.end();
}

void report_check(std::ostream& out, bool& ok, bool pass, const std::string& text) {
    out << "check " << text << ": " << (pass ? "pass" : "FAIL") << "\n";
    ok = ok && pass;
}

int cmd_simulate(const RunConfig& c, const RunOptions& o, std::ostream& out) {
    const Scenario sc = c.build_scenario();
    const ProblemData data = sc.problem(c.alpha);
    const SpaceGrid grid = sc.grid();
    const Trajectory traj = simulate(data, grid, sc.tau, sc.steps(), sc.solver_options());
    const auto phys = reconstruct_physical(traj);

    auto f = open_csv(out_dir(c, o) / "trajectory.csv");
    f << "t,node_x,y,v,u,xi,w,theta\n";
    for (std::size_t m = 0; m <= traj.steps(); m += c.stride) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            f << traj.time(m) << ',' << grid.nodes()[i] << ',' << traj.y[m][i] << ',' << traj.v[m][i] << ','
              << traj.u[m][i] << ',' << traj.xi[m][i] << ',' << phys[m].w[i] << ',' << phys[m].theta[i] << '\n';
        }
    }
    out << "simulate " << sc.name << ": alpha=" << fmt(c.alpha) << " N=" << grid.size() << " tau=" << fmt(sc.tau)
        << " M=" << traj.steps() << "\n";
    if (!o.check) return kExitOk;

    bool ok = true;
    double identity = 0.0;
    double drift = 0.0;
    double containment = 0.0;
    double xi_max = 0.0;
    double source_sum = 0.0;
    Field fm(grid.size());
    const double mean0 = mean(grid, traj.v[0]);
    for (std::size_t m = 0; m <= traj.steps(); ++m) {
        for (std::size_t i = 0; i < grid.size(); ++i)
            identity = std::max(identity, std::abs(phys[m].e[i] - phys[m].theta[i] - traj.u[m][i]) /
                                              (1.0 + std::abs(phys[m].e[i])));
        if (m > 0) {
            data.f(traj.time(m), grid, fm.span());
            source_sum += sc.tau * mean(grid, fm);
        }
        drift = std::max(drift, std::abs(mean(grid, traj.v[m]) - mean0 - source_sum));
        xi_max = std::max(xi_max, traj.xi[m].max_abs());
        if (const auto* ob = std::get_if<DoubleObstacle>(&data.graph.kind())) {
            for (double u : traj.u[m]) containment = std::max(containment, std::max(ob->lo - u, u - ob->hi));
        }
    }
    report_check(out, ok, identity <= 1e-14, "e = theta + u, relative deviation " + fmt(identity) + " <= 1e-14");
    report_check(out, ok, drift <= 1e-10 * std::max(1.0, std::abs(mean0)),
                 "mean enthalpy balance drift=" + fmt(drift) + " <= 1e-10");
    if (std::holds_alternative<DoubleObstacle>(data.graph.kind()))
        report_check(out, ok, containment <= traj.yosida_epsilon * xi_max + 1e-14,
                     "obstacle distance=" + fmt(std::max(0.0, containment)) + " <= eps*max|xi|=" +
                         fmt(traj.yosida_epsilon * xi_max));
    return ok ? kExitOk : kExitCheck;
}

int cmd_sweep(const RunConfig& c, const RunOptions& o, std::ostream& out) {
    const Scenario sc = c.build_scenario();
    const auto reports = sweep(sc, c.alphas, o.workers.value_or(c.workers));
    auto f = open_csv(out_dir(c, o) / "errors.csv");
    f << "alpha,norm_kind,error\n";
    for (const auto& r : reports) {
        for (const auto& g : norm_group_names())
            if (norm_selected(c, g)) f << r.alpha << ',' << g << ',' << r.group(g) << '\n';
        for (const auto& [k, v] : r.errors)
            if (norm_selected(c, k)) f << r.alpha << ',' << k << ',' << v << '\n';
    }
    out << "sweep " << sc.name << ": " << reports.size() << " alphas against the alpha=0 reference\n";
    if (!o.check) return kExitOk;
    bool ok = true;
    for (const auto& g : norm_group_names()) {
        bool monotone = true;
        for (std::size_t i = 1; i < reports.size(); ++i)
            monotone = monotone && reports[i].group(g) <= 1.05 * reports[i - 1].group(g);
        report_check(out, ok, monotone, "monotone decay of " + g + " along the sweep (5% slack)");
    }
    return ok ? kExitOk : kExitCheck;
}

int cmd_rates(const RunConfig& c, const RunOptions& o, std::ostream& out) {
    const Scenario sc = c.build_scenario();
    const RateReport report = rate_study(sc, c.alphas, o.workers.value_or(c.workers));
    auto f = open_csv(out_dir(c, o) / "rates.csv");
    f << "norm_kind,slope,residual,n_points\n";
    for (const auto& e : report.entries)
        if (norm_selected(c, e.norm_kind)) f << e.norm_kind << ',' << e.fit.slope << ',' << e.fit.residual << ',' << e.fit.n_used << '\n';
    out << "rates " << sc.name << ": hypotheses satisfied:";
    for (const auto& h : report.hypotheses) out << ' ' << h;
    out << "\n";
    for (const auto& g : norm_group_names())
        out << "slope(" << g << " group)=" << fmt(report.at(g).fit.slope) << "\n";
    if (!o.check) return kExitOk;
    bool ok = true;
    auto has = [&](const char* h) {
        return std::find(report.hypotheses.begin(), report.hypotheses.end(), h) != report.hypotheses.end();
    };
    if (has(kLinearEstimate)) {
        const double s = report.at(kLinearEstimate).fit.slope;
        report_check(out, ok, s >= 0.9 && s <= 1.2, "slope(linear_estimate group)=" + fmt(s) + " in [0.9,1.2]");
    }
    if (has(kStrongEstimate)) {
        const double s = report.at(kStrongEstimate).fit.slope;
        report_check(out, ok, s >= 0.45, "slope(strong_estimate group)=" + fmt(s) + " >= 0.45");
    }
    if (has(kFirstEstimate)) {
        const double s = report.at(kFirstEstimate).fit.slope;
        report_check(out, ok, s >= 0.45, "slope(first_estimate group)=" + fmt(s) + " >= 0.45");
    }
    return ok ? kExitOk : kExitCheck;
}

int cmd_mms(const RunConfig& c, const RunOptions& o, std::ostream& out) {
    const MmsTable t = mms_verify(c.mms_options());
    auto f = open_csv(out_dir(c, o) / "mms.csv");
    f << "study,tau,N,error_y,error_u\n";
    for (const auto& r : t.rows) f << r.study << ',' << r.tau << ',' << r.n_nodes << ',' << r.error_y << ',' << r.error_u << '\n';
    out << "mms: tau slopes y=" << fmt(t.tau_slope_y) << " u=" << fmt(t.tau_slope_u) << ", space slopes y="
        << fmt(t.space_slope_y) << " u=" << fmt(t.space_slope_u) << "\n";
    if (!o.check) return kExitOk;
    bool ok = true;
    auto in = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
    report_check(out, ok, in(t.tau_slope_y, 0.8, 1.3) && in(t.tau_slope_u, 0.8, 1.3), "tau slopes in [0.8,1.3]");
    report_check(out, ok, in(t.space_slope_y, 1.7, 2.3) && in(t.space_slope_u, 1.7, 2.3), "space slopes in [1.7,2.3]");
    return ok ? kExitOk : kExitCheck;
}

int cmd_energy(const RunConfig& c, const RunOptions& o, std::ostream& out) {
    const Scenario sc = c.build_scenario();
    const ProblemData data = sc.problem(c.alpha);
    const Trajectory traj = simulate(data, sc.grid(), sc.tau, sc.steps(), sc.solver_options());
    const EnergySeries s = energy_monitor(traj, data);
    auto f = open_csv(out_dir(c, o) / "energy.csv");
    f << "t,v_H,y_V,alpha_grad_v,u_H,u_V_sq,phi,xi_sq,free_energy\n";
    for (std::size_t m = 0; m < s.t.size(); ++m)
        f << s.t[m] << ',' << s.v_H[m] << ',' << s.y_V[m] << ',' << s.alpha_grad_v[m] << ',' << s.u_H[m] << ','
          << s.u_V_sq[m] << ',' << s.phi[m] << ',' << s.xi_sq[m] << ',' << s.free_energy[m] << '\n';
    out << "energy " << sc.name << ": first_energy=" << fmt(s.first_energy) << " second_energy=" << fmt(s.second_energy)
        << "\n";
    if (!o.check) return kExitOk;
    bool ok = true;
    const bool nonneg = std::all_of(s.phi.begin(), s.phi.end(), [](double p) { return p >= 0.0; });
    const bool finite = std::all_of(s.free_energy.begin(), s.free_energy.end(), [](double p) { return std::isfinite(p); });
    report_check(out, ok, nonneg, "int phi_eps(u) >= 0 at every step");
    report_check(out, ok, finite, "free energy finite at every step");
    return ok ? kExitOk : kExitCheck;
}

}  // namespace

std::string to_string(Command c) {
    switch (c) {
        case Command::Simulate: return "simulate";
        case Command::Sweep: return "sweep";
        case Command::Rates: return "rates";
        case Command::Mms: return "mms";
        case Command::Energy: return "energy";
    }
    return "?";
}

ConfigError::ConfigError(const std::string& message, std::string key, int line)
    : Error(line > 0 ? "config line " + std::to_string(line) + ": " + message : "config: " + message),
      key_(std::move(key)),
      line_(line) {}

std::size_t RunConfig::resolved_steps() const {
    if (steps) return *steps;
    if (final_time) return static_cast<std::size_t>(std::llround(*final_time / tau));
    return 0;
}

Scenario RunConfig::build_scenario() const {
    Scenario s = find_scenario(scenario);
    const auto& o = overrides;
    if (o.graph || o.kappa || o.kappa0 || o.kappa1 || o.lo || o.hi) {
        const std::string kind = o.graph.value_or(s.graph.name());
        if (kind == "double_obstacle") {
            const auto* cur = std::get_if<DoubleObstacle>(&s.graph.kind());
            s.graph = GraphSpec::double_obstacle(o.lo.value_or(cur ? cur->lo : -1.0), o.hi.value_or(cur ? cur->hi : 1.0));
        } else if (kind == "logarithmic") {
            const auto* cur = std::get_if<Logarithmic>(&s.graph.kind());
            s.graph = GraphSpec::logarithmic(o.kappa0.value_or(cur ? cur->kappa0 : 2.0),
                                             o.kappa1.value_or(cur ? cur->kappa1 : 1.0));
        } else {
            const auto* cur = std::get_if<DoubleWell>(&s.graph.kind());
            s.graph = GraphSpec::double_well(o.kappa.value_or(cur ? cur->kappa : 1.0));
        }
        s.coupling = natural_coupling(s.graph);
    }
    if (o.beta) s.beta = *o.beta;
    if (o.rate) s.schedule_rate = *o.rate;
    if (o.length) s.length = *o.length;
    if (o.epsilon) s.yosida_epsilon = *o.epsilon;
    s.n_nodes = n_nodes;
    s.tau = tau;
    s.final_time = static_cast<double>(resolved_steps()) * tau;
    return s;
}

MmsOptions RunConfig::mms_options() const {
    MmsOptions m;
    m.taus = mms_taus;
    m.node_counts = mms_nodes;
    m.space_study_tau = mms_space_tau;
    m.alpha = mms_alpha;
    m.tau_study_nodes = n_nodes;
    if (final_time) m.final_time = *final_time;
    if (overrides.beta) m.beta = *overrides.beta;
    if (overrides.kappa) m.kappa = *overrides.kappa;
    return m;
}

std::vector<std::string> config_keys() {
    return {"command",        "scenario",       "N",
            "tau",            "M",              "T",
            "alpha",          "alphas",         "norms",
            "output",         "workers",        "seed",
            "stride",         "scenario.graph", "scenario.beta",
            "scenario.rate",  "scenario.kappa", "scenario.kappa0",
            "scenario.kappa1", "scenario.lo",   "scenario.hi",
            "scenario.length", "scenario.epsilon", "mms.taus",
            "mms.nodes",      "mms.space_tau",  "mms.alpha"};
}

std::string env_name(const std::string& key) {
    std::string s = "GN3_";
    for (char ch : key) s += ch == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    return s;
}

RunConfig parse_config(const std::string& text, const EnvLookup& env) {
    std::map<std::string, Entry> entries;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected 'key = value', got '" + line + "'", "", line_no);
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("empty key", "", line_no);
        entries[key] = Entry{trim(line.substr(eq + 1)), line_no};
    }
    if (env) {
        for (const auto& key : config_keys())
            if (auto v = env(env_name(key))) entries[key] = Entry{*v, 0};
    }

    RunConfig c;
    bool have_command = false;
    bool have_scenario = false;
    for (const auto& [key, entry] : entries) assign(c, key, entry, have_command, have_scenario);
    if (!have_command) throw ConfigError("missing mandatory key 'command'", "command");
    if (!have_scenario) throw ConfigError("missing mandatory key 'scenario'", "scenario");
    validate(c, entries);
    return c;
}

std::string render(const RunConfig& c) {
    std::ostringstream os;
    os << "command = " << to_string(c.command) << "\n";
    os << "scenario = " << c.scenario << "\n";
    os << "N = " << c.n_nodes << "\n";
    os << "tau = " << fmt(c.tau) << "\n";
    if (c.steps) os << "M = " << *c.steps << "\n";
    if (c.final_time) os << "T = " << fmt(*c.final_time) << "\n";
    os << "alpha = " << fmt(c.alpha) << "\n";
    os << "alphas = " << join(c.alphas) << "\n";
    os << "norms = " << join(c.norms) << "\n";
    os << "output = " << c.output << "\n";
    os << "workers = " << c.workers << "\n";
    os << "seed = " << c.seed << "\n";
    os << "stride = " << c.stride << "\n";
    const auto& o = c.overrides;
    if (o.graph) os << "scenario.graph = " << *o.graph << "\n";
    auto opt = [&](const char* key, const std::optional<double>& v) {
        if (v) os << key << " = " << fmt(*v) << "\n";
    };
    opt("scenario.beta", o.beta);
    opt("scenario.rate", o.rate);
    opt("scenario.kappa", o.kappa);
    opt("scenario.kappa0", o.kappa0);
    opt("scenario.kappa1", o.kappa1);
    opt("scenario.lo", o.lo);
    opt("scenario.hi", o.hi);
    opt("scenario.length", o.length);
    opt("scenario.epsilon", o.epsilon);
    os << "mms.taus = " << join(c.mms_taus) << "\n";
    os << "mms.nodes = " << join(c.mms_nodes) << "\n";
    os << "mms.space_tau = " << fmt(c.mms_space_tau) << "\n";
    os << "mms.alpha = " << fmt(c.mms_alpha) << "\n";
    return os.str();
}

int run(const RunConfig& config, const RunOptions& options, std::ostream& out, std::ostream& err) {
    try {
        switch (config.command) {
            case Command::Simulate: return cmd_simulate(config, options, out);
            case Command::Sweep: return cmd_sweep(config, options, out);
            case Command::Rates: return cmd_rates(config, options, out);
            case Command::Mms: return cmd_mms(config, options, out);
            case Command::Energy: return cmd_energy(config, options, out);
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const InvalidArgument& e) {
        err << "error: scenario " << config.scenario << ": " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "numerical failure: scenario " << config.scenario;
        if (config.command == Command::Simulate || config.command == Command::Energy)
            err << ", alpha=" << fmt(config.alpha);
        err << ": " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitUsage;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Phase field system with type III heat conduction: simulation and alpha -> 0 rate studies"};
    std::string command;
    std::string config_path;
    RunOptions options;
    unsigned workers = 0;
    std::string out_dir;
    app.add_option("command", command, "simulate | sweep | rates | mms | energy (overrides the config key)");
    app.add_option("--config", config_path, "Path of the key = value config file");
    app.add_flag("--check", options.check, "Check results against the acceptance thresholds");
    app.add_option("--out", out_dir, "Output directory (overrides the config key)");
    app.add_option("--workers", workers, "Parallel sweep workers (overrides the config key)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return kExitUsage;
    }
    if (!out_dir.empty()) options.out_dir = out_dir;
    if (workers > 0) options.workers = workers;

    std::string text;
    if (!config_path.empty()) {
        std::ifstream f(config_path);
        if (!f) {
            err << "error: cannot read config " << config_path << "\n";
            return kExitUsage;
        }
        std::stringstream ss;
        ss << f.rdbuf();
        text = ss.str();
    }
    if (!command.empty()) text += "\ncommand = " + command + "\n";

    RunConfig config;
    try {
        config = parse_config(text, [](const std::string& name) -> std::optional<std::string> {
            if (const char* v = std::getenv(name.c_str())) return std::string(v);
            return std::nullopt;
        });
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return run(config, options, out, err);
}

}  // namespace gn3
