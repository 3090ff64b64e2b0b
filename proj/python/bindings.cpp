#include "gn3/cli.hpp"
#include "gn3/error.hpp"
#include "gn3/experiments.hpp"
#include "gn3/grid.hpp"
#include "gn3/monotone.hpp"
#include "gn3/norms.hpp"
#include "gn3/solver.hpp"

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <optional>
#include <span>
#include <sstream>

namespace py = pybind11;
using namespace gn3;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Field to_field(const Array& a) {
    if (a.ndim() != 1) throw InvalidArgument("expected a one-dimensional array");
    return Field(std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(std::span<const double> v) {
    Array out({static_cast<py::ssize_t>(v.size())}, {static_cast<py::ssize_t>(sizeof(double))});
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

Array to_array(const Field& f) { return to_array(f.span()); }

Array stack(const std::vector<Field>& levels) {
    const std::size_t n = levels.empty() ? 0 : levels.front().size();
    Array out({static_cast<py::ssize_t>(levels.size()), static_cast<py::ssize_t>(n)},
              {static_cast<py::ssize_t>(n * sizeof(double)), static_cast<py::ssize_t>(sizeof(double))});
    auto view = out.mutable_unchecked<2>();
    for (std::size_t m = 0; m < levels.size(); ++m)
        for (std::size_t i = 0; i < n; ++i) view(m, i) = levels[m][i];
    return out;
}

SpaceNorm space_norm(const std::string& name) {
    if (name == "H") return SpaceNorm::H;
    if (name == "V") return SpaceNorm::V;
    if (name == "V'" || name == "Vdual") return SpaceNorm::Vdual;
    if (name == "W") return SpaceNorm::W;
    throw InvalidArgument("unknown space norm " + name);
}

py::dict trajectory_dict(const Trajectory& t) {
    py::dict d;
    d["x"] = to_array(t.grid.nodes());
    d["tau"] = t.tau;
    d["yosida_epsilon"] = t.yosida_epsilon;
    d["y"] = stack(t.y);
    d["v"] = stack(t.v);
    d["u"] = stack(t.u);
    d["xi"] = stack(t.xi);
    d["conv"] = stack(t.conv);
    return d;
}

py::dict rate_dict(const RateReport& r) {
    py::dict d;
    for (const auto& e : r.entries) {
        py::dict entry;
        entry["slope"] = e.fit.slope;
        entry["residual"] = e.fit.residual;
        entry["n_points"] = e.fit.n_used;
        entry["points"] = e.points;
        d[py::str(e.norm_kind)] = entry;
    }
    return d;
}

}  // namespace

PYBIND11_MODULE(_gn3, m) {
    m.doc() = "Phase field system with type III heat conduction: solver and alpha -> 0 rate studies";

    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<IncompatibleData>(m, "IncompatibleData", PyExc_ValueError);
    py::register_exception<NumericalFailure>(m, "NumericalFailure", PyExc_ArithmeticError);
    py::register_exception<DegenerateComparison>(m, "DegenerateComparison", PyExc_ArithmeticError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<GraphSpec>(m, "Graph")
        .def_static("double_obstacle", &GraphSpec::double_obstacle, py::arg("lo") = -1.0, py::arg("hi") = 1.0)
        .def_static("logarithmic", &GraphSpec::logarithmic, py::arg("kappa0") = 2.0, py::arg("kappa1") = 1.0)
        .def_static("double_well", &GraphSpec::double_well, py::arg("kappa") = 1.0)
        .def_property_readonly("name", &GraphSpec::name)
        .def_property_readonly("smooth", &GraphSpec::smooth)
        .def("__repr__", [](const GraphSpec& g) { return "Graph." + g.name() + "(...)"; });

    m.def("potential", &potential, py::arg("graph"), py::arg("s"));
    m.def("resolvent", &resolvent, py::arg("graph"), py::arg("eps"), py::arg("s"));
    m.def("yosida", &yosida, py::arg("graph"), py::arg("eps"), py::arg("s"));
    m.def("moreau", &moreau, py::arg("graph"), py::arg("eps"), py::arg("s"));
    m.def("minimal_section", &minimal_section, py::arg("graph"), py::arg("s"));

    py::class_<SpaceGrid>(m, "Grid")
        .def(py::init<double, std::size_t>(), py::arg("length"), py::arg("n_nodes"))
        .def_property_readonly("dx", &SpaceGrid::dx)
        .def_property_readonly("length", &SpaceGrid::length)
        .def("__len__", &SpaceGrid::size)
        .def_property_readonly("x", [](const SpaceGrid& g) { return to_array(g.nodes()); });

    m.def(
        "laplacian",
        [](const SpaceGrid& g, const Array& u) { return to_array(laplacian_neumann(g, to_field(u))); },
        py::arg("grid"), py::arg("u"));
    m.def(
        "solve_helmholtz",
        [](const SpaceGrid& g, double a, double b, const Array& rhs) {
            return to_array(solve_helmholtz(g, a, b, to_field(rhs)));
        },
        py::arg("grid"), py::arg("a"), py::arg("b"), py::arg("rhs"));
    m.def(
        "norm",
        [](const SpaceGrid& g, const Array& u, const std::string& kind) {
            return spatial_norm(g, space_norm(kind), to_field(u));
        },
        py::arg("grid"), py::arg("u"), py::arg("kind") = "H");
    m.def(
        "fit_rate",
        [](const std::vector<std::pair<double, double>>& points) {
            const RateFit f = fit_rate(points);
            return py::make_tuple(f.slope, f.residual);
        },
        py::arg("points"));

    m.def("scenario_names", &scenario_names);
    m.def("default_alphas", &default_alphas);

    m.def(
        "simulate",
        [](const std::string& name, double alpha, std::size_t n_nodes, double tau, double final_time) {
            Scenario s = find_scenario(name);
            if (n_nodes) s.n_nodes = n_nodes;
            if (tau > 0.0) s.tau = tau;
            if (final_time >= 0.0) s.final_time = final_time;
            std::optional<Trajectory> t;
            {
                py::gil_scoped_release release;
                t = simulate(s.problem(alpha), s.grid(), s.tau, s.steps(), s.solver_options());
            }
            return trajectory_dict(*t);
        },
        py::arg("scenario"), py::arg("alpha"), py::arg("n_nodes") = 0, py::arg("tau") = 0.0,
        py::arg("final_time") = -1.0,
        "Run a registry scenario; zero/negative grid arguments keep the scenario defaults.");

    m.def(
        "sweep",
        [](const std::string& name, std::vector<double> alphas, std::size_t n_nodes, double tau, unsigned workers) {
            Scenario s = find_scenario(name);
            if (n_nodes) s.n_nodes = n_nodes;
            if (tau > 0.0) s.tau = tau;
            if (alphas.empty()) alphas = default_alphas();
            std::vector<ErrorReport> reports;
            {
                py::gil_scoped_release release;
                reports = sweep(s, alphas, workers);
            }
            py::list out;
            for (const auto& r : reports) {
                py::dict d;
                d["alpha"] = r.alpha;
                for (const auto& [k, v] : r.errors) d[py::str(k)] = v;
                for (const auto& g : norm_group_names()) d[py::str(g)] = r.group(g);
                out.append(d);
            }
            return out;
        },
        py::arg("scenario"), py::arg("alphas") = std::vector<double>{}, py::arg("n_nodes") = 0, py::arg("tau") = 0.0,
        py::arg("workers") = 1);

    m.def(
        "rate_study",
        [](const std::string& name, std::vector<double> alphas, std::size_t n_nodes, double tau, unsigned workers) {
            Scenario s = find_scenario(name);
            if (n_nodes) s.n_nodes = n_nodes;
            if (tau > 0.0) s.tau = tau;
            if (alphas.empty()) alphas = default_alphas();
            RateReport r;
            {
                py::gil_scoped_release release;
                r = rate_study(s, alphas, workers);
            }
            return rate_dict(r);
        },
        py::arg("scenario"), py::arg("alphas") = std::vector<double>{}, py::arg("n_nodes") = 0, py::arg("tau") = 0.0,
        py::arg("workers") = 1);

    m.def(
        "mms_verify",
        [](std::vector<double> taus, std::vector<std::size_t> nodes, double space_tau, std::size_t tau_study_nodes) {
            MmsOptions o;
            if (!taus.empty()) o.taus = std::move(taus);
            if (!nodes.empty()) o.node_counts = std::move(nodes);
            if (space_tau > 0.0) o.space_study_tau = space_tau;
            if (tau_study_nodes) o.tau_study_nodes = tau_study_nodes;
            MmsTable t;
            {
                py::gil_scoped_release release;
                t = mms_verify(o);
            }
            py::dict d;
            d["tau_slope_y"] = t.tau_slope_y;
            d["tau_slope_u"] = t.tau_slope_u;
            d["space_slope_y"] = t.space_slope_y;
            d["space_slope_u"] = t.space_slope_u;
            d["passed"] = t.passed();
            py::list rows;
            for (const auto& r : t.rows) rows.append(py::make_tuple(r.study, r.tau, r.n_nodes, r.error_y, r.error_u));
            d["rows"] = rows;
            return d;
        },
        py::arg("taus") = std::vector<double>{}, py::arg("nodes") = std::vector<std::size_t>{},
        py::arg("space_tau") = 0.0, py::arg("tau_study_nodes") = 0);

    m.def(
        "parse_config", [](const std::string& text) { return render(parse_config(text)); }, py::arg("text"),
        "Validate a config and return its canonical text.");
    m.def(
        "main",
        [](std::vector<std::string> args) {
            args.insert(args.begin(), "gn3");
            std::vector<const char*> argv;
            for (const auto& a : args) argv.push_back(a.c_str());
            std::ostringstream out, err;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run the command line front end; returns (exit code, stdout, stderr).");
}
