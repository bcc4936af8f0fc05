#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pinnhs/cli.hpp"
#include "pinnhs/oracle.hpp"
#include "pinnhs/postprocess.hpp"
#include "pinnhs/validation.hpp"

namespace py = pybind11;
using namespace pinnhs;

// Thin bindings over the main operations: tape autodiff, network evaluation,
// the toy closed forms, case parsing, velocity/aggregation arithmetic, and
// the study entry points. Heavy lifting stays in C++.

PYBIND11_MODULE(_pinnhs, m) {
    m.doc() = "Inverse heat-sink solver: PINN training, h inference, coolant velocity";
    m.attr("__version__") = kVersion;

    py::register_exception<Error>(m, "PinnhsError");

    py::class_<Expr>(m, "Expr")
        .def("__add__", [](Expr a, Expr b) { return a + b; })
        .def("__add__", [](Expr a, double c) { return a + c; })
        .def("__radd__", [](Expr a, double c) { return c + a; })
        .def("__sub__", [](Expr a, Expr b) { return a - b; })
        .def("__sub__", [](Expr a, double c) { return a - c; })
        .def("__rsub__", [](Expr a, double c) { return c - a; })
        .def("__mul__", [](Expr a, Expr b) { return a * b; })
        .def("__mul__", [](Expr a, double c) { return a * c; })
        .def("__rmul__", [](Expr a, double c) { return c * a; })
        .def("__truediv__", [](Expr a, Expr b) { return a / b; })
        .def("__truediv__", [](Expr a, double c) { return a / c; })
        .def("__rtruediv__", [](Expr a, double c) { return c / a; })
        .def("__neg__", [](Expr a) { return -a; })
        .def("__pow__", [](Expr a, double c) { return pow(a, c); });

    py::class_<Tape>(m, "Tape")
        .def(py::init<>())
        .def("input", &Tape::input, py::keep_alive<0, 1>())
        .def("constant", &Tape::constant, py::keep_alive<0, 1>())
        .def("set_output", &Tape::set_output)
        .def("size", &Tape::size)
        .def("evaluate", &Tape::evaluate)
        .def("gradient", &Tape::gradient)
        .def("second_derivative", &Tape::second_derivative);

    m.def("tape_exp", [](Expr a) { return exp(a); });
    m.def("tape_log", [](Expr a) { return log(a); });
    m.def("tape_sin", [](Expr a) { return sin(a); });
    m.def("tape_cos", [](Expr a) { return cos(a); });
    m.def("tape_tanh", [](Expr a) { return tanh(a); });

    py::class_<NetworkParams>(m, "NetworkParams")
        .def_readonly("widths", &NetworkParams::widths)
        .def_readonly("theta", &NetworkParams::theta)
        .def_readonly("seed", &NetworkParams::seed);
    m.def("init_network", &init_network);
    m.def("forward", &forward);

    py::class_<ToyPlateProblem>(m, "ToyPlateProblem")
        .def(py::init<>())
        .def_readwrite("w", &ToyPlateProblem::w)
        .def_readwrite("h_height", &ToyPlateProblem::h_height)
        .def_readwrite("k", &ToyPlateProblem::k)
        .def_readwrite("t0_c", &ToyPlateProblem::t0_c)
        .def_readwrite("t_inf_c", &ToyPlateProblem::t_inf_c)
        .def_readwrite("h_true", &ToyPlateProblem::h_true);
    m.def("toy_exact_temperature", &toy_exact_temperature);
    m.def("toy_invert_h", &toy_invert_h);

    py::class_<CaseConfig>(m, "CaseConfig")
        .def_readonly("case_id", &CaseConfig::case_id)
        .def_readonly("power_w", &CaseConfig::power_w)
        .def_readonly("t_in_c", &CaseConfig::t_in_c)
        .def_readonly("t_out_c", &CaseConfig::t_out_c)
        .def_readonly("probes_c", &CaseConfig::probes_c)
        .def_readonly("v_exp_mps", &CaseConfig::v_exp_mps);
    m.def("parse_case_file", &parse_case_file);
    m.def("velocity_from_flow", &velocity_from_flow);

    py::class_<Aggregate>(m, "Aggregate")
        .def_readonly("mean", &Aggregate::mean)
        .def_readonly("std", &Aggregate::std);
    m.def("aggregate", [](const std::vector<double>& v) {
        return aggregate(std::span<const double>(v.data(), v.size()));
    });

    py::class_<RigGeometry>(m, "RigGeometry");
    m.def("default_rig", &default_rig);
    m.def("load_geometry", &load_geometry);

    py::class_<Intro1dSpec>(m, "Intro1dSpec")
        .def(py::init<>())
        .def_readwrite("n_interior", &Intro1dSpec::n_interior)
        .def_readwrite("max_epochs", &Intro1dSpec::max_epochs)
        .def_readwrite("widths", &Intro1dSpec::widths)
        .def_readwrite("lr", &Intro1dSpec::lr)
        .def_readwrite("seed", &Intro1dSpec::seed);
    py::class_<Intro1dResult>(m, "Intro1dResult")
        .def_readonly("mse", &Intro1dResult::mse)
        .def_readonly("epochs_run", &Intro1dResult::epochs_run)
        .def_readonly("final_loss", &Intro1dResult::final_loss);
    m.def("run_intro1d", &run_intro1d, py::call_guard<py::gil_scoped_release>());

    py::class_<RunManifest>(m, "RunManifest")
        .def(py::init<>())
        .def_readwrite("command", &RunManifest::command)
        .def_readwrite("study", &RunManifest::study)
        .def_readwrite("case_path", &RunManifest::case_path)
        .def_readwrite("geometry_path", &RunManifest::geometry_path)
        .def_readwrite("out_dir", &RunManifest::out_dir)
        .def_readwrite("trials", &RunManifest::trials)
        .def_readwrite("seed", &RunManifest::seed)
        .def_readwrite("epochs", &RunManifest::epochs)
        .def_readwrite("schedule", &RunManifest::schedule)
        .def_readwrite("deterministic", &RunManifest::deterministic);
    m.def("run", &run, py::call_guard<py::gil_scoped_release>());
}
