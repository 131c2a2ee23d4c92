#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sclt/checks.hpp"
#include "sclt/cltpred.hpp"
#include "sclt/harness.hpp"
#include "sclt/mde.hpp"
#include "sclt/testfn.hpp"

namespace py = pybind11;
using namespace sclt;

namespace {

// JSON crosses the boundary as text; the Python side decodes it.
std::string run_experiment(const std::string& config_text) {
    const ExperimentConfig c = ExperimentConfig::from_json(nlohmann::json::parse(config_text));
    c.validate();
    switch (c.experiment) {
        case Experiment::clt: return run_clt(c).to_json().dump();
        case Experiment::universality: return run_universality(c).to_json().dump();
        case Experiment::independence: return run_independence(c).to_json().dump();
        case Experiment::dbm_coupling: return run_dbm_coupling(c).to_json().dump();
        case Experiment::girko_check: return run_girko_check(c).to_json().dump();
        case Experiment::edelman: return run_edelman(c).to_json().dump();
        case Experiment::overlaps: return run_overlaps(c).to_json().dump();
    }
    return "{}";
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Spectral CLT for i.i.d. matrices: MDE solver, CLT predictions, samplers";

    py::register_exception<Error>(m, "SpectraError", PyExc_RuntimeError);

    py::class_<MdeSolution>(m, "MdeSolution")
        .def_readonly("z", &MdeSolution::z)
        .def_readonly("w", &MdeSolution::w)
        .def_readonly("m", &MdeSolution::m)
        .def_readonly("u", &MdeSolution::u)
        .def_readonly("rho", &MdeSolution::rho)
        .def("residual", &MdeSolution::residual)
        .def("__repr__", [](const MdeSolution& s) {
            return "MdeSolution(m=" + format_complex(s.m) + ", u=" + format_complex(s.u) + ")";
        });

    m.def("solve_m", &solve_m, py::arg("z"), py::arg("w"));
    m.def("density", &density, py::arg("z"), py::arg("E"));
    m.def("quantiles", [](cplx z, int n) { return quantiles(z, n).gamma_pos; }, py::arg("z"), py::arg("n"),
          "Positive quantiles gamma_1..gamma_n of the Hermitized density.");

    m.def(
        "predict",
        [](const std::string& f, double kappa4, int n) { return predict(parse_test_function(f), kappa4, n).to_json().dump(); },
        py::arg("f"), py::arg("kappa4") = 0.0, py::arg("n") = 1);
    m.def(
        "variance", [](const std::string& f, double kappa4) { return variance_V(parse_test_function(f), kappa4); },
        py::arg("f"), py::arg("kappa4") = 0.0);
    m.def("edelman_density", &edelman_density, py::arg("z"), py::arg("n"));

    m.def(
        "sample",
        [](int n, std::uint64_t seed, std::int64_t trial, const std::string& law, bool complex_entries) {
            EnsembleSpec s;
            s.n = n;
            s.seed = seed;
            s.law = law_from_name(law);
            s.symmetry = complex_entries ? Symmetry::complex : Symmetry::real;
            return sample_iid(s, trial).data;
        },
        py::arg("n"), py::arg("seed"), py::arg("trial") = 0, py::arg("law") = "gaussian", py::arg("complex_entries") = false);
    m.def("eigenvalues", py::overload_cast<const MatrixXcd&>(&nonhermitian_eigenvalues), py::arg("X"));
    m.def(
        "linear_statistic",
        [](const MatrixXcd& X, const std::string& f) {
            const TestFunction tf = parse_test_function(f);
            const VectorXcd ev = nonhermitian_eigenvalues(X);
            cplx acc = 0.0;
            for (Eigen::Index i = 0; i < ev.size(); ++i) acc += tf(ev(i));
            return acc;
        },
        py::arg("X"), py::arg("f"));

    m.def("run_experiment", &run_experiment, py::arg("config_json"), py::call_guard<py::gil_scoped_release>());
    m.def("selftest", [] {
        py::list out;
        for (const auto& r : run_selftest())
            out.append(py::dict(py::arg("name") = r.name, py::arg("passed") = r.passed, py::arg("measured") = r.measured,
                                py::arg("tolerance") = r.tolerance));
        return out;
    });
}
