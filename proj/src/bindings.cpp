#include "greencrit/cli.hpp"
#include "greencrit/config.hpp"
#include "greencrit/criteria.hpp"
#include "greencrit/error.hpp"
#include "greencrit/green.hpp"
#include "greencrit/profiles.hpp"
#include "greencrit/solver.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace greencrit;

namespace {

CriterionParams make_params(const std::string& profile, const std::string& measure, const std::string& metric,
                            double r0, std::size_t n, double a)
{
    RunConfig c;
    c.profile = profile;
    c.measure = measure;
    c.metric = metric;
    c.r0 = r0;
    c.grid.n = n;
    c.a = a;
    return c.criterion_params();
}

// Vectors cross the boundary as std::vector: the Eigen input caster of older
// pybind11 releases crashes against numpy 2.
Eigen::VectorXd to_eigen(const std::vector<double>& v)
{
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

} // namespace

PYBIND11_MODULE(_greencrit, m)
{
    m.doc() = "Existence criteria for Delta u + sigma u^q <= 0 on model manifolds";

    py::register_exception<Error>(m, "Error");
    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<PreconditionError>(m, "PreconditionError");
    py::register_exception<BracketError>(m, "BracketError");
    py::register_exception<ConstructionRefused>(m, "ConstructionRefused");
    py::register_exception<NumericalFailure>(m, "NumericalFailure");
    py::register_exception<DivergenceError>(m, "DivergenceError");
    py::register_exception<OutOfRangeError>(m, "OutOfRangeError");

    py::enum_<Verdict>(m, "Verdict")
        .value("Finite", Verdict::Finite)
        .value("Divergent", Verdict::Divergent)
        .value("Bounded", Verdict::Bounded)
        .value("Unbounded", Verdict::Unbounded)
        .value("Inconclusive", Verdict::Inconclusive);

    py::class_<CriterionReport>(m, "CriterionReport")
        .def_property_readonly("criterion", [](const CriterionReport& r) { return to_string(r.criterion_id); })
        .def_readonly("verdict", &CriterionReport::verdict)
        .def_readonly("truncated_value", &CriterionReport::truncated_value)
        .def_readonly("tail_slope", &CriterionReport::tail_slope)
        .def_readonly("constant_estimate", &CriterionReport::constant_estimate)
        .def_property_readonly("bracket", [](const CriterionReport& r) { return to_string(r.bracket); })
        .def_readonly("extras", &CriterionReport::extras)
        .def_readonly("samples", &CriterionReport::samples)
        .def("to_text", &CriterionReport::to_text);

    py::class_<VolumeProfile>(m, "VolumeProfile")
        .def_static("power", &VolumeProfile::power, py::arg("c"), py::arg("alpha"))
        .def_static("power_log", &VolumeProfile::power_log, py::arg("c"), py::arg("alpha"), py::arg("k"))
        .def_static("euclidean", &VolumeProfile::euclidean, py::arg("n"))
        .def_static("two_regime", &VolumeProfile::two_regime, py::arg("n"), py::arg("alpha"))
        .def_static("tabulated", &VolumeProfile::tabulated, py::arg("r"), py::arg("v"))
        .def_static("parse", &parse_volume_spec, py::arg("spec"))
        .def("volume", &VolumeProfile::volume)
        .def("surface_density", &VolumeProfile::surface_density)
        .def("describe", &VolumeProfile::describe)
        .def_property_readonly("tail_exponent", &VolumeProfile::tail_exponent);

    py::class_<MeasureProfile>(m, "MeasureProfile")
        .def_static("unit", &MeasureProfile::unit)
        .def_static("radial_power", &MeasureProfile::radial_power, py::arg("c"), py::arg("m"))
        .def_static("parse", &parse_measure_spec, py::arg("spec"))
        .def("density", &MeasureProfile::density)
        .def("describe", &MeasureProfile::describe);

    py::class_<GreenRadialKernel>(m, "GreenRadialKernel")
        .def(py::init([](const VolumeProfile& v) { return GreenRadialKernel(v); }), py::arg("profile"))
        .def("R", &GreenRadialKernel::R, py::arg("rho"))
        .def("R_inverse", &GreenRadialKernel::R_inverse, py::arg("v"));

    py::class_<DiscreteKernel>(m, "DiscreteKernel")
        .def("size", &DiscreteKernel::size)
        .def_property_readonly("radii", &DiscreteKernel::radii)
        .def_property_readonly("weight_mu", &DiscreteKernel::weight_mu)
        .def_property_readonly("weight_sigma", &DiscreteKernel::weight_sigma)
        .def_property_readonly("matrix", &DiscreteKernel::matrix)
        .def("apply", [](const DiscreteKernel& dk, const std::vector<double>& v) { return dk.apply(to_eigen(v)); })
        .def("is_symmetric", &DiscreteKernel::is_symmetric);

    m.def(
        "discretize",
        [](const VolumeProfile& v, const MeasureProfile& mu, double r_min, double r_max, std::size_t n) {
            return discretize(GreenRadialKernel(v), mu, GridSpec{r_min, r_max, n});
        },
        py::arg("profile"), py::arg("measure"), py::arg("r_min") = 1e-3, py::arg("r_max") = 1e6,
        py::arg("n") = 1024);

    m.def(
        "evaluate",
        [](const std::string& criterion, double q, const std::string& profile, const std::string& measure,
           const std::string& metric, double r0, std::size_t n, double a) {
            return evaluate_criterion(parse_criterion_id(criterion), make_params(profile, measure, metric, r0, n, a),
                                      q);
        },
        "Evaluate one criterion by name (cond-int1, cond-int1b, cond-m, ...)", py::arg("criterion"), py::arg("q"),
        py::arg("profile") = "euclidean:3", py::arg("measure") = "unit", py::arg("metric") = "",
        py::arg("r0") = 1.0, py::arg("n") = 1024, py::arg("a") = 0.0);

    m.def(
        "joint_verdict",
        [](const std::string& name, double q, const std::string& profile, const std::string& measure,
           const std::string& metric, double r0) {
            return evaluate_joint(name, make_params(profile, measure, metric, r0, 1024, 0.0), q).verdict;
        },
        py::arg("name"), py::arg("q"), py::arg("profile") = "euclidean:3", py::arg("measure") = "unit",
        py::arg("metric") = "", py::arg("r0") = 1.0);

    m.def(
        "critical_exponent",
        [](const std::string& target, double q_lo, double q_hi, double tol, const std::string& profile,
           const std::string& measure, const std::string& metric, double r0) {
            const auto p = make_params(profile, measure, metric, r0, 1024, 0.0);
            ExponentScan scan;
            {
                py::gil_scoped_release release;
                scan = critical_exponent([&](double q) { return scan_verdict(target, p, q); }, q_lo, q_hi, tol);
            }
            return py::make_tuple(scan.q_critical, scan.verdict_map);
        },
        "Returns (q_critical, [(q, verdict), ...])", py::arg("target"), py::arg("q_lo"), py::arg("q_hi"),
        py::arg("tol") = 1e-3, py::arg("profile") = "euclidean:3", py::arg("measure") = "unit",
        py::arg("metric") = "", py::arg("r0") = 1.0);

    m.def(
        "epsilon_solution",
        [](const DiscreteKernel& dk, double q, double a) {
            const auto s = epsilon_solution(dk, q, a);
            return py::dict(py::arg("u") = Eigen::VectorXd(s.field.values), py::arg("epsilon") = s.epsilon,
                            py::arg("constant") = s.constant, py::arg("residual") = s.residual,
                            py::arg("certified") = s.certified);
        },
        py::arg("dk"), py::arg("q"), py::arg("a"));

    m.def(
        "picard_iterate",
        [](const DiscreteKernel& dk, double q, const std::vector<double>& h) {
            const auto r = picard_iterate(dk, q, to_eigen(h));
            return py::dict(py::arg("u") = Eigen::VectorXd(r.u.values), py::arg("iterations") = r.iterations,
                            py::arg("converged") = r.status == PicardStatus::Converged,
                            py::arg("monotonicity_violations") = r.monotonicity_violations);
        },
        py::arg("dk"), py::arg("q"), py::arg("h"));

    m.def("picard_datum", [](const DiscreteKernel& dk, double q, double a) { return picard_datum(dk, q, a).values; });
    m.def(
        "check_supersolution",
        [](const DiscreteKernel& dk, const std::vector<double>& u, double q) {
            return check_supersolution(dk, to_eigen(u), q);
        },
        py::arg("dk"), py::arg("u"), py::arg("q"));

    m.def(
        "moser_constants",
        [](double q, std::size_t j_max) {
            const auto c = moser_constants(q, j_max);
            return py::dict(py::arg("partial") = c.partial, py::arg("limit_estimate") = c.limit_estimate,
                            py::arg("lower_bound") = c.lower_bound);
        },
        py::arg("q"), py::arg("j_max") = 60);

    m.def("hardy_constant", &hardy_constant, py::arg("s"));
    m.def("estimate_3g_constant", &estimate_3g_constant, py::arg("green"), py::arg("samples_per_axis"),
          py::arg("d_min") = 1e-3, py::arg("d_max") = 1e3);

    m.def(
        "run",
        [](const std::string& command, const std::string& config_path, const std::vector<std::string>& overrides) {
            RawConfig raw;
            if (!config_path.empty())
                raw = parse_config_file(config_path);
            for (const auto& o : overrides)
                apply_override(raw, o);
            const RunConfig config = build_run_config(raw);
            std::ostringstream out;
            std::ostringstream err;
            const int code = run_command(command, config, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        "Run a CLI subcommand; returns (exit_code, stdout, stderr)", py::arg("command"),
        py::arg("config_path") = "", py::arg("overrides") = std::vector<std::string>{});
}
