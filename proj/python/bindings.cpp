#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "crmlab/error.hpp"
#include "crmlab/experiment.hpp"
#include "crmlab/json_io.hpp"
#include "crmlab/scenario.hpp"
#include "crmlab/spectral.hpp"

namespace py = pybind11;
using namespace crmlab;

namespace {

py::object to_python(const Json& value) {
  return py::module_::import("json").attr("loads")(dump_json(value, -1));
}

py::array_t<double> to_array(const std::vector<double>& v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::list certificate_list(const std::vector<BoundCertificate>& certs) {
  py::list out;
  for (const auto& c : certs) {
    py::dict d;
    d["name"] = c.name;
    d["measured"] = c.measured;
    d["bound"] = c.bound;
    d["margin"] = c.margin;
    d["pass"] = c.pass;
    d["note"] = c.note;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Adaptive control with closed-loop reference models: simulation and certificates";

  static py::exception<Error> error_type(m, "CrmlabError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::reinterpret_borrow<py::object>(error_type.ptr())(e.what());
      inst.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(error_type.ptr(), inst.ptr());
    }
  });

  py::class_<Trajectory>(m, "Trajectory")
      .def_property_readonly("channel_names", &Trajectory::channel_names)
      .def_property_readonly("times", [](const Trajectory& t) { return to_array(t.times()); })
      .def("channel", [](const Trajectory& t, const std::string& name) {
        return to_array(t.channel(name));
      })
      .def("__len__", &Trajectory::size)
      .def("__contains__", [](const Trajectory& t, const std::string& name) {
        return t.has_channel(name);
      })
      .def_property_readonly("meta", &Trajectory::meta)
      .def("to_csv", &Trajectory::to_csv);

  py::class_<ScenarioConfig>(m, "Scenario")
      .def_static("from_file", &load_scenario, py::arg("path"))
      .def_static("from_toml", [](const std::string& text) { return parse_scenario_toml(text); },
                  py::arg("text"))
      .def_static("from_json",
                  [](const std::string& text) {
                    Json doc;
                    try {
                      doc = Json::parse(text);
                    } catch (const Json::parse_error& e) {
                      throw Error(ErrorKind::kInvalidConfig, e.what());
                    }
                    return parse_scenario(doc);
                  },
                  py::arg("text"))
      .def_property_readonly("family", [](const ScenarioConfig& c) { return to_string(c.family); })
      .def_property_readonly("name", [](const ScenarioConfig& c) { return c.name; })
      .def_property_readonly("seed", [](const ScenarioConfig& c) { return c.seed; })
      .def_property_readonly("output_dir", &ScenarioConfig::output_dir)
      .def("resolved", [](const ScenarioConfig& c) { return to_python(resolved_config_json(c)); })
      .def("with_parameter",
           [](const ScenarioConfig& c, const std::string& axis, double value, bool couple) {
             return with_parameter(c, resolve_axis(c.family, axis), value, couple);
           },
           py::arg("axis"), py::arg("value"), py::arg("couple_gamma") = false);

  py::class_<RunResult>(m, "RunResult")
      .def_readonly("trajectory", &RunResult::trajectory)
      .def_readonly("paired", &RunResult::paired)
      .def_property_readonly("passed", &RunResult::passed)
      .def_property_readonly("certificates",
                             [](const RunResult& r) { return certificate_list(r.certificates); })
      .def_property_readonly("measurements", [](const RunResult& r) {
        py::dict d;
        for (const auto& x : r.measurements) d[py::str(x.name)] = x.value;
        return d;
      });

  m.def("run", &run_scenario, py::arg("scenario"), py::call_guard<py::gil_scoped_release>(),
        "Simulate a scenario and evaluate its certificates.");
  m.def("certificates_json",
        [](const ScenarioConfig& c, const RunResult& r) { return to_python(certificates_json(c, r)); },
        py::arg("scenario"), py::arg("result"));
  m.def("write_artifacts",
        [](const ScenarioConfig& c, const RunResult& r, const std::filesystem::path& dir) {
          std::vector<std::string> out;
          for (const auto& p : write_run_artifacts(c, r, dir)) out.push_back(p.string());
          return out;
        },
        py::arg("scenario"), py::arg("result"), py::arg("directory"));
  m.def("sweep",
        [](const ScenarioConfig& base, const std::string& axis, const std::vector<double>& values,
           bool couple, unsigned threads, const std::filesystem::path& out_dir) {
          SweepOptions opts{axis, values, couple, threads};
          SweepResult res;
          {
            py::gil_scoped_release release;
            res = run_sweep(base, opts, out_dir);
          }
          return to_python(sweep_manifest(base, res));
        },
        py::arg("scenario"), py::arg("axis"), py::arg("values"), py::arg("couple_gamma") = false,
        py::arg("threads") = 0, py::arg("out_dir") = std::filesystem::path(),
        "Run a parameter sweep and return its manifest.");
  m.def("report",
        [](const std::filesystem::path& dir) {
          const ReportSummary rep = build_report(dir);
          py::dict d;
          d["markdown"] = rep.markdown;
          d["runs"] = rep.runs;
          d["sweeps"] = rep.sweeps;
          d["failing"] = rep.failing;
          d["passed"] = rep.passed();
          return d;
        },
        py::arg("directory"));
  m.def("fit_peaking_exponent",
        [](const std::vector<double>& ell_abs, const std::vector<double>& peaks) {
          const PeakingFit fit = fit_peaking_exponent(ell_abs, peaks);
          py::dict d;
          d["exponent"] = fit.exponent;
          d["intercept"] = fit.intercept;
          return d;
        },
        py::arg("ell_abs"), py::arg("peaks"));
  m.def("parseval_identity",
        [](const std::vector<double>& samples, double tau, int N) {
          const SpectralReport rep = parseval_identity(samples, tau, N);
          py::dict d;
          d["lhs"] = rep.identity_lhs;
          d["rhs"] = rep.identity_rhs;
          d["relative_gap"] = rep.relative_gap;
          d["coefficients"] = rep.coefficients;
          d["periodicity_warning"] = rep.periodicity_warning;
          return d;
        },
        py::arg("samples"), py::arg("tau"), py::arg("N"));
  m.def("sweep_axes", [](const std::string& family) { return sweep_axes(parse_family(family)); },
        py::arg("family"));
}
