#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "hyperlab/counting.hpp"
#include "hyperlab/error.hpp"
#include "hyperlab/experiments.hpp"
#include "hyperlab/spectral.hpp"

namespace py = pybind11;
using namespace hyperlab;

namespace {

py::int_ to_python(const BigInt& x) {
  return py::reinterpret_steal<py::int_>(PyLong_FromString(x.str().c_str(), nullptr, 10));
}

py::dict spectral_summary(const Automaton& aut) {
  const SpectralReport r = analyze(aut);
  py::dict out;
  out["lambda"] = r.growth.lambda;
  out["p_common"] = r.p_common;
  out["maximal_components"] = r.maximal.indices.size();
  out["disjoint"] = r.maximal.disjoint;
  out["has_growth"] = r.has_growth();
  out["json"] = report_json(aut, r);
  return out;
}

std::vector<py::int_> sphere_sizes(const Automaton& aut, int n_max) {
  const CountTable table(aut, n_max);
  std::vector<py::int_> out;
  for (int n = 0; n <= n_max; ++n) out.push_back(to_python(table.sphere_size(n)));
  return out;
}

std::vector<std::string> sample_sphere(const Automaton& aut, int n, int count, std::uint64_t seed) {
  const CountTable table(aut, n);
  Rng rng(seed, 0);
  std::vector<std::string> out;
  for (int i = 0; i < count; ++i) out.push_back(aut.alphabet().format(sample_sphere_uniform(aut, table, n, rng)));
  return out;
}

py::dict run_command(const std::string& command, const std::string& config_json) {
  ExperimentConfig config;
  if (!config_json.empty()) config.apply_json(config_json);
  CommandOutput result;
  if (command == "analyze") result = run_analyze(config);
  else if (command == "validate") result = run_validate(config);
  else if (command == "count") result = run_count(config);
  else if (command == "simulate") result = run_simulate(config);
  else if (command == "boundary") result = run_boundary(config);
  else if (command == "clt-compare") result = run_clt_compare(config);
  else throw Error(ErrorCode::InvalidArgument, "unknown command " + command);
  py::dict files;
  for (const auto& [name, content] : result.files) files[py::str(name)] = content;
  py::dict out;
  out["exit_code"] = result.exit_code;
  out["summary"] = result.summary;
  out["files"] = files;
  return out;
}

}  // namespace

PYBIND11_MODULE(_hyperlab, m) {
  m.doc() = "Counting and boundary experiments on hyperbolic groups.";

  py::register_exception<Error>(m, "HyperlabError", PyExc_ValueError);

  py::class_<Automaton>(m, "Automaton")
      .def_static("builtin", [](const std::string& spec) { return builtin_automaton(spec); },
                  py::arg("spec"))
      .def_static("from_json", [](const std::string& text) { return Automaton::from_json(text); },
                  py::arg("text"))
      .def("to_json", &Automaton::to_json)
      .def_property_readonly("vertices", &Automaton::vertices)
      .def_property_readonly("alphabet", [](const Automaton& a) { return a.alphabet().symbols(); })
      .def_property_readonly("augmented", &Automaton::augmented)
      .def("__len__", &Automaton::size);

  m.def("builtin_groups", &builtin_group_specs);
  m.def("analyze", &spectral_summary, py::arg("automaton"));
  m.def("sphere_sizes", &sphere_sizes, py::arg("automaton"), py::arg("n_max"));
  m.def("sample_sphere", &sample_sphere, py::arg("automaton"), py::arg("n"), py::arg("count"),
        py::arg("seed") = 1);
  m.def("run_command", &run_command, py::arg("command"), py::arg("config_json") = "");
}
