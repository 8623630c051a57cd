#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "ideval/cli.hpp"
#include "ideval/error.hpp"
#include "ideval/figures.hpp"
#include "ideval/judgement.hpp"
#include "ideval/metrics.hpp"
#include "ideval/report.hpp"
#include "ideval/run_config.hpp"

namespace py = pybind11;
using namespace ideval;

namespace {

// Reports cross the boundary as JSON text; the Python package decodes them.
std::string evaluateConfig(const std::string& config_path, bool per_element) {
  const auto cfg = loadRunConfig(config_path);
  MetricsOptions opts;
  opts.per_element = per_element || cfg.emit_per_element;
  return toJsonText(evaluate(prepareInputs(cfg), opts));
}

std::string evaluateMaterialized(const std::string& dir, bool per_element) {
  MetricsOptions opts;
  opts.per_element = per_element;
  return toJsonText(evaluate(readMaterialized(dir), opts));
}

py::dict transformConfig(const std::string& config_path, const std::string& out_dir) {
  const auto inputs = prepareInputs(loadRunConfig(config_path));
  writeMaterialized(out_dir, inputs);
  py::dict d;
  d["output"] = out_dir;
  d["elements"] = inputs.weight.size();
  d["ids"] = inputs.census.all.size();
  d["historical_ids"] = inputs.census.hist.size();
  d["ideal"] = inputs.ideal.has_value();
  return d;
}

std::string samplePairsText(const std::string& config_path, std::size_t n, std::uint64_t seed) {
  std::ostringstream out;
  writePairs(out, samplePairs(prepareInputs(loadRunConfig(config_path)), n, seed));
  return out.str();
}

py::list figureResults() {
  py::list out;
  for (const auto& fx : figureFixtures()) {
    const auto r = checkFigure(fx);
    py::list cells;
    for (const auto& c : r.cells) {
      py::dict cell;
      cell["metric"] = c.metric;
      cell["expected"] = c.expected;
      cell["actual"] = c.actual;
      cell["fraction"] = c.fraction;
      cell["ok"] = c.ok;
      cells.append(cell);
    }
    py::dict d;
    d["figure"] = r.id;
    d["title"] = r.title;
    d["ok"] = r.ok();
    d["cells"] = cells;
    out.append(d);
  }
  return out;
}

py::dict figureSources(int id) {
  const auto& fx = figureFixture(id);
  py::dict d;
  d["title"] = fx.title;
  d["mode"] = fx.config.mode == AssignmentMode::Simultaneous ? "simultaneous" : "separate";
  d["k"] = fx.config.k;
  d["hist"] = fx.hist_tsv;
  d["base"] = fx.base_tsv;
  d["exp"] = fx.exp_tsv;
  d["ideal"] = fx.ideal_tsv;
  d["expected"] = fx.expected;
  return d;
}

py::tuple runCliCaptured(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = runCli(args, out, err);
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_ideval, m) {
  // The module keeps the type alive; args are (code, message).
  static py::handle error_type = py::exception<Error>(m, "IdevalError").release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const auto args = py::make_tuple(std::string(errorCodeName(e.code())), e.what());
      PyErr_SetObject(error_type.ptr(), args.ptr());
    }
  });

  m.def("evaluate_config", evaluateConfig, py::arg("config_path"), py::arg("per_element") = false);
  m.def("evaluate_materialized", evaluateMaterialized, py::arg("directory"),
        py::arg("per_element") = false);
  m.def("transform", transformConfig, py::arg("config_path"), py::arg("out_dir"));
  m.def("sample_pairs", samplePairsText, py::arg("config_path"), py::arg("n"), py::arg("seed") = 1);
  m.def("figures", figureResults);
  m.def("figure_sources", figureSources, py::arg("figure"));
  m.def("format_percent", formatPercent, py::arg("fraction"));
  m.def("run_cli", runCliCaptured, py::arg("args"));
}
