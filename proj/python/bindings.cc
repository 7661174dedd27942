#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "f3a/baselines.h"
#include "f3a/cues.h"
#include "f3a/embedding.h"
#include "f3a/f3t.h"
#include "f3a/forage.h"
#include "f3a/harness.h"
#include "f3a/io.h"
#include "f3a/parallel.h"
#include "f3a/sensing.h"

namespace py = pybind11;

namespace f3a {
namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

TokenGrid grid_from_array(const Array& tokens) {
  if (tokens.ndim() != 3) throw std::invalid_argument("tokens must have shape (rows, cols, dim)");
  const auto r = tokens.unchecked<3>();
  std::vector<double> v(tokens.data(), tokens.data() + tokens.size());
  return TokenGrid(static_cast<int>(r.shape(0)), static_cast<int>(r.shape(1)), static_cast<int>(r.shape(2)),
                   std::move(v));
}

Array array_from_grid(const TokenGrid& g) {
  Array out({g.rows(), g.cols(), g.dim()});
  std::copy(g.values().begin(), g.values().end(), out.mutable_data());
  return out;
}

HyperParams params_from(const py::dict& params) {
  HyperParams hp;
  if (!params.empty()) {
    apply_param_overrides(hp, py::module_::import("json").attr("dumps")(params).cast<std::string>());
  }
  return hp;
}

CueSet cues_from(const std::string& question, const std::vector<std::pair<std::string, std::string>>& options,
                 const std::optional<std::string>& task_hint, const std::optional<std::string>& target_phrase,
                 const EmbeddingProvider& provider, const HyperParams& hp) {
  PromptSpec spec;
  spec.question = question;
  for (const auto& [letter, text] : options) spec.options.push_back({letter, text});
  if (task_hint) spec.task_hint = parse_task_hint(*task_hint);
  spec.target_phrase = target_phrase;
  return build_cues(spec, provider, hp);
}

py::dict trace_dict(const SelectionTrace& t) {
  py::dict d;
  d["final"] = t.final_set;
  d["coarse_pool"] = t.coarse_pool;
  d["scaffold"] = t.scaffold;
  d["locked"] = t.locked;
  d["rescue"] = t.rescue;
  d["odor"] = t.odor;
  d["K"] = t.k;
  d["k_main"] = t.k_main;
  d["k_jump"] = t.k_jump;
  return d;
}

py::dict select_py(const Array& tokens, const std::string& question,
                   const std::vector<std::pair<std::string, std::string>>& options,
                   const std::optional<std::string>& task_hint, const std::optional<std::string>& target_phrase,
                   double ratio, const std::string& method, const py::dict& params,
                   const std::optional<std::string>& embeddings, int dim_t) {
  const TokenGrid grid = grid_from_array(tokens);
  const HyperParams hp = params_from(params);
  const EmbeddingProvider provider =
      embeddings ? EmbeddingProvider::from_file(*embeddings) : EmbeddingProvider::desk_hash(dim_t);
  const CueSet cues = cues_from(question, options, task_hint, target_phrase, provider, hp);
  const SensingBank bank = SensingBank::build(hp, grid.dim(), provider.dim());
  const Budget budget = make_budget(ratio, grid.size());
  const PrunerKind kind = parse_pruner(method);
  SelectionTrace trace;
  {
    py::gil_scoped_release release;
    if (kind == PrunerKind::kF3a) {
      trace = select(grid, cues, bank, hp, budget);
    } else {
      trace.final_set = run_pruner(kind, grid, cues, bank, hp, budget.k);
      trace.k = budget.k;
    }
  }
  if (kind == PrunerKind::kF3a) return trace_dict(trace);
  py::dict d;
  d["final"] = trace.final_set;
  d["K"] = trace.k;
  return d;
}

py::dict task_py(const std::string& scenario, uint64_t seed, int rows, int cols, int dim_v, int dim_t) {
  const SyntheticTask t = generate_task(parse_scenario(scenario), seed, rows, cols, dim_v, dim_t);
  py::dict d;
  d["tokens"] = array_from_grid(t.grid);
  d["evidence"] = t.evidence;
  d["distractor"] = t.distractor;
  return d;
}

py::dict evaluate_py(const std::string& scenario, uint64_t seed, const std::string& method, double ratio,
                     const py::dict& params, int rows, int cols, int dim_v, int dim_t) {
  const SyntheticTask t = generate_task(parse_scenario(scenario), seed, rows, cols, dim_v, dim_t);
  const MetricRow m = evaluate(t, parse_pruner(method), params_from(params), ratio);
  py::dict d;
  d["k"] = m.k;
  d["evidence_recall"] = m.evidence_recall;
  d["distractor_rate"] = m.distractor_rate;
  d["spatial_coverage"] = m.spatial_coverage;
  return d;
}

py::dict read_f3t(const std::string& path) {
  const F3TContainer c = F3TContainer::read(path);
  py::dict d;
  for (const auto& [key, t] : c.entries()) {
    std::vector<py::ssize_t> shape(t.dims.begin(), t.dims.end());
    py::array_t<float> a(shape);
    std::copy(t.data.begin(), t.data.end(), a.mutable_data());
    d[py::str(key)] = a;
  }
  return d;
}

void write_f3t(const std::string& path, const py::dict& tensors) {
  F3TContainer c;
  for (const auto& [k, v] : tensors) {
    const auto a = py::array_t<float, py::array::c_style | py::array::forcecast>::ensure(v);
    if (!a) throw std::invalid_argument("tensor values must be array-like");
    Tensor t;
    for (py::ssize_t i = 0; i < a.ndim(); ++i) t.dims.push_back(static_cast<uint32_t>(a.shape(i)));
    t.data.assign(a.data(), a.data() + a.size());
    c.add(k.cast<std::string>(), std::move(t));
  }
  c.write(path);
}

}  // namespace
}  // namespace f3a

PYBIND11_MODULE(_f3a, m) {
  using namespace f3a;
  m.doc() = "Training-free visual token selection";
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<MissingEmbeddingError>(m, "MissingEmbeddingError", PyExc_KeyError);

  m.def("select", &select_py, py::arg("tokens"), py::arg("question"),
        py::arg("options") = std::vector<std::pair<std::string, std::string>>{}, py::arg("task_hint") = py::none(),
        py::arg("target_phrase") = py::none(), py::arg("ratio") = 0.2, py::arg("method") = "f3a",
        py::arg("params") = py::dict(), py::arg("embeddings") = py::none(), py::arg("dim_t") = 64,
        "Select round_half_up(ratio * N) tokens from a (rows, cols, dim) array.");
  m.def("generate_task", &task_py, py::arg("scenario"), py::arg("seed"), py::arg("rows") = 24,
        py::arg("cols") = 24, py::arg("dim_v") = 64, py::arg("dim_t") = 64);
  m.def("evaluate", &evaluate_py, py::arg("scenario"), py::arg("seed"), py::arg("method"), py::arg("ratio"),
        py::arg("params") = py::dict(), py::arg("rows") = 24, py::arg("cols") = 24, py::arg("dim_v") = 64,
        py::arg("dim_t") = 64);
  m.def("embed", [](const std::string& text, int dim) { return EmbeddingProvider::desk_hash(dim).embed(text); },
        py::arg("text"), py::arg("dim") = 64);
  m.def("extract_target_phrase", &extract_target_phrase);
  m.def(
      "token_demand",
      [](const std::vector<std::pair<double, double>>& points, double tau) {
        RetentionCurve c{"", "", points};
        std::sort(c.points.begin(), c.points.end());
        return token_demand(c, tau);
      },
      py::arg("points"), py::arg("tau"));
  m.def("sign_test", &sign_test, py::arg("wins"), py::arg("trials"));
  m.def("format_p_value", &format_p_value);
  m.def("read_f3t", &read_f3t);
  m.def("write_f3t", &write_f3t);
  m.def("set_worker_count", &set_worker_count);
  m.def("worker_count", &worker_count);
  m.attr("methods") = [] {
    std::vector<std::string> v;
    for (PrunerKind k : kAllPruners) v.push_back(to_string(k));
    return v;
  }();
  m.attr("scenarios") = [] {
    std::vector<std::string> v;
    for (Scenario s : kAllScenarios) v.push_back(to_string(s));
    return v;
  }();
}
