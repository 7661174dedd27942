// Command-line front end: select, bench, demand, signtest, synth.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "f3a/baselines.h"
#include "f3a/cues.h"
#include "f3a/embedding.h"
#include "f3a/f3t.h"
#include "f3a/forage.h"
#include "f3a/harness.h"
#include "f3a/image.h"
#include "f3a/io.h"
#include "f3a/sensing.h"

namespace fs = std::filesystem;
using namespace f3a;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitDomain = 3;

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open " + path + " for writing");
  f << text;
}

struct SelectArgs {
  std::string instance, tensors, embeddings, method, out, trace, heatmap;
  int dim_t = 64;
};

int run_select(const SelectArgs& a) {
  const Instance inst = load_instance(a.instance);
  const F3TContainer container = F3TContainer::read(a.tensors);
  const TokenGrid grid = grid_from_container(container, inst);
  const EmbeddingProvider provider =
      a.embeddings.empty() ? EmbeddingProvider::desk_hash(a.dim_t) : EmbeddingProvider::from_file(a.embeddings);
  PrunerKind method = inst.method.value_or(PrunerKind::kF3a);
  if (!a.method.empty()) method = parse_pruner(a.method);

  const HyperParams& hp = inst.hp;
  hp.validate();
  const CueSet cues = build_cues(inst.prompt, provider, hp);
  const SensingBank bank = SensingBank::build(hp, grid.dim(), cues.dim());
  const Budget budget = make_budget(inst.ratio, grid.size());

  std::optional<SelectionTrace> trace;
  IndexSet chosen;
  if (method == PrunerKind::kF3a) {
    trace = select(grid, cues, bank, hp, budget);
    chosen = trace->final_set;
  } else {
    chosen = run_pruner(method, grid, cues, bank, hp, budget.k);
  }
  emit(selection_json(grid, chosen, to_string(method), trace ? &*trace : nullptr), a.out);
  if (!a.trace.empty()) {
    if (!trace) trace = select(grid, cues, bank, hp, budget);
    emit(trace_json(*trace, grid), a.trace);
  }
  if (!a.heatmap.empty()) {
    const std::vector<double> odor = trace ? trace->odor : odor_field(bank, grid, cues, hp).a;
    write_bytes(a.heatmap + ".pgm", encode_pgm(grid.rows(), grid.cols(), odor));
    write_bytes(a.heatmap + ".ppm", encode_overlay_ppm(grid.rows(), grid.cols(), odor, chosen));
  }
  return 0;
}

struct BenchArgs {
  std::string config, out_dir;
  bool timing = false;
};

int run_bench(const BenchArgs& a) {
  const BenchConfig cfg = a.config.empty() ? BenchConfig{} : load_bench_config(a.config);
  cfg.battery.hp.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto rows = run_battery(cfg.battery);
  const auto summary = summarize(rows);
  const std::string summary_text = summary_csv(summary);
  if (!a.out_dir.empty()) {
    fs::create_directories(a.out_dir);
    emit(metrics_csv(rows, a.timing), (fs::path(a.out_dir) / "metrics.csv").string());
    emit(summary_text, (fs::path(a.out_dir) / "summary.csv").string());
    emit(summary_json(summary), (fs::path(a.out_dir) / "summary.json").string());
  }
  std::cout << summary_text;
  if (cfg.ablations) {
    const std::string text = ablation_csv(run_ablations(cfg.battery, cfg.ablation_ratio));
    if (!a.out_dir.empty()) emit(text, (fs::path(a.out_dir) / "ablation.csv").string());
    std::cout << "\n" << text;
  }
  if (cfg.sweep) {
    const std::string text = sweep_csv(run_sweep(cfg.battery, cfg.sweep_ratio));
    if (!a.out_dir.empty()) emit(text, (fs::path(a.out_dir) / "sweep.csv").string());
    std::cout << "\n" << text;
  }
  if (a.timing) {
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cerr << "elapsed_s " << secs << "\n";
  }
  return 0;
}

int run_demand(const std::string& curves_path, const std::vector<double>& taus) {
  for (double tau : taus) {
    if (!(tau > 0.0 && tau <= 1.0)) throw FormatError("--tau values must lie in (0, 1]");
  }
  const auto curves = load_curves_csv(curves_path);
  std::string out = "model,method,tau,r_tau\n";
  for (double tau : taus) {
    for (const RetentionCurve& c : curves) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.2f,%.2f", tau, token_demand(c, tau));
      out += c.model + "," + c.method + "," + buf + "\n";
    }
  }
  std::cout << out;
  return 0;
}

int run_signtest(int wins, int trials) {
  if (trials < 1 || wins < 0 || wins > trials) throw FormatError("need 0 <= wins <= trials and trials >= 1");
  std::cout << format_p_value(sign_test(wins, trials)) << "\n";
  return 0;
}

struct SynthArgs {
  std::string scenario = "distributed", prefix;
  uint64_t seed = 0;
  int rows = 24, cols = 24, dim_v = 64, dim_t = 64;
  double ratio = 0.2;
};

Tensor to_tensor(std::vector<uint32_t> dims, const std::vector<double>& values) {
  Tensor t;
  t.dims = std::move(dims);
  t.data.assign(values.begin(), values.end());
  return t;
}

// Writes a planted task as an instance plus tensor and embedding files whose
// keys reproduce the planted cue vectors through the template pipeline.
int run_synth(const SynthArgs& a) {
  const SyntheticTask task = generate_task(parse_scenario(a.scenario), a.seed, a.rows, a.cols, a.dim_v, a.dim_t);
  const std::string question = "where is the planted evidence?";
  const std::string phrase = "planted evidence";

  F3TContainer tensors;
  tensors.add("tokens", to_tensor({static_cast<uint32_t>(a.rows), static_cast<uint32_t>(a.cols),
                                   static_cast<uint32_t>(a.dim_v)},
                                  task.grid.values()));
  tensors.write(a.prefix + ".f3t");

  const auto dim = static_cast<uint32_t>(a.dim_t);
  F3TContainer emb;
  const auto& global = task.cues.cues[0].vector;
  emb.add(question, to_tensor({dim}, global));
  emb.add(templates::global(question), to_tensor({dim}, global));
  emb.add(templates::target(phrase), to_tensor({dim}, task.cues.cues[1].vector));
  nlohmann::json options = nlohmann::json::array();
  for (const Cue& o : task.cues.option_cues) {
    const std::string text = "region " + o.label;
    emb.add(templates::option(o.label, text), to_tensor({dim}, o.vector));
    options.push_back({{"letter", o.label}, {"text", text}});
  }
  emb.write(a.prefix + ".emb.f3t");

  nlohmann::json inst;
  inst["grid"] = {{"rows", a.rows}, {"cols", a.cols}, {"tensor_key", "tokens"}};
  inst["prompt"] = {{"question", question}, {"target_phrase", phrase}};
  if (!options.empty()) inst["prompt"]["options"] = options;
  inst["budget"] = {{"ratio", a.ratio}};
  emit(inst.dump(2) + "\n", a.prefix + ".json");

  nlohmann::json truth;
  truth["scenario"] = a.scenario;
  truth["seed"] = a.seed;
  truth["evidence"] = task.evidence;
  truth["distractor"] = task.distractor;
  emit(truth.dump(2) + "\n", a.prefix + ".truth.json");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prompt-conditioned visual token selection under a fixed budget"};
  app.require_subcommand(1);

  SelectArgs sel;
  auto* select_cmd = app.add_subcommand("select", "Select K tokens for one instance");
  select_cmd->add_option("--instance", sel.instance, "Instance JSON")->required();
  select_cmd->add_option("--tensors", sel.tensors, "F3T file holding the token grid")->required();
  select_cmd->add_option("--embeddings", sel.embeddings, "F3T file of text embeddings (default: desk hash)");
  select_cmd->add_option("--dim-t", sel.dim_t, "Desk-hash embedding dimension")->check(CLI::PositiveNumber);
  select_cmd->add_option("--method", sel.method, "f3a, score_rank, diversity_maxmin, similarity_merge, conditional_diversity");
  select_cmd->add_option("--out", sel.out, "Selection JSON path (default: stdout)");
  select_cmd->add_option("--trace", sel.trace, "Write the full selection trace JSON here");
  select_cmd->add_option("--heatmap", sel.heatmap, "Write PREFIX.pgm and PREFIX.ppm");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run the synthetic battery");
  bench_cmd->add_option("--config", bench.config, "Bench config JSON");
  bench_cmd->add_option("--out-dir", bench.out_dir, "Directory for CSV/JSON reports");
  bench_cmd->add_flag("--timing", bench.timing, "Include runtimes (output is no longer reproducible)");

  std::string curves;
  std::vector<double> taus;
  auto* demand_cmd = app.add_subcommand("demand", "Fixed-fidelity token demand from accuracy curves");
  demand_cmd->add_option("--curves", curves, "CSV with model,method,rho,accuracy")->required();
  demand_cmd->add_option("--tau", taus, "Fidelity targets (repeatable)")->default_val(std::vector<double>{0.95, 0.97, 0.98});

  int wins = 0, trials = 0;
  auto* sign_cmd = app.add_subcommand("signtest", "Two-sided exact sign test");
  sign_cmd->add_option("--wins", wins)->required();
  sign_cmd->add_option("--trials", trials)->required();

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write a planted synthetic instance");
  synth_cmd->add_option("--scenario", synth.scenario);
  synth_cmd->add_option("--seed", synth.seed);
  synth_cmd->add_option("--rows", synth.rows);
  synth_cmd->add_option("--cols", synth.cols);
  synth_cmd->add_option("--dim-v", synth.dim_v);
  synth_cmd->add_option("--dim-t", synth.dim_t);
  synth_cmd->add_option("--ratio", synth.ratio);
  synth_cmd->add_option("--out-prefix", synth.prefix)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }

  try {
    if (*select_cmd) return run_select(sel);
    if (*bench_cmd) return run_bench(bench);
    if (*demand_cmd) return run_demand(curves, taus);
    if (*sign_cmd) return run_signtest(wins, trials);
    if (*synth_cmd) return run_synth(synth);
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const MissingEmbeddingError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return 0;
}
