#include "ideval/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "ideval/error.hpp"
#include "ideval/figures.hpp"
#include "ideval/judgement.hpp"
#include "ideval/report.hpp"
#include "ideval/run_config.hpp"
#include "ideval/schemes.hpp"
#include "ideval/tsv_io.hpp"

namespace ideval {
namespace {

using nlohmann::json;

struct GlobalFlags {
  std::string config;
  std::string output;
  std::string render;
  bool per_element = false;
  std::uint64_t seed = 1;
};

int exitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::NothingToSample:
    case ErrorCode::InsufficientCoverage:
      return kExitNothingToDo;
    case ErrorCode::InconsistentJudgements:
      return kExitMismatch;
    default:
      return kExitInvalid;
  }
}

void diagnose(std::ostream& err, std::string_view code, const std::string& message,
              json extra = json::object()) {
  extra["error"] = code;
  extra["message"] = message;
  err << extra.dump() << '\n';
}

std::ofstream openFile(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  return out;
}

RunConfig requireConfig(const GlobalFlags& g) {
  if (g.config.empty()) throw Error(ErrorCode::InvalidConfig, "--config is required");
  auto cfg = loadRunConfig(g.config);
  if (g.per_element) cfg.emit_per_element = true;
  if (!g.render.empty()) cfg.render = parseRender(g.render);
  if (!g.output.empty()) cfg.output = g.output;
  return cfg;
}

// JSON goes to the output file when there is one; the table always goes to
// out when requested.
void emitReport(const MetricsReport& report, Render render, const std::optional<std::string>& path,
                std::ostream& out) {
  const bool want_json = render != Render::Table;
  const bool want_table = render != Render::Json;
  if (want_json) {
    if (path) {
      auto file = openFile(*path);
      file << toJsonText(report);
    } else {
      out << toJsonText(report);
      if (want_table) out << '\n';
    }
  }
  if (want_table) out << renderTable(report);
}

int cmdEvaluate(const GlobalFlags& g, const std::string& materialized, std::ostream& out) {
  MetricsOptions opts;
  if (!materialized.empty()) {
    opts.per_element = g.per_element;
    const auto inputs = readMaterialized(materialized);
    const auto render = g.render.empty() ? Render::Json : parseRender(g.render);
    std::optional<std::string> path;
    if (!g.output.empty()) path = g.output;
    emitReport(evaluate(inputs, opts), render, path, out);
    return kExitOk;
  }
  const auto cfg = requireConfig(g);
  opts.per_element = cfg.emit_per_element;
  const auto inputs = prepareInputs(cfg);
  emitReport(evaluate(inputs, opts), cfg.render, cfg.output, out);
  return kExitOk;
}

int cmdTransform(const GlobalFlags& g, std::ostream& out) {
  const auto cfg = requireConfig(g);
  if (!cfg.output) throw Error(ErrorCode::InvalidConfig, "transform needs an output directory");
  const auto inputs = prepareInputs(cfg);
  writeMaterialized(*cfg.output, inputs);
  json summary = {{"output", *cfg.output},
                  {"elements", inputs.weight.size()},
                  {"ids", inputs.census.all.size()},
                  {"historical_ids", inputs.census.hist.size()},
                  {"ideal", inputs.ideal.has_value()}};
  out << summary.dump() << '\n';
  return kExitOk;
}

struct AssignArgs {
  std::string input;
  std::string hist;
  std::string hist_epoch = "H";
  std::string scheme;
  std::string prefix = "id_";
  long long start = 1;
};

int cmdAssign(const GlobalFlags& g, const AssignArgs& a, std::ostream& out) {
  if (a.input.empty()) throw Error(ErrorCode::InvalidConfig, "assign needs --input");
  const auto current = readClusteringTsv(a.input, ElementKind::CurrentItem);
  std::optional<WeightedClustering> hist;
  if (!a.hist.empty()) hist = readClusteringTsv(a.hist, ElementKind::HistoricalItem, a.hist_epoch);

  std::string scheme = a.scheme.empty() ? (hist ? "majority" : "fresh") : a.scheme;
  AssignmentResult result;
  if (scheme == "majority") {
    if (!hist) throw Error(ErrorCode::InvalidConfig, "majority vote needs --hist");
    result = assignByMajorityVote(current.clustering, hist->clustering, hist->weights, a.prefix);
  } else if (scheme == "fresh") {
    std::set<ClusterId> reserved;
    if (hist) {
      const auto ids = hist->clustering.ids();
      reserved.insert(ids.begin(), ids.end());
    }
    result = assignFreshIds(current.clustering, a.prefix, a.start, reserved);
  } else {
    throw Error(ErrorCode::InvalidConfig, "scheme must be fresh or majority");
  }

  const WeightedClustering labeled{result.labels, current.weights};
  if (g.output.empty()) {
    writeClusteringTsv(out, labeled);
  } else {
    auto file = openFile(g.output);
    writeClusteringTsv(file, labeled);
  }
  return kExitOk;
}

int cmdSamplePairs(const GlobalFlags& g, std::size_t n, std::ostream& out) {
  auto cfg = requireConfig(g);
  const auto inputs = prepareInputs(cfg);
  const auto js = samplePairs(inputs, n, g.seed);
  if (cfg.output) {
    auto file = openFile(*cfg.output);
    writePairs(file, js);
  } else {
    writePairs(out, js);
  }
  return kExitOk;
}

int cmdIngest(const GlobalFlags& g, const std::string& pairs_path, std::string verdicts_path,
              std::ostream& out, std::ostream& err) {
  const auto cfg = requireConfig(g);
  if (pairs_path.empty()) throw Error(ErrorCode::InvalidConfig, "ingest-verdicts needs --pairs");
  if (verdicts_path.empty()) verdicts_path = pairs_path;
  const auto inputs = prepareInputs(cfg);
  std::ifstream pin(pairs_path);
  if (!pin) throw Error(ErrorCode::Io, "cannot open " + pairs_path);
  const auto sampled = readPairs(pin);
  const auto ingested = ingestVerdicts(sampled, verdicts_path, inputs);
  if (!ingested.inconsistencies.empty()) {
    json list = json::array();
    for (const auto& inc : ingested.inconsistencies) {
      json path = json::array();
      for (const auto& e : inc.equivalence_path) path.push_back(encodeElement(e));
      list.push_back({{"distinct", {encodeElement(inc.distinct.left), encodeElement(inc.distinct.right)}},
                      {"equivalence_path", path}});
    }
    diagnose(err, errorCodeName(ErrorCode::InconsistentJudgements),
             std::to_string(ingested.inconsistencies.size()) +
                 " distinct verdicts contradict chains of equivalent verdicts",
             {{"inconsistencies", list}});
    return kExitMismatch;
  }
  MetricsOptions opts;
  opts.per_element = cfg.emit_per_element;
  emitReport(estimateQualityFromJudgements(inputs, ingested.set, opts), cfg.render, cfg.output,
             out);
  return kExitOk;
}

int cmdFigures(const GlobalFlags& g, const std::string& which, std::ostream& out) {
  std::vector<const FigureFixture*> selected;
  if (which == "all") {
    for (const auto& fx : figureFixtures()) selected.push_back(&fx);
  } else {
    int id = 0;
    try {
      id = std::stoi(which);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidConfig, "figure must be 'all' or a number, got '" + which + "'");
    }
    selected.push_back(&figureFixture(id));
  }

  const auto render = g.render.empty() ? Render::Table : parseRender(g.render);
  json doc = json::array();
  std::ostringstream table;
  std::size_t passed = 0;
  for (const auto* fx : selected) {
    const auto result = checkFigure(*fx);
    if (result.ok()) ++passed;
    json cells = json::array();
    table << "Figure " << result.id << " (" << result.title << "): "
          << (result.ok() ? "ok" : "MISMATCH") << '\n';
    for (const auto& c : result.cells) {
      cells.push_back({{"metric", c.metric}, {"expected", c.expected}, {"actual", c.actual},
                       {"fraction", c.fraction}, {"ok", c.ok}});
      char buf[128];
      std::snprintf(buf, sizeof buf, "  %-16s %8s%% %8s%%%s\n", c.metric.c_str(),
                    c.expected.c_str(), c.actual.c_str(), c.ok ? "" : "  <-- mismatch");
      table << buf;
    }
    doc.push_back({{"figure", result.id}, {"title", result.title}, {"ok", result.ok()},
                   {"cells", cells}});
  }
  table << passed << "/" << selected.size() << " figures match\n";

  auto emit = [&](std::ostream& os) {
    if (render != Render::Table) os << doc.dump(2) << '\n';
    if (render == Render::Both) os << '\n';
    if (render != Render::Json) os << table.str();
  };
  if (g.output.empty()) {
    emit(out);
  } else {
    auto file = openFile(g.output);
    emit(file);
  }
  return passed == selected.size() ? kExitOk : kExitMismatch;
}

}  // namespace

int runCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Evaluate semantic id stability of clusterings", "ideval"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags g;
  app.add_option("--config", g.config, "JSON run configuration");
  app.add_option("--output", g.output, "Output file (directory for transform)");
  app.add_option("--render", g.render, "json, table or both")
      ->check(CLI::IsMember({"json", "table", "both"}));
  app.add_flag("--per-element", g.per_element, "Include per-element metric rows");
  app.add_option("--seed", g.seed, "Seed for pair sampling");

  auto* evaluate = app.add_subcommand("evaluate", "Compute impact and quality metrics");
  std::string materialized;
  evaluate->add_option("--materialized", materialized,
                       "Directory written by transform, used instead of --config");

  auto* transform = app.add_subcommand("transform", "Write the expanded Base/Exp/Weight/Ideal files");

  auto* assign = app.add_subcommand("assign", "Label a membership clustering with ids");
  AssignArgs aa;
  assign->add_option("--input", aa.input, "Membership TSV (item, cluster key, weight)");
  assign->add_option("--hist", aa.hist, "Historical clustering TSV");
  assign->add_option("--hist-epoch", aa.hist_epoch, "Epoch label of the historical file");
  assign->add_option("--scheme", aa.scheme, "fresh or majority")
      ->check(CLI::IsMember({"fresh", "majority"}));
  assign->add_option("--prefix", aa.prefix, "Prefix of fresh ids");
  assign->add_option("--start", aa.start, "First fresh id counter");

  auto* sample = app.add_subcommand("sample-pairs", "Sample element pairs for human judgement");
  std::size_t count = 100;
  sample->add_option("-n,--count", count, "Number of pairs");

  auto* ingest = app.add_subcommand("ingest-verdicts", "Estimate quality from judged pairs");
  std::string pairs_path, verdicts_path;
  ingest->add_option("--pairs", pairs_path, "Pair file written by sample-pairs");
  ingest->add_option("--verdicts", verdicts_path, "Judged pair file (defaults to --pairs)");

  auto* figures = app.add_subcommand("figures", "Recompute the bundled worked examples");
  std::string which = "all";
  figures->add_option("figure", which, "'all' or a figure number");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    diagnose(err, "UsageError", e.what());
    return kExitInvalid;
  }

  try {
    if (evaluate->parsed()) return cmdEvaluate(g, materialized, out);
    if (transform->parsed()) return cmdTransform(g, out);
    if (assign->parsed()) return cmdAssign(g, aa, out);
    if (sample->parsed()) return cmdSamplePairs(g, count, out);
    if (ingest->parsed()) return cmdIngest(g, pairs_path, verdicts_path, out, err);
    if (figures->parsed()) return cmdFigures(g, which, out);
  } catch (const Error& e) {
    diagnose(err, errorCodeName(e.code()), e.what());
    return exitCodeFor(e.code());
  } catch (const std::exception& e) {
    diagnose(err, "InternalError", e.what());
    return kExitInvalid;
  }
  return kExitInvalid;
}

}  // namespace ideval
