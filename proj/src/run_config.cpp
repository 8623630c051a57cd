#include "ideval/run_config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ideval/error.hpp"
#include "ideval/tsv_io.hpp"

namespace ideval {
namespace fs = std::filesystem;

namespace {

std::string resolve(const std::string& base_dir, const std::string& path) {
  if (base_dir.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base_dir) / path).lexically_normal().string();
}

void requireReadable(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, std::string(what) + " file is not readable: " + path);
}

std::ofstream openOutput(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

}  // namespace

Render parseRender(const std::string& text) {
  if (text == "json") return Render::Json;
  if (text == "table") return Render::Table;
  if (text == "both") return Render::Both;
  throw Error(ErrorCode::InvalidConfig, "render must be json, table or both");
}

void RunConfig::validate() const {
  transform.validate();
  if (base.empty() || exp.empty()) {
    throw Error(ErrorCode::InvalidConfig, "configuration needs both base and exp paths");
  }
  std::set<std::string> labels;
  for (const auto& h : hist) {
    if (h.epoch_label.empty() || h.epoch_label.find(':') != std::string::npos) {
      throw Error(ErrorCode::InvalidConfig, "epoch labels must be non-empty and contain no ':'");
    }
    if (!labels.insert(h.epoch_label).second) {
      throw Error(ErrorCode::DuplicateEpochLabel, "epoch label '" + h.epoch_label + "' used twice");
    }
    if (!(h.epoch_weight > 0.0)) {
      throw Error(ErrorCode::InvalidConfig, "epoch_weight must be positive");
    }
    requireReadable(h.path, "historical");
  }
  requireReadable(base, "baseline");
  requireReadable(exp, "experiment");
  if (ideal) requireReadable(*ideal, "ideal");
}

RunConfig parseRunConfig(const std::string& json_text, const std::string& base_dir) {
  RunConfig cfg;
  try {
    const auto j = nlohmann::json::parse(json_text);
    if (j.contains("hist")) {
      for (const auto& h : j.at("hist")) {
        HistSource src;
        src.path = resolve(base_dir, h.at("path").get<std::string>());
        src.epoch_label = h.value("epoch_label", std::string("H"));
        src.epoch_weight = h.value("epoch_weight", 1.0);
        cfg.hist.push_back(std::move(src));
      }
    }
    cfg.base = resolve(base_dir, j.at("base").get<std::string>());
    cfg.exp = resolve(base_dir, j.at("exp").get<std::string>());
    const auto mode = j.value("mode", std::string("separate"));
    if (mode == "separate") {
      cfg.transform.mode = AssignmentMode::SeparateAssignment;
    } else if (mode == "simultaneous") {
      cfg.transform.mode = AssignmentMode::Simultaneous;
    } else {
      throw Error(ErrorCode::InvalidConfig, "mode must be separate or simultaneous");
    }
    cfg.transform.align_items = j.value("align_items", false);
    cfg.transform.k = j.value("k", cfg.transform.k);
    cfg.transform.hist_scale_factor = j.value("hist_scale_factor", 1.0);
    if (j.contains("ideal") && !j.at("ideal").is_null()) {
      cfg.ideal = resolve(base_dir, j.at("ideal").get<std::string>());
    }
    if (j.contains("output") && !j.at("output").is_null()) {
      cfg.output = resolve(base_dir, j.at("output").get<std::string>());
    }
    cfg.emit_per_element = j.value("per_element", false);
    if (j.contains("render")) cfg.render = parseRender(j.at("render").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("bad run configuration: ") + e.what());
  }
  return cfg;
}

RunConfig loadRunConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open configuration " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parseRunConfig(text.str(), fs::path(path).parent_path().string());
}

EvalInputs prepareInputs(const RunConfig& cfg) {
  cfg.validate();
  WeightedClustering hist;
  if (!cfg.hist.empty()) {
    std::vector<HistoricalEpoch> epochs;
    for (const auto& h : cfg.hist) {
      epochs.push_back(HistoricalEpoch{
          readClusteringTsv(h.path, ElementKind::HistoricalItem, h.epoch_label), h.epoch_weight});
    }
    hist = mergeHistoricalEpochs(epochs);
  }
  auto base = readClusteringTsv(cfg.base, ElementKind::CurrentItem);
  auto exp = readClusteringTsv(cfg.exp, ElementKind::CurrentItem);
  EvalInputs inputs;
  if (cfg.transform.align_items) {
    auto aligned = alignCurrentItems(base, exp);
    inputs = buildEvalInputs(hist, aligned.base, aligned.exp, aligned.weights, cfg.transform);
  } else {
    inputs = buildEvalInputs(hist, base.clustering, exp.clustering, combineItemWeights(base, exp),
                             cfg.transform);
  }
  if (cfg.ideal) attachIdeal(inputs, readElementClustering(*cfg.ideal));
  return inputs;
}

void writeMaterialized(const std::string& dir, const EvalInputs& inputs) {
  fs::create_directories(dir);
  const fs::path root(dir);
  {
    auto out = openOutput(root / "base.tsv");
    writeElementClustering(out, inputs.base);
  }
  {
    auto out = openOutput(root / "exp.tsv");
    writeElementClustering(out, inputs.exp);
  }
  {
    auto out = openOutput(root / "weights.tsv");
    writeElementWeights(out, inputs.base, inputs.weight);
  }
  if (inputs.ideal) {
    auto out = openOutput(root / "ideal.tsv");
    writeElementClustering(out, *inputs.ideal);
  }
}

EvalInputs readMaterialized(const std::string& dir) {
  const fs::path root(dir);
  EvalInputs inputs;
  inputs.base = readElementClustering((root / "base.tsv").string());
  inputs.exp = readElementClustering((root / "exp.tsv").string());
  inputs.weight = readElementWeights((root / "weights.tsv").string());
  requireValid(inputs.base, "materialized base");
  requireValid(inputs.exp, "materialized exp");
  for (const auto& cl : inputs.base.clusters) {
    for (const auto& e : cl.members) {
      (void)inputs.weight.at(e);
      if (e.isSynthetic()) inputs.census.non_hist.insert(e.external_id);
    }
  }
  for (const auto& cl : inputs.base.clusters) inputs.census.all.insert(cl.id);
  std::set_difference(inputs.census.all.begin(), inputs.census.all.end(),
                      inputs.census.non_hist.begin(), inputs.census.non_hist.end(),
                      std::inserter(inputs.census.hist, inputs.census.hist.end()));
  for (const auto& cl : inputs.base.clusters) {
    for (const auto& e : cl.members) {
      if (e.kind == ElementKind::CurrentItem) inputs.census.base.insert(cl.id);
    }
  }
  for (const auto& cl : inputs.exp.clusters) {
    for (const auto& e : cl.members) {
      if (e.kind == ElementKind::CurrentItem) inputs.census.exp.insert(cl.id);
    }
  }
  if (fs::exists(root / "ideal.tsv")) {
    attachIdeal(inputs, readElementClustering((root / "ideal.tsv").string()));
  }
  return inputs;
}

}  // namespace ideval
