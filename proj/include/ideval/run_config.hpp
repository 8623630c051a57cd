#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ideval/transform.hpp"

namespace ideval {

enum class Render { Json, Table, Both };

Render parseRender(const std::string& text);  // throws InvalidConfig

struct HistSource {
  std::string path;
  std::string epoch_label;
  double epoch_weight = 1.0;
};

// Parsed JSON run configuration. Relative paths are resolved against the
// directory of the configuration file.
struct RunConfig {
  std::vector<HistSource> hist;
  std::string base;
  std::string exp;
  TransformConfig transform;
  std::optional<std::string> ideal;
  std::optional<std::string> output;
  bool emit_per_element = false;
  Render render = Render::Json;

  // Checks values and that every referenced file is readable.
  void validate() const;
};

RunConfig parseRunConfig(const std::string& json_text, const std::string& base_dir = {});
RunConfig loadRunConfig(const std::string& path);

// Reads every input file and runs the transformation (epoch merge, optional
// item alignment, expansion, ideal completion).
EvalInputs prepareInputs(const RunConfig& cfg);

// Materialized inputs as written by the `transform` command:
// base.tsv, exp.tsv, weights.tsv and optionally ideal.tsv.
void writeMaterialized(const std::string& dir, const EvalInputs& inputs);
EvalInputs readMaterialized(const std::string& dir);

}  // namespace ideval
