#pragma once

#include <string>
#include <vector>

#include "ideval/metrics.hpp"
#include "ideval/transform.hpp"

namespace ideval {

// A worked example with a fully materialized ideal clustering and its
// published metric tables (two-decimal percentages). The TSV sources live
// under data/figures and are compiled into the library.
struct FigureFixture {
  int id = 0;
  std::string title;
  TransformConfig config;
  std::string hist_tsv;
  std::string base_tsv;
  std::string exp_tsv;
  std::string ideal_tsv;
  std::vector<std::pair<std::string, std::string>> expected;  // metric, percent
};

const std::vector<FigureFixture>& figureFixtures();
const FigureFixture& figureFixture(int id);  // throws InvalidConfig

constexpr const char* kFigureEpoch = "H";

EvalInputs figureInputs(const FigureFixture& fx);

struct FigureCell {
  std::string metric;
  std::string expected;
  std::string actual;
  double fraction = 0.0;
  bool ok = false;
};

struct FigureResult {
  int id = 0;
  std::string title;
  std::vector<FigureCell> cells;
  MetricsReport report;

  bool ok() const;
};

// Recomputes a fixture and compares every cell at two-decimal rendering; a
// cell also requires the underlying fraction within 5e-5 of the table value.
FigureResult checkFigure(const FigureFixture& fx);

}  // namespace ideval
