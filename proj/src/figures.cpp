#include "ideval/figures.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "embedded_figures.hpp"
#include "ideval/error.hpp"
#include "ideval/report.hpp"
#include "ideval/tsv_io.hpp"

namespace ideval {
namespace {

std::vector<std::pair<std::string, std::string>> readPairsTsv(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto f = splitTabs(line);
    if (f.size() != 2) throw Error(ErrorCode::ParseError, "bad fixture line '" + line + "'");
    out.emplace_back(std::string(f[0]), std::string(f[1]));
  }
  return out;
}

FigureFixture load(const detail::EmbeddedFigure& raw) {
  FigureFixture fx;
  fx.id = raw.id;
  for (const auto& [key, value] : readPairsTsv(raw.meta)) {
    if (key == "title") {
      fx.title = value;
    } else if (key == "mode") {
      fx.config.mode = value == "simultaneous" ? AssignmentMode::Simultaneous
                                               : AssignmentMode::SeparateAssignment;
    } else if (key == "k") {
      fx.config.k = std::stod(value);
    }
  }
  fx.hist_tsv = raw.hist;
  fx.base_tsv = raw.base;
  fx.exp_tsv = raw.exp;
  fx.ideal_tsv = raw.ideal;
  fx.expected = readPairsTsv(raw.expected);
  return fx;
}

}  // namespace

const std::vector<FigureFixture>& figureFixtures() {
  static const std::vector<FigureFixture> fixtures = [] {
    std::vector<FigureFixture> out;
    for (std::size_t i = 0; i < detail::kEmbeddedFigureCount; ++i) {
      out.push_back(load(detail::kEmbeddedFigures[i]));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    return out;
  }();
  return fixtures;
}

const FigureFixture& figureFixture(int id) {
  for (const auto& fx : figureFixtures()) {
    if (fx.id == id) return fx;
  }
  throw Error(ErrorCode::InvalidConfig, "no figure fixture " + std::to_string(id));
}

EvalInputs figureInputs(const FigureFixture& fx) {
  std::istringstream hist_in(fx.hist_tsv), base_in(fx.base_tsv), exp_in(fx.exp_tsv),
      ideal_in(fx.ideal_tsv);
  const auto hist = readClusteringTsv(hist_in, ElementKind::HistoricalItem, kFigureEpoch);
  const auto base = readClusteringTsv(base_in, ElementKind::CurrentItem);
  const auto exp = readClusteringTsv(exp_in, ElementKind::CurrentItem);
  auto inputs = buildEvalInputs(hist, base.clustering, exp.clustering,
                                combineItemWeights(base, exp), fx.config);
  attachIdeal(inputs, readElementClustering(ideal_in));
  return inputs;
}

bool FigureResult::ok() const {
  return !cells.empty() && std::all_of(cells.begin(), cells.end(), [](const auto& c) { return c.ok; });
}

FigureResult checkFigure(const FigureFixture& fx) {
  FigureResult result;
  result.id = fx.id;
  result.title = fx.title;
  result.report = aggregateQuality(figureInputs(fx));
  for (const auto& [metric, expected] : fx.expected) {
    FigureCell cell{metric, expected, "n/a", 0.0, false};
    if (const auto v = metricValue(result.report, metric)) {
      cell.fraction = *v;
      cell.actual = formatPercent(*v);
      cell.ok = cell.actual == expected &&
                std::abs(*v - std::stod(expected) / 100.0) <= 5e-5 + 1e-12;
    }
    result.cells.push_back(std::move(cell));
  }
  return result;
}

}  // namespace ideval
