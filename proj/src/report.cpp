#include "ideval/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace ideval {

const std::vector<std::string>& impactMetricNames() {
  static const std::vector<std::string> names{"JaccardDistance", "SplitRate", "MergeRate"};
  return names;
}

const std::vector<std::string>& qualityMetricNames() {
  static const std::vector<std::string> names{"GoodSplitRate", "BadSplitRate", "GoodMergeRate",
                                              "BadMergeRate",  "DeltaPrecision", "DeltaRecall",
                                              "IQ"};
  return names;
}

std::optional<double> metricValue(const MetricsReport& r, std::string_view name) {
  if (name == "JaccardDistance") return r.impact.jaccard_distance;
  if (name == "SplitRate") return r.impact.split_rate;
  if (name == "MergeRate") return r.impact.merge_rate;
  if (!r.quality) return std::nullopt;
  const auto& q = *r.quality;
  if (name == "GoodSplitRate") return q.good_split_rate;
  if (name == "BadSplitRate") return q.bad_split_rate;
  if (name == "GoodMergeRate") return q.good_merge_rate;
  if (name == "BadMergeRate") return q.bad_merge_rate;
  if (name == "DeltaPrecision") return q.delta_precision;
  if (name == "DeltaRecall") return q.delta_recall;
  if (name == "IQ") return q.iq;
  return std::nullopt;
}

std::string formatPercent(double fraction) {
  // Work in integer millionths of a percent so that ties round predictably.
  const long long micro = std::llround(fraction * 1e8);
  const long long hundredths = (std::llabs(micro) + 5000) / 10000;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%lld.%02lld", (micro < 0 && hundredths != 0) ? "-" : "",
                hundredths / 100, hundredths % 100);
  return buf;
}

nlohmann::json toJson(const MetricsReport& r) {
  using nlohmann::json;
  json out;
  out["impact"] = {{"jaccard_distance", r.impact.jaccard_distance},
                   {"split_rate", r.impact.split_rate},
                   {"merge_rate", r.impact.merge_rate}};
  if (r.quality) {
    const auto& q = *r.quality;
    out["quality"] = {{"good_split_rate", q.good_split_rate}, {"bad_split_rate", q.bad_split_rate},
                      {"good_merge_rate", q.good_merge_rate}, {"bad_merge_rate", q.bad_merge_rate},
                      {"delta_precision", q.delta_precision}, {"delta_recall", q.delta_recall},
                      {"iq", q.iq}};
  } else {
    out["quality"] = nullptr;
  }
  if (r.distances) {
    out["distances"] = {{"base_ideal", r.distances->base_ideal},
                        {"exp_ideal", r.distances->exp_ideal},
                        {"base_exp", r.distances->base_exp}};
  } else {
    out["distances"] = nullptr;
  }
  out["total_weight"] = r.total_weight;
  if (r.estimate) {
    out["estimate"] = true;
    out["coverage_weight"] = r.coverage_weight.value_or(0.0);
  }
  if (r.per_element) {
    json rows = json::array();
    for (const auto& p : *r.per_element) {
      json row = {{"element", encodeElement(p.element)},
                  {"weight", p.weight},
                  {"jaccard_distance", p.jaccard_distance},
                  {"split_rate", p.split_rate},
                  {"merge_rate", p.merge_rate}};
      if (r.quality) {
        row["good_split_rate"] = p.good_split_rate;
        row["bad_split_rate"] = p.bad_split_rate;
        row["good_merge_rate"] = p.good_merge_rate;
        row["bad_merge_rate"] = p.bad_merge_rate;
        row["precision_base"] = p.precision_base;
        row["precision_exp"] = p.precision_exp;
        row["recall_base"] = p.recall_base;
        row["recall_exp"] = p.recall_exp;
      }
      rows.push_back(std::move(row));
    }
    out["per_element"] = std::move(rows);
  }
  return out;
}

std::string toJsonText(const MetricsReport& r) { return toJson(r).dump(2) + "\n"; }

std::string renderTable(const MetricsReport& r) {
  std::ostringstream out;
  auto row = [&](const std::string& name) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "  %-16s %8s%%\n", name.c_str(),
                  formatPercent(*metricValue(r, name)).c_str());
    out << buf;
  };
  out << "Impact metrics\n";
  for (const auto& n : impactMetricNames()) row(n);
  if (r.quality) {
    out << "\nQuality metrics";
    if (r.estimate) {
      out << " (estimate, coverage " << formatPercent(r.coverage_weight.value_or(0.0)) << "%)";
    }
    out << '\n';
    for (const auto& n : qualityMetricNames()) row(n);
  }
  return out.str();
}

}  // namespace ideval
