#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ideval/metrics.hpp"

namespace ideval {

// Row order of the rendered tables.
const std::vector<std::string>& impactMetricNames();
const std::vector<std::string>& qualityMetricNames();

// Looks a metric up by its table name, e.g. "DeltaRecall".
std::optional<double> metricValue(const MetricsReport& r, std::string_view name);

// Percentage with two decimals, rounded half away from zero after discarding
// floating-point noise below 1e-6 percentage points. Never prints "-0.00".
std::string formatPercent(double fraction);

nlohmann::json toJson(const MetricsReport& r);
std::string toJsonText(const MetricsReport& r);
std::string renderTable(const MetricsReport& r);

}  // namespace ideval
