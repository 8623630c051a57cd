#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "ideval/core.hpp"

namespace ideval {

std::vector<std::string_view> splitTabs(std::string_view line);

// Shortest text that parses back to exactly the same double.
std::string formatWeight(double w);

// `item <TAB> cluster_id [<TAB> weight]`, weight defaulting to 1.0; `#` lines
// are comments. Elements are current items, or historical items of `epoch`
// when kind is HistoricalItem. Clusters keep first-seen order.
WeightedClustering readClusteringTsv(std::istream& in, ElementKind kind,
                                     const std::string& epoch = {});
WeightedClustering readClusteringTsv(const std::string& path, ElementKind kind,
                                     const std::string& epoch = {});
void writeClusteringTsv(std::ostream& out, const WeightedClustering& c);

// `element <TAB> cluster_id` with prefixed element encodings. Used for ideal
// files and for materialized Base/Exp clusterings.
LabeledClustering readElementClustering(std::istream& in);
LabeledClustering readElementClustering(const std::string& path);
void writeElementClustering(std::ostream& out, const LabeledClustering& c);

// `element <TAB> weight`.
WeightMap readElementWeights(std::istream& in);
WeightMap readElementWeights(const std::string& path);
void writeElementWeights(std::ostream& out, const LabeledClustering& order, const WeightMap& w);

}  // namespace ideval
