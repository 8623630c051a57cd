#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ideval/core.hpp"

namespace ideval {

enum class AssignmentMode {
  // Baseline and experiment label the same clustering; only ids differ.
  SeparateAssignment,
  // Baseline and experiment may also differ in cluster memberships.
  Simultaneous,
};

struct TransformConfig {
  double k = 0.001;  // weight of every synthetic id element
  double hist_scale_factor = 1.0;
  AssignmentMode mode = AssignmentMode::SeparateAssignment;
  bool align_items = false;

  void validate() const;  // throws InvalidConfig
};

struct HistoricalEpoch {
  WeightedClustering clustering;  // items carry the epoch label
  double epoch_weight = 1.0;
};

struct IdCensus {
  std::set<ClusterId> base;
  std::set<ClusterId> exp;
  std::set<ClusterId> hist;
  std::set<ClusterId> all;
  std::set<ClusterId> non_hist;

  bool isNonHistorical(const ClusterId& id) const { return non_hist.contains(id); }
};

// The clusterings fed to the membership evaluation. Base and Exp cover the
// same expanded universe of current items, historical items and synthetic id
// elements; clusters appear in ascending id order.
struct EvalInputs {
  LabeledClustering base;
  LabeledClustering exp;
  WeightMap weight;
  std::optional<LabeledClustering> ideal;
  IdCensus census;
};

// The historical cluster for id, or the synthetic element standing in for it.
std::vector<ElementRef> histMembersOrId(const ClusterId& id, const LabeledClustering& hist);

// Combines the per-clustering weights of current items with max.
WeightMap combineItemWeights(const WeightedClustering& base, const WeightedClustering& exp);

EvalInputs buildEvalInputs(const WeightedClustering& hist, const LabeledClustering& base_labels,
                           const LabeledClustering& exp_labels, const WeightMap& item_weights,
                           const TransformConfig& cfg);

struct AlignedCurrent {
  LabeledClustering base;
  LabeledClustering exp;
  WeightMap weights;
};

// Restricts both clusterings to their shared items, dropping clusters that
// become empty. Shared items take the max of their two weights.
AlignedCurrent alignCurrentItems(const WeightedClustering& base, const WeightedClustering& exp);

WeightedClustering mergeHistoricalEpochs(const std::vector<HistoricalEpoch>& epochs);

// Replaces each id's historical members by one synthetic element weighing
// max(weight of the historical cluster, k). Only impact metrics are preserved,
// so the result carries no ideal.
EvalInputs collapseHistoricalClusters(const EvalInputs& inputs, double k);

// Adds singleton classes for synthetic elements missing from the ideal and
// checks it covers exactly the evaluation universe.
LabeledClustering completeIdeal(const LabeledClustering& ideal, const EvalInputs& inputs);

// Validates and stores the ideal on inputs (after completeIdeal).
void attachIdeal(EvalInputs& inputs, const LabeledClustering& ideal);

}  // namespace ideval
