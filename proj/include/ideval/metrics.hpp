#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ideval/core.hpp"
#include "ideval/transform.hpp"

namespace ideval {

struct PointwiseImpact {
  double jaccard_distance = 0.0;
  double split_rate = 0.0;
  double merge_rate = 0.0;
};

struct PointwiseRecord {
  ElementRef element;
  double weight = 0.0;
  double jaccard_distance = 0.0;
  double split_rate = 0.0;
  double merge_rate = 0.0;
  double good_split_rate = 0.0;
  double bad_split_rate = 0.0;
  double good_merge_rate = 0.0;
  double bad_merge_rate = 0.0;
  double precision_base = 1.0;
  double precision_exp = 1.0;
  double recall_base = 1.0;
  double recall_exp = 1.0;
};

struct ImpactMetrics {
  double jaccard_distance = 0.0;
  double split_rate = 0.0;
  double merge_rate = 0.0;
};

struct QualityMetrics {
  double good_split_rate = 0.0;
  double bad_split_rate = 0.0;
  double good_merge_rate = 0.0;
  double bad_merge_rate = 0.0;
  double delta_precision = 0.0;
  double delta_recall = 0.0;
  double iq = 0.0;
};

struct Distances {
  double base_ideal = 0.0;
  double exp_ideal = 0.0;
  double base_exp = 0.0;
};

struct MetricsReport {
  ImpactMetrics impact;
  std::optional<QualityMetrics> quality;
  std::optional<Distances> distances;
  std::optional<std::vector<PointwiseRecord>> per_element;
  double total_weight = 0.0;
  // Set for quality estimated from human judgements rather than a full ideal.
  bool estimate = false;
  std::optional<double> coverage_weight;
};

struct MetricsOptions {
  bool per_element = false;
  // 0 means: IDEVAL_THREADS if set, otherwise the hardware concurrency.
  unsigned threads = 0;
};

unsigned resolveThreadCount(unsigned requested);

// Base, Exp and (optionally) Ideal indexed over one shared universe, in the
// element order of the Base clustering.
struct IndexedInputs {
  MembershipIndex base;
  MembershipIndex exp;
  std::optional<MembershipIndex> ideal;
};

IndexedInputs indexInputs(const EvalInputs& inputs);

// Single-element metrics evaluated with explicit set operations on the
// element's clusters. Throws UnknownElement.
PointwiseImpact pointwiseImpact(const MembershipIndex& base, const MembershipIndex& exp,
                                const ElementRef& e);
PointwiseRecord pointwiseQuality(const MembershipIndex& base, const MembershipIndex& exp,
                                 const MembershipIndex& ideal, const ElementRef& e);

// Weight-weighted mean of pointwise Jaccard distance between two clusterings.
double expectedJaccardDistance(const MembershipIndex& a, const MembershipIndex& b);

// Fraction of the Base-to-Exp distance that moved towards Ideal; 0 when Base
// and Exp coincide.
double computeIQ(double d_base_ideal, double d_exp_ideal, double d_base_exp);

MetricsReport aggregateImpact(const EvalInputs& inputs, const MetricsOptions& opts = {});
// Impact, quality and distances. Throws MissingIdealClass without an ideal.
MetricsReport aggregateQuality(const EvalInputs& inputs, const MetricsOptions& opts = {});
// aggregateQuality when an ideal is attached, aggregateImpact otherwise.
MetricsReport evaluate(const EvalInputs& inputs, const MetricsOptions& opts = {});

// Aggregates over the elements selected by mask (all when empty). Quality is
// computed when ideal is non-null. Per-element records follow opts.
MetricsReport aggregateIndexed(const MembershipIndex& base, const MembershipIndex& exp,
                               const MembershipIndex* ideal, std::span<const char> mask,
                               const MetricsOptions& opts);

// Pointwise Jaccard distance between Base and Exp for every universe element,
// in universe order.
std::vector<double> pointwiseJaccardDistances(const MembershipIndex& base,
                                              const MembershipIndex& exp);

}  // namespace ideval
