#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ideval {

enum class ElementKind : std::uint8_t { CurrentItem, HistoricalItem, SyntheticId };

// One member of the expanded evaluation universe. Historical items from
// different epochs are different elements even when their item ids agree,
// and no historical item ever equals a current item.
struct ElementRef {
  ElementKind kind = ElementKind::CurrentItem;
  std::string epoch;        // only set for HistoricalItem
  std::string external_id;  // item id, or the cluster id for SyntheticId

  static ElementRef current(std::string item_id) {
    return {ElementKind::CurrentItem, {}, std::move(item_id)};
  }
  static ElementRef historical(std::string epoch, std::string item_id) {
    return {ElementKind::HistoricalItem, std::move(epoch), std::move(item_id)};
  }
  static ElementRef synthetic(std::string cluster_id) {
    return {ElementKind::SyntheticId, {}, std::move(cluster_id)};
  }

  bool isSynthetic() const noexcept { return kind == ElementKind::SyntheticId; }

  friend auto operator<=>(const ElementRef&, const ElementRef&) = default;
  friend bool operator==(const ElementRef&, const ElementRef&) = default;
};

struct ElementRefHash {
  std::size_t operator()(const ElementRef& e) const noexcept;
};

// Text encoding shared by the ideal, expanded-clustering and judgement files:
// `cur:<item>`, `hist:<epoch>:<item>` or `id:<cluster_id>`. Epoch labels must
// not contain ':'; item and cluster ids may.
std::string encodeElement(const ElementRef& e);
ElementRef decodeElement(std::string_view text);

using ClusterId = std::string;

struct Cluster {
  ClusterId id;
  std::vector<ElementRef> members;

  friend bool operator==(const Cluster&, const Cluster&) = default;
};

// A partition of elements into clusters keyed by unique ids. Construction does
// not enforce the partition invariants; see validateLabeledClustering().
struct LabeledClustering {
  std::string epoch;
  std::vector<Cluster> clusters;

  std::size_t elementCount() const noexcept;
  std::vector<ElementRef> elements() const;
  std::vector<ClusterId> ids() const;
  const Cluster* find(std::string_view id) const;

  // Clusters sorted by id, members sorted within each cluster.
  LabeledClustering canonical() const;
  // Same grouping of elements, ignoring cluster ids.
  bool samePartitionAs(const LabeledClustering& other) const;
};

class WeightMap {
 public:
  WeightMap() = default;

  // Throws InvalidWeight unless w is finite and strictly positive.
  void set(const ElementRef& e, double w);
  double at(const ElementRef& e) const;  // throws MissingWeight
  std::optional<double> find(const ElementRef& e) const;
  bool contains(const ElementRef& e) const { return weights_.contains(e); }
  std::size_t size() const noexcept { return weights_.size(); }
  void reserve(std::size_t n) { weights_.reserve(n); }

  double total(std::span<const ElementRef> elements) const;

  auto begin() const { return weights_.begin(); }
  auto end() const { return weights_.end(); }

 private:
  std::unordered_map<ElementRef, double, ElementRefHash> weights_;
};

// A clustering together with the weights of its elements.
struct WeightedClustering {
  LabeledClustering clustering;
  WeightMap weights;
};

struct ValidationReport {
  static constexpr std::size_t kMaxPerCategory = 1000;

  std::vector<ElementRef> duplicate_elements;
  std::vector<ClusterId> empty_clusters;
  std::vector<ClusterId> duplicate_cluster_ids;

  bool ok() const noexcept {
    return duplicate_elements.empty() && empty_clusters.empty() &&
           duplicate_cluster_ids.empty();
  }
  std::string summary() const;
};

ValidationReport validateLabeledClustering(const LabeledClustering& c);

// Throws InvalidClustering carrying the report summary when c is not a partition.
void requireValid(const LabeledClustering& c, std::string_view what);

using ElementIndex = std::uint32_t;
using ClusterIndex = std::uint32_t;

// Dense numbering of a set of elements plus their weights. Several membership
// indexes over the same universe share one instance.
class Universe {
 public:
  Universe() = default;

  // Interns elements in the order given. Throws MissingWeight.
  static std::shared_ptr<const Universe> build(std::span<const ElementRef> elements,
                                               const WeightMap& weights);

  std::size_t size() const noexcept { return elements_.size(); }
  const ElementRef& element(ElementIndex i) const { return elements_[i]; }
  double weight(ElementIndex i) const { return weights_[i]; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::optional<ElementIndex> find(const ElementRef& e) const;
  ElementIndex indexOf(const ElementRef& e) const;  // throws UnknownElement
  double totalWeight() const noexcept { return total_weight_; }

 private:
  std::vector<ElementRef> elements_;
  std::vector<double> weights_;
  std::unordered_map<ElementRef, ElementIndex, ElementRefHash> lookup_;
  double total_weight_ = 0.0;
};

class MembershipIndex {
 public:
  // Builds a private universe from the clustering's elements.
  static MembershipIndex build(const LabeledClustering& c, const WeightMap& w);
  // Indexes c against an existing universe; c must cover it exactly
  // (UniverseMismatch otherwise).
  static MembershipIndex build(const LabeledClustering& c,
                               std::shared_ptr<const Universe> universe);

  const Universe& universe() const noexcept { return *universe_; }
  const std::shared_ptr<const Universe>& sharedUniverse() const noexcept {
    return universe_;
  }

  std::size_t clusterCount() const noexcept { return cluster_ids_.size(); }
  const ClusterId& clusterId(ClusterIndex c) const { return cluster_ids_[c]; }
  ClusterIndex owner(ElementIndex e) const { return owner_[e]; }
  std::span<const ClusterIndex> owners() const noexcept { return owner_; }
  std::span<const ElementIndex> members(ClusterIndex c) const;
  double clusterWeight(ClusterIndex c) const { return cluster_weight_[c]; }

  const ClusterId& ownerId(const ElementRef& e) const;  // throws UnknownElement

  // Reconstructs the labeled clustering this index was built from, with
  // members in universe order.
  LabeledClustering toClustering() const;

 private:
  std::shared_ptr<const Universe> universe_;
  std::vector<ClusterId> cluster_ids_;
  std::vector<ClusterIndex> owner_;
  std::vector<std::size_t> member_offsets_;
  std::vector<ElementIndex> member_list_;
  std::vector<double> cluster_weight_;
};

}  // namespace ideval
