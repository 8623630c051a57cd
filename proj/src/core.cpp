#include "ideval/core.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_set>

#include "ideval/error.hpp"
#include "ideval/summation.hpp"

namespace ideval {

std::string_view errorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidWeight: return "InvalidWeight";
    case ErrorCode::MissingWeight: return "MissingWeight";
    case ErrorCode::InvalidClustering: return "InvalidClustering";
    case ErrorCode::ItemUniverseMismatch: return "ItemUniverseMismatch";
    case ErrorCode::EmptyIntersection: return "EmptyIntersection";
    case ErrorCode::DuplicateEpochLabel: return "DuplicateEpochLabel";
    case ErrorCode::UnknownElement: return "UnknownElement";
    case ErrorCode::MissingIdealClass: return "MissingIdealClass";
    case ErrorCode::UniverseMismatch: return "UniverseMismatch";
    case ErrorCode::NotABijection: return "NotABijection";
    case ErrorCode::NothingToSample: return "NothingToSample";
    case ErrorCode::UnknownPair: return "UnknownPair";
    case ErrorCode::InconsistentJudgements: return "InconsistentJudgements";
    case ErrorCode::InsufficientCoverage: return "InsufficientCoverage";
  }
  return "Unknown";
}

std::size_t ElementRefHash::operator()(const ElementRef& e) const noexcept {
  std::size_t h = std::hash<std::string>{}(e.external_id);
  h ^= std::hash<std::string>{}(e.epoch) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h ^= static_cast<std::size_t>(e.kind) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

std::string encodeElement(const ElementRef& e) {
  switch (e.kind) {
    case ElementKind::CurrentItem: return "cur:" + e.external_id;
    case ElementKind::HistoricalItem: return "hist:" + e.epoch + ":" + e.external_id;
    case ElementKind::SyntheticId: return "id:" + e.external_id;
  }
  return {};
}

ElementRef decodeElement(std::string_view text) {
  auto bad = [&] {
    return Error(ErrorCode::ParseError, "malformed element '" + std::string(text) + "'");
  };
  if (text.starts_with("cur:")) {
    if (text.size() == 4) throw bad();
    return ElementRef::current(std::string(text.substr(4)));
  }
  if (text.starts_with("id:")) {
    if (text.size() == 3) throw bad();
    return ElementRef::synthetic(std::string(text.substr(3)));
  }
  if (text.starts_with("hist:")) {
    const auto rest = text.substr(5);
    const auto colon = rest.find(':');
    if (colon == std::string_view::npos || colon + 1 == rest.size()) throw bad();
    return ElementRef::historical(std::string(rest.substr(0, colon)),
                                  std::string(rest.substr(colon + 1)));
  }
  throw bad();
}

std::size_t LabeledClustering::elementCount() const noexcept {
  std::size_t n = 0;
  for (const auto& c : clusters) n += c.members.size();
  return n;
}

std::vector<ElementRef> LabeledClustering::elements() const {
  std::vector<ElementRef> out;
  out.reserve(elementCount());
  for (const auto& c : clusters) out.insert(out.end(), c.members.begin(), c.members.end());
  return out;
}

std::vector<ClusterId> LabeledClustering::ids() const {
  std::vector<ClusterId> out;
  out.reserve(clusters.size());
  for (const auto& c : clusters) out.push_back(c.id);
  return out;
}

const Cluster* LabeledClustering::find(std::string_view id) const {
  for (const auto& c : clusters) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

LabeledClustering LabeledClustering::canonical() const {
  LabeledClustering out{epoch, clusters};
  for (auto& c : out.clusters) std::sort(c.members.begin(), c.members.end());
  std::sort(out.clusters.begin(), out.clusters.end(),
            [](const Cluster& a, const Cluster& b) { return a.id < b.id; });
  return out;
}

bool LabeledClustering::samePartitionAs(const LabeledClustering& other) const {
  auto groups = [](const LabeledClustering& c) {
    std::vector<std::vector<ElementRef>> g;
    for (const auto& cl : c.clusters) {
      g.push_back(cl.members);
      std::sort(g.back().begin(), g.back().end());
    }
    std::sort(g.begin(), g.end());
    return g;
  };
  return groups(*this) == groups(other);
}

void WeightMap::set(const ElementRef& e, double w) {
  if (!std::isfinite(w) || w <= 0.0) {
    std::ostringstream msg;
    msg << "weight of " << encodeElement(e) << " must be finite and positive, got " << w;
    throw Error(ErrorCode::InvalidWeight, msg.str());
  }
  weights_[e] = w;
}

double WeightMap::at(const ElementRef& e) const {
  const auto it = weights_.find(e);
  if (it == weights_.end()) {
    throw Error(ErrorCode::MissingWeight, "no weight for element " + encodeElement(e));
  }
  return it->second;
}

std::optional<double> WeightMap::find(const ElementRef& e) const {
  const auto it = weights_.find(e);
  if (it == weights_.end()) return std::nullopt;
  return it->second;
}

double WeightMap::total(std::span<const ElementRef> elements) const {
  CompensatedSum sum;
  for (const auto& e : elements) sum += at(e);
  return sum.value();
}

std::string ValidationReport::summary() const {
  std::ostringstream out;
  auto list = [&](const char* label, const auto& items, auto render) {
    if (items.empty()) return;
    out << label << " (" << items.size() << "):";
    for (std::size_t i = 0; i < items.size() && i < 5; ++i) out << ' ' << render(items[i]);
    if (items.size() > 5) out << " ...";
    out << "; ";
  };
  auto id = [](const ClusterId& c) { return c; };
  list("duplicate elements", duplicate_elements, encodeElement);
  list("empty clusters", empty_clusters, id);
  list("duplicate cluster ids", duplicate_cluster_ids, id);
  std::string s = out.str();
  if (s.size() >= 2) s.resize(s.size() - 2);
  return s;
}

ValidationReport validateLabeledClustering(const LabeledClustering& c) {
  ValidationReport report;
  auto push = [](auto& list, auto value) {
    if (list.size() < ValidationReport::kMaxPerCategory) list.push_back(std::move(value));
  };
  std::unordered_set<std::string_view> seen_ids;
  std::unordered_set<ClusterId> duplicated_ids;
  std::unordered_map<ElementRef, bool, ElementRefHash> seen_elements;
  seen_elements.reserve(c.elementCount());
  for (const auto& cluster : c.clusters) {
    if (!seen_ids.insert(cluster.id).second && duplicated_ids.insert(cluster.id).second) {
      push(report.duplicate_cluster_ids, cluster.id);
    }
    if (cluster.members.empty()) push(report.empty_clusters, cluster.id);
    for (const auto& e : cluster.members) {
      auto [it, fresh] = seen_elements.try_emplace(e, false);
      if (!fresh && !it->second) {
        it->second = true;
        push(report.duplicate_elements, e);
      }
    }
  }
  return report;
}

void requireValid(const LabeledClustering& c, std::string_view what) {
  const auto report = validateLabeledClustering(c);
  if (!report.ok()) {
    throw Error(ErrorCode::InvalidClustering,
                std::string(what) + " is not a valid clustering: " + report.summary());
  }
}

std::shared_ptr<const Universe> Universe::build(std::span<const ElementRef> elements,
                                                const WeightMap& weights) {
  auto u = std::make_shared<Universe>();
  u->elements_.assign(elements.begin(), elements.end());
  u->weights_.reserve(elements.size());
  u->lookup_.reserve(elements.size());
  CompensatedSum total;
  for (std::size_t i = 0; i < u->elements_.size(); ++i) {
    const auto& e = u->elements_[i];
    if (!u->lookup_.try_emplace(e, static_cast<ElementIndex>(i)).second) {
      throw Error(ErrorCode::InvalidClustering, "element listed twice: " + encodeElement(e));
    }
    const double w = weights.at(e);
    u->weights_.push_back(w);
    total += w;
  }
  u->total_weight_ = total.value();
  return u;
}

std::optional<ElementIndex> Universe::find(const ElementRef& e) const {
  const auto it = lookup_.find(e);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

ElementIndex Universe::indexOf(const ElementRef& e) const {
  const auto i = find(e);
  if (!i) throw Error(ErrorCode::UnknownElement, "unknown element " + encodeElement(e));
  return *i;
}

MembershipIndex MembershipIndex::build(const LabeledClustering& c, const WeightMap& w) {
  const auto elements = c.elements();
  return build(c, Universe::build(elements, w));
}

MembershipIndex MembershipIndex::build(const LabeledClustering& c,
                                       std::shared_ptr<const Universe> universe) {
  requireValid(c, "clustering");
  MembershipIndex idx;
  idx.universe_ = std::move(universe);
  const auto& u = *idx.universe_;
  if (c.elementCount() != u.size()) {
    throw Error(ErrorCode::UniverseMismatch,
                "clustering has " + std::to_string(c.elementCount()) +
                    " elements but the universe has " + std::to_string(u.size()));
  }
  constexpr auto kUnset = static_cast<ClusterIndex>(-1);
  idx.owner_.assign(u.size(), kUnset);
  idx.cluster_ids_.reserve(c.clusters.size());
  for (std::size_t ci = 0; ci < c.clusters.size(); ++ci) {
    idx.cluster_ids_.push_back(c.clusters[ci].id);
    for (const auto& e : c.clusters[ci].members) {
      const auto ei = u.find(e);
      if (!ei) {
        throw Error(ErrorCode::UniverseMismatch,
                    "element " + encodeElement(e) + " is not part of the universe");
      }
      idx.owner_[*ei] = static_cast<ClusterIndex>(ci);
    }
  }

  // Counting sort into CSR layout keeps members in universe order.
  const std::size_t nc = c.clusters.size();
  idx.member_offsets_.assign(nc + 1, 0);
  for (const auto o : idx.owner_) ++idx.member_offsets_[o + 1];
  for (std::size_t i = 0; i < nc; ++i) idx.member_offsets_[i + 1] += idx.member_offsets_[i];
  idx.member_list_.resize(u.size());
  std::vector<std::size_t> cursor(idx.member_offsets_.begin(), idx.member_offsets_.end() - 1);
  std::vector<CompensatedSum> sums(nc);
  for (ElementIndex e = 0; e < u.size(); ++e) {
    const auto o = idx.owner_[e];
    idx.member_list_[cursor[o]++] = e;
    sums[o] += u.weight(e);
  }
  idx.cluster_weight_.reserve(nc);
  for (const auto& s : sums) idx.cluster_weight_.push_back(s.value());
  return idx;
}

std::span<const ElementIndex> MembershipIndex::members(ClusterIndex c) const {
  return std::span<const ElementIndex>(member_list_)
      .subspan(member_offsets_[c], member_offsets_[c + 1] - member_offsets_[c]);
}

const ClusterId& MembershipIndex::ownerId(const ElementRef& e) const {
  return cluster_ids_[owner_[universe_->indexOf(e)]];
}

LabeledClustering MembershipIndex::toClustering() const {
  LabeledClustering out;
  out.clusters.reserve(cluster_ids_.size());
  for (ClusterIndex c = 0; c < cluster_ids_.size(); ++c) {
    Cluster cl{cluster_ids_[c], {}};
    for (const auto e : members(c)) cl.members.push_back(universe_->element(e));
    out.clusters.push_back(std::move(cl));
  }
  return out;
}

}  // namespace ideval
