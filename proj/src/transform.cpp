#include "ideval/transform.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "ideval/error.hpp"
#include "ideval/summation.hpp"

namespace ideval {
namespace {

using ClusterLookup = std::unordered_map<std::string_view, const Cluster*>;

ClusterLookup lookupById(const LabeledClustering& c) {
  ClusterLookup out;
  out.reserve(c.clusters.size());
  for (const auto& cl : c.clusters) out.emplace(cl.id, &cl);
  return out;
}

void requireKind(const LabeledClustering& c, ElementKind kind, std::string_view what) {
  for (const auto& cl : c.clusters) {
    for (const auto& e : cl.members) {
      if (e.kind != kind) {
        throw Error(ErrorCode::InvalidClustering,
                    std::string(what) + " contains unexpected element " + encodeElement(e));
      }
    }
  }
}

using ElementSet = std::unordered_set<ElementRef, ElementRefHash>;

ElementSet elementSet(const LabeledClustering& c) {
  ElementSet out;
  out.reserve(c.elementCount());
  for (const auto& cl : c.clusters) out.insert(cl.members.begin(), cl.members.end());
  return out;
}

void requireSameItems(const LabeledClustering& base, const LabeledClustering& exp) {
  const auto base_items = elementSet(base);
  std::size_t matched = 0;
  for (const auto& cl : exp.clusters) {
    for (const auto& e : cl.members) {
      if (!base_items.contains(e)) {
        throw Error(ErrorCode::ItemUniverseMismatch,
                    "item " + encodeElement(e) + " is clustered by the experiment only");
      }
      ++matched;
    }
  }
  if (matched != base_items.size()) {
    throw Error(ErrorCode::ItemUniverseMismatch,
                "baseline clusters " + std::to_string(base_items.size() - matched) +
                    " items the experiment does not");
  }
}

// Separate assignment requires both labelings to group items identically.
void requireSamePartition(const LabeledClustering& base, const LabeledClustering& exp) {
  requireSameItems(base, exp);
  std::unordered_map<ElementRef, std::size_t, ElementRefHash> exp_owner;
  exp_owner.reserve(exp.elementCount());
  for (std::size_t i = 0; i < exp.clusters.size(); ++i) {
    for (const auto& e : exp.clusters[i].members) exp_owner.emplace(e, i);
  }
  std::vector<bool> used(exp.clusters.size(), false);
  for (const auto& cl : base.clusters) {
    const std::size_t target = exp_owner.at(cl.members.front());
    bool same = !used[target] && exp.clusters[target].members.size() == cl.members.size();
    for (const auto& e : cl.members) same = same && exp_owner.at(e) == target;
    if (!same) {
      throw Error(ErrorCode::ItemUniverseMismatch,
                  "separate assignment requires identical memberships, but baseline cluster " +
                      cl.id + " has no identical experiment cluster");
    }
    used[target] = true;
  }
}

}  // namespace

void TransformConfig::validate() const {
  if (!std::isfinite(k) || k <= 0.0) {
    throw Error(ErrorCode::InvalidConfig, "k must be finite and positive");
  }
  if (!std::isfinite(hist_scale_factor) || hist_scale_factor <= 0.0) {
    throw Error(ErrorCode::InvalidConfig, "hist_scale_factor must be finite and positive");
  }
}

std::vector<ElementRef> histMembersOrId(const ClusterId& id, const LabeledClustering& hist) {
  const Cluster* c = hist.find(id);
  if (c != nullptr && !c->members.empty()) return c->members;
  return {ElementRef::synthetic(id)};
}

WeightMap combineItemWeights(const WeightedClustering& base, const WeightedClustering& exp) {
  WeightMap out;
  out.reserve(base.weights.size());
  for (const auto& [e, w] : base.weights) out.set(e, w);
  for (const auto& [e, w] : exp.weights) {
    const auto prior = out.find(e);
    out.set(e, prior ? std::max(*prior, w) : w);
  }
  return out;
}

EvalInputs buildEvalInputs(const WeightedClustering& hist, const LabeledClustering& base_labels,
                           const LabeledClustering& exp_labels, const WeightMap& item_weights,
                           const TransformConfig& cfg) {
  cfg.validate();
  requireValid(hist.clustering, "historical clustering");
  requireValid(base_labels, "baseline clustering");
  requireValid(exp_labels, "experiment clustering");
  requireKind(hist.clustering, ElementKind::HistoricalItem, "historical clustering");
  requireKind(base_labels, ElementKind::CurrentItem, "baseline clustering");
  requireKind(exp_labels, ElementKind::CurrentItem, "experiment clustering");
  if (cfg.mode == AssignmentMode::SeparateAssignment) {
    requireSamePartition(base_labels, exp_labels);
  } else {
    requireSameItems(base_labels, exp_labels);
  }

  EvalInputs out;
  auto& census = out.census;
  for (const auto& c : base_labels.clusters) census.base.insert(c.id);
  for (const auto& c : exp_labels.clusters) census.exp.insert(c.id);
  for (const auto& c : hist.clustering.clusters) census.hist.insert(c.id);
  census.all = census.base;
  census.all.insert(census.exp.begin(), census.exp.end());
  census.all.insert(census.hist.begin(), census.hist.end());
  std::set_difference(census.all.begin(), census.all.end(), census.hist.begin(),
                      census.hist.end(), std::inserter(census.non_hist, census.non_hist.end()));

  const auto hist_by_id = lookupById(hist.clustering);
  const auto base_by_id = lookupById(base_labels);
  const auto exp_by_id = lookupById(exp_labels);

  auto& weight = out.weight;
  weight.reserve(base_labels.elementCount() + hist.clustering.elementCount() +
                 census.non_hist.size());

  out.base.clusters.reserve(census.all.size());
  out.exp.clusters.reserve(census.all.size());
  for (const auto& id : census.all) {
    std::vector<ElementRef> hist_part;
    if (const auto it = hist_by_id.find(id); it != hist_by_id.end()) {
      hist_part = it->second->members;
      for (const auto& h : hist_part) {
        weight.set(h, cfg.hist_scale_factor * hist.weights.at(h));
      }
    } else {
      hist_part.push_back(ElementRef::synthetic(id));
      weight.set(hist_part.back(), cfg.k);
    }
    auto expand = [&](const ClusterLookup& labels) {
      Cluster cl{id, hist_part};
      if (const auto it = labels.find(id); it != labels.end()) {
        cl.members.insert(cl.members.end(), it->second->members.begin(),
                          it->second->members.end());
      }
      return cl;
    };
    out.base.clusters.push_back(expand(base_by_id));
    out.exp.clusters.push_back(expand(exp_by_id));
  }
  for (const auto& c : base_labels.clusters) {
    for (const auto& e : c.members) weight.set(e, item_weights.at(e));
  }
  return out;
}

AlignedCurrent alignCurrentItems(const WeightedClustering& base, const WeightedClustering& exp) {
  const auto base_items = elementSet(base.clustering);
  const auto exp_items = elementSet(exp.clustering);
  auto restrict = [](const LabeledClustering& c, const ElementSet& keep) {
    LabeledClustering out{c.epoch, {}};
    for (const auto& cl : c.clusters) {
      Cluster kept{cl.id, {}};
      for (const auto& e : cl.members) {
        if (keep.contains(e)) kept.members.push_back(e);
      }
      if (!kept.members.empty()) out.clusters.push_back(std::move(kept));
    }
    return out;
  };
  AlignedCurrent out{restrict(base.clustering, exp_items), restrict(exp.clustering, base_items),
                     {}};
  if (out.base.clusters.empty()) {
    throw Error(ErrorCode::EmptyIntersection, "baseline and experiment share no items");
  }
  for (const auto& cl : out.base.clusters) {
    for (const auto& e : cl.members) {
      out.weights.set(e, std::max(base.weights.at(e), exp.weights.at(e)));
    }
  }
  return out;
}

WeightedClustering mergeHistoricalEpochs(const std::vector<HistoricalEpoch>& epochs) {
  if (epochs.empty()) {
    throw Error(ErrorCode::InvalidConfig, "at least one historical epoch is required");
  }
  std::set<std::string> labels;
  CompensatedSum total_epoch_weight;
  for (const auto& ep : epochs) {
    if (!labels.insert(ep.clustering.clustering.epoch).second) {
      throw Error(ErrorCode::DuplicateEpochLabel,
                  "epoch label '" + ep.clustering.clustering.epoch + "' used twice");
    }
    if (!std::isfinite(ep.epoch_weight) || ep.epoch_weight <= 0.0) {
      throw Error(ErrorCode::InvalidConfig, "epoch weights must be finite and positive");
    }
    total_epoch_weight += ep.epoch_weight;
  }

  WeightedClustering out;
  std::string joined;
  for (const auto& ep : epochs) {
    if (!joined.empty()) joined += ',';
    joined += ep.clustering.clustering.epoch;
  }
  out.clustering.epoch = joined;

  // Cluster ids keep first-seen order across epochs.
  std::unordered_map<std::string, std::size_t> position;
  for (const auto& ep : epochs) {
    requireValid(ep.clustering.clustering, "historical epoch " + ep.clustering.clustering.epoch);
    const double scale = ep.epoch_weight / total_epoch_weight.value();
    for (const auto& cl : ep.clustering.clustering.clusters) {
      auto [it, fresh] = position.try_emplace(cl.id, out.clustering.clusters.size());
      if (fresh) out.clustering.clusters.push_back(Cluster{cl.id, {}});
      auto& members = out.clustering.clusters[it->second].members;
      for (const auto& h : cl.members) {
        if (h.kind != ElementKind::HistoricalItem || h.epoch != ep.clustering.clustering.epoch) {
          throw Error(ErrorCode::InvalidClustering,
                      "element " + encodeElement(h) + " does not belong to epoch " +
                          ep.clustering.clustering.epoch);
        }
        members.push_back(h);
        out.weights.set(h, scale * ep.clustering.weights.at(h));
      }
    }
  }
  return out;
}

EvalInputs collapseHistoricalClusters(const EvalInputs& inputs, double k) {
  EvalInputs out;
  out.census = inputs.census;
  auto collapse = [&](const LabeledClustering& c, bool set_weights) {
    LabeledClustering res{c.epoch, {}};
    res.clusters.reserve(c.clusters.size());
    for (const auto& cl : c.clusters) {
      Cluster kept{cl.id, {}};
      CompensatedSum hist_weight;
      bool has_hist = false;
      for (const auto& e : cl.members) {
        if (e.kind == ElementKind::HistoricalItem) {
          hist_weight += inputs.weight.at(e);
          has_hist = true;
        } else if (!e.isSynthetic()) {
          kept.members.push_back(e);
          if (set_weights) out.weight.set(e, inputs.weight.at(e));
        }
      }
      ElementRef atom = ElementRef::synthetic(cl.id);
      if (set_weights) {
        const double w = has_hist ? std::max(hist_weight.value(), k) : inputs.weight.at(atom);
        out.weight.set(atom, w);
      }
      kept.members.insert(kept.members.begin(), std::move(atom));
      res.clusters.push_back(std::move(kept));
    }
    return res;
  };
  out.base = collapse(inputs.base, true);
  out.exp = collapse(inputs.exp, false);
  return out;
}

LabeledClustering completeIdeal(const LabeledClustering& ideal, const EvalInputs& inputs) {
  requireValid(ideal, "ideal clustering");
  LabeledClustering out = ideal;
  ElementSet covered;
  covered.reserve(ideal.elementCount());
  for (const auto& cl : ideal.clusters) {
    for (const auto& e : cl.members) {
      if (!inputs.weight.contains(e)) {
        throw Error(ErrorCode::UniverseMismatch,
                    "ideal element " + encodeElement(e) + " is not part of the evaluation");
      }
      covered.insert(e);
    }
  }
  std::unordered_set<std::string> class_ids;
  for (const auto& cl : ideal.clusters) class_ids.insert(cl.id);
  for (const auto& cl : inputs.base.clusters) {
    for (const auto& e : cl.members) {
      if (covered.contains(e)) continue;
      if (!e.isSynthetic()) {
        throw Error(ErrorCode::MissingIdealClass,
                    "ideal clustering has no class for " + encodeElement(e));
      }
      std::string id = "~" + encodeElement(e);
      while (!class_ids.insert(id).second) id += '~';
      out.clusters.push_back(Cluster{std::move(id), {e}});
    }
  }
  return out;
}

void attachIdeal(EvalInputs& inputs, const LabeledClustering& ideal) {
  inputs.ideal = completeIdeal(ideal, inputs);
}

}  // namespace ideval
