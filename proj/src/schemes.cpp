#include "ideval/schemes.hpp"

#include <algorithm>
#include <optional>
#include <unordered_map>
#include <vector>

#include "ideval/error.hpp"
#include "ideval/summation.hpp"

namespace ideval {
namespace {

// Cluster positions ordered by smallest member external id, then key.
std::vector<std::size_t> canonicalOrder(const LabeledClustering& c) {
  std::vector<std::pair<std::string, std::size_t>> keyed;
  keyed.reserve(c.clusters.size());
  for (std::size_t i = 0; i < c.clusters.size(); ++i) {
    const auto& m = c.clusters[i].members;
    const auto smallest = std::min_element(m.begin(), m.end(), [](const auto& a, const auto& b) {
      return a.external_id < b.external_id;
    });
    keyed.emplace_back(smallest->external_id, i);
  }
  std::sort(keyed.begin(), keyed.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return c.clusters[a.second].id < c.clusters[b.second].id;
  });
  std::vector<std::size_t> out;
  out.reserve(keyed.size());
  for (const auto& k : keyed) out.push_back(k.second);
  return out;
}

class FreshIdMinter {
 public:
  FreshIdMinter(std::string prefix, long long next, const std::set<ClusterId>& reserved)
      : prefix_(std::move(prefix)), next_(next), reserved_(reserved) {}

  ClusterId mint() {
    for (;;) {
      ClusterId id = prefix_ + std::to_string(next_++);
      if (!reserved_.contains(id)) return id;
    }
  }

 private:
  std::string prefix_;
  long long next_;
  const std::set<ClusterId>& reserved_;
};

AssignmentResult labelClusters(const LabeledClustering& c,
                               const std::vector<ClusterId>& id_for_cluster) {
  AssignmentResult out;
  out.labels.epoch = c.epoch;
  std::vector<std::size_t> order(c.clusters.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return id_for_cluster[a] < id_for_cluster[b]; });
  for (const auto i : order) {
    out.labels.clusters.push_back(Cluster{id_for_cluster[i], c.clusters[i].members});
    out.assigned.emplace(c.clusters[i].id, id_for_cluster[i]);
  }
  return out;
}

}  // namespace

AssignmentResult assignFreshIds(const LabeledClustering& c, const std::string& prefix,
                                long long start, const std::set<ClusterId>& reserved) {
  requireValid(c, "clustering");
  FreshIdMinter minter(prefix, start, reserved);
  std::vector<ClusterId> ids(c.clusters.size());
  for (const auto i : canonicalOrder(c)) ids[i] = minter.mint();
  auto out = labelClusters(c, ids);
  out.fresh_ids_minted.insert(ids.begin(), ids.end());
  return out;
}

AssignmentResult assignByMajorityVote(const LabeledClustering& c, const LabeledClustering& hist,
                                      const WeightMap& hist_weights, const std::string& prefix) {
  requireValid(c, "clustering");
  requireValid(hist, "historical clustering");

  struct Vote {
    const ClusterId* hist_id;
    double weight;
  };
  std::unordered_map<std::string, std::vector<Vote>> votes_by_item;
  for (const auto& hc : hist.clusters) {
    for (const auto& h : hc.members) {
      votes_by_item[h.external_id].push_back(Vote{&hc.id, hist_weights.at(h)});
    }
  }

  // Tally per cluster, keyed by historical id.
  std::vector<std::map<ClusterId, CompensatedSum>> tallies(c.clusters.size());
  for (std::size_t i = 0; i < c.clusters.size(); ++i) {
    for (const auto& e : c.clusters[i].members) {
      const auto it = votes_by_item.find(e.external_id);
      if (it == votes_by_item.end()) continue;
      for (const auto& v : it->second) tallies[i][*v.hist_id] += v.weight;
    }
  }

  // Each historical id goes to the cluster voting for it most strongly.
  struct Claim {
    std::size_t cluster;
    double weight;
  };
  std::map<ClusterId, Claim> winner;
  for (std::size_t i = 0; i < c.clusters.size(); ++i) {
    for (const auto& [hid, sum] : tallies[i]) {
      const double w = sum.value();
      auto [it, fresh] = winner.try_emplace(hid, Claim{i, w});
      if (fresh) continue;
      const auto& incumbent = c.clusters[it->second.cluster].id;
      if (w > it->second.weight || (w == it->second.weight && c.clusters[i].id < incumbent)) {
        it->second = Claim{i, w};
      }
    }
  }

  // Each cluster keeps its strongest win.
  std::vector<std::optional<std::pair<ClusterId, double>>> best(c.clusters.size());
  for (const auto& [hid, claim] : winner) {
    auto& slot = best[claim.cluster];
    if (!slot || claim.weight > slot->second ||
        (claim.weight == slot->second && hid < slot->first)) {
      slot = std::make_pair(hid, claim.weight);
    }
  }

  std::set<ClusterId> reserved;
  for (const auto& hc : hist.clusters) reserved.insert(hc.id);
  FreshIdMinter minter(prefix, 1, reserved);
  std::vector<ClusterId> ids(c.clusters.size());
  std::set<ClusterId> fresh;
  std::map<ClusterId, ClusterId> adopted;
  for (const auto i : canonicalOrder(c)) {
    if (best[i]) {
      ids[i] = best[i]->first;
      adopted.emplace(c.clusters[i].id, ids[i]);
    } else {
      ids[i] = minter.mint();
      fresh.insert(ids[i]);
    }
  }
  auto out = labelClusters(c, ids);
  out.fresh_ids_minted = std::move(fresh);
  out.adopted = std::move(adopted);
  return out;
}

AssignmentResult permuteIds(const AssignmentResult& a,
                            const std::map<ClusterId, ClusterId>& permutation) {
  std::set<ClusterId> domain, image;
  for (const auto& cl : a.labels.clusters) domain.insert(cl.id);
  for (const auto& [from, to] : permutation) {
    if (!domain.contains(from)) {
      throw Error(ErrorCode::NotABijection, "permutation maps unassigned id " + from);
    }
    if (!image.insert(to).second) {
      throw Error(ErrorCode::NotABijection, "permutation maps two ids onto " + to);
    }
  }
  if (permutation.size() != domain.size() || image != domain) {
    throw Error(ErrorCode::NotABijection, "permutation is not a bijection on the assigned ids");
  }

  std::set<ClusterId> historical;
  for (const auto& [key, hid] : a.adopted) historical.insert(hid);

  AssignmentResult out;
  std::vector<ClusterId> ids;
  LabeledClustering source{a.labels.epoch, {}};
  for (const auto& [key, id] : a.assigned) {
    const auto* cl = a.labels.find(id);
    source.clusters.push_back(Cluster{key, cl->members});
    ids.push_back(permutation.at(id));
  }
  out = labelClusters(source, ids);
  for (const auto& [key, id] : out.assigned) {
    if (historical.contains(id)) {
      out.adopted.emplace(key, id);
    } else {
      out.fresh_ids_minted.insert(id);
    }
  }
  return out;
}

}  // namespace ideval
