#pragma once

#include <map>
#include <set>
#include <string>

#include "ideval/core.hpp"

namespace ideval {

// Output of an id assignment scheme. `labels` holds the input clusters keyed
// by their assigned ids; `assigned` maps each input cluster key to its id.
struct AssignmentResult {
  LabeledClustering labels;
  std::map<ClusterId, ClusterId> assigned;
  std::set<ClusterId> fresh_ids_minted;
  std::map<ClusterId, ClusterId> adopted;  // input cluster key -> historical id
};

// Labels every cluster `<prefix><counter>`, counting up from `start` in order
// of each cluster's smallest member. Candidates found in `reserved` are skipped.
AssignmentResult assignFreshIds(const LabeledClustering& c, const std::string& prefix,
                                long long start, const std::set<ClusterId>& reserved = {});

// Majority vote: a current item votes for the historical ids of historical
// items sharing its external id, with their historical weight. Each historical
// id goes to the cluster with the largest vote for it; a cluster keeps the best
// id it won and mints a fresh one otherwise. Ties break lexicographically.
AssignmentResult assignByMajorityVote(const LabeledClustering& c, const LabeledClustering& hist,
                                      const WeightMap& hist_weights, const std::string& prefix);

// Renames assigned ids; `permutation` must be a bijection on them.
AssignmentResult permuteIds(const AssignmentResult& a,
                            const std::map<ClusterId, ClusterId>& permutation);

}  // namespace ideval
