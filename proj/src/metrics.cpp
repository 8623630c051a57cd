#include "ideval/metrics.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <unordered_map>

#include "ideval/error.hpp"
#include "ideval/summation.hpp"

namespace ideval {
namespace {

constexpr std::size_t kChunkSize = 1 << 15;

// Weight of every non-empty intersection of a cluster of one partition with a
// cluster of another, plus the intersection each element falls into.
struct Contingency {
  std::vector<std::uint32_t> cell_of;
  std::vector<double> cell_weight;
};

Contingency intersect(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b,
                      std::span<const double> weights) {
  Contingency out;
  out.cell_of.resize(a.size());
  std::unordered_map<std::uint64_t, std::uint32_t> cells;
  cells.reserve(a.size() / 2 + 16);
  std::vector<CompensatedSum> sums;
  for (std::size_t e = 0; e < a.size(); ++e) {
    const std::uint64_t key = (static_cast<std::uint64_t>(a[e]) << 32) | b[e];
    auto [it, fresh] = cells.try_emplace(key, static_cast<std::uint32_t>(sums.size()));
    if (fresh) sums.emplace_back();
    sums[it->second] += weights[e];
    out.cell_of[e] = it->second;
  }
  out.cell_weight.reserve(sums.size());
  for (const auto& s : sums) out.cell_weight.push_back(s.value());
  return out;
}

double jaccardDistance(double wa, double wb, double w_shared) {
  return 1.0 - w_shared / (wa + wb - w_shared);
}

double nonNegative(double x) { return x < 0.0 ? 0.0 : x; }

void requireSharedUniverse(const MembershipIndex& a, const MembershipIndex& b) {
  if (a.sharedUniverse() != b.sharedUniverse()) {
    throw Error(ErrorCode::UniverseMismatch, "membership indexes use different universes");
  }
}

// Sum of weights of the members of `cluster` (in index a) that satisfy pred.
template <typename Pred>
double weightWhere(const MembershipIndex& a, ClusterIndex cluster, Pred pred) {
  CompensatedSum sum;
  for (const auto x : a.members(cluster)) {
    if (pred(x)) sum += a.universe().weight(x);
  }
  return sum.value();
}

// Maps an element index of `from`'s universe to `to`'s universe.
struct Translator {
  const Universe& from;
  const Universe& to;
  ElementIndex operator()(ElementIndex i) const {
    if (&from == &to) return i;
    return to.indexOf(from.element(i));
  }
};

enum Acc : std::size_t {
  kJd,
  kSplit,
  kMerge,
  kGoodSplit,
  kBadSplit,
  kGoodMerge,
  kBadMerge,
  kDeltaPrecision,
  kDeltaRecall,
  kDistBaseIdeal,
  kDistExpIdeal,
  kWeight,
  kAccCount
};

using Partial = std::array<CompensatedSum, kAccCount>;

template <typename Fn>
void forEachChunk(std::size_t n, unsigned threads, Fn fn) {
  const std::size_t chunks = (n + kChunkSize - 1) / kChunkSize;
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(chunks)));
  if (threads <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) fn(c, c * kChunkSize, std::min(n, (c + 1) * kChunkSize));
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t c = next++; c < chunks; c = next++) {
        fn(c, c * kChunkSize, std::min(n, (c + 1) * kChunkSize));
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

unsigned resolveThreadCount(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("IDEVAL_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return static_cast<unsigned>(n);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

IndexedInputs indexInputs(const EvalInputs& inputs) {
  const auto elements = inputs.base.elements();
  auto universe = Universe::build(elements, inputs.weight);
  IndexedInputs out{MembershipIndex::build(inputs.base, universe),
                    MembershipIndex::build(inputs.exp, universe), std::nullopt};
  if (inputs.ideal) out.ideal = MembershipIndex::build(*inputs.ideal, universe);
  return out;
}

PointwiseImpact pointwiseImpact(const MembershipIndex& base, const MembershipIndex& exp,
                                const ElementRef& e) {
  const auto& ub = base.universe();
  const auto& ue = exp.universe();
  const ClusterIndex b = base.owner(ub.indexOf(e));
  const ClusterIndex x = exp.owner(ue.indexOf(e));
  const Translator to_exp{ub, ue};
  const Translator to_base{ue, ub};

  const double w_b = weightWhere(base, b, [](ElementIndex) { return true; });
  const double w_x = weightWhere(exp, x, [](ElementIndex) { return true; });
  const double w_b_only = weightWhere(base, b, [&](ElementIndex i) { return exp.owner(to_exp(i)) != x; });
  const double w_x_only = weightWhere(exp, x, [&](ElementIndex i) { return base.owner(to_base(i)) != b; });
  const double w_shared = weightWhere(base, b, [&](ElementIndex i) { return exp.owner(to_exp(i)) == x; });

  PointwiseImpact out;
  out.split_rate = w_b_only / w_b;
  out.merge_rate = w_x_only / w_x;
  out.jaccard_distance = (w_b_only + w_x_only) / (w_shared + w_b_only + w_x_only);
  return out;
}

PointwiseRecord pointwiseQuality(const MembershipIndex& base, const MembershipIndex& exp,
                                 const MembershipIndex& ideal, const ElementRef& e) {
  const auto& ub = base.universe();
  const auto& ux = exp.universe();
  const auto& ui = ideal.universe();
  const ClusterIndex b = base.owner(ub.indexOf(e));
  const ClusterIndex x = exp.owner(ux.indexOf(e));
  const auto ideal_pos = ui.find(e);
  if (!ideal_pos) {
    throw Error(ErrorCode::MissingIdealClass, "no ideal class for " + encodeElement(e));
  }
  const ClusterIndex c = ideal.owner(*ideal_pos);
  const Translator b_to_x{ub, ux}, b_to_i{ub, ui}, x_to_b{ux, ub}, x_to_i{ux, ui};

  auto in_x = [&](ElementIndex i) { return exp.owner(b_to_x(i)) == x; };
  auto in_b = [&](ElementIndex i) { return base.owner(x_to_b(i)) == b; };
  auto b_in_i = [&](ElementIndex i) { return ideal.owner(b_to_i(i)) == c; };
  auto x_in_i = [&](ElementIndex i) { return ideal.owner(x_to_i(i)) == c; };

  const double w_b = weightWhere(base, b, [](ElementIndex) { return true; });
  const double w_x = weightWhere(exp, x, [](ElementIndex) { return true; });
  const double w_i = weightWhere(ideal, c, [](ElementIndex) { return true; });
  const double split_bad = weightWhere(base, b, [&](ElementIndex i) { return !in_x(i) && b_in_i(i); });
  const double split_good = weightWhere(base, b, [&](ElementIndex i) { return !in_x(i) && !b_in_i(i); });
  const double merge_good = weightWhere(exp, x, [&](ElementIndex i) { return !in_b(i) && x_in_i(i); });
  const double merge_bad = weightWhere(exp, x, [&](ElementIndex i) { return !in_b(i) && !x_in_i(i); });
  const double b_and_i = weightWhere(base, b, b_in_i);
  const double x_and_i = weightWhere(exp, x, x_in_i);

  PointwiseRecord r;
  r.element = e;
  r.weight = ub.weight(ub.indexOf(e));
  const auto impact = pointwiseImpact(base, exp, e);
  r.jaccard_distance = impact.jaccard_distance;
  r.good_split_rate = split_good / w_b;
  r.bad_split_rate = split_bad / w_b;
  r.good_merge_rate = merge_good / w_x;
  r.bad_merge_rate = merge_bad / w_x;
  r.split_rate = r.good_split_rate + r.bad_split_rate;
  r.merge_rate = r.good_merge_rate + r.bad_merge_rate;
  r.precision_base = b_and_i / w_b;
  r.precision_exp = x_and_i / w_x;
  r.recall_base = b_and_i / w_i;
  r.recall_exp = x_and_i / w_i;
  return r;
}

double expectedJaccardDistance(const MembershipIndex& a, const MembershipIndex& b) {
  if (a.sharedUniverse() != b.sharedUniverse()) {
    if (a.universe().size() != b.universe().size()) {
      throw Error(ErrorCode::UniverseMismatch, "clusterings cover different universes");
    }
    return expectedJaccardDistance(a, MembershipIndex::build(b.toClustering(), a.sharedUniverse()));
  }
  const auto weights = a.universe().weights();
  const auto cells = intersect(a.owners(), b.owners(), weights);
  CompensatedSum sum;
  for (std::size_t e = 0; e < weights.size(); ++e) {
    const double d = jaccardDistance(a.clusterWeight(a.owner(e)), b.clusterWeight(b.owner(e)),
                                     cells.cell_weight[cells.cell_of[e]]);
    sum += weights[e] * d;
  }
  return sum.value() / a.universe().totalWeight();
}

double computeIQ(double d_base_ideal, double d_exp_ideal, double d_base_exp) {
  if (d_base_exp == 0.0) return 0.0;
  // The triangle inequality bounds the ratio; clamp away rounding residue.
  return std::clamp((d_base_ideal - d_exp_ideal) / d_base_exp, -1.0, 1.0);
}

std::vector<double> pointwiseJaccardDistances(const MembershipIndex& base,
                                              const MembershipIndex& exp) {
  requireSharedUniverse(base, exp);
  const auto weights = base.universe().weights();
  const auto cells = intersect(base.owners(), exp.owners(), weights);
  std::vector<double> out(weights.size());
  for (std::size_t e = 0; e < weights.size(); ++e) {
    out[e] = jaccardDistance(base.clusterWeight(base.owner(e)), exp.clusterWeight(exp.owner(e)),
                             cells.cell_weight[cells.cell_of[e]]);
  }
  return out;
}

MetricsReport aggregateIndexed(const MembershipIndex& base, const MembershipIndex& exp,
                               const MembershipIndex* ideal, std::span<const char> mask,
                               const MetricsOptions& opts) {
  requireSharedUniverse(base, exp);
  if (ideal != nullptr) requireSharedUniverse(base, *ideal);
  const auto& u = base.universe();
  const auto weights = u.weights();
  const std::size_t n = u.size();
  if (!mask.empty() && mask.size() != n) {
    throw Error(ErrorCode::UniverseMismatch, "element mask does not match the universe");
  }

  const auto be = intersect(base.owners(), exp.owners(), weights);
  Contingency bi, ei, bei;
  if (ideal != nullptr) {
    bi = intersect(base.owners(), ideal->owners(), weights);
    ei = intersect(exp.owners(), ideal->owners(), weights);
    bei = intersect(be.cell_of, ideal->owners(), weights);
  }

  const std::size_t chunks = (n + kChunkSize - 1) / kChunkSize;
  std::vector<Partial> partials(chunks);
  std::vector<PointwiseRecord> records;
  if (opts.per_element) records.resize(mask.empty() ? n : std::count(mask.begin(), mask.end(), 1));
  // Position of each selected element in `records`.
  std::vector<std::size_t> slot;
  if (opts.per_element && !mask.empty()) {
    slot.resize(n);
    std::size_t next = 0;
    for (std::size_t e = 0; e < n; ++e) slot[e] = mask[e] ? next++ : 0;
  }

  forEachChunk(n, resolveThreadCount(opts.threads), [&](std::size_t chunk, std::size_t lo, std::size_t hi) {
    auto& acc = partials[chunk];
    for (std::size_t e = lo; e < hi; ++e) {
      if (!mask.empty() && !mask[e]) continue;
      const double w = weights[e];
      const double w_b = base.clusterWeight(base.owner(e));
      const double w_x = exp.clusterWeight(exp.owner(e));
      const double w_bx = be.cell_weight[be.cell_of[e]];
      const double b_only = w_b - w_bx;
      const double x_only = w_x - w_bx;

      PointwiseRecord r;
      r.weight = w;
      r.jaccard_distance = jaccardDistance(w_b, w_x, w_bx);
      r.split_rate = b_only / w_b;
      r.merge_rate = x_only / w_x;
      acc[kWeight] += w;
      acc[kJd] += w * r.jaccard_distance;
      acc[kSplit] += w * r.split_rate;
      acc[kMerge] += w * r.merge_rate;

      if (ideal != nullptr) {
        const double w_i = ideal->clusterWeight(ideal->owner(e));
        const double w_bi = bi.cell_weight[bi.cell_of[e]];
        const double w_xi = ei.cell_weight[ei.cell_of[e]];
        const double w_bxi = bei.cell_weight[bei.cell_of[e]];
        const double split_bad = nonNegative(w_bi - w_bxi);
        const double merge_good = nonNegative(w_xi - w_bxi);
        r.bad_split_rate = split_bad / w_b;
        r.good_split_rate = nonNegative(b_only - split_bad) / w_b;
        r.good_merge_rate = merge_good / w_x;
        r.bad_merge_rate = nonNegative(x_only - merge_good) / w_x;
        r.precision_base = w_bi / w_b;
        r.precision_exp = w_xi / w_x;
        r.recall_base = w_bi / w_i;
        r.recall_exp = w_xi / w_i;
        acc[kGoodSplit] += w * r.good_split_rate;
        acc[kBadSplit] += w * r.bad_split_rate;
        acc[kGoodMerge] += w * r.good_merge_rate;
        acc[kBadMerge] += w * r.bad_merge_rate;
        acc[kDeltaPrecision] += w * (r.precision_exp - r.precision_base);
        acc[kDeltaRecall] += w * (r.recall_exp - r.recall_base);
        acc[kDistBaseIdeal] += w * jaccardDistance(w_b, w_i, w_bi);
        acc[kDistExpIdeal] += w * jaccardDistance(w_x, w_i, w_xi);
      }
      if (opts.per_element) {
        r.element = u.element(static_cast<ElementIndex>(e));
        records[mask.empty() ? e : slot[e]] = std::move(r);
      }
    }
  });

  Partial total;
  for (const auto& p : partials) {
    for (std::size_t k = 0; k < kAccCount; ++k) total[k].merge(p[k]);
  }
  const double tw = total[kWeight].value();
  if (!(tw > 0.0)) {
    throw Error(ErrorCode::InsufficientCoverage, "no elements selected for aggregation");
  }
  auto mean = [&](Acc k) { return total[k].value() / tw; };

  MetricsReport report;
  report.total_weight = tw;
  report.impact = {mean(kJd), mean(kSplit), mean(kMerge)};
  if (ideal != nullptr) {
    Distances d{mean(kDistBaseIdeal), mean(kDistExpIdeal), report.impact.jaccard_distance};
    QualityMetrics q;
    q.good_split_rate = mean(kGoodSplit);
    q.bad_split_rate = mean(kBadSplit);
    q.good_merge_rate = mean(kGoodMerge);
    q.bad_merge_rate = mean(kBadMerge);
    q.delta_precision = mean(kDeltaPrecision);
    q.delta_recall = mean(kDeltaRecall);
    q.iq = computeIQ(d.base_ideal, d.exp_ideal, d.base_exp);
    report.quality = q;
    report.distances = d;
  }
  if (opts.per_element) {
    std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
      const double ka = a.weight * a.jaccard_distance;
      const double kb = b.weight * b.jaccard_distance;
      if (ka != kb) return ka > kb;
      return a.element < b.element;
    });
    report.per_element = std::move(records);
  }
  return report;
}

MetricsReport aggregateImpact(const EvalInputs& inputs, const MetricsOptions& opts) {
  const auto elements = inputs.base.elements();
  auto universe = Universe::build(elements, inputs.weight);
  const auto base = MembershipIndex::build(inputs.base, universe);
  const auto exp = MembershipIndex::build(inputs.exp, universe);
  return aggregateIndexed(base, exp, nullptr, {}, opts);
}

MetricsReport aggregateQuality(const EvalInputs& inputs, const MetricsOptions& opts) {
  if (!inputs.ideal) {
    throw Error(ErrorCode::MissingIdealClass, "quality metrics need an ideal clustering");
  }
  const auto idx = indexInputs(inputs);
  return aggregateIndexed(idx.base, idx.exp, &*idx.ideal, {}, opts);
}

MetricsReport evaluate(const EvalInputs& inputs, const MetricsOptions& opts) {
  return inputs.ideal ? aggregateQuality(inputs, opts) : aggregateImpact(inputs, opts);
}

}  // namespace ideval
