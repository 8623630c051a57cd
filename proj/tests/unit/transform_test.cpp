#include <gtest/gtest.h>

#include <sstream>

#include "ideval/error.hpp"
#include "ideval/figures.hpp"
#include "ideval/metrics.hpp"
#include "ideval/transform.hpp"
#include "ideval/tsv_io.hpp"
#include "support/generators.hpp"

using namespace ideval;

namespace {

ElementRef h(const std::string& id, const std::string& epoch = "H") {
  return ElementRef::historical(epoch, id);
}
ElementRef cur(const std::string& id) { return ElementRef::current(id); }
ElementRef syn(const std::string& id) { return ElementRef::synthetic(id); }

template <typename F>
ErrorCode codeOf(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no ideval::Error thrown";
  return ErrorCode::Io;
}

WeightedClustering firstExampleHist() {
  WeightedClustering hist;
  hist.clustering = {"H", {{"id_1", {h("h1"), h("h2")}}, {"id_2", {h("h3")}}}};
  for (const char* x : {"h1", "h2", "h3"}) hist.weights.set(h(x), 1.0);
  return hist;
}

std::string dataPath(const std::string& rel) { return std::string(IDEVAL_DATA_DIR) + "/" + rel; }

std::vector<ElementRef> sorted(std::vector<ElementRef> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST(HistMembersOrId, UsesTheHistoricalClusterWhenThereIsOne) {
  const auto hist = firstExampleHist();
  EXPECT_EQ(histMembersOrId("id_1", hist.clustering), (std::vector{h("h1"), h("h2")}));
  EXPECT_EQ(histMembersOrId("id_3", hist.clustering), std::vector{syn("id_3")});
  EXPECT_EQ(histMembersOrId("anything", LabeledClustering{}), std::vector{syn("anything")});
}

class FigureExpansion : public ::testing::TestWithParam<int> {};

TEST_P(FigureExpansion, MatchesCheckedInBaseAndExp) {
  const int id = GetParam();
  char dir[16];
  std::snprintf(dir, sizeof dir, "fig%02d", id);
  const auto inputs = figureInputs(figureFixture(id));
  const auto base = readElementClustering(dataPath(std::string("figures/") + dir + "/expanded_base.tsv"));
  const auto exp = readElementClustering(dataPath(std::string("figures/") + dir + "/expanded_exp.tsv"));
  EXPECT_TRUE(inputs.base.samePartitionAs(base));
  EXPECT_TRUE(inputs.exp.samePartitionAs(exp));
  EXPECT_TRUE(validateLabeledClustering(inputs.base).ok());
  EXPECT_TRUE(validateLabeledClustering(inputs.exp).ok());
}

INSTANTIATE_TEST_SUITE_P(AllFigures, FigureExpansion, ::testing::Range(1, 11));

TEST(BuildEvalInputs, FirstExampleClustersAndWeights) {
  const auto in = figureInputs(figureFixture(1));
  const auto* id1 = in.base.find("id_1");
  ASSERT_NE(id1, nullptr);
  EXPECT_EQ(sorted(id1->members), sorted({cur("i1"), cur("i2"), h("h1"), h("h2")}));
  const auto* id3 = in.exp.find("id_3");
  ASSERT_NE(id3, nullptr);
  EXPECT_EQ(sorted(id3->members), sorted({cur("i1"), cur("i2"), syn("id_3")}));
  EXPECT_EQ(in.weight.at(syn("id_3")), 0.001);
  EXPECT_EQ(in.weight.at(h("h1")), 1.0);
  EXPECT_EQ(in.census.non_hist, (std::set<ClusterId>{"id_3", "id_4"}));
  EXPECT_EQ(in.census.all.size(), 4u);
}

TEST(BuildEvalInputs, IdenticalLabelsGiveIdenticalBaseAndExp) {
  const auto hist = firstExampleHist();
  LabeledClustering labels{"", {{"id_1", {cur("i1"), cur("i2")}}, {"id_2", {cur("i3")}}}};
  WeightMap w;
  for (const char* x : {"i1", "i2", "i3"}) w.set(cur(x), 1.0);
  const auto in = buildEvalInputs(hist, labels, labels, w, {});
  EXPECT_EQ(in.base.clusters, in.exp.clusters);
}

TEST(BuildEvalInputs, HistoricalAndCurrentPartsAreDisjointPerId) {
  gen::Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = gen::scenario(rng, 1 + gen::below(rng, 8), 1 + gen::below(rng, 8), 6,
                                 gen::below(rng, 2) == 0);
    const auto in = buildEvalInputs(s.hist, s.base, s.exp, s.item_weights, s.cfg);
    ASSERT_TRUE(validateLabeledClustering(in.base).ok());
    ASSERT_TRUE(validateLabeledClustering(in.exp).ok());
    ASSERT_EQ(sorted(in.base.elements()), sorted(in.exp.elements()));
    for (const auto& cl : in.base.clusters) {
      const auto hm = histMembersOrId(cl.id, s.hist.clustering);
      for (const auto& e : hm) {
        EXPECT_NE(std::find(cl.members.begin(), cl.members.end(), e), cl.members.end());
      }
      EXPECT_TRUE(in.census.all.contains(cl.id));
    }
    for (const auto& [e, w] : in.weight) {
      if (e.isSynthetic()) EXPECT_EQ(w, s.cfg.k);
      if (e.kind == ElementKind::HistoricalItem) {
        EXPECT_DOUBLE_EQ(w, s.cfg.hist_scale_factor * s.hist.weights.at(e));
      }
    }
  }
}

TEST(BuildEvalInputs, SeparateModeRejectsDifferentMemberships) {
  LabeledClustering base{"", {{"a", {cur("1"), cur("2")}}}};
  LabeledClustering exp{"", {{"a", {cur("1")}}, {"b", {cur("2")}}}};
  WeightMap w;
  w.set(cur("1"), 1);
  w.set(cur("2"), 1);
  EXPECT_EQ(codeOf([&] { buildEvalInputs({}, base, exp, w, {}); }), ErrorCode::ItemUniverseMismatch);
  TransformConfig sim;
  sim.mode = AssignmentMode::Simultaneous;
  EXPECT_NO_THROW(buildEvalInputs({}, base, exp, w, sim));
}

TEST(BuildEvalInputs, RejectsDifferentItemSets) {
  LabeledClustering base{"", {{"a", {cur("1"), cur("2")}}}};
  LabeledClustering exp{"", {{"a", {cur("1"), cur("3")}}}};
  WeightMap w;
  for (const char* x : {"1", "2", "3"}) w.set(cur(x), 1);
  TransformConfig sim;
  sim.mode = AssignmentMode::Simultaneous;
  EXPECT_EQ(codeOf([&] { buildEvalInputs({}, base, exp, w, sim); }), ErrorCode::ItemUniverseMismatch);
}

TEST(BuildEvalInputs, MissingItemWeight) {
  LabeledClustering labels{"", {{"a", {cur("1"), cur("2")}}}};
  WeightMap w;
  w.set(cur("1"), 1);
  EXPECT_EQ(codeOf([&] { buildEvalInputs({}, labels, labels, w, {}); }), ErrorCode::MissingWeight);
}

TEST(BuildEvalInputs, EmptyHistoryMakesEveryIdSynthetic) {
  LabeledClustering labels{"", {{"a", {cur("1")}}, {"b", {cur("2")}}}};
  WeightMap w;
  w.set(cur("1"), 1);
  w.set(cur("2"), 1);
  const auto in = buildEvalInputs({}, labels, labels, w, {});
  EXPECT_EQ(in.census.non_hist, in.census.all);
  for (const auto& cl : in.base.clusters) {
    EXPECT_EQ(cl.members.front(), syn(cl.id));
  }
}

TEST(BuildEvalInputs, ConfigIsValidated) {
  TransformConfig bad;
  bad.k = 0;
  EXPECT_EQ(codeOf([&] { bad.validate(); }), ErrorCode::InvalidConfig);
  bad.k = 0.001;
  bad.hist_scale_factor = -2;
  EXPECT_EQ(codeOf([&] { bad.validate(); }), ErrorCode::InvalidConfig);
}

TEST(AlignCurrentItems, IntersectsItemsAndDropsEmptiedClusters) {
  WeightedClustering base, exp;
  base.clustering = {"", {{"x", {cur("a"), cur("b")}}, {"y", {cur("c")}}}};
  exp.clustering = {"", {{"p", {cur("b"), cur("c")}}, {"q", {cur("d")}}}};
  for (const char* x : {"a", "b", "c"}) base.weights.set(cur(x), 1);
  for (const char* x : {"b", "c", "d"}) exp.weights.set(cur(x), 1);
  base.weights.set(cur("b"), 2.0);
  exp.weights.set(cur("b"), 3.0);
  const auto al = alignCurrentItems(base, exp);
  EXPECT_EQ(sorted(al.base.elements()), sorted({cur("b"), cur("c")}));
  EXPECT_EQ(sorted(al.exp.elements()), sorted({cur("b"), cur("c")}));
  EXPECT_EQ(al.exp.clusters.size(), 1u);
  EXPECT_EQ(al.weights.at(cur("b")), 3.0);
  EXPECT_EQ(al.weights.size(), 2u);
}

TEST(AlignCurrentItems, IdenticalItemSetsAreUnchanged) {
  WeightedClustering base, exp;
  base.clustering = {"", {{"x", {cur("a")}}, {"y", {cur("b")}}}};
  exp.clustering = {"", {{"z", {cur("a"), cur("b")}}}};
  base.weights.set(cur("a"), 1);
  base.weights.set(cur("b"), 5);
  exp.weights.set(cur("a"), 4);
  exp.weights.set(cur("b"), 2);
  const auto al = alignCurrentItems(base, exp);
  EXPECT_EQ(al.base.clusters, base.clustering.clusters);
  EXPECT_EQ(al.exp.clusters, exp.clustering.clusters);
  EXPECT_EQ(al.weights.at(cur("a")), 4);
  EXPECT_EQ(al.weights.at(cur("b")), 5);
}

TEST(AlignCurrentItems, NoSharedItems) {
  WeightedClustering base, exp;
  base.clustering = {"", {{"x", {cur("a")}}}};
  exp.clustering = {"", {{"x", {cur("b")}}}};
  base.weights.set(cur("a"), 1);
  exp.weights.set(cur("b"), 1);
  EXPECT_EQ(codeOf([&] { alignCurrentItems(base, exp); }), ErrorCode::EmptyIntersection);
}

TEST(MergeHistoricalEpochs, SingleEpochIsReturnedAsIs) {
  HistoricalEpoch ep{firstExampleHist(), 5.0};
  ep.clustering.weights.set(h("h3"), 2.5);
  const auto merged = mergeHistoricalEpochs({ep});
  EXPECT_EQ(merged.clustering.clusters, ep.clustering.clustering.clusters);
  EXPECT_EQ(merged.clustering.epoch, "H");
  for (const auto& [e, w] : ep.clustering.weights) EXPECT_EQ(merged.weights.at(e), w);
  EXPECT_EQ(merged.weights.size(), ep.clustering.weights.size());
}

TEST(MergeHistoricalEpochs, EqualEpochWeightsHalveItemWeights) {
  HistoricalEpoch a, b;
  a.clustering.clustering = {"A", {{"id_1", {h("x", "A")}}}};
  a.clustering.weights.set(h("x", "A"), 1.0);
  b.clustering.clustering = {"B", {{"id_1", {h("x", "B")}}}};
  b.clustering.weights.set(h("x", "B"), 1.0);
  const auto merged = mergeHistoricalEpochs({a, b});
  ASSERT_EQ(merged.clustering.clusters.size(), 1u);
  EXPECT_EQ(merged.clustering.clusters[0].members, (std::vector{h("x", "A"), h("x", "B")}));
  EXPECT_EQ(merged.weights.at(h("x", "A")), 0.5);
  EXPECT_EQ(merged.weights.at(h("x", "B")), 0.5);
}

TEST(MergeHistoricalEpochs, ScaleFactorsFollowEpochWeights) {
  HistoricalEpoch a, b;
  a.clustering.clustering = {"A", {{"id_1", {h("x", "A")}}}};
  a.clustering.weights.set(h("x", "A"), 1.0);
  a.epoch_weight = 3;
  b.clustering.clustering = {"B", {{"id_2", {h("x", "B")}}}};
  b.clustering.weights.set(h("x", "B"), 1.0);
  b.epoch_weight = 1;
  const auto merged = mergeHistoricalEpochs({a, b});
  EXPECT_EQ(merged.weights.at(h("x", "A")), 0.75);
  EXPECT_EQ(merged.weights.at(h("x", "B")), 0.25);

  // Uniform scaling of the epoch weights changes nothing.
  a.epoch_weight = 30;
  b.epoch_weight = 10;
  const auto scaled = mergeHistoricalEpochs({a, b});
  for (const auto& [e, w] : merged.weights) EXPECT_DOUBLE_EQ(scaled.weights.at(e), w);
}

TEST(MergeHistoricalEpochs, DuplicateLabels) {
  HistoricalEpoch a{firstExampleHist(), 1}, b{firstExampleHist(), 1};
  EXPECT_EQ(codeOf([&] { mergeHistoricalEpochs({a, b}); }), ErrorCode::DuplicateEpochLabel);
}

TEST(CollapseHistoricalClusters, FirstExampleAtomsWeighTheirHistory) {
  const auto in = figureInputs(figureFixture(1));
  const auto col = collapseHistoricalClusters(in, 0.001);
  EXPECT_EQ(col.weight.at(syn("id_1")), 2.0);
  EXPECT_EQ(col.weight.at(syn("id_2")), 1.0);
  EXPECT_EQ(col.weight.at(syn("id_3")), 0.001);
  EXPECT_FALSE(col.ideal.has_value());
  for (const auto& [e, w] : col.weight) EXPECT_NE(e.kind, ElementKind::HistoricalItem);
  EXPECT_EQ(col.weight.at(cur("i1")), 1.0);
}

TEST(CollapseHistoricalClusters, LightHistoryIsRaisedToK) {
  WeightedClustering hist;
  hist.clustering = {"H", {{"a", {h("h1")}}}};
  hist.weights.set(h("h1"), 0.0005);
  LabeledClustering labels{"", {{"a", {cur("1")}}}};
  WeightMap w;
  w.set(cur("1"), 1);
  const auto col = collapseHistoricalClusters(buildEvalInputs(hist, labels, labels, w, {}), 0.001);
  EXPECT_EQ(col.weight.at(syn("a")), 0.001);
}

TEST(CollapseHistoricalClusters, KeepsImpactMetrics) {
  gen::Rng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const auto s = gen::scenario(rng, gen::below(rng, 10), 1 + gen::below(rng, 10), 8,
                                 gen::below(rng, 2) == 0);
    const auto in = buildEvalInputs(s.hist, s.base, s.exp, s.item_weights, s.cfg);
    const auto before = aggregateImpact(in);
    const auto after = aggregateImpact(collapseHistoricalClusters(in, s.cfg.k));
    EXPECT_NEAR(before.impact.jaccard_distance, after.impact.jaccard_distance, 1e-9);
    EXPECT_NEAR(before.impact.split_rate, after.impact.split_rate, 1e-9);
    EXPECT_NEAR(before.impact.merge_rate, after.impact.merge_rate, 1e-9);
  }
}

TEST(CompleteIdeal, AddsSingletonsForSyntheticIds) {
  const auto fx = figureFixture(1);
  auto in = figureInputs(fx);
  LabeledClustering partial = *in.ideal;
  std::erase_if(partial.clusters, [](const Cluster& c) { return c.members.front().isSynthetic(); });
  const auto completed = completeIdeal(partial, in);
  EXPECT_TRUE(completed.samePartitionAs(*in.ideal));
}

TEST(CompleteIdeal, ItemsWithoutAClassAreAnError) {
  auto in = figureInputs(figureFixture(1));
  LabeledClustering partial = *in.ideal;
  partial.clusters.erase(partial.clusters.begin());
  EXPECT_EQ(codeOf([&] { completeIdeal(partial, in); }), ErrorCode::MissingIdealClass);
  LabeledClustering extra = *in.ideal;
  extra.clusters.push_back({"zzz", {cur("stranger")}});
  EXPECT_EQ(codeOf([&] { completeIdeal(extra, in); }), ErrorCode::UniverseMismatch);
}
