// Acceptance gate: prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails.

#include <sys/resource.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ideval/cli.hpp"
#include "ideval/figures.hpp"
#include "ideval/metrics.hpp"
#include "ideval/report.hpp"
#include "ideval/transform.hpp"
#include "support/generators.hpp"
#include "support/naive_oracle.hpp"

using namespace ideval;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Collects the first few failures of one criterion.
struct Check {
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::string first;

  void expect(bool ok, const std::string& what) {
    ++cases;
    if (ok) return;
    if (failures++ == 0) first = what;
  }
  void near(double a, double b, double tol, const std::string& what) {
    expect(std::abs(a - b) <= tol, what + ": " + std::to_string(a) + " vs " + std::to_string(b));
  }
  bool ok() const { return failures == 0 && cases > 0; }
};

int failed = 0;

void report(const char* id, const char* title, bool ok, const std::string& detail) {
  std::printf("%s %s %s: %s\n", ok ? "PASS" : "FAIL", id, title, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failed;
}

void report(const char* id, const char* title, const Check& c, const std::string& detail) {
  std::string d = detail + ", " + std::to_string(c.cases) + " checks";
  if (!c.ok()) d += ", " + std::to_string(c.failures) + " failed, first: " + c.first;
  report(id, title, c.ok(), d);
}

double seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

void ac1() {
  const auto start = Clock::now();
  std::size_t figures = 0, cells = 0, matched = 0;
  std::map<std::pair<int, std::string>, std::string> actual;
  for (const auto& fx : figureFixtures()) {
    const auto r = checkFigure(fx);
    ++figures;
    for (const auto& c : r.cells) {
      ++cells;
      if (c.ok) ++matched;
      actual[{r.id, c.metric}] = c.actual;
    }
  }
  const double elapsed = seconds(start);
  const std::vector<std::tuple<int, std::string, std::string>> spots = {
      {1, "JaccardDistance", "50.02"}, {1, "SplitRate", "49.98"},      {1, "MergeRate", "0.07"},
      {1, "DeltaRecall", "-49.98"},    {1, "IQ", "-100.00"},          {3, "IQ", "28.97"},
      {4, "DeltaPrecision", "-16.61"}, {4, "IQ", "-5.47"},            {5, "DeltaPrecision", "-8.89"},
      {5, "IQ", "-28.13"},             {6, "DeltaPrecision", "5.53"}, {6, "DeltaRecall", "-16.66"},
      {7, "DeltaPrecision", "12.60"},  {7, "DeltaRecall", "-10.69"},  {7, "IQ", "16.07"},
      {8, "DeltaPrecision", "33.26"},  {8, "IQ", "66.46"},            {9, "DeltaPrecision", "0.00"},
      {9, "DeltaRecall", "0.00"},      {9, "IQ", "0.00"},             {10, "IQ", "100.00"}};
  std::size_t spot_ok = 0;
  std::string bad;
  for (const auto& [fig, metric, want] : spots) {
    const auto it = actual.find({fig, metric});
    if (it != actual.end() && it->second == want) {
      ++spot_ok;
    } else if (bad.empty()) {
      bad = " (fig " + std::to_string(fig) + " " + metric + ")";
    }
  }
  const bool ok = figures == 10 && cells == matched && cells > 0 && spot_ok == spots.size() &&
                  elapsed < 1.0;
  char detail[256];
  std::snprintf(detail, sizeof detail, "%zu figures, %zu/%zu cells, %zu/%zu spot values%s, %.3f s",
                figures, matched, cells, spot_ok, spots.size(), bad.c_str(), elapsed);
  report("AC1", "figure reproduction", ok, detail);
}

void ac2() {
  gen::Rng rng(2001);
  Check c;
  const int universes = 1200;
  for (int t = 0; t < universes; ++t) {
    const auto u = gen::universe(rng, 1 + gen::below(rng, 12), true);
    MetricsOptions opts;
    opts.per_element = true;
    const auto r = aggregateQuality(gen::toInputs(u), opts);
    c.near(r.impact.split_rate, r.quality->good_split_rate + r.quality->bad_split_rate, 1e-9, "split");
    c.near(r.impact.merge_rate, r.quality->good_merge_rate + r.quality->bad_merge_rate, 1e-9, "merge");
    for (const auto& p : *r.per_element) {
      c.near(p.split_rate, p.good_split_rate + p.bad_split_rate, 1e-9, "pointwise split");
      c.near(p.merge_rate, p.good_merge_rate + p.bad_merge_rate, 1e-9, "pointwise merge");
    }
  }
  report("AC2", "decomposition identities", c, std::to_string(universes) + " universes");
}

void ac3() {
  gen::Rng rng(3001);
  Check c;
  const int inputs = 400;
  for (int t = 0; t < inputs; ++t) {
    const auto s = gen::scenario(rng, gen::below(rng, 12), 1 + gen::below(rng, 12), 10,
                                 gen::below(rng, 2) == 0);
    const auto in = buildEvalInputs(s.hist, s.base, s.exp, s.item_weights, s.cfg);
    const auto a = aggregateImpact(in).impact;
    const auto b = aggregateImpact(collapseHistoricalClusters(in, s.cfg.k)).impact;
    c.near(a.jaccard_distance, b.jaccard_distance, 1e-9, "jaccard");
    c.near(a.split_rate, b.split_rate, 1e-9, "split");
    c.near(a.merge_rate, b.merge_rate, 1e-9, "merge");
  }
  report("AC3", "collapse equivalence", c, std::to_string(inputs) + " inputs");
}

void compareWithOracle(const naive::Universe& u, Check& c) {
  const auto ref = naive::aggregate(u);
  const auto r = evaluate(gen::toInputs(u));
  const double tol = 1e-12;
  c.near(r.impact.jaccard_distance, ref.jd, tol, "jaccard");
  c.near(r.impact.split_rate, ref.split, tol, "split");
  c.near(r.impact.merge_rate, ref.merge, tol, "merge");
  if (u.ideal.empty()) {
    c.expect(!r.quality, "quality without ideal");
    return;
  }
  if (!r.quality) {
    c.expect(false, "missing quality");
    return;
  }
  c.near(r.quality->good_split_rate, ref.good_split, tol, "good split");
  c.near(r.quality->bad_split_rate, ref.bad_split, tol, "bad split");
  c.near(r.quality->good_merge_rate, ref.good_merge, tol, "good merge");
  c.near(r.quality->bad_merge_rate, ref.bad_merge, tol, "bad merge");
  c.near(r.quality->delta_precision, ref.delta_precision, tol, "delta precision");
  c.near(r.quality->delta_recall, ref.delta_recall, tol, "delta recall");
  c.near(r.quality->iq, ref.iq, tol, "iq");
}

void ac4() {
  gen::Rng rng(4001);
  Check c;
  std::size_t universes = 0;
  // Every (base, exp, ideal) triple up to four elements, random weights.
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto parts = gen::allPartitions(n);
    for (const auto& b : parts) {
      for (const auto& x : parts) {
        for (const auto& i : parts) {
          naive::Universe u{b, x, i, {}};
          for (std::size_t e = 0; e < n; ++e) u.weight.push_back(gen::weight(rng));
          compareWithOracle(u, c);
          ++universes;
        }
      }
    }
  }
  for (int t = 0; t < 5000; ++t, ++universes) {
    compareWithOracle(gen::universe(rng, 1 + gen::below(rng, 6), gen::below(rng, 5) != 0), c);
  }
  report("AC4", "brute-force oracle", c, std::to_string(universes) + " universes");
}

void ac5() {
  gen::Rng rng(5001);
  Check c;
  std::size_t endpoint_cases = 0;
  for (int t = 0; t < 2000; ++t) {
    auto u = gen::universe(rng, 1 + gen::below(rng, 12), true);
    const auto r = aggregateQuality(gen::toInputs(u));
    c.expect(r.quality->iq >= -1.0 && r.quality->iq <= 1.0, "iq out of range");
    if (r.distances->base_exp == 0.0) continue;
    ++endpoint_cases;
    u.ideal = u.exp;
    const auto up = aggregateQuality(gen::toInputs(u));
    c.expect(formatPercent(up.quality->iq) == "100.00", "exp = ideal gives " + formatPercent(up.quality->iq));
    u.ideal = u.base;
    const auto down = aggregateQuality(gen::toInputs(u));
    c.expect(formatPercent(down.quality->iq) == "-100.00",
             "base = ideal gives " + formatPercent(down.quality->iq));
  }
  report("AC5", "IQ bounds and endpoints", c, std::to_string(endpoint_cases) + " endpoint universes");
}

void ac6() {
  gen::Rng rng(6001);
  Check c;
  const int universes = 1000;
  for (int t = 0; t < universes; ++t) {
    auto u = gen::universe(rng, 1 + gen::below(rng, 12), true);
    const auto a = aggregateQuality(gen::toInputs(u));
    auto s = u;
    std::swap(s.base, s.exp);
    const auto b = aggregateQuality(gen::toInputs(s));
    const auto &qa = *a.quality, &qb = *b.quality;
    c.near(a.impact.jaccard_distance, b.impact.jaccard_distance, 1e-9, "swap jaccard");
    c.near(a.impact.split_rate, b.impact.merge_rate, 1e-9, "swap split");
    c.near(a.impact.merge_rate, b.impact.split_rate, 1e-9, "swap merge");
    // A good split seen backwards is a bad merge, and vice versa.
    c.near(qa.good_split_rate, qb.bad_merge_rate, 1e-9, "swap good split");
    c.near(qa.bad_split_rate, qb.good_merge_rate, 1e-9, "swap bad split");
    c.near(qa.good_merge_rate, qb.bad_split_rate, 1e-9, "swap good merge");
    c.near(qa.bad_merge_rate, qb.good_split_rate, 1e-9, "swap bad merge");
    c.near(qa.delta_precision, -qb.delta_precision, 1e-9, "swap delta precision");
    c.near(qa.delta_recall, -qb.delta_recall, 1e-9, "swap delta recall");
    c.near(qa.iq, -qb.iq, 1e-9, "swap iq");

    for (auto& w : u.weight) w *= 17.3;
    const auto k = aggregateQuality(gen::toInputs(u));
    const auto& qk = *k.quality;
    c.near(a.impact.jaccard_distance, k.impact.jaccard_distance, 1e-9, "scaled jaccard");
    c.near(a.impact.split_rate, k.impact.split_rate, 1e-9, "scaled split");
    c.near(a.impact.merge_rate, k.impact.merge_rate, 1e-9, "scaled merge");
    c.near(qa.good_split_rate, qk.good_split_rate, 1e-9, "scaled good split");
    c.near(qa.bad_split_rate, qk.bad_split_rate, 1e-9, "scaled bad split");
    c.near(qa.good_merge_rate, qk.good_merge_rate, 1e-9, "scaled good merge");
    c.near(qa.bad_merge_rate, qk.bad_merge_rate, 1e-9, "scaled bad merge");
    c.near(qa.delta_precision, qk.delta_precision, 1e-9, "scaled delta precision");
    c.near(qa.delta_recall, qk.delta_recall, 1e-9, "scaled delta recall");
    c.near(qa.iq, qk.iq, 1e-9, "scaled iq");
  }
  report("AC6", "symmetry and scale invariance", c, std::to_string(universes) + " universes");
}

bool sameReport(const MetricsReport& a, const MetricsReport& b) {
  return toJson(a) == toJson(b);
}

void ac7() {
  gen::Rng rng(7001);
  Check c;
  const int runs = 300;
  for (int t = 0; t < runs; ++t) {
    const auto s = gen::scenario(rng, gen::below(rng, 12), 1 + gen::below(rng, 12), 10, false);

    HistoricalEpoch epoch{s.hist, 0.1 + 5 * gen::unit(rng)};
    const auto merged = mergeHistoricalEpochs({epoch});
    bool same = merged.clustering.clusters == s.hist.clustering.clusters &&
                merged.clustering.epoch == s.hist.clustering.epoch &&
                merged.weights.size() == s.hist.weights.size();
    for (const auto& [e, w] : s.hist.weights) same = same && merged.weights.at(e) == w;
    c.expect(same, "single epoch merge differs");

    auto separate = s.cfg;
    separate.mode = AssignmentMode::SeparateAssignment;
    auto simultaneous = s.cfg;
    simultaneous.mode = AssignmentMode::Simultaneous;
    const auto a = evaluate(buildEvalInputs(merged, s.base, s.exp, s.item_weights, separate));
    const auto b = evaluate(buildEvalInputs(merged, s.base, s.exp, s.item_weights, simultaneous));
    c.expect(sameReport(a, b), "separate and simultaneous runs differ");
  }
  report("AC7", "generalization consistency", c, std::to_string(runs) + " runs");
}

// Runs the CLI in-process.
int cli(std::vector<std::string> args, std::string* out = nullptr) {
  std::ostringstream o, e;
  const int code = runCli(args, o, e);
  if (out) *out = o.str();
  if (code != kExitOk) std::fprintf(stderr, "ideval %s: %s", args.front().c_str(), e.str().c_str());
  return code;
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

void ac8() {
  const auto dir = fs::temp_directory_path() / ("ideval_ac8_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  // Historical items share external ids with the current ones so votes can
  // be cast.
  spit(dir / "hist.tsv", "i1\tid_1\t1.0\ni2\tid_1\t1.0\ni3\tid_2\t1.0\n");
  spit(dir / "members.tsv", "i1\tk_a\t1.0\ni2\tk_a\t1.0\ni3\tk_b\t1.0\n");
  spit(dir / "ideal.tsv",
       "hist:H:i1\tyellow\nhist:H:i2\tyellow\ncur:i1\tyellow\ncur:i2\tyellow\n"
       "hist:H:i3\tcyan\ncur:i3\tcyan\nid:id_3\tmagenta\nid:id_4\tred\n");
  nlohmann::json cfg = {{"hist", {{{"path", "hist.tsv"}, {"epoch_label", "H"}}}},
                        {"base", "base.tsv"},
                        {"exp", "exp.tsv"},
                        {"ideal", "ideal.tsv"},
                        {"mode", "separate"}};
  spit(dir / "run.json", cfg.dump());

  std::string json_text;
  bool ran = cli({"assign", "--input", (dir / "members.tsv").string(), "--hist", (dir / "hist.tsv").string(),
                  "--scheme", "majority", "--output", (dir / "base.tsv").string()}) == kExitOk &&
             cli({"assign", "--input", (dir / "members.tsv").string(), "--hist", (dir / "hist.tsv").string(),
                  "--scheme", "fresh", "--output", (dir / "exp.tsv").string()}) == kExitOk &&
             cli({"evaluate", "--config", (dir / "run.json").string(), "--render", "json"}, &json_text) ==
                 kExitOk;

  std::size_t matched = 0;
  const auto& fx = figureFixture(1);
  std::string bad;
  if (ran) {
    const auto j = nlohmann::json::parse(json_text);
    const std::map<std::string, double> got = {
        {"JaccardDistance", j["impact"]["jaccard_distance"]},
        {"SplitRate", j["impact"]["split_rate"]},
        {"MergeRate", j["impact"]["merge_rate"]},
        {"GoodSplitRate", j["quality"]["good_split_rate"]},
        {"BadSplitRate", j["quality"]["bad_split_rate"]},
        {"GoodMergeRate", j["quality"]["good_merge_rate"]},
        {"BadMergeRate", j["quality"]["bad_merge_rate"]},
        {"DeltaPrecision", j["quality"]["delta_precision"]},
        {"DeltaRecall", j["quality"]["delta_recall"]},
        {"IQ", j["quality"]["iq"]}};
    for (const auto& [metric, want] : fx.expected) {
      const auto it = got.find(metric);
      if (it != got.end() && formatPercent(it->second) == want) {
        ++matched;
      } else if (bad.empty()) {
        bad = ", first mismatch " + metric;
      }
    }
  }
  fs::remove_all(dir);
  const bool ok = ran && matched == fx.expected.size();
  report("AC8", "scheme calibration", ok,
         std::string(ran ? "evaluate ran" : "evaluate failed") + ", " + std::to_string(matched) + "/" +
             std::to_string(fx.expected.size()) + " cells" + bad);
}

struct ScaleUniverse {
  WeightedClustering hist;
  LabeledClustering base;
  LabeledClustering exp;
  WeightMap weights;
  LabeledClustering ideal;
};

// Items i0..i999999 in 100000 base clusters of ten. Clusters below 50000 have
// four historical members each. The experiment moves one item in ten; the
// ideal disagrees with the baseline on one item in twenty.
ScaleUniverse scaleUniverse() {
  constexpr std::size_t kItems = 1'000'000, kClusters = 100'000, kHist = 50'000, kHistPer = 4;
  gen::Rng rng(9001);
  std::vector<std::size_t> base(kItems), exp(kItems), ideal(kItems);
  for (std::size_t i = 0; i < kItems; ++i) {
    base[i] = i % kClusters;
    ideal[i] = gen::unit(rng) < 0.05 ? gen::below(rng, kClusters) : base[i];
    exp[i] = base[i];
    if (gen::unit(rng) < 0.1) exp[i] = gen::unit(rng) < 0.5 ? ideal[i] : gen::below(rng, kClusters);
  }
  auto label = [](const std::vector<std::size_t>& of, const std::string& prefix) {
    std::vector<Cluster> clusters(kClusters);
    for (std::size_t c = 0; c < kClusters; ++c) clusters[c].id = prefix + std::to_string(c + 1);
    for (std::size_t i = 0; i < of.size(); ++i) {
      clusters[of[i]].members.push_back(ElementRef::current("i" + std::to_string(i)));
    }
    std::erase_if(clusters, [](const Cluster& c) { return c.members.empty(); });
    return clusters;
  };
  ScaleUniverse u;
  u.base.clusters = label(base, "id_");
  u.exp.clusters = label(exp, "id_");
  u.ideal.clusters = label(ideal, "concept_");
  for (std::size_t i = 0; i < kItems; ++i) {
    u.weights.set(ElementRef::current("i" + std::to_string(i)), gen::weight(rng));
  }
  u.hist.clustering.epoch = "H";
  for (std::size_t c = 0; c < kHist; ++c) {
    Cluster hc{"id_" + std::to_string(c + 1), {}};
    for (std::size_t m = 0; m < kHistPer; ++m) {
      const auto h = ElementRef::historical("H", "h" + std::to_string(c) + "_" + std::to_string(m));
      hc.members.push_back(h);
      u.hist.weights.set(h, 0.5 + gen::unit(rng));
    }
    u.hist.clustering.clusters.push_back(std::move(hc));
    // Historical members belong with the concept their id stood for.
    auto& concept_members = u.ideal.clusters[c].members;
    const auto& hm = u.hist.clustering.clusters.back().members;
    concept_members.insert(concept_members.end(), hm.begin(), hm.end());
  }
  return u;
}

long peakRssMiB() {
  rusage ru{};
  getrusage(RUSAGE_SELF, &ru);
  return ru.ru_maxrss / 1024;
}

void ac9() {
  auto u = scaleUniverse();
  const auto start = Clock::now();
  TransformConfig cfg;
  cfg.mode = AssignmentMode::Simultaneous;
  auto in = buildEvalInputs(u.hist, u.base, u.exp, u.weights, cfg);
  attachIdeal(in, completeIdeal(u.ideal, in));
  const auto r = evaluate(in);
  const double elapsed = seconds(start);
  const long rss = peakRssMiB();

  Check c;
  c.expect(r.quality.has_value(), "no quality metrics");
  if (r.quality) {
    const auto& q = *r.quality;
    for (double v : {r.impact.jaccard_distance, r.impact.split_rate, r.impact.merge_rate, q.good_split_rate,
                     q.bad_split_rate, q.good_merge_rate, q.bad_merge_rate, q.delta_precision, q.delta_recall,
                     q.iq}) {
      c.expect(std::isfinite(v), "non-finite metric");
    }
    c.near(r.impact.split_rate, q.good_split_rate + q.bad_split_rate, 1e-9, "split decomposition");
    c.near(r.impact.merge_rate, q.good_merge_rate + q.bad_merge_rate, 1e-9, "merge decomposition");
  }

  // Pointwise decomposition on a sample of elements.
  const auto idx = indexInputs(in);
  gen::Rng rng(9002);
  for (int s = 0; s < 2000; ++s) {
    const auto e = ElementRef::current("i" + std::to_string(gen::below(rng, 1'000'000)));
    const auto p = pointwiseQuality(idx.base, idx.exp, *idx.ideal, e);
    c.near(p.split_rate, p.good_split_rate + p.bad_split_rate, 1e-9, "pointwise split");
    c.near(p.merge_rate, p.good_merge_rate + p.bad_merge_rate, 1e-9, "pointwise merge");
  }

  // Collapse equivalence on a sampled sub-universe: the first 20000 items and
  // the history of their clusters.
  {
    constexpr std::size_t kSub = 20'000;
    auto keep = [&](const LabeledClustering& lc) {
      LabeledClustering out{lc.epoch, {}};
      for (const auto& cl : lc.clusters) {
        Cluster k{cl.id, {}};
        for (const auto& m : cl.members) {
          if (std::stoul(m.external_id.substr(1)) < kSub) k.members.push_back(m);
        }
        if (!k.members.empty()) out.clusters.push_back(std::move(k));
      }
      return out;
    };
    const auto sb = keep(u.base);
    const auto sx = keep(u.exp);
    WeightMap sw;
    for (std::size_t i = 0; i < kSub; ++i) {
      const auto e = ElementRef::current("i" + std::to_string(i));
      sw.set(e, u.weights.at(e));
    }
    const auto sub = buildEvalInputs(u.hist, sb, sx, sw, cfg);
    const auto a = aggregateImpact(sub).impact;
    const auto b = aggregateImpact(collapseHistoricalClusters(sub, cfg.k)).impact;
    c.near(a.jaccard_distance, b.jaccard_distance, 1e-9, "collapse jaccard");
    c.near(a.split_rate, b.split_rate, 1e-9, "collapse split");
    c.near(a.merge_rate, b.merge_rate, 1e-9, "collapse merge");
  }

  const bool ok = c.ok() && elapsed < 30.0 && rss < 4096;
  char detail[256];
  std::snprintf(detail, sizeof detail, "%zu elements, evaluate %.2f s, peak RSS %ld MiB, %zu checks%s",
                in.weight.size(), elapsed, rss, c.cases,
                c.ok() ? "" : (", failed: " + c.first).c_str());
  report("AC9", "scale smoke test", ok, detail);
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void()>>> criteria = {
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
      {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}};
  for (const auto& [id, run] : criteria) {
    try {
      run();
    } catch (const std::exception& e) {
      report(id, "threw", false, e.what());
    }
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
