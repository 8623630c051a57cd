#include "ideval/judgement.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "ideval/error.hpp"
#include "ideval/summation.hpp"
#include "ideval/tsv_io.hpp"

namespace ideval {
namespace {

constexpr std::size_t kMaxInconsistencies = 1000;

double unitInterval(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Index of the first entry of `cumulative` exceeding u * total.
std::size_t pickWeighted(const std::vector<double>& cumulative, std::mt19937_64& rng) {
  const double target = unitInterval(rng) * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
  return static_cast<std::size_t>(
      std::min<std::ptrdiff_t>(it - cumulative.begin(), cumulative.size() - 1));
}

using PairKey = std::pair<ElementRef, ElementRef>;

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

bool isJudged(const JudgementPair& p) {
  return p.verdict == Verdict::Equivalent || p.verdict == Verdict::Distinct;
}

Verdict parseVerdict(std::string_view token, std::size_t line) {
  if (token == "equiv") return Verdict::Equivalent;
  if (token == "distinct") return Verdict::Distinct;
  if (token == "unsure") return Verdict::Discarded;
  if (token == "unjudged") return Verdict::Unjudged;
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": unknown verdict '" +
                                         std::string(token) + "'");
}

VerdictSource parseSource(std::string_view token, std::size_t line) {
  if (token == "human") return VerdictSource::Human;
  if (token == "auto") return VerdictSource::AutoFreshId;
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": unknown source '" +
                                         std::string(token) + "'");
}

template <typename Fn>
void forEachPairLine(std::istream& in, Fn fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto fields = splitTabs(line);
    if (fields.size() < 3 || fields.size() > 4) {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(line_no) + ": expected 3 or 4 tab-separated fields");
    }
    JudgementPair p;
    try {
      p = JudgementPair::make(decodeElement(fields[0]), decodeElement(fields[1]));
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
    }
    p.verdict = parseVerdict(fields[2], line_no);
    if (fields.size() == 4) p.source = parseSource(fields[3], line_no);
    fn(std::move(p), line_no);
  }
}

}  // namespace

std::string_view verdictToken(Verdict v) {
  switch (v) {
    case Verdict::Equivalent: return "equiv";
    case Verdict::Distinct: return "distinct";
    case Verdict::Unjudged: return "unjudged";
    case Verdict::Discarded: return "unsure";
  }
  return "unjudged";
}

std::string_view sourceToken(VerdictSource s) {
  return s == VerdictSource::AutoFreshId ? "auto" : "human";
}

JudgementPair JudgementPair::make(ElementRef a, ElementRef b) {
  if (a == b) {
    throw Error(ErrorCode::InvalidConfig, "a pair needs two different elements, got " +
                                              encodeElement(a) + " twice");
  }
  if (b < a) std::swap(a, b);
  return JudgementPair{std::move(a), std::move(b), Verdict::Unjudged, VerdictSource::Human};
}

JudgementPair autoJudge(const JudgementPair& pair, const IdCensus& census) {
  auto fresh = [&](const ElementRef& e) {
    return e.isSynthetic() && census.isNonHistorical(e.external_id);
  };
  if (!fresh(pair.left) && !fresh(pair.right)) return pair;
  JudgementPair out = pair;
  out.verdict = Verdict::Distinct;
  out.source = VerdictSource::AutoFreshId;
  return out;
}

JudgementSet samplePairs(const EvalInputs& inputs, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::InvalidConfig, "sample size must be at least 1");
  const auto elements = inputs.base.elements();
  auto universe = Universe::build(elements, inputs.weight);
  const auto base = MembershipIndex::build(inputs.base, universe);
  const auto exp = MembershipIndex::build(inputs.exp, universe);
  const auto jd = pointwiseJaccardDistances(base, exp);

  std::vector<double> anchor_mass(jd.size());
  double running = 0.0;
  for (std::size_t e = 0; e < jd.size(); ++e) {
    running += universe->weight(static_cast<ElementIndex>(e)) * jd[e];
    anchor_mass[e] = running;
  }
  if (!(running > 0.0)) {
    throw Error(ErrorCode::NothingToSample, "baseline and experiment agree on every element");
  }

  std::mt19937_64 rng(seed);
  JudgementSet out;
  out.seed = seed;
  std::set<PairKey> seen;
  const std::size_t max_attempts = 50 * n + 1000;
  std::vector<ElementIndex> partners;
  std::vector<double> partner_mass;
  for (std::size_t attempt = 0; attempt < max_attempts && out.pairs.size() < n; ++attempt) {
    const auto anchor = static_cast<ElementIndex>(pickWeighted(anchor_mass, rng));
    const ClusterIndex b = base.owner(anchor);
    const ClusterIndex x = exp.owner(anchor);
    partners.clear();
    partner_mass.clear();
    double mass = 0.0;
    for (const auto m : base.members(b)) {
      if (exp.owner(m) != x) {
        partners.push_back(m);
        partner_mass.push_back(mass += universe->weight(m));
      }
    }
    for (const auto m : exp.members(x)) {
      if (base.owner(m) != b) {
        partners.push_back(m);
        partner_mass.push_back(mass += universe->weight(m));
      }
    }
    const auto partner = partners[pickWeighted(partner_mass, rng)];
    auto pair = JudgementPair::make(universe->element(anchor), universe->element(partner));
    if (!seen.emplace(pair.left, pair.right).second) continue;
    out.pairs.push_back(autoJudge(pair, inputs.census));
  }
  out.coverage_weight = coverageWeight(inputs, out);
  return out;
}

double coverageWeight(const EvalInputs& inputs, const JudgementSet& js) {
  std::set<ElementRef> touched;
  for (const auto& p : js.pairs) {
    if (!isJudged(p)) continue;
    touched.insert(p.left);
    touched.insert(p.right);
  }
  CompensatedSum covered, total;
  for (const auto& e : touched) covered += inputs.weight.at(e);
  for (const auto& cl : inputs.base.clusters) {
    for (const auto& e : cl.members) total += inputs.weight.at(e);
  }
  return total.value() > 0.0 ? covered.value() / total.value() : 0.0;
}

std::vector<Inconsistency> findInconsistencies(const JudgementSet& js) {
  std::map<ElementRef, std::size_t> id;
  auto intern = [&](const ElementRef& e) { return id.try_emplace(e, id.size()).first->second; };
  for (const auto& p : js.pairs) {
    if (!isJudged(p)) continue;
    intern(p.left);
    intern(p.right);
  }
  std::vector<ElementRef> element(id.size());
  for (const auto& [e, i] : id) element[i] = e;

  DisjointSets sets(id.size());
  std::vector<std::vector<std::size_t>> adjacency(id.size());
  for (const auto& p : js.pairs) {
    if (p.verdict != Verdict::Equivalent) continue;
    const auto a = id.at(p.left), b = id.at(p.right);
    sets.unite(a, b);
    adjacency[a].push_back(b);
    adjacency[b].push_back(a);
  }

  std::vector<Inconsistency> out;
  for (const auto& p : js.pairs) {
    if (p.verdict != Verdict::Distinct || out.size() >= kMaxInconsistencies) continue;
    const auto from = id.at(p.left), to = id.at(p.right);
    if (sets.find(from) != sets.find(to)) continue;
    // Shortest chain of equivalences between the two sides.
    std::vector<std::size_t> prev(id.size(), id.size());
    std::queue<std::size_t> frontier;
    frontier.push(from);
    prev[from] = from;
    while (!frontier.empty() && prev[to] == id.size()) {
      const auto cur = frontier.front();
      frontier.pop();
      for (const auto next : adjacency[cur]) {
        if (prev[next] == id.size()) {
          prev[next] = cur;
          frontier.push(next);
        }
      }
    }
    Inconsistency inc{p, {}};
    for (auto cur = to;; cur = prev[cur]) {
      inc.equivalence_path.push_back(element[cur]);
      if (cur == from) break;
    }
    std::reverse(inc.equivalence_path.begin(), inc.equivalence_path.end());
    out.push_back(std::move(inc));
  }
  return out;
}

void writePairs(std::ostream& out, const JudgementSet& js) {
  out << "# seed\t" << js.seed << '\n';
  out << "# left\tright\tverdict\tsource\n";
  for (const auto& p : js.pairs) {
    out << encodeElement(p.left) << '\t' << encodeElement(p.right) << '\t'
        << verdictToken(p.verdict) << '\t' << sourceToken(p.source) << '\n';
  }
}

JudgementSet readPairs(std::istream& in) {
  JudgementSet js;
  std::set<PairKey> seen;
  // The seed comment is informational; parse it when present.
  std::string first;
  const auto start = in.tellg();
  if (std::getline(in, first) && first.starts_with("# seed\t")) {
    js.seed = std::stoull(first.substr(7));
  } else {
    in.clear();
    in.seekg(start);
  }
  forEachPairLine(in, [&](JudgementPair p, std::size_t line) {
    if (!seen.emplace(p.left, p.right).second) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": duplicate pair");
    }
    js.pairs.push_back(std::move(p));
  });
  return js;
}

IngestResult ingestVerdicts(const JudgementSet& sampled, std::istream& verdicts,
                            const EvalInputs& inputs) {
  IngestResult result{sampled, {}};
  std::map<PairKey, std::size_t> position;
  for (std::size_t i = 0; i < sampled.pairs.size(); ++i) {
    position.emplace(PairKey{sampled.pairs[i].left, sampled.pairs[i].right}, i);
  }
  forEachPairLine(verdicts, [&](JudgementPair p, std::size_t line) {
    const auto it = position.find(PairKey{p.left, p.right});
    if (it == position.end()) {
      throw Error(ErrorCode::UnknownPair, "line " + std::to_string(line) + ": pair " +
                                              encodeElement(p.left) + " / " +
                                              encodeElement(p.right) + " was never sampled");
    }
    auto& target = result.set.pairs[it->second];
    target.verdict = p.verdict;
    target.source = p.source;
  });
  for (auto& p : result.set.pairs) {
    if (p.source == VerdictSource::AutoFreshId) p.source = VerdictSource::Human;
    p = autoJudge(p, inputs.census);
  }
  result.set.coverage_weight = coverageWeight(inputs, result.set);
  result.inconsistencies = findInconsistencies(result.set);
  return result;
}

IngestResult ingestVerdicts(const JudgementSet& sampled, const std::string& path,
                            const EvalInputs& inputs) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open verdict file " + path);
  return ingestVerdicts(sampled, in, inputs);
}

MetricsReport estimateQualityFromJudgements(const EvalInputs& inputs, const JudgementSet& js,
                                            const MetricsOptions& opts) {
  const auto inconsistencies = findInconsistencies(js);
  if (!inconsistencies.empty()) {
    std::ostringstream msg;
    msg << inconsistencies.size() << " distinct verdict(s) contradict equivalence chains, e.g. "
        << encodeElement(inconsistencies.front().distinct.left) << " / "
        << encodeElement(inconsistencies.front().distinct.right);
    throw Error(ErrorCode::InconsistentJudgements, msg.str());
  }

  const auto elements = inputs.base.elements();
  auto universe = Universe::build(elements, inputs.weight);
  const auto base = MembershipIndex::build(inputs.base, universe);
  const auto exp = MembershipIndex::build(inputs.exp, universe);

  DisjointSets sets(universe->size());
  std::vector<char> mask(universe->size(), 0);
  bool any = false;
  for (const auto& p : js.pairs) {
    if (!isJudged(p)) continue;
    const auto a = universe->indexOf(p.left), b = universe->indexOf(p.right);
    mask[a] = mask[b] = 1;
    any = true;
    if (p.verdict == Verdict::Equivalent) sets.unite(a, b);
  }
  if (!any) throw Error(ErrorCode::InsufficientCoverage, "no judged pairs to estimate from");

  LabeledClustering ideal;
  std::unordered_map<std::size_t, std::size_t> class_of_root;
  for (ElementIndex e = 0; e < universe->size(); ++e) {
    const auto root = sets.find(e);
    auto [it, fresh] = class_of_root.try_emplace(root, ideal.clusters.size());
    if (fresh) ideal.clusters.push_back(Cluster{"class" + std::to_string(it->second), {}});
    ideal.clusters[it->second].members.push_back(universe->element(e));
  }
  const auto ideal_idx = MembershipIndex::build(ideal, universe);

  auto report = aggregateIndexed(base, exp, &ideal_idx, mask, opts);
  report.estimate = true;
  report.coverage_weight = report.total_weight / universe->totalWeight();
  return report;
}

}  // namespace ideval
