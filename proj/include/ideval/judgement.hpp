#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ideval/core.hpp"
#include "ideval/metrics.hpp"
#include "ideval/transform.hpp"

namespace ideval {

enum class Verdict { Equivalent, Distinct, Unjudged, Discarded };
enum class VerdictSource { Human, AutoFreshId };

std::string_view verdictToken(Verdict v);      // equiv, distinct, unjudged, unsure
std::string_view sourceToken(VerdictSource s);  // human, auto

// An unordered element pair; `left` is the smaller element.
struct JudgementPair {
  ElementRef left;
  ElementRef right;
  Verdict verdict = Verdict::Unjudged;
  VerdictSource source = VerdictSource::Human;

  // Throws InvalidConfig when a == b.
  static JudgementPair make(ElementRef a, ElementRef b);
};

struct JudgementSet {
  std::vector<JudgementPair> pairs;
  std::uint64_t seed = 0;
  double coverage_weight = 0.0;
};

// Equivalence verdicts that, followed transitively, connect the two sides of
// a distinct verdict.
struct Inconsistency {
  JudgementPair distinct;
  std::vector<ElementRef> equivalence_path;  // from distinct.left to distinct.right
};

struct IngestResult {
  JudgementSet set;
  std::vector<Inconsistency> inconsistencies;
};

// Pairs touching a synthetic id that has no history are distinct without
// asking anyone.
JudgementPair autoJudge(const JudgementPair& pair, const IdCensus& census);

// Draws up to n distinct pairs. Anchors are drawn with probability
// proportional to weight x pointwise Jaccard distance; partners are drawn by
// weight from the symmetric difference of the anchor's Base and Exp clusters.
// Throws NothingToSample when Base and Exp agree everywhere.
JudgementSet samplePairs(const EvalInputs& inputs, std::size_t n, std::uint64_t seed);

// Fraction of the universe weight incident to judged (equivalent or distinct)
// pairs.
double coverageWeight(const EvalInputs& inputs, const JudgementSet& js);

std::vector<Inconsistency> findInconsistencies(const JudgementSet& js);

// Pair/verdict TSV: `left <TAB> right <TAB> verdict [<TAB> source]`.
void writePairs(std::ostream& out, const JudgementSet& js);
JudgementSet readPairs(std::istream& in);

// Applies a verdict file onto previously sampled pairs. `unsure` verdicts
// become Discarded. Throws ParseError or UnknownPair.
IngestResult ingestVerdicts(const JudgementSet& sampled, std::istream& verdicts,
                            const EvalInputs& inputs);
IngestResult ingestVerdicts(const JudgementSet& sampled, const std::string& path,
                            const EvalInputs& inputs);

// Naive estimate: the ideal is taken to be the connected components of the
// equivalent verdicts (singletons elsewhere) and metrics are averaged over the
// elements incident to judged pairs only.
MetricsReport estimateQualityFromJudgements(const EvalInputs& inputs, const JudgementSet& js,
                                            const MetricsOptions& opts = {});

}  // namespace ideval
