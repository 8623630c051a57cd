#include "ideval/tsv_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "ideval/error.hpp"

namespace ideval {
namespace {

std::ifstream openInput(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  return in;
}

Error parseError(std::size_t line, const std::string& what) {
  return Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
}

double parseWeight(std::string_view text, std::size_t line) {
  double w = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, w);
  if (ec != std::errc() || ptr != end) {
    throw parseError(line, "bad weight '" + std::string(text) + "'");
  }
  return w;
}

// Calls fn(fields, line_no) for every non-comment, non-blank line.
template <typename Fn>
void forEachRecord(std::istream& in, Fn fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    fn(splitTabs(line), line_no);
  }
}

// Groups (element, cluster id) records into clusters in first-seen order.
class ClusterAccumulator {
 public:
  void add(ElementRef e, std::string_view id) {
    auto [it, fresh] = position_.try_emplace(std::string(id), out_.clusters.size());
    if (fresh) out_.clusters.push_back(Cluster{it->first, {}});
    out_.clusters[it->second].members.push_back(std::move(e));
  }

  LabeledClustering take() {
    position_.clear();
    return std::move(out_);
  }

 private:
  LabeledClustering out_;
  std::unordered_map<std::string, std::size_t> position_;
};

}  // namespace

std::vector<std::string_view> splitTabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string_view::npos ? tab : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return fields;
}

std::string formatWeight(double w) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, w);
  return std::string(buf, ptr);
}

WeightedClustering readClusteringTsv(std::istream& in, ElementKind kind, const std::string& epoch) {
  if (kind == ElementKind::SyntheticId) {
    throw Error(ErrorCode::InvalidConfig, "clustering files hold current or historical items");
  }
  WeightedClustering out;
  ClusterAccumulator acc;
  forEachRecord(in, [&](const std::vector<std::string_view>& f, std::size_t line) {
    if (f.size() < 2 || f.size() > 3) {
      throw parseError(line, "expected item, cluster id and optional weight");
    }
    if (f[0].empty() || f[1].empty()) throw parseError(line, "empty item or cluster id");
    ElementRef e = kind == ElementKind::HistoricalItem
                       ? ElementRef::historical(epoch, std::string(f[0]))
                       : ElementRef::current(std::string(f[0]));
    const double w = f.size() == 3 ? parseWeight(f[2], line) : 1.0;
    if (out.weights.contains(e)) throw parseError(line, "item " + std::string(f[0]) + " listed twice");
    try {
      out.weights.set(e, w);
    } catch (const Error& err) {
      throw parseError(line, err.what());
    }
    acc.add(std::move(e), f[1]);
  });
  out.clustering = acc.take();
  out.clustering.epoch = epoch;
  return out;
}

WeightedClustering readClusteringTsv(const std::string& path, ElementKind kind,
                                     const std::string& epoch) {
  auto in = openInput(path);
  try {
    return readClusteringTsv(in, kind, epoch);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

void writeClusteringTsv(std::ostream& out, const WeightedClustering& c) {
  for (const auto& cl : c.clustering.clusters) {
    for (const auto& e : cl.members) {
      out << e.external_id << '\t' << cl.id << '\t' << formatWeight(c.weights.at(e)) << '\n';
    }
  }
}

LabeledClustering readElementClustering(std::istream& in) {
  ClusterAccumulator acc;
  forEachRecord(in, [&](const std::vector<std::string_view>& f, std::size_t line) {
    if (f.size() != 2 || f[1].empty()) throw parseError(line, "expected element and cluster id");
    try {
      acc.add(decodeElement(f[0]), f[1]);
    } catch (const Error& err) {
      throw parseError(line, err.what());
    }
  });
  return acc.take();
}

LabeledClustering readElementClustering(const std::string& path) {
  auto in = openInput(path);
  try {
    return readElementClustering(in);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

void writeElementClustering(std::ostream& out, const LabeledClustering& c) {
  for (const auto& cl : c.clusters) {
    for (const auto& e : cl.members) out << encodeElement(e) << '\t' << cl.id << '\n';
  }
}

WeightMap readElementWeights(std::istream& in) {
  WeightMap out;
  forEachRecord(in, [&](const std::vector<std::string_view>& f, std::size_t line) {
    if (f.size() != 2) throw parseError(line, "expected element and weight");
    const double w = parseWeight(f[1], line);
    try {
      out.set(decodeElement(f[0]), w);
    } catch (const Error& err) {
      throw parseError(line, err.what());
    }
  });
  return out;
}

WeightMap readElementWeights(const std::string& path) {
  auto in = openInput(path);
  try {
    return readElementWeights(in);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

void writeElementWeights(std::ostream& out, const LabeledClustering& order, const WeightMap& w) {
  for (const auto& cl : order.clusters) {
    for (const auto& e : cl.members) out << encodeElement(e) << '\t' << formatWeight(w.at(e)) << '\n';
  }
}

}  // namespace ideval
