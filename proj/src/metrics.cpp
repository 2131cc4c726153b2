#include "ptrgeo/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "ptrgeo/error.hpp"
#include "ptrgeo/parallel.hpp"
#include "ptrgeo/tsp.hpp"

namespace ptrgeo::eval {

namespace {

// Vertex cycle of a hull token sequence: frame tokens dropped, closing repeat
// removed. Empty when the sequence cannot be a cycle of distinct vertices.
std::vector<int> vertex_cycle(std::span<const int> seq) {
  std::vector<int> cycle;
  for (int t : seq) {
    if (t != kEndToken) cycle.push_back(t);
  }
  if (cycle.size() >= 2 && cycle.front() == cycle.back()) cycle.pop_back();
  auto sorted = cycle;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return {};
  return cycle;
}

bool indices_in_range(std::span<const int> seq, std::size_t n) {
  return std::all_of(seq.begin(), seq.end(),
                     [n](int t) { return t >= 1 && static_cast<std::size_t>(t) <= n; });
}

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string general(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ' ';
    if constexpr (std::is_same_v<T, int>) {
      out += std::to_string(values[i]);
    } else {
      out += data::format_coordinate(values[i].x);
      out += ' ';
      out += data::format_coordinate(values[i].y);
    }
  }
  return out;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

double to_double(std::string_view s, std::size_t line) {
  try {
    std::size_t used = 0;
    const std::string str(s);
    const double v = std::stod(str, &used);
    if (used != str.size()) throw ParseError("bad number '" + str + "'", line);
    return v;
  } catch (const std::logic_error&) {
    throw ParseError("bad number '" + std::string(s) + "'", line);
  }
}

std::vector<int> to_ints(std::string_view s, std::size_t line) {
  std::vector<int> out;
  std::istringstream in{std::string(s)};
  std::string tok;
  while (in >> tok) out.push_back(static_cast<int>(to_double(tok, line)));
  return out;
}

}  // namespace

bool hull_accuracy(std::span<const int> pred, std::span<const int> truth) {
  const auto p = vertex_cycle(pred);
  const auto t = vertex_cycle(truth);
  if (p.empty() || p.size() != t.size()) return false;
  const auto start = std::find(p.begin(), p.end(), t.front());
  if (start == p.end()) return false;
  std::vector<int> rotated(start, p.end());
  rotated.insert(rotated.end(), p.begin(), start);
  return rotated == t;
}

AreaCoverage area_coverage(std::span<const geom::Point> pred_ring,
                           std::span<const geom::Point> truth_ring) {
  AreaCoverage out;
  if (pred_ring.size() < 3 || !geom::is_simple(pred_ring)) return out;
  out.simple = true;
  const double truth_area = std::abs(geom::shoelace_area(truth_ring));
  if (truth_area <= 0.0) throw DegenerateInputError("true hull has zero area");
  out.ratio = std::clamp(geom::clip_to_convex(pred_ring, truth_ring) / truth_area, 0.0, 1.0);
  return out;
}

AreaCoverage area_coverage(std::span<const int> pred, std::span<const int> truth,
                           std::span<const geom::Point> points) {
  std::vector<int> p;
  for (int t : pred) {
    if (t != kEndToken) p.push_back(t);
  }
  if (p.size() >= 2 && p.front() == p.back()) p.pop_back();
  if (p.size() < 3 || !indices_in_range(p, points.size())) return {};
  const auto t = vertex_cycle(truth);
  return area_coverage(geom::ring_from_indices(points, p), geom::ring_from_indices(points, t));
}

bool coverage_fails(std::size_t not_simple, std::size_t total) {
  return not_simple * 100 > total;
}

TriangulationScore triangulation_metrics(std::span<const int> pred, std::span<const int> truth) {
  auto triples = [](std::span<const int> seq) {
    std::set<geom::Triangle> out;
    for (std::size_t i = 0; i + 3 <= seq.size(); i += 3) {
      geom::Triangle t{seq[i], seq[i + 1], seq[i + 2]};
      std::sort(t.begin(), t.end());
      out.insert(t);
    }
    return out;
  };
  std::vector<int> p;
  for (int t : pred) {
    if (t != kEndToken) p.push_back(t);
  }
  TriangulationScore score;
  score.malformed = p.size() % 3 != 0 ? 1 : 0;
  const auto ps = triples(p);
  const auto ts = triples(truth);
  score.exact = ps == ts;
  std::size_t hit = 0;
  for (const auto& t : ts) hit += ps.count(t);
  score.coverage = ts.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(ts.size());
  return score;
}

TourScore tsp_metrics(std::span<const int> pred, std::span<const geom::Point> points) {
  TourScore score;
  score.valid = tsp::is_permutation_of_cities(pred, points.size());
  if (score.valid) score.length = tsp::tour_length(points, pred);
  return score;
}

Record score(const data::Example& example, std::size_t index, const decode::Decoded& prediction) {
  Record r;
  r.index = index;
  r.n = example.n();
  r.points = example.points;
  r.pred = prediction.tokens;
  r.truth = example.output;
  r.cap_hit = prediction.cap_hit;
  switch (example.task) {
    case Task::hull: {
      r.correct = hull_accuracy(r.pred, r.truth);
      const auto cov = area_coverage(r.pred, r.truth, r.points);
      r.simple = cov.simple;
      r.coverage = cov.ratio;
      break;
    }
    case Task::delaunay: {
      const auto tri = triangulation_metrics(r.pred, r.truth);
      r.correct = tri.exact;
      r.coverage = tri.coverage;
      break;
    }
    case Task::tsp: {
      const auto tour = tsp_metrics(r.pred, r.points);
      r.valid = tour.valid;
      r.length = tour.length;
      r.truth_length = tsp::tour_length(r.points, r.truth);
      r.correct = r.valid && data::canonicalize(Task::tsp, r.points, r.pred) == r.truth;
      break;
    }
  }
  return r;
}

void Report::recompute() {
  accuracy_pct = coverage_pct = validity_pct = mean_length = mean_truth_length = 0.0;
  not_simple = cap_hits = 0;
  fail = false;
  const std::size_t total = records.size();
  if (total == 0) return;
  std::size_t correct = 0, valid = 0;
  double coverage_sum = 0.0, length_sum = 0.0, truth_sum = 0.0;
  for (const auto& r : records) {
    correct += r.correct;
    cap_hits += r.cap_hit;
    switch (task) {
      case Task::hull:
        if (r.simple) {
          coverage_sum += r.coverage;
        } else {
          ++not_simple;
        }
        break;
      case Task::delaunay:
        coverage_sum += r.coverage;
        break;
      case Task::tsp:
        if (r.valid) {
          ++valid;
          length_sum += r.length;
        }
        truth_sum += r.truth_length;
        break;
    }
  }
  const double n = static_cast<double>(total);
  accuracy_pct = 100.0 * static_cast<double>(correct) / n;
  if (task == Task::hull) {
    const std::size_t simple = total - not_simple;
    coverage_pct = simple ? 100.0 * coverage_sum / static_cast<double>(simple) : 0.0;
    fail = coverage_fails(not_simple, total);
  } else if (task == Task::delaunay) {
    coverage_pct = 100.0 * coverage_sum / n;
  } else {
    validity_pct = 100.0 * static_cast<double>(valid) / n;
    mean_length = valid ? length_sum / static_cast<double>(valid) : 0.0;
    mean_truth_length = truth_sum / n;
  }
}

std::string Report::to_text() const {
  std::ostringstream out;
  out << "task=" << to_string(task) << '\n';
  out << "source=" << source << '\n';
  out << "examples=" << records.size() << '\n';
  out << "accuracy_pct=" << fixed(accuracy_pct, 4) << '\n';
  switch (task) {
    case Task::hull:
      out << "area_coverage_pct=" << (fail ? std::string("FAIL") : fixed(coverage_pct, 4)) << '\n';
      out << "not_simple=" << not_simple << '\n';
      break;
    case Task::delaunay:
      out << "triangle_coverage_pct=" << fixed(coverage_pct, 4) << '\n';
      break;
    case Task::tsp:
      out << "validity_pct=" << fixed(validity_pct, 4) << '\n';
      out << "mean_length=" << fixed(mean_length) << '\n';
      out << "mean_label_length=" << fixed(mean_truth_length) << '\n';
      break;
  }
  out << "cap_hits=" << cap_hits << '\n';
  return out.str();
}

namespace {
constexpr std::string_view kTsvHeader =
    "index\tn\tcorrect\tsimple\tcoverage\tvalid\tlength\tlabel_length\tcap_hit\tpoints\tpred\ttruth";
}

std::string Report::to_tsv() const {
  std::string out(kTsvHeader);
  out += '\n';
  for (const auto& r : records) {
    out += std::to_string(r.index) + '\t' + std::to_string(r.n) + '\t' +
           std::to_string(int(r.correct)) + '\t' + std::to_string(int(r.simple)) + '\t' +
           general(r.coverage) + '\t' + std::to_string(int(r.valid)) + '\t' + general(r.length) +
           '\t' + general(r.truth_length) + '\t' + std::to_string(int(r.cap_hit)) + '\t' +
           join(r.points) + '\t' + join(r.pred) + '\t' + join(r.truth) + '\n';
  }
  return out;
}

std::vector<Record> parse_tsv(std::string_view text) {
  std::vector<Record> records;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != kTsvHeader) throw ParseError("unexpected detail header", line_no);
      continue;
    }
    const auto f = split(line, '\t');
    if (f.size() != 12) {
      throw ParseError("expected 12 tab-separated fields, got " + std::to_string(f.size()), line_no);
    }
    Record r;
    r.index = static_cast<std::size_t>(to_double(f[0], line_no));
    r.n = static_cast<std::size_t>(to_double(f[1], line_no));
    r.correct = to_double(f[2], line_no) != 0.0;
    r.simple = to_double(f[3], line_no) != 0.0;
    r.coverage = to_double(f[4], line_no);
    r.valid = to_double(f[5], line_no) != 0.0;
    r.length = to_double(f[6], line_no);
    r.truth_length = to_double(f[7], line_no);
    r.cap_hit = to_double(f[8], line_no) != 0.0;
    std::istringstream pin{std::string(f[9])};
    std::string xs, ys;
    while (pin >> xs) {
      if (!(pin >> ys)) throw ParseError("odd coordinate count", line_no);
      r.points.push_back({to_double(xs, line_no), to_double(ys, line_no)});
    }
    if (r.points.size() != r.n) throw ParseError("point count disagrees with n", line_no);
    r.pred = to_ints(f[10], line_no);
    r.truth = to_ints(f[11], line_no);
    if (!indices_in_range(r.truth, r.n)) throw ParseError("label index out of range", line_no);
    records.push_back(std::move(r));
  }
  return records;
}

Report evaluate(std::span<const data::Example> examples, const Predictor& predict,
                std::string source) {
  Report report;
  report.source = std::move(source);
  if (!examples.empty()) report.task = examples.front().task;
  report.records.resize(examples.size());
  parallel_for(examples.size(), [&](std::size_t i) {
    if (examples[i].task != report.task) throw ArgumentError("mixed tasks in evaluation set");
    report.records[i] = score(examples[i], i, predict(examples[i]));
  });
  report.recompute();
  return report;
}

}  // namespace ptrgeo::eval
