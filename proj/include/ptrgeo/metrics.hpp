#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ptrgeo/dataset.hpp"
#include "ptrgeo/decode.hpp"
#include "ptrgeo/geometry.hpp"

namespace ptrgeo::eval {

// Same polygon: equal vertex cycles up to rotation (not reflection). Frame
// tokens and the closing repeat are ignored; malformed predictions are false.
bool hull_accuracy(std::span<const int> pred, std::span<const int> truth);

struct AreaCoverage {
  bool simple = false;
  double ratio = 0.0;  // area(pred ∩ truth) / area(truth), valid when simple
};

AreaCoverage area_coverage(std::span<const int> pred, std::span<const int> truth,
                           std::span<const geom::Point> points);
AreaCoverage area_coverage(std::span<const geom::Point> pred_ring,
                           std::span<const geom::Point> truth_ring);

// Aggregate area coverage is reported as FAIL when more than 1% of the
// predictions are not simple polygons.
bool coverage_fails(std::size_t not_simple, std::size_t total);

struct TriangulationScore {
  bool exact = false;
  double coverage = 0.0;       // |pred ∩ truth| / |truth| over normalized triples
  std::size_t malformed = 0;   // discarded trailing tokens (0 or 1 partial triple)
};

TriangulationScore triangulation_metrics(std::span<const int> pred, std::span<const int> truth);

struct TourScore {
  bool valid = false;
  double length = 0.0;  // only meaningful when valid
};

TourScore tsp_metrics(std::span<const int> pred, std::span<const geom::Point> points);

struct Record {
  std::size_t index = 0;
  std::size_t n = 0;
  std::vector<geom::Point> points;
  std::vector<int> pred;
  std::vector<int> truth;
  bool correct = false;  // hull: same polygon; delaunay: exact; tsp: equals label tour
  bool simple = true;    // hull only
  double coverage = 0.0; // hull area / delaunay triangle coverage
  bool valid = true;     // tsp only
  double length = 0.0;   // tsp prediction length (when valid)
  double truth_length = 0.0;
  bool cap_hit = false;
};

struct Report {
  Task task = Task::hull;
  std::string source;
  std::vector<Record> records;

  // Aggregates, filled by recompute().
  double accuracy_pct = 0.0;
  double coverage_pct = 0.0;  // hull: over simple predictions; delaunay: mean per example
  std::size_t not_simple = 0;
  bool fail = false;
  double validity_pct = 0.0;
  double mean_length = 0.0;  // over valid tours
  double mean_truth_length = 0.0;
  std::size_t cap_hits = 0;

  void recompute();
  // Flat "key=value" lines.
  std::string to_text() const;
  // Header plus one tab-separated line per record.
  std::string to_tsv() const;
};

Record score(const data::Example& example, std::size_t index, const decode::Decoded& prediction);

using Predictor = std::function<decode::Decoded(const data::Example&)>;

// Scores every example (in parallel) and assembles the report in order.
Report evaluate(std::span<const data::Example> examples, const Predictor& predict,
                std::string source);

// Parses a file written by Report::to_tsv().
std::vector<Record> parse_tsv(std::string_view text);

}  // namespace ptrgeo::eval
