#pragma once

// Generation, canonicalization and the line-oriented file format of
// (points, solution) pairs:
//
//   x1 y1 x2 y2 ... xn yn output i1 i2 ... ik
//
// Coordinates use 10 significant digits, indices are 1-based. Hull labels
// carry the closing repeat of the first vertex, Delaunay labels are flattened
// triples, TSP labels are the permutation without a closing repeat. The
// start/end frame tokens are implicit and never written.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ptrgeo/geometry.hpp"
#include "ptrgeo/task.hpp"

namespace ptrgeo::data {

enum class TspSolver { optimal, a1, a2, a3 };

std::string_view to_string(TspSolver solver);
TspSolver parse_tsp_solver(std::string_view name);

struct Example {
  Task task = Task::hull;
  std::vector<geom::Point> points;
  std::vector<int> output;  // file-form label

  std::size_t n() const noexcept { return points.size(); }
  // Decoder targets: the label followed by the end token.
  std::vector<int> targets() const;

  friend bool operator==(const Example&, const Example&) = default;
};

struct GenSpec {
  Task task = Task::hull;
  std::size_t count = 0;
  std::size_t n_min = 5;
  std::size_t n_max = 5;
  std::uint64_t seed = 0;
  TspSolver solver = TspSolver::optimal;
};

// Throws SpecError when the request can never be satisfied.
void validate(const GenSpec& spec);

// Example `index` of the stream described by the request. Depends only on
// (request, index); degenerate draws are redrawn from the same stream.
Example generate_one(const GenSpec& spec, std::size_t index);
std::vector<Example> generate(const GenSpec& spec);

// Solver output -> canonical file-form label.
//   hull: vertex cycle in any rotation/orientation (closing repeat optional)
//   delaunay: flattened triples in any order
//   tsp: any rotation/orientation of the tour
std::vector<int> canonicalize(Task task, std::span<const geom::Point> points,
                              std::span<const int> raw);

// Exact solver label for hull/delaunay, or the chosen solver for tsp.
std::vector<int> solve(Task task, std::span<const geom::Point> points,
                       TspSolver solver = TspSolver::optimal);

// Checks that a label is well-formed for its task and point count.
void validate_example(const Example& example);

std::string format_coordinate(double v);
// Round-trips v through the file representation.
double round_coordinate(double v);

std::string serialize(const Example& example);
// Throws ParseError (with line number) for malformed text and
// ValidationError for well-formed lines with invalid labels.
Example parse(std::string_view line, Task task, std::size_t line_no = 0);

void write_file(const std::filesystem::path& path, std::span<const Example> examples);
std::vector<Example> read_file(const std::filesystem::path& path, Task task);

}  // namespace ptrgeo::data
