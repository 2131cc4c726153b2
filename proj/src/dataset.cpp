#include "ptrgeo/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ptrgeo/error.hpp"
#include "ptrgeo/parallel.hpp"
#include "ptrgeo/rng.hpp"
#include "ptrgeo/tsp.hpp"

namespace ptrgeo {

std::string_view to_string(Task task) {
  switch (task) {
    case Task::hull:
      return "hull";
    case Task::delaunay:
      return "delaunay";
    case Task::tsp:
      return "tsp";
  }
  return "?";
}

Task parse_task(std::string_view name) {
  if (name == "hull") return Task::hull;
  if (name == "delaunay") return Task::delaunay;
  if (name == "tsp") return Task::tsp;
  throw ArgumentError("unknown task: " + std::string(name));
}

}  // namespace ptrgeo

namespace ptrgeo::data {

namespace {

constexpr std::size_t kMaxRedraws = 10000;

std::vector<int> canonical_tour(std::span<const int> raw, std::size_t n) {
  if (!tsp::is_permutation_of_cities(raw, n)) {
    throw ValidationError("tour is not a permutation of 1.." + std::to_string(n));
  }
  std::vector<int> t(raw.begin(), raw.end());
  std::rotate(t.begin(), std::find(t.begin(), t.end(), 1), t.end());
  if (t.size() > 2 && t[1] > t.back()) std::reverse(t.begin() + 1, t.end());
  return t;
}

std::vector<int> flatten(const std::vector<geom::Triangle>& tris) {
  std::vector<int> flat;
  flat.reserve(tris.size() * 3);
  for (const auto& t : tris) flat.insert(flat.end(), t.begin(), t.end());
  return flat;
}

}  // namespace

std::string_view to_string(TspSolver solver) {
  switch (solver) {
    case TspSolver::optimal:
      return "optimal";
    case TspSolver::a1:
      return "a1";
    case TspSolver::a2:
      return "a2";
    case TspSolver::a3:
      return "a3";
  }
  return "?";
}

TspSolver parse_tsp_solver(std::string_view name) {
  if (name == "optimal") return TspSolver::optimal;
  if (name == "a1") return TspSolver::a1;
  if (name == "a2") return TspSolver::a2;
  if (name == "a3") return TspSolver::a3;
  throw ArgumentError("unknown tsp solver: " + std::string(name));
}

std::vector<int> Example::targets() const {
  std::vector<int> t = output;
  t.push_back(kEndToken);
  return t;
}

void validate(const GenSpec& spec) {
  if (spec.n_min > spec.n_max) throw SpecError("n_min exceeds n_max");
  const std::size_t floor = spec.task == Task::tsp ? 2 : 3;
  if (spec.n_min < floor) {
    throw SpecError(std::string(to_string(spec.task)) + " needs n >= " + std::to_string(floor));
  }
  if (spec.task == Task::tsp) {
    if (spec.solver == TspSolver::optimal && spec.n_max > tsp::kHeldKarpMaxCities) {
      throw SpecError("optimal tsp labels are limited to n <= " +
                      std::to_string(tsp::kHeldKarpMaxCities) + " (requested n_max=" +
                      std::to_string(spec.n_max) + ")");
    }
    if (spec.solver == TspSolver::a3 && spec.n_min < 3) {
      throw SpecError("a3 labels need n >= 3");
    }
  }
}

std::vector<int> solve(Task task, std::span<const geom::Point> points, TspSolver solver) {
  switch (task) {
    case Task::hull:
      return geom::convex_hull(points);
    case Task::delaunay:
      return flatten(geom::delaunay(points));
    case Task::tsp: {
      const auto d = tsp::DistanceMatrix::euclidean(points);
      tsp::Tour t;
      switch (solver) {
        case TspSolver::optimal:
          t = tsp::held_karp(d);
          break;
        case TspSolver::a1:
          t = tsp::greedy_edge(d);
          break;
        case TspSolver::a2:
          t = tsp::greedy_edge_two_opt(d);
          break;
        case TspSolver::a3:
          t = tsp::christofides(points);
          break;
      }
      return canonical_tour(t.order, points.size());
    }
  }
  throw ArgumentError("unknown task");
}

Example generate_one(const GenSpec& spec, std::size_t index) {
  Pcg64 rng(spec.seed, index);
  for (std::size_t draw = 0; draw < kMaxRedraws; ++draw) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(spec.n_min, spec.n_max));
    Example ex;
    ex.task = spec.task;
    ex.points.resize(n);
    for (auto& p : ex.points) {
      p.x = round_coordinate(rng.uniform());
      p.y = round_coordinate(rng.uniform());
    }
    try {
      ex.output = solve(spec.task, ex.points, spec.solver);
      return ex;
    } catch (const DegenerateInputError&) {
      // redraw
    }
  }
  throw SpecError("could not draw a non-degenerate instance for example " +
                  std::to_string(index));
}

std::vector<Example> generate(const GenSpec& spec) {
  validate(spec);
  std::vector<Example> out(spec.count);
  parallel_for(spec.count, [&](std::size_t i) { out[i] = generate_one(spec, i); });
  return out;
}

std::vector<int> canonicalize(Task task, std::span<const geom::Point> points,
                              std::span<const int> raw) {
  switch (task) {
    case Task::hull:
      return geom::canonical_hull(points, raw);
    case Task::delaunay: {
      if (raw.size() % 3 != 0) throw ValidationError("triangle list length not a multiple of 3");
      std::vector<geom::Triangle> tris;
      for (std::size_t i = 0; i < raw.size(); i += 3) tris.push_back({raw[i], raw[i + 1], raw[i + 2]});
      return flatten(geom::canonical_triangulation(points, std::move(tris)));
    }
    case Task::tsp:
      return canonical_tour(raw, points.size());
  }
  throw ArgumentError("unknown task");
}

void validate_example(const Example& ex) {
  const std::size_t n = ex.n();
  for (int idx : ex.output) {
    if (idx < 1 || static_cast<std::size_t>(idx) > n) {
      throw ValidationError("label index " + std::to_string(idx) + " outside 1.." +
                            std::to_string(n));
    }
  }
  switch (ex.task) {
    case Task::hull:
      if (ex.output.size() < 4 || ex.output.front() != ex.output.back()) {
        throw ValidationError("hull label must be a closed cycle of at least 3 vertices");
      }
      break;
    case Task::delaunay:
      if (ex.output.empty() || ex.output.size() % 3 != 0) {
        throw ValidationError("delaunay label must be a non-empty list of triples");
      }
      for (std::size_t i = 0; i < ex.output.size(); i += 3) {
        const int a = ex.output[i], b = ex.output[i + 1], c = ex.output[i + 2];
        if (a == b || b == c || a == c) throw ValidationError("triangle with repeated vertex");
      }
      break;
    case Task::tsp:
      if (!tsp::is_permutation_of_cities(ex.output, n)) {
        throw ValidationError("tsp label is not a permutation of 1.." + std::to_string(n));
      }
      break;
  }
}

std::string format_coordinate(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 10);
  if (ec != std::errc()) throw ContractError("cannot format coordinate");
  return std::string(buf, end);
}

double round_coordinate(double v) {
  const std::string s = format_coordinate(v);
  double out = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), out);
  return out;
}

std::string serialize(const Example& ex) {
  std::string line;
  line.reserve(ex.points.size() * 26 + ex.output.size() * 3 + 8);
  for (const auto& p : ex.points) {
    line += format_coordinate(p.x);
    line += ' ';
    line += format_coordinate(p.y);
    line += ' ';
  }
  line += "output";
  for (int idx : ex.output) {
    line += ' ';
    line += std::to_string(idx);
  }
  return line;
}

Example parse(std::string_view line, Task task, std::size_t line_no) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> tokens;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    std::size_t end = pos;
    while (end < line.size() && line[end] != ' ' && line[end] != '\t') ++end;
    if (end > pos) tokens.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  const auto sep = std::find(tokens.begin(), tokens.end(), std::string_view("output"));
  if (sep == tokens.end()) throw ParseError("missing 'output' separator", line_no);
  const auto coord_count = static_cast<std::size_t>(sep - tokens.begin());
  if (coord_count == 0) throw ParseError("no coordinates", line_no);
  if (coord_count % 2 != 0) throw ParseError("odd number of coordinates", line_no);

  Example ex;
  ex.task = task;
  ex.points.resize(coord_count / 2);
  for (std::size_t i = 0; i < coord_count; ++i) {
    const auto tok = tokens[i];
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
      throw ParseError("bad coordinate '" + std::string(tok) + "'", line_no);
    }
    (i % 2 ? ex.points[i / 2].y : ex.points[i / 2].x) = v;
  }
  for (auto it = sep + 1; it != tokens.end(); ++it) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(it->data(), it->data() + it->size(), v);
    if (ec != std::errc() || ptr != it->data() + it->size()) {
      throw ParseError("bad index '" + std::string(*it) + "'", line_no);
    }
    ex.output.push_back(v);
  }
  try {
    validate_example(ex);
  } catch (const ValidationError& e) {
    throw ValidationError((line_no ? "line " + std::to_string(line_no) + ": " : std::string()) +
                          e.what());
  }
  return ex;
}

void write_file(const std::filesystem::path& path, std::span<const Example> examples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  for (const auto& ex : examples) out << serialize(ex) << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

std::vector<Example> read_file(const std::filesystem::path& path, Task task) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<Example> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse(line, task, line_no));
  }
  return out;
}

}  // namespace ptrgeo::data
