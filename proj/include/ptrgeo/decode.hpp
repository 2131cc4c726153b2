#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "ptrgeo/geometry.hpp"
#include "ptrgeo/models.hpp"

namespace ptrgeo::decode {

enum class Constraint {
  none,
  // Visited cities are masked and the end token is forbidden until every
  // city has been emitted, so the result is always a permutation.
  valid_tour,
};

std::string_view to_string(Constraint c);
Constraint parse_constraint(std::string_view name);

struct Options {
  std::size_t width = 1;
  Constraint constraint = Constraint::none;
};

struct Decoded {
  std::vector<int> tokens;  // without the end token
  double log_prob = 0.0;
  bool terminated = false;  // emitted the end token
  bool cap_hit = false;     // stopped by the length cap
  bool failed = false;      // no hypothesis could be finalized
};

// Maximum number of non-end tokens before a hypothesis is cut off:
// hull 2n+3, delaunay 3*(3n)+2, tsp n+1.
std::size_t length_cap(Task task, std::size_t n);

// Beam search over the model's output distributions. Candidates are ranked by
// cumulative log-probability, ties by lexicographic token order.
// Throws ArgumentError for width 0 and UnsupportedLengthError for
// fixed-dictionary models at a foreign n.
Decoded beam_search(const nn::Model& model, std::span<const geom::Point> points,
                    const Options& options);

// Argmax at every step (lowest token on ties).
Decoded greedy_decode(const nn::Model& model, std::span<const geom::Point> points,
                      Constraint constraint = Constraint::none);

// log p(tokens, end | points) under teacher forcing.
double sequence_log_prob(const nn::Model& model, std::span<const geom::Point> points,
                         std::span<const int> tokens);

}  // namespace ptrgeo::decode
