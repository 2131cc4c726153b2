#pragma once

// Planar symmetric TSP: exact Held-Karp and three approximations.
//   A1  greedy edge matching: shortest edges first, skipping any that give a
//       city degree 3 or close a cycle early
//   A2  A1 improved by first-improvement 2-opt
//   A3  Christofides (exact odd-vertex matching up to 16 vertices)
// Tours are 1-based city permutations starting at city 1.

#include <cstddef>
#include <span>
#include <vector>

#include "ptrgeo/geometry.hpp"

namespace ptrgeo::tsp {

class DistanceMatrix {
 public:
  static DistanceMatrix euclidean(std::span<const geom::Point> points);

  std::size_t size() const noexcept { return n_; }
  // 0-based city indices.
  double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }

 private:
  std::size_t n_ = 0;
  std::vector<double> d_;
};

struct Tour {
  std::vector<int> order;  // 1-based, order[0] == 1
  double length = 0.0;
};

inline constexpr std::size_t kHeldKarpMaxCities = 20;
inline constexpr std::size_t kExactMatchingMaxVertices = 16;

// Optimal tour by subset dynamic programming; among optimal tours the
// lexicographically smallest permutation is returned.
// Throws CapacityError above 20 cities and ArgumentError below 2.
Tour held_karp(const DistanceMatrix& d);

// Nearest neighbour from city 1 (lowest index on ties). Not one of A1..A3.
Tour nearest_neighbor(const DistanceMatrix& d);

// A1. Edge ties break by (i, j); the tour leaves city 1 towards its
// lower-indexed neighbour.
Tour greedy_edge(const DistanceMatrix& d);

// Repeated first-improvement 2-opt sweeps (i ascending, then j ascending)
// starting from the given tour. City 1 stays in front.
Tour two_opt(const DistanceMatrix& d, std::vector<int> tour);

Tour greedy_edge_two_opt(const DistanceMatrix& d);

Tour christofides(std::span<const geom::Point> points);

// Euclidean closed-tour length. Throws ValidationError unless `tour` is a
// permutation of 1..n.
double tour_length(std::span<const geom::Point> points, std::span<const int> tour);
double tour_length(const DistanceMatrix& d, std::span<const int> tour);

bool is_permutation_of_cities(std::span<const int> tour, std::size_t n);

}  // namespace ptrgeo::tsp
