#include "ptrgeo/tsp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>

#include "ptrgeo/error.hpp"

namespace ptrgeo::tsp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Tour make_tour(const DistanceMatrix& d, std::vector<int> order) {
  Tour t;
  t.length = tour_length(d, order);
  t.order = std::move(order);
  return t;
}

std::vector<int> rotate_to_city_one(std::vector<int> order) {
  auto it = std::find(order.begin(), order.end(), 1);
  std::rotate(order.begin(), it, order.end());
  return order;
}

}  // namespace

DistanceMatrix DistanceMatrix::euclidean(std::span<const geom::Point> points) {
  DistanceMatrix m;
  m.n_ = points.size();
  m.d_.assign(m.n_ * m.n_, 0.0);
  for (std::size_t i = 0; i < m.n_; ++i) {
    for (std::size_t j = i + 1; j < m.n_; ++j) {
      const double v = std::hypot(points[i].x - points[j].x, points[i].y - points[j].y);
      m.d_[i * m.n_ + j] = v;
      m.d_[j * m.n_ + i] = v;
    }
  }
  return m;
}

bool is_permutation_of_cities(std::span<const int> tour, std::size_t n) {
  if (tour.size() != n) return false;
  std::vector<char> seen(n + 1, 0);
  for (int c : tour) {
    if (c < 1 || static_cast<std::size_t>(c) > n || seen[static_cast<std::size_t>(c)]) {
      return false;
    }
    seen[static_cast<std::size_t>(c)] = 1;
  }
  return true;
}

double tour_length(const DistanceMatrix& d, std::span<const int> tour) {
  if (!is_permutation_of_cities(tour, d.size())) {
    throw ValidationError("tour is not a permutation of 1.." + std::to_string(d.size()));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < tour.size(); ++i) {
    const auto a = static_cast<std::size_t>(tour[i] - 1);
    const auto b = static_cast<std::size_t>(tour[(i + 1) % tour.size()] - 1);
    total += d(a, b);
  }
  return total;
}

double tour_length(std::span<const geom::Point> points, std::span<const int> tour) {
  if (!is_permutation_of_cities(tour, points.size())) {
    throw ValidationError("tour is not a permutation of 1.." + std::to_string(points.size()));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < tour.size(); ++i) {
    const auto& a = points[static_cast<std::size_t>(tour[i] - 1)];
    const auto& b = points[static_cast<std::size_t>(tour[(i + 1) % tour.size()] - 1)];
    total += std::hypot(a.x - b.x, a.y - b.y);
  }
  return total;
}

Tour held_karp(const DistanceMatrix& d) {
  const std::size_t n = d.size();
  if (n < 2) throw ArgumentError("Held-Karp needs at least 2 cities");
  if (n > kHeldKarpMaxCities) {
    throw CapacityError("Held-Karp is limited to " + std::to_string(kHeldKarpMaxCities) +
                        " cities (got " + std::to_string(n) +
                        "); use the a1/a2/a3 heuristics for larger instances");
  }
  // Cities 1..n-1 (0-based) are bits 0..n-2. cost[mask][j]: cheapest way to
  // finish from city j+1 having visited `mask` (which contains j), ending at city 0.
  const std::size_t m = n - 1;
  const std::size_t full = (std::size_t{1} << m) - 1;
  std::vector<double> cost((full + 1) * m, kInf);
  const auto at = [&](std::size_t mask, std::size_t j) -> double& { return cost[mask * m + j]; };

  for (std::size_t j = 0; j < m; ++j) at(full, j) = d(j + 1, 0);
  for (std::size_t mask = full; mask-- > 1;) {
    for (std::size_t j = 0; j < m; ++j) {
      if (!(mask >> j & 1U)) continue;
      double best = kInf;
      for (std::size_t k = 0; k < m; ++k) {
        if (mask >> k & 1U) continue;
        best = std::min(best, d(j + 1, k + 1) + at(mask | (std::size_t{1} << k), k));
      }
      at(mask, j) = best;
    }
  }

  // Forward reconstruction picking the smallest next city among optimal moves.
  const auto tol = [](double v) { return 1e-12 * std::max(1.0, std::abs(v)); };
  std::vector<int> order{1};
  std::size_t mask = 0;
  std::size_t cur = 0;  // 0-based city, 0 == city 1
  for (std::size_t step = 0; step < m; ++step) {
    double best = kInf;
    std::vector<double> cand(m, kInf);
    for (std::size_t k = 0; k < m; ++k) {
      if (mask >> k & 1U) continue;
      cand[k] = d(cur, k + 1) + at(mask | (std::size_t{1} << k), k);
      best = std::min(best, cand[k]);
    }
    std::size_t pick = m;
    for (std::size_t k = 0; k < m; ++k) {
      if (cand[k] <= best + tol(best)) {
        pick = k;
        break;
      }
    }
    mask |= std::size_t{1} << pick;
    cur = pick + 1;
    order.push_back(static_cast<int>(pick + 2));
  }
  return make_tour(d, std::move(order));
}

Tour nearest_neighbor(const DistanceMatrix& d) {
  const std::size_t n = d.size();
  if (n < 2) throw ArgumentError("nearest neighbour needs at least 2 cities");
  std::vector<char> visited(n, 0);
  std::vector<int> order{1};
  visited[0] = 1;
  std::size_t cur = 0;
  for (std::size_t step = 1; step < n; ++step) {
    std::size_t best = n;
    for (std::size_t k = 0; k < n; ++k) {
      if (visited[k]) continue;
      if (best == n || d(cur, k) < d(cur, best)) best = k;
    }
    visited[best] = 1;
    cur = best;
    order.push_back(static_cast<int>(best + 1));
  }
  return make_tour(d, std::move(order));
}

Tour two_opt(const DistanceMatrix& d, std::vector<int> tour) {
  const std::size_t n = d.size();
  if (!is_permutation_of_cities(tour, n)) {
    throw ValidationError("2-opt needs a permutation of 1.." + std::to_string(n));
  }
  tour = rotate_to_city_one(std::move(tour));
  const auto city = [&](std::size_t pos) { return static_cast<std::size_t>(tour[pos % n] - 1); };
  bool improved = n >= 4;
  while (improved) {
    improved = false;
    for (std::size_t i = 1; i + 1 < n && !improved; ++i) {
      for (std::size_t j = i + 1; j < n && !improved; ++j) {
        const std::size_t a = city(i - 1), b = city(i), c = city(j), e = city(j + 1);
        const double delta = d(a, c) + d(b, e) - d(a, b) - d(c, e);
        if (delta < -1e-12) {
          std::reverse(tour.begin() + static_cast<std::ptrdiff_t>(i),
                       tour.begin() + static_cast<std::ptrdiff_t>(j + 1));
          improved = true;
        }
      }
    }
  }
  return make_tour(d, std::move(tour));
}

Tour greedy_edge(const DistanceMatrix& d) {
  const std::size_t n = d.size();
  if (n < 2) throw ArgumentError("greedy edge needs at least 2 cities");
  if (n == 2) return make_tour(d, {1, 2});

  struct Edge {
    double w;
    std::size_t i, j;
  };
  std::vector<Edge> edges;
  edges.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) edges.push_back({d(i, j), i, j});
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.w, a.i, a.j) < std::tie(b.w, b.i, b.j);
  });

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  const auto root = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<std::array<std::size_t, 2>> adj(n, {n, n});
  std::vector<int> degree(n, 0);
  std::size_t taken = 0;
  for (const Edge& e : edges) {
    if (degree[e.i] == 2 || degree[e.j] == 2) continue;
    // A cycle may only close once it spans every city.
    const bool closes = root(e.i) == root(e.j);
    if (closes && taken + 1 != n) continue;
    adj[e.i][degree[e.i]++] = e.j;
    adj[e.j][degree[e.j]++] = e.i;
    parent[root(e.i)] = root(e.j);
    if (++taken == n) break;
  }

  // Walk from city 1 towards its lower-indexed neighbour.
  std::vector<int> order{1};
  std::size_t prev = 0, cur = std::min(adj[0][0], adj[0][1]);
  while (cur != 0) {
    order.push_back(static_cast<int>(cur + 1));
    const std::size_t next = adj[cur][0] == prev ? adj[cur][1] : adj[cur][0];
    prev = cur;
    cur = next;
  }
  return make_tour(d, std::move(order));
}

Tour greedy_edge_two_opt(const DistanceMatrix& d) { return two_opt(d, greedy_edge(d).order); }

namespace {

// Minimum-weight perfect matching over `verts` (even count).
std::vector<std::pair<std::size_t, std::size_t>> exact_matching(const DistanceMatrix& d,
                                                               const std::vector<std::size_t>& verts) {
  const std::size_t k = verts.size();
  const std::size_t full = (std::size_t{1} << k) - 1;
  std::vector<double> best(full + 1, kInf);
  std::vector<std::size_t> partner(full + 1, 0);
  best[0] = 0.0;
  for (std::size_t mask = 1; mask <= full; ++mask) {
    if (std::popcount(mask) % 2) continue;
    const std::size_t i = static_cast<std::size_t>(std::countr_zero(mask));
    const std::size_t rest = mask & ~(std::size_t{1} << i);
    for (std::size_t j = i + 1; j < k; ++j) {
      if (!(rest >> j & 1U)) continue;
      const double c = d(verts[i], verts[j]) + best[rest & ~(std::size_t{1} << j)];
      if (c < best[mask]) {
        best[mask] = c;
        partner[mask] = j;
      }
    }
  }
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::size_t mask = full;
  while (mask) {
    const std::size_t i = static_cast<std::size_t>(std::countr_zero(mask));
    const std::size_t j = partner[mask];
    pairs.emplace_back(verts[i], verts[j]);
    mask &= ~((std::size_t{1} << i) | (std::size_t{1} << j));
  }
  return pairs;
}

std::vector<std::pair<std::size_t, std::size_t>> greedy_matching(const DistanceMatrix& d,
                                                                const std::vector<std::size_t>& verts) {
  struct Cand {
    double w;
    std::size_t a, b;
  };
  std::vector<Cand> cands;
  for (std::size_t i = 0; i < verts.size(); ++i) {
    for (std::size_t j = i + 1; j < verts.size(); ++j) {
      cands.push_back({d(verts[i], verts[j]), verts[i], verts[j]});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
    return x.w < y.w || (x.w == y.w && std::tie(x.a, x.b) < std::tie(y.a, y.b));
  });
  std::vector<char> used(d.size(), 0);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& c : cands) {
    if (used[c.a] || used[c.b]) continue;
    used[c.a] = used[c.b] = 1;
    pairs.emplace_back(c.a, c.b);
  }
  return pairs;
}

}  // namespace

Tour christofides(std::span<const geom::Point> points) {
  const std::size_t n = points.size();
  if (n < 3) throw ArgumentError("Christofides needs at least 3 cities");
  const DistanceMatrix d = DistanceMatrix::euclidean(points);

  // Prim's MST rooted at city 1.
  std::vector<double> key(n, kInf);
  std::vector<std::size_t> parent(n, n);
  std::vector<char> in_tree(n, 0);
  key[0] = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t it = 0; it < n; ++it) {
    std::size_t u = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (!in_tree[v] && (u == n || key[v] < key[u])) u = v;
    }
    in_tree[u] = 1;
    if (parent[u] != n) edges.emplace_back(parent[u], u);
    for (std::size_t v = 0; v < n; ++v) {
      if (!in_tree[v] && d(u, v) < key[v]) {
        key[v] = d(u, v);
        parent[v] = u;
      }
    }
  }

  std::vector<std::size_t> degree(n, 0);
  for (auto [a, b] : edges) {
    ++degree[a];
    ++degree[b];
  }
  std::vector<std::size_t> odd;
  for (std::size_t v = 0; v < n; ++v) {
    if (degree[v] % 2) odd.push_back(v);
  }
  if (odd.size() % 2) throw std::logic_error("odd number of odd-degree vertices");
  const auto matching = odd.size() <= kExactMatchingMaxVertices ? exact_matching(d, odd)
                                                                : greedy_matching(d, odd);
  edges.insert(edges.end(), matching.begin(), matching.end());

  // Hierholzer on the multigraph, neighbours visited in edge-id order.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(n);  // (neighbour, edge id)
  for (std::size_t e = 0; e < edges.size(); ++e) {
    adj[edges[e].first].emplace_back(edges[e].second, e);
    adj[edges[e].second].emplace_back(edges[e].first, e);
  }
  std::vector<char> used(edges.size(), 0);
  std::vector<std::size_t> cursor(n, 0);
  std::vector<std::size_t> stack{0};
  std::vector<std::size_t> circuit;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    auto& c = cursor[v];
    while (c < adj[v].size() && used[adj[v][c].second]) ++c;
    if (c == adj[v].size()) {
      circuit.push_back(v);
      stack.pop_back();
    } else {
      used[adj[v][c].second] = 1;
      stack.push_back(adj[v][c].first);
    }
  }
  std::reverse(circuit.begin(), circuit.end());

  std::vector<char> seen(n, 0);
  std::vector<int> order;
  for (std::size_t v : circuit) {
    if (seen[v]) continue;
    seen[v] = 1;
    order.push_back(static_cast<int>(v + 1));
  }
  return make_tour(d, rotate_to_city_one(std::move(order)));
}

}  // namespace ptrgeo::tsp
