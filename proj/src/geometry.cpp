#include "ptrgeo/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <string>

#include "ptrgeo/error.hpp"

namespace ptrgeo::geom {

namespace {

constexpr double kOrientationTolerance = 1e-12;
constexpr double kInCircleTolerance = 1e-10;

// Fixed super-triangle for Bowyer-Watson, far outside the unit square.
constexpr Point kSuper[3] = {{-10.0, -10.0}, {20.0, -10.0}, {-10.0, 20.0}};

double dist(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

void require_distinct(std::span<const Point> points) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return points[a].x < points[b].x || (points[a].x == points[b].x && points[a].y < points[b].y);
  });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (points[order[i]] == points[order[i - 1]]) {
      throw DegenerateInputError("duplicate points at positions " +
                                 std::to_string(order[i - 1] + 1) + " and " +
                                 std::to_string(order[i] + 1));
    }
  }
}

void require_finite(std::span<const Point> points) {
  for (const auto& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw DegenerateInputError("non-finite coordinate");
    }
  }
}

// Returns 0-based CCW vertex cycle from monotone chain.
std::vector<std::size_t> monotone_chain(std::span<const Point> points) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Point& p = points[a];
    const Point& q = points[b];
    return p.x < q.x || (p.x == q.x && (p.y < q.y || (p.y == q.y && a < b)));
  });

  std::vector<std::size_t> hull(2 * order.size());
  std::size_t k = 0;
  auto turns_left = [&](std::size_t a, std::size_t b, std::size_t c) {
    return orientation(points[a], points[b], points[c]) == Orientation::counterclockwise;
  };
  for (std::size_t idx : order) {
    while (k >= 2 && !turns_left(hull[k - 2], hull[k - 1], idx)) --k;
    hull[k++] = idx;
  }
  const std::size_t lower = k + 1;
  for (auto it = order.rbegin() + 1; it != order.rend(); ++it) {
    while (k >= lower && !turns_left(hull[k - 2], hull[k - 1], *it)) --k;
    hull[k++] = *it;
  }
  hull.resize(k - 1);
  return hull;
}

struct Edge {
  int a;
  int b;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Working triangulation over an extended vertex array (input + super).
class Mesh {
 public:
  explicit Mesh(std::vector<Point> vertices) : v_(std::move(vertices)) {}

  const Point& at(int i) const { return v_[static_cast<std::size_t>(i)]; }
  std::vector<Triangle>& triangles() { return tris_; }

  Triangle oriented(int a, int b, int c) const {
    if (cross(at(a), at(b), at(c)) < 0.0) std::swap(b, c);
    return {a, b, c};
  }

  void add(int a, int b, int c) { tris_.push_back(oriented(a, b, c)); }

  void insert(int p) {
    const Point& pt = at(p);
    std::vector<char> bad(tris_.size(), 0);
    bool any = false;
    for (std::size_t t = 0; t < tris_.size(); ++t) {
      const auto& tr = tris_[t];
      if (in_circle(at(tr[0]), at(tr[1]), at(tr[2]), pt) > 0) {
        bad[t] = 1;
        any = true;
      }
    }
    if (!any) {
      // Point within tolerance of every circumcircle: fall back to the
      // triangle that contains it.
      for (std::size_t t = 0; t < tris_.size(); ++t) {
        const auto& tr = tris_[t];
        if (cross(at(tr[0]), at(tr[1]), pt) >= 0 && cross(at(tr[1]), at(tr[2]), pt) >= 0 &&
            cross(at(tr[2]), at(tr[0]), pt) >= 0) {
          bad[t] = 1;
          any = true;
          break;
        }
      }
    }
    if (!any) throw DegenerateInputError("point outside triangulation during insertion");

    std::map<Edge, int> edge_count;
    std::vector<Edge> directed;
    for (std::size_t t = 0; t < tris_.size(); ++t) {
      if (!bad[t]) continue;
      const auto& tr = tris_[t];
      for (int e = 0; e < 3; ++e) {
        const int a = tr[static_cast<std::size_t>(e)];
        const int b = tr[static_cast<std::size_t>((e + 1) % 3)];
        directed.push_back({a, b});
        ++edge_count[{std::min(a, b), std::max(a, b)}];
      }
    }
    std::vector<Triangle> kept;
    kept.reserve(tris_.size());
    for (std::size_t t = 0; t < tris_.size(); ++t) {
      if (!bad[t]) kept.push_back(tris_[t]);
    }
    tris_ = std::move(kept);
    for (const auto& e : directed) {
      if (edge_count[{std::min(e.a, e.b), std::max(e.a, e.b)}] == 1) add(e.a, e.b, p);
    }
  }

  void drop_vertices_from(int first) {
    std::erase_if(tris_, [&](const Triangle& t) {
      return t[0] >= first || t[1] >= first || t[2] >= first;
    });
  }

  // Adds triangles between the current boundary and the convex hull so the
  // mesh covers the hull. Needed when a thin hull triangle had the fixed
  // super-triangle inside its circumcircle.
  void fill_pockets(std::span<const Point> points) {
    for (;;) {
      std::map<Edge, int> count;
      for (const auto& t : tris_) {
        for (int e = 0; e < 3; ++e) {
          const int a = t[static_cast<std::size_t>(e)];
          const int b = t[static_cast<std::size_t>((e + 1) % 3)];
          ++count[{std::min(a, b), std::max(a, b)}];
        }
      }
      // Boundary as directed CCW edges a->b (interior on the left).
      std::map<int, int> next;
      for (const auto& t : tris_) {
        for (int e = 0; e < 3; ++e) {
          const int a = t[static_cast<std::size_t>(e)];
          const int b = t[static_cast<std::size_t>((e + 1) % 3)];
          if (count[{std::min(a, b), std::max(a, b)}] == 1) next[a] = b;
        }
      }
      bool added = false;
      for (const auto& [v, w] : next) {
        auto it = next.find(w);
        if (it == next.end()) continue;
        const int u = v;
        const int mid = w;
        const int nxt = it->second;
        if (u == nxt) continue;
        // Reflex boundary vertex: u -> mid -> nxt turns right.
        if (cross(at(u), at(mid), at(nxt)) >= 0.0) continue;
        bool empty = true;
        for (std::size_t q = 0; q < points.size() && empty; ++q) {
          const int qi = static_cast<int>(q);
          if (qi == u || qi == mid || qi == nxt) continue;
          const Point& pq = points[q];
          if (cross(at(u), at(nxt), pq) >= 0 && cross(at(nxt), at(mid), pq) >= 0 &&
              cross(at(mid), at(u), pq) >= 0) {
            empty = false;
          }
        }
        if (!empty) continue;
        add(u, nxt, mid);
        added = true;
        break;
      }
      if (!added) return;
    }
  }

  // Lawson flips until every interior edge is locally Delaunay.
  void legalize() {
    for (std::size_t pass = 0; pass < 4 * tris_.size() * tris_.size() + 16; ++pass) {
      std::map<Edge, std::vector<std::pair<std::size_t, int>>> adj;
      for (std::size_t t = 0; t < tris_.size(); ++t) {
        for (int e = 0; e < 3; ++e) {
          const int a = tris_[t][static_cast<std::size_t>(e)];
          const int b = tris_[t][static_cast<std::size_t>((e + 1) % 3)];
          adj[{std::min(a, b), std::max(a, b)}].push_back({t, e});
        }
      }
      bool flipped = false;
      for (const auto& [edge, uses] : adj) {
        if (uses.size() != 2) continue;
        const auto& [t1, e1] = uses[0];
        const auto& [t2, e2] = uses[1];
        const Triangle& A = tris_[t1];
        const Triangle& B = tris_[t2];
        const int a = A[static_cast<std::size_t>(e1)];
        const int b = A[static_cast<std::size_t>((e1 + 1) % 3)];
        const int c = A[static_cast<std::size_t>((e1 + 2) % 3)];
        const int d = B[static_cast<std::size_t>((e2 + 2) % 3)];
        if (in_circle(at(a), at(b), at(c), at(d)) <= 0) continue;
        // The new diagonal c-d must separate a and b.
        if (cross(at(c), at(d), at(a)) * cross(at(c), at(d), at(b)) >= 0.0) continue;
        tris_[t1] = oriented(c, a, d);
        tris_[t2] = oriented(d, b, c);
        flipped = true;
        break;
      }
      if (!flipped) return;
    }
    throw DegenerateInputError("edge flipping did not converge");
  }

 private:
  std::vector<Point> v_;
  std::vector<Triangle> tris_;
};

}  // namespace

double cross(Point p, Point q, Point r) {
  return (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
}

Orientation orientation(Point p, Point q, Point r) {
  const double c = cross(p, q, r);
  const double scale = std::max({std::abs(q.x - p.x), std::abs(q.y - p.y), std::abs(r.x - p.x),
                                 std::abs(r.y - p.y)});
  if (std::abs(c) <= kOrientationTolerance * scale * scale) return Orientation::collinear;
  return c > 0 ? Orientation::counterclockwise : Orientation::clockwise;
}

std::vector<int> convex_hull(std::span<const Point> points) {
  if (points.size() < 3) {
    throw DegenerateInputError("convex hull needs at least 3 points, got " +
                               std::to_string(points.size()));
  }
  require_finite(points);
  require_distinct(points);
  const auto cycle = monotone_chain(points);
  if (cycle.size() < 3) throw DegenerateInputError("all points are collinear");
  std::vector<int> one_based;
  one_based.reserve(cycle.size());
  for (auto i : cycle) one_based.push_back(static_cast<int>(i) + 1);
  return canonical_hull(points, one_based);
}

std::vector<int> canonical_hull(std::span<const Point> points, std::span<const int> cycle) {
  std::vector<int> ring(cycle.begin(), cycle.end());
  if (ring.size() >= 2 && ring.front() == ring.back()) ring.pop_back();
  if (ring.size() < 3) throw ValidationError("hull cycle needs at least 3 vertices");
  for (int idx : ring) {
    if (idx < 1 || static_cast<std::size_t>(idx) > points.size()) {
      throw ValidationError("hull index " + std::to_string(idx) + " out of range");
    }
  }
  const auto coords = ring_from_indices(points, ring);
  if (shoelace_area(coords) < 0.0) std::reverse(ring.begin(), ring.end());
  std::rotate(ring.begin(), std::min_element(ring.begin(), ring.end()), ring.end());
  ring.push_back(ring.front());
  return ring;
}

int in_circle(Point a, Point b, Point c, Point d) {
  const double adx = a.x - d.x, ady = a.y - d.y;
  const double bdx = b.x - d.x, bdy = b.y - d.y;
  const double cdx = c.x - d.x, cdy = c.y - d.y;
  const double det = (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy) -
                     (bdx * bdx + bdy * bdy) * (adx * cdy - cdx * ady) +
                     (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady);
  const double scale = std::max({std::abs(adx), std::abs(ady), std::abs(bdx), std::abs(bdy),
                                 std::abs(cdx), std::abs(cdy)});
  const double s2 = scale * scale;
  if (std::abs(det) <= kInCircleTolerance * s2 * s2) return 0;
  return det > 0 ? 1 : -1;
}

std::vector<Triangle> delaunay(std::span<const Point> points) {
  const std::size_t n = points.size();
  if (n < 3) {
    throw DegenerateInputError("triangulation needs at least 3 points, got " + std::to_string(n));
  }
  require_finite(points);
  require_distinct(points);
  bool all_collinear = true;
  for (std::size_t i = 2; i < n && all_collinear; ++i) {
    all_collinear = orientation(points[0], points[1], points[i]) == Orientation::collinear;
  }
  if (all_collinear) throw DegenerateInputError("all points are collinear");

  std::vector<Point> vertices(points.begin(), points.end());
  vertices.insert(vertices.end(), std::begin(kSuper), std::end(kSuper));
  Mesh mesh(std::move(vertices));
  const int s = static_cast<int>(n);
  mesh.add(s, s + 1, s + 2);
  for (int i = 0; i < s; ++i) mesh.insert(i);
  mesh.drop_vertices_from(s);
  mesh.fill_pockets(points);
  mesh.legalize();

  std::vector<Triangle> out;
  out.reserve(mesh.triangles().size());
  for (const auto& t : mesh.triangles()) out.push_back({t[0] + 1, t[1] + 1, t[2] + 1});
  return canonical_triangulation(points, std::move(out));
}

std::vector<Triangle> canonical_triangulation(std::span<const Point> points,
                                              std::vector<Triangle> triangles) {
  struct Keyed {
    Point key;
    Triangle tri;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(triangles.size());
  for (auto t : triangles) {
    for (int v : t) {
      if (v < 1 || static_cast<std::size_t>(v) > points.size()) {
        throw ValidationError("triangle index " + std::to_string(v) + " out of range");
      }
    }
    std::sort(t.begin(), t.end());
    const auto p = [&](int i) { return points[static_cast<std::size_t>(i - 1)]; };
    keyed.push_back({incenter(p(t[0]), p(t[1]), p(t[2])), t});
  }
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    if (a.key.x != b.key.x) return a.key.x < b.key.x;
    if (a.key.y != b.key.y) return a.key.y < b.key.y;
    return a.tri < b.tri;
  });
  std::vector<Triangle> out;
  out.reserve(keyed.size());
  for (const auto& k : keyed) out.push_back(k.tri);
  return out;
}

Point incenter(Point a, Point b, Point c) {
  if (orientation(a, b, c) == Orientation::collinear) {
    throw DegenerateInputError("incenter of a zero-area triangle");
  }
  const double la = dist(b, c);
  const double lb = dist(c, a);
  const double lc = dist(a, b);
  const double per = la + lb + lc;
  return {(la * a.x + lb * b.x + lc * c.x) / per, (la * a.y + lb * b.y + lc * c.y) / per};
}

double shoelace_area(std::span<const Point> ring) {
  if (ring.empty()) return 0.0;
  // Summing from the lowest (x, y) vertex makes the rounded result independent
  // of which vertex the ring happens to start at.
  const auto first = static_cast<std::size_t>(
      std::min_element(ring.begin(), ring.end(),
                       [](Point a, Point b) { return a.x < b.x || (a.x == b.x && a.y < b.y); }) -
      ring.begin());
  double twice = 0.0;
  for (std::size_t k = 0; k < ring.size(); ++k) {
    const Point& p = ring[(first + k) % ring.size()];
    const Point& q = ring[(first + k + 1) % ring.size()];
    twice += p.x * q.y - q.x * p.y;
  }
  return 0.5 * twice;
}

namespace {

bool on_segment(Point p, Point q, Point r) {
  // r collinear with pq: is it within the bounding box?
  return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) && std::min(p.y, q.y) <= r.y &&
         r.y <= std::max(p.y, q.y);
}

bool segments_touch(Point p1, Point p2, Point q1, Point q2) {
  const auto d1 = orientation(q1, q2, p1);
  const auto d2 = orientation(q1, q2, p2);
  const auto d3 = orientation(p1, p2, q1);
  const auto d4 = orientation(p1, p2, q2);
  const auto opposite = [](Orientation a, Orientation b) {
    return (a == Orientation::clockwise && b == Orientation::counterclockwise) ||
           (a == Orientation::counterclockwise && b == Orientation::clockwise);
  };
  if (opposite(d1, d2) && opposite(d3, d4)) return true;
  if (d1 == Orientation::collinear && on_segment(q1, q2, p1)) return true;
  if (d2 == Orientation::collinear && on_segment(q1, q2, p2)) return true;
  if (d3 == Orientation::collinear && on_segment(p1, p2, q1)) return true;
  if (d4 == Orientation::collinear && on_segment(p1, p2, q2)) return true;
  return false;
}

}  // namespace

bool is_simple(std::span<const Point> ring) {
  const std::size_t k = ring.size();
  if (k < 3) throw DegenerateInputError("polygon needs at least 3 vertices");
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      if (ring[i] == ring[j]) return false;
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    const Point a = ring[i];
    const Point b = ring[(i + 1) % k];
    const Point c = ring[(i + 2) % k];
    // Adjacent edges fold back onto each other.
    if (orientation(a, b, c) == Orientation::collinear &&
        (a.x - b.x) * (c.x - b.x) + (a.y - b.y) * (c.y - b.y) > 0.0) {
      return false;
    }
    for (std::size_t j = i + 2; j < k; ++j) {
      if (i == 0 && j == k - 1) continue;  // adjacent via wrap-around
      if (segments_touch(a, b, ring[j], ring[(j + 1) % k])) return false;
    }
  }
  return true;
}

double clip_to_convex(std::span<const Point> subject, std::span<const Point> convex_clip) {
  if (subject.size() < 3 || convex_clip.size() < 3) {
    throw DegenerateInputError("clipping needs rings of at least 3 vertices");
  }
  std::vector<Point> clip(convex_clip.begin(), convex_clip.end());
  if (shoelace_area(clip) < 0.0) std::reverse(clip.begin(), clip.end());

  std::vector<Point> output(subject.begin(), subject.end());
  for (std::size_t e = 0; e < clip.size() && !output.empty(); ++e) {
    const Point a = clip[e];
    const Point b = clip[(e + 1) % clip.size()];
    const auto inside = [&](Point p) { return cross(a, b, p) >= 0.0; };
    const auto intersect = [&](Point p, Point q) {
      const double cp = cross(a, b, p);
      const double cq = cross(a, b, q);
      const double t = cp / (cp - cq);
      return Point{p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)};
    };
    std::vector<Point> input = std::move(output);
    output.clear();
    for (std::size_t i = 0; i < input.size(); ++i) {
      const Point cur = input[i];
      const Point prev = input[(i + input.size() - 1) % input.size()];
      if (inside(cur)) {
        if (!inside(prev)) output.push_back(intersect(prev, cur));
        output.push_back(cur);
      } else if (inside(prev)) {
        output.push_back(intersect(prev, cur));
      }
    }
  }
  if (output.size() < 3) return 0.0;
  return std::abs(shoelace_area(output));
}

std::vector<Point> ring_from_indices(std::span<const Point> points, std::span<const int> indices) {
  std::vector<Point> ring;
  ring.reserve(indices.size());
  for (int idx : indices) {
    if (idx < 1 || static_cast<std::size_t>(idx) > points.size()) {
      throw ValidationError("index " + std::to_string(idx) + " out of range 1.." +
                            std::to_string(points.size()));
    }
    ring.push_back(points[static_cast<std::size_t>(idx - 1)]);
  }
  return ring;
}

}  // namespace ptrgeo::geom
