#pragma once

// Exact-arithmetic geometry oracles (GMP rationals) shared by the unit and
// acceptance tests. They deliberately avoid the tolerance bands of the
// library predicates.

#include <gmpxx.h>

#include <cmath>
#include <map>
#include <vector>

#include "ptrgeo/geometry.hpp"

namespace oracle {

using ptrgeo::geom::Point;
using ptrgeo::geom::PointSet;

inline mpq_class exact_cross(Point p, Point q, Point r) {
  const mpq_class px(p.x), py(p.y), qx(q.x), qy(q.y), rx(r.x), ry(r.y);
  return (qx - px) * (ry - py) - (qy - py) * (rx - px);
}

inline int exact_sign(Point p, Point q, Point r) {
  const double approx = ptrgeo::geom::cross(p, q, r);
  if (std::abs(approx) > 1e-9) return approx > 0 ? 1 : -1;
  return sgn(exact_cross(p, q, r));
}

// Sign of the in-circle determinant for counter-clockwise (a, b, c).
inline int exact_in_circle(Point a, Point b, Point c, Point d) {
  const mpq_class adx = mpq_class(a.x) - d.x, ady = mpq_class(a.y) - d.y;
  const mpq_class bdx = mpq_class(b.x) - d.x, bdy = mpq_class(b.y) - d.y;
  const mpq_class cdx = mpq_class(c.x) - d.x, cdy = mpq_class(c.y) - d.y;
  const mpq_class det = (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy) -
                        (bdx * bdx + bdy * bdy) * (adx * cdy - cdx * ady) +
                        (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady);
  return sgn(det);
}

// Counter-clockwise extreme-vertex cycle from the O(n^3) edge test: i -> j is
// a hull edge when every other point is strictly left of it or strictly
// inside the segment.
inline std::vector<int> brute_force_hull(const PointSet& pts) {
  const std::size_t n = pts.size();
  std::map<int, int> next;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      bool edge = true;
      for (std::size_t k = 0; k < n && edge; ++k) {
        if (k == i || k == j) continue;
        const int s = exact_sign(pts[i], pts[j], pts[k]);
        if (s < 0) edge = false;
        if (s == 0) {
          const double t = (pts[k].x - pts[i].x) * (pts[j].x - pts[i].x) +
                           (pts[k].y - pts[i].y) * (pts[j].y - pts[i].y);
          const double len = (pts[j].x - pts[i].x) * (pts[j].x - pts[i].x) +
                             (pts[j].y - pts[i].y) * (pts[j].y - pts[i].y);
          if (!(t > 0 && t < len)) edge = false;
        }
      }
      if (edge) next[static_cast<int>(i) + 1] = static_cast<int>(j) + 1;
    }
  }
  std::vector<int> cycle;
  if (next.empty()) return cycle;
  const int start = next.begin()->first;
  int cur = start;
  do {
    cycle.push_back(cur);
    cur = next.at(cur);
  } while (cur != start && cycle.size() <= n);
  cycle.push_back(start);
  return cycle;
}

inline bool inside_or_on(const PointSet& pts, const std::vector<int>& hull, Point q) {
  for (std::size_t k = 0; k + 1 < hull.size(); ++k) {
    if (exact_sign(pts[hull[k] - 1], pts[hull[k + 1] - 1], q) < 0) return false;
  }
  return true;
}

}  // namespace oracle
