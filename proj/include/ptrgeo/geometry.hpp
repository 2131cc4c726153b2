#pragma once

// Planar predicates and exact-by-construction solvers for the convex hull and
// Delaunay triangulation, producing the canonical index orderings used as
// training labels. All index outputs are 1-based positions into the input.

#include <array>
#include <span>
#include <vector>

namespace ptrgeo::geom {

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

using PointSet = std::vector<Point>;
using Triangle = std::array<int, 3>;

enum class Orientation { clockwise, collinear, counterclockwise };

// Twice the signed area of (p, q, r); positive for a left turn.
double cross(Point p, Point q, Point r);

// Sign of cross(p, q, r) with a relative tolerance band: values with
// |cross| <= 1e-12 * scale^2 are reported collinear, where scale is the
// largest coordinate difference between p and the other two points.
Orientation orientation(Point p, Point q, Point r);

// Counter-clockwise hull vertices (collinear boundary points excluded),
// starting at the lowest index and closed by repeating it.
// Throws DegenerateInputError for n < 3, duplicate points or collinear input.
std::vector<int> convex_hull(std::span<const Point> points);

// Canonical form of a hull vertex cycle given as 1-based indices in either
// orientation: counter-clockwise, rotated to its lowest index, closed.
std::vector<int> canonical_hull(std::span<const Point> points, std::span<const int> cycle);

// Bowyer-Watson triangulation, canonicalized: each triple ascending, triples
// sorted lexicographically by incenter.
std::vector<Triangle> delaunay(std::span<const Point> points);

// Sort every triple ascending and order triples by incenter (x, then y).
std::vector<Triangle> canonical_triangulation(std::span<const Point> points,
                                              std::vector<Triangle> triangles);

Point incenter(Point a, Point b, Point c);

// In-circle test for a counter-clockwise triangle (a, b, c): +1 if d is
// strictly inside the circumcircle, -1 if strictly outside, 0 if within the
// cocircularity tolerance (1e-10 relative to the coordinate scale).
int in_circle(Point a, Point b, Point c, Point d);

// Signed area of a ring (no closing repeat); positive when counter-clockwise.
double shoelace_area(std::span<const Point> ring);

// True when no two non-adjacent edges touch and adjacent edges only share
// their common endpoint. Throws DegenerateInputError for fewer than 3 vertices.
bool is_simple(std::span<const Point> ring);

// Area of subject ∩ clip, where clip is convex. Sutherland-Hodgman followed by
// the shoelace formula. Either ring may be in any orientation.
double clip_to_convex(std::span<const Point> subject, std::span<const Point> convex_clip);

// Coordinates of a ring of 1-based indices.
std::vector<Point> ring_from_indices(std::span<const Point> points, std::span<const int> indices);

}  // namespace ptrgeo::geom
