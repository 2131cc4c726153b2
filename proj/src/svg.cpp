#include "ptrgeo/svg.hpp"

#include <cstdio>
#include <set>
#include <utility>
#include <vector>

namespace ptrgeo::svg {

namespace {

constexpr double kSize = 400.0;
constexpr double kMargin = 20.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

double sx(double x) { return kMargin + x * kSize; }
double sy(double y) { return kMargin + (1.0 - y) * kSize; }

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Keeps in-range point indices and drops the end token.
std::vector<int> usable(std::span<const int> seq, std::size_t n) {
  std::vector<int> out;
  for (int t : seq) {
    if (t >= 1 && static_cast<std::size_t>(t) <= n) out.push_back(t);
  }
  return out;
}

std::string polyline(std::span<const geom::Point> pts, const std::vector<int>& idx, bool close,
                     const std::string& style) {
  if (idx.size() < 2) return {};
  std::string coords;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto& p = pts[static_cast<std::size_t>(idx[i] - 1)];
    if (i) coords += ' ';
    coords += num(sx(p.x)) + ',' + num(sy(p.y));
  }
  const char* tag = close ? "polygon" : "polyline";
  return std::string("  <") + tag + " points=\"" + coords + "\" " + style + "/>\n";
}

std::string edges(std::span<const geom::Point> pts, const std::vector<int>& flat,
                  const std::string& style) {
  std::set<std::pair<int, int>> seen;
  std::string out;
  for (std::size_t t = 0; t + 3 <= flat.size(); t += 3) {
    for (int k = 0; k < 3; ++k) {
      int a = flat[t + k], b = flat[t + (k + 1) % 3];
      if (a > b) std::swap(a, b);
      if (a == b || !seen.insert({a, b}).second) continue;
      const auto& p = pts[static_cast<std::size_t>(a - 1)];
      const auto& q = pts[static_cast<std::size_t>(b - 1)];
      out += "  <line x1=\"" + num(sx(p.x)) + "\" y1=\"" + num(sy(p.y)) + "\" x2=\"" +
             num(sx(q.x)) + "\" y2=\"" + num(sy(q.y)) + "\" " + style + "/>\n";
    }
  }
  return out;
}

std::string structure(const Figure& f, std::span<const int> seq, const std::string& style) {
  const auto idx = usable(seq, f.points.size());
  switch (f.task) {
    case Task::hull:
      return polyline(f.points, idx, false, style);
    case Task::delaunay:
      return edges(f.points, idx, style);
    case Task::tsp:
      return polyline(f.points, idx, true, style);
  }
  return {};
}

}  // namespace

std::string render(const Figure& f) {
  const std::string side = num(kSize + 2 * kMargin);
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + side + "\" height=\"" + side +
         "\" viewBox=\"0 0 " + side + " " + side + "\">\n";
  if (!f.title.empty()) out += "  <title>" + escape(f.title) + "</title>\n";
  out += "  <rect x=\"0\" y=\"0\" width=\"" + side + "\" height=\"" + side +
         "\" fill=\"white\"/>\n";
  out += "  <g id=\"truth\">\n";
  out += structure(f, f.truth,
                   "fill=\"none\" stroke=\"#4a4a4a\" stroke-width=\"2\"");
  out += "  </g>\n";
  if (!f.pred.empty()) {
    out += "  <g id=\"pred\">\n";
    out += structure(f, f.pred,
                     "fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\" "
                     "stroke-dasharray=\"6,4\"");
    out += "  </g>\n";
  }
  out += "  <g id=\"points\">\n";
  for (std::size_t i = 0; i < f.points.size(); ++i) {
    const auto& p = f.points[i];
    out += "    <circle cx=\"" + num(sx(p.x)) + "\" cy=\"" + num(sy(p.y)) +
           "\" r=\"4\" fill=\"#1f77b4\"/>\n";
    out += "    <text x=\"" + num(sx(p.x) + 6) + "\" y=\"" + num(sy(p.y) - 6) +
           "\" font-size=\"11\" font-family=\"sans-serif\">" + std::to_string(i + 1) +
           "</text>\n";
  }
  out += "  </g>\n</svg>\n";
  return out;
}

}  // namespace ptrgeo::svg
