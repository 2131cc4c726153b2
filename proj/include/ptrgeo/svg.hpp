#pragma once

#include <span>
#include <string>

#include "ptrgeo/geometry.hpp"
#include "ptrgeo/task.hpp"

namespace ptrgeo::svg {

struct Figure {
  Task task = Task::hull;
  std::span<const geom::Point> points;
  std::span<const int> truth;  // file-form label
  std::span<const int> pred;   // optional; empty draws the label only
  std::string title;
};

// Standalone SVG document. The unit square maps to a 400x400 canvas with the
// y axis pointing up. Output bytes depend only on the figure contents.
std::string render(const Figure& figure);

}  // namespace ptrgeo::svg
