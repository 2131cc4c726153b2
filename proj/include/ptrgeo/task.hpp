#pragma once

#include <string>
#include <string_view>

namespace ptrgeo {

enum class Task { hull, delaunay, tsp };

std::string_view to_string(Task task);
// Throws ArgumentError for unknown names.
Task parse_task(std::string_view name);

// Output token 0 is the end-of-sequence symbol; 1..n point at inputs.
inline constexpr int kEndToken = 0;

}  // namespace ptrgeo
