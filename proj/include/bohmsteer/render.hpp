#pragma once

#include <string>
#include <vector>

#include "bohmsteer/io.hpp"

namespace bohmsteer {

/// Trajectories as polylines in the (z, x) plane, one colour per steering
/// group, with the midline x = 0 dashed.
std::string render_trajectories_svg(const std::vector<TrajectoryRow>& rows);

/// Map values as a diverging heat map over (z, x); missing cells are grey.
std::string render_map_svg(const std::vector<MapRow>& rows);

}  // namespace bohmsteer
