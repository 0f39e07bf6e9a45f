#pragma once

#include <string>
#include <vector>

#include "cpageo/enumeration.hpp"

namespace cpageo {

struct SvgOptions {
  int size_px = 1000;
  bool color_by_label = false;  // otherwise a fixed palette keyed on the pattern
  bool draw_boundary = false;
};

// Window-clipped partition rendering; deterministic bytes for fixed inputs.
std::string render_partition_svg(const std::vector<RegionCell>& cells,
                                 const Window& window,
                                 const std::vector<int>& labels,
                                 const std::vector<BoundaryEdge>& boundary,
                                 const SvgOptions& opt,
                                 const std::string& manifest_hash);

}  // namespace cpageo
