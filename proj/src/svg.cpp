#include "cpageo/svg.hpp"

#include <cstdio>
#include <sstream>

#include "cpageo/hash.hpp"
#include "cpageo/io.hpp"
#include "cpageo/manifest.hpp"

namespace cpageo {

namespace {

const char* kPalette[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3",
                          "#937860", "#da8bc3", "#8c8c8c", "#ccb974", "#64b5cd"};
constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

std::string render_partition_svg(const std::vector<RegionCell>& cells,
                                 const Window& window,
                                 const std::vector<int>& labels,
                                 const std::vector<BoundaryEdge>& boundary,
                                 const SvgOptions& opt,
                                 const std::string& manifest_hash) {
  const double x0 = window.center[0] - window.r;
  const double y0 = window.center[1] - window.r;
  const double scale = static_cast<double>(opt.size_px) / (2.0 * window.r);
  auto px = [&](double x) { return (x - x0) * scale; };
  // flip y so larger y is up
  auto py = [&](double y) { return static_cast<double>(opt.size_px) - (y - y0) * scale; };

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.size_px
      << "\" height=\"" << opt.size_px << "\" viewBox=\"0 0 " << opt.size_px
      << " " << opt.size_px << "\">\n";
  out << "<!-- manifest=" << manifest_hash << " tool_version=" << kToolVersion
      << " -->\n";

  for (std::size_t i = 0; i < cells.size(); ++i) {
    std::size_t color_idx;
    if (opt.color_by_label && i < labels.size() && labels[i] >= 0)
      color_idx = static_cast<std::size_t>(labels[i]) % kPaletteSize;
    else
      color_idx = fnv1a64(cells[i].pattern.data(),
                          cells[i].pattern.size() * sizeof(int)) % kPaletteSize;
    out << "<polygon points=\"";
    for (std::size_t v = 0; v < cells[i].polygon.size(); ++v) {
      if (v) out << " ";
      out << fmt6(px(cells[i].polygon[v].x)) << "," << fmt6(py(cells[i].polygon[v].y));
    }
    out << "\" fill=\"" << kPalette[color_idx]
        << "\" fill-opacity=\"0.55\" stroke=\"#222222\" stroke-width=\"0.4\"/>\n";
  }

  if (opt.draw_boundary) {
    for (const BoundaryEdge& e : boundary)
      out << "<line x1=\"" << fmt6(px(e.a.x)) << "\" y1=\"" << fmt6(py(e.a.y))
          << "\" x2=\"" << fmt6(px(e.b.x)) << "\" y2=\"" << fmt6(py(e.b.y))
          << "\" stroke=\"#ffffff\" stroke-width=\"2.5\"/>\n";
  }

  out << "<rect x=\"0\" y=\"0\" width=\"" << opt.size_px << "\" height=\""
      << opt.size_px << "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"2\"/>\n";
  out << "</svg>\n";
  return out.str();
}

}  // namespace cpageo
