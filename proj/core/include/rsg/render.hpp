#pragma once

#include <string>
#include <vector>

#include "rsg/graphic.hpp"
#include "rsg/sweep.hpp"

namespace rsg {

struct RenderOptions {
  int size = 800;     // square canvas, pixels
  int margin = 40;
};

/// SVG of the graphic: definite arcs solid, indefinite arcs dashed, a light band on the
/// gray side of definite arcs, feature and crossing markers. With events, each event is
/// numbered in scan order and colored by effect. Output depends only on the input.
std::string render_svg(const Graphic& g, const std::vector<SweepEvent>& events = {},
                       const RenderOptions& options = {});

}  // namespace rsg
