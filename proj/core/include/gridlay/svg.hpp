#pragma once

#include <optional>
#include <string>

#include "gridlay/constraints.hpp"
#include "gridlay/graph.hpp"

namespace gridlay {

struct SvgOptions {
    /// Draw grid lines at multiples of tau across the drawing's bounding box.
    std::optional<GridSpec> grid;
    double margin = 20.0;
    /// Mark edges held by alignment constraints.
    bool highlight_alignments = true;
};

/// Nodes as rectangles, edges as straight lines. Byte-identical for equal inputs.
std::string emit_svg(const Graph& g, const LayoutState& s, const ConstraintList& constraints = {},
                     const SvgOptions& options = {});

}  // namespace gridlay
