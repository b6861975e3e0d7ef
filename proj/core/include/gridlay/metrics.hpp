#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gridlay/graph.hpp"

namespace gridlay {

/// M-shaped obliqueness penalty: 0 at 0 and pi/2, `peak` at `delta` and
/// pi/2 - delta, `diagonal` at pi/4, linear in between.
struct MFunction {
    double diagonal = 10.0;
    double peak = 100.0;
    double delta = 3.14159265358979323846 / 36.0;

    double operator()(double angle) const;
};

/// Edge angle to the x axis, folded into [0, pi/2]. Vertical edges give pi/2.
double edge_angle(const LayoutState& s, NodeIndex u, NodeIndex v);

std::size_t edge_crossings(const Graph& g, const LayoutState& s);
std::size_t edge_node_overlaps(const Graph& g, const LayoutState& s);
double angular_resolution(const Graph& g, const LayoutState& s);
double obliqueness(const Graph& g, const LayoutState& s, const MFunction& m = {});
double grid_placement(const Graph& g, const LayoutState& s, const GridSpec& grid);

/// Pairs of edges lying on one axis-parallel line with overlapping extent.
std::size_t edge_coincidences(const Graph& g, const LayoutState& s, double tol = 1e-9);

struct MetricsReport {
    double p_stress = 0.0;
    std::size_t crossings = 0;
    std::size_t edge_node_overlaps = 0;
    double angular_resolution = 0.0;
    double obliqueness = 0.0;
    std::optional<double> grid_placement;
    std::size_t node_overlaps = 0;
    std::size_t aligned_edges = 0;
    std::vector<std::pair<std::string, double>> wall_times;
};

MetricsReport measure(const Graph& g, const LayoutState& s, double ideal_edge, std::optional<GridSpec> grid = {});

std::string to_json(const MetricsReport& r);
std::string csv_header();
std::string csv_row(const std::string& graph, const std::string& mode, const MetricsReport& r);

}  // namespace gridlay
