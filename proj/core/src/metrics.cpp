#include "gridlay/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include <nlohmann/json.hpp>

#include "gridlay/constraints.hpp"
#include "gridlay/stress.hpp"

namespace gridlay {

double MFunction::operator()(double angle) const {
    const double quarter = std::numbers::pi / 4.0, half = std::numbers::pi / 2.0;
    double a = std::clamp(angle, 0.0, half);
    if (a > quarter) a = half - a;  // symmetric about pi/4
    if (a <= delta) return peak * a / delta;
    return peak + (diagonal - peak) * (a - delta) / (quarter - delta);
}

double edge_angle(const LayoutState& s, NodeIndex u, NodeIndex v) {
    double dx = std::abs(s.x[u] - s.x[v]), dy = std::abs(s.y[u] - s.y[v]);
    if (dx == 0.0) return dy == 0.0 ? 0.0 : std::numbers::pi / 2.0;
    return std::atan(dy / dx);
}

namespace {

int orientation(Point a, Point b, Point c) {
    double v = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    return (v > 0.0) - (v < 0.0);
}

// Open segments ab and cd share a point.
bool open_segments_intersect(Point a, Point b, Point c, Point d) {
    int o1 = orientation(a, b, c), o2 = orientation(a, b, d);
    int o3 = orientation(c, d, a), o4 = orientation(c, d, b);
    if (o1 * o2 < 0 && o3 * o4 < 0) return true;
    if (o1 != 0 || o2 != 0) return false;
    // collinear: project on the dominant axis and look for positive overlap
    bool use_x = std::abs(b.x - a.x) + std::abs(d.x - c.x) >= std::abs(b.y - a.y) + std::abs(d.y - c.y);
    auto key = [&](Point p) { return use_x ? p.x : p.y; };
    double lo = std::max(std::min(key(a), key(b)), std::min(key(c), key(d)));
    double hi = std::min(std::max(key(a), key(b)), std::max(key(c), key(d)));
    return hi > lo;
}

// Segment pq meets the closed axis-aligned box [x0,x1] x [y0,y1].
bool segment_meets_box(Point p, Point q, double x0, double x1, double y0, double y1) {
    double t0 = 0.0, t1 = 1.0;
    double dx = q.x - p.x, dy = q.y - p.y;
    auto clip = [&](double denom, double num) {
        // keeps t with denom * t <= num
        if (denom == 0.0) return num >= 0.0;
        double t = num / denom;
        if (denom > 0.0) {
            t1 = std::min(t1, t);
        } else {
            t0 = std::max(t0, t);
        }
        return t0 <= t1;
    };
    return clip(-dx, p.x - x0) && clip(dx, x1 - p.x) && clip(-dy, p.y - y0) && clip(dy, y1 - p.y);
}

}  // namespace

std::size_t edge_crossings(const Graph& g, const LayoutState& s) {
    const auto edges = g.edges();
    std::size_t count = 0;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        auto [a, b] = edges[i];
        for (std::size_t j = i + 1; j < edges.size(); ++j) {
            auto [c, d] = edges[j];
            if (a == c || a == d || b == c || b == d) continue;
            if (open_segments_intersect(s.at(a), s.at(b), s.at(c), s.at(d))) ++count;
        }
    }
    return count;
}

std::size_t edge_node_overlaps(const Graph& g, const LayoutState& s) {
    std::size_t count = 0;
    for (auto [a, b] : g.edges()) {
        for (NodeIndex w = 0; w < g.size(); ++w) {
            if (w == a || w == b) continue;
            const Node& n = g.node(w);
            if (segment_meets_box(s.at(a), s.at(b), s.x[w] - n.w / 2, s.x[w] + n.w / 2, s.y[w] - n.h / 2,
                                  s.y[w] + n.h / 2))
                ++count;
        }
    }
    return count;
}

double angular_resolution(const Graph& g, const LayoutState& s) {
    double total = 0.0;
    for (NodeIndex v = 0; v < g.size(); ++v) {
        auto nb = g.neighbours(v);
        if (nb.size() < 2) continue;
        double ideal = 2.0 * std::numbers::pi / static_cast<double>(nb.size());
        for (std::size_t i = 0; i < nb.size(); ++i) {
            for (std::size_t j = i + 1; j < nb.size(); ++j) {
                double ax = s.x[nb[i]] - s.x[v], ay = s.y[nb[i]] - s.y[v];
                double bx = s.x[nb[j]] - s.x[v], by = s.y[nb[j]] - s.y[v];
                double theta = std::abs(std::atan2(ax * by - ay * bx, ax * bx + ay * by));
                total += std::abs(ideal - theta);
            }
        }
    }
    return total;
}

double obliqueness(const Graph& g, const LayoutState& s, const MFunction& m) {
    if (g.edge_count() == 0) return 0.0;
    double total = 0.0;
    for (auto [u, v] : g.edges()) total += m(edge_angle(s, u, v));
    return total / static_cast<double>(g.edge_count());
}

double grid_placement(const Graph& g, const LayoutState& s, const GridSpec& grid) {
    if (g.size() == 0) return 0.0;
    double total = 0.0;
    for (NodeIndex i = 0; i < g.size(); ++i) {
        Point p = s.at(i), c = closest_grid_point(p, grid);
        total += std::hypot(p.x - c.x, p.y - c.y);
    }
    return total / static_cast<double>(g.size());
}

std::size_t edge_coincidences(const Graph& g, const LayoutState& s, double tol) {
    const auto edges = g.edges();
    std::size_t count = 0;
    for (Dim along : {Dim::X, Dim::Y}) {
        Dim across = other(along);
        const auto& a = s.coords(along);
        const auto& c = s.coords(across);
        for (std::size_t i = 0; i < edges.size(); ++i) {
            auto [p, q] = edges[i];
            if (std::abs(c[p] - c[q]) > tol || std::abs(a[p] - a[q]) <= tol) continue;
            for (std::size_t j = i + 1; j < edges.size(); ++j) {
                auto [r, t] = edges[j];
                if (std::abs(c[r] - c[t]) > tol || std::abs(a[r] - a[t]) <= tol) continue;
                if (std::abs(c[p] - c[r]) > tol) continue;
                double lo = std::max(std::min(a[p], a[q]), std::min(a[r], a[t]));
                double hi = std::min(std::max(a[p], a[q]), std::max(a[r], a[t]));
                if (hi - lo > tol) ++count;
            }
        }
    }
    return count;
}

MetricsReport measure(const Graph& g, const LayoutState& s, double ideal_edge, std::optional<GridSpec> grid) {
    MetricsReport r;
    r.p_stress = p_stress(g, shortest_path_distances(g, ideal_edge), s);
    r.crossings = edge_crossings(g, s);
    r.edge_node_overlaps = edge_node_overlaps(g, s);
    r.angular_resolution = angular_resolution(g, s);
    r.obliqueness = obliqueness(g, s);
    if (grid) r.grid_placement = grid_placement(g, s, *grid);
    r.node_overlaps = count_overlaps(g, s);
    AlignedEdges aligned = detect_aligned_edges(g, s);
    r.aligned_edges = aligned.horizontal.size() + aligned.vertical.size();
    return r;
}

std::string to_json(const MetricsReport& r) {
    nlohmann::ordered_json j;
    j["p_stress"] = r.p_stress;
    j["crossings"] = r.crossings;
    j["edge_node_overlaps"] = r.edge_node_overlaps;
    j["angular_resolution"] = r.angular_resolution;
    j["obliqueness"] = r.obliqueness;
    j["grid_placement"] = r.grid_placement ? nlohmann::ordered_json(*r.grid_placement) : nlohmann::ordered_json();
    j["node_overlaps"] = r.node_overlaps;
    j["aligned_edges"] = r.aligned_edges;
    nlohmann::ordered_json times = nlohmann::ordered_json::object();
    for (const auto& [phase, secs] : r.wall_times) times[phase] = std::round(secs * 1000.0) / 1000.0;
    j["wall_times"] = times;
    return j.dump(2);
}

std::string csv_header() {
    return "graph,mode,nodes_overlapping,p_stress,crossings,edge_node_overlaps,angular_resolution,obliqueness,"
           "grid_placement,aligned_edges,time_phase1,time_phase2,time_total";
}

std::string csv_row(const std::string& graph, const std::string& mode, const MetricsReport& r) {
    auto time_of = [&](const char* name) {
        for (const auto& [phase, secs] : r.wall_times)
            if (phase == name) return secs;
        return 0.0;
    };
    char buf[512];
    std::snprintf(buf, sizeof buf, "%zu,%.6f,%zu,%zu,%.6f,%.6f,%s,%zu,%.3f,%.3f,%.3f", r.node_overlaps, r.p_stress,
                  r.crossings, r.edge_node_overlaps, r.angular_resolution, r.obliqueness,
                  r.grid_placement ? std::to_string(*r.grid_placement).c_str() : "", r.aligned_edges,
                  time_of("phase1"), time_of("phase2"), time_of("total"));
    return graph + "," + mode + "," + buf;
}

}  // namespace gridlay
