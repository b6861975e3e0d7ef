#include "gridlay/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

namespace gridlay {

double required_separation(const Graph& g, NodeIndex u, NodeIndex v, Dim dim, NonOverlap mode, double tau) {
    double base = g.half_extent_sum(u, v, dim);
    return mode == NonOverlap::Grid ? std::max(base, tau) : base;
}

bool boxes_overlap(const Graph& g, const LayoutState& s, NodeIndex u, NodeIndex v, NonOverlap mode, double tau) {
    if (mode == NonOverlap::Off) mode = NonOverlap::NodeSizes;
    return std::abs(s.x[u] - s.x[v]) < required_separation(g, u, v, Dim::X, mode, tau) - kContactTolerance &&
           std::abs(s.y[u] - s.y[v]) < required_separation(g, u, v, Dim::Y, mode, tau) - kContactTolerance;
}

std::size_t count_overlaps(const Graph& g, const LayoutState& s, NonOverlap mode, double tau) {
    std::size_t count = 0;
    for (NodeIndex u = 0; u < g.size(); ++u) {
        for (NodeIndex v = u + 1; v < g.size(); ++v) count += boxes_overlap(g, s, u, v, mode, tau) ? 1 : 0;
    }
    return count;
}

ConstraintList generate_non_overlap(const Graph& g, const LayoutState& s, NonOverlap mode, double tau) {
    ConstraintList out;
    if (mode == NonOverlap::Off) return out;
    for (NodeIndex u = 0; u < g.size(); ++u) {
        for (NodeIndex v = u + 1; v < g.size(); ++v) {
            if (!boxes_overlap(g, s, u, v, mode, tau)) continue;
            double gx = required_separation(g, u, v, Dim::X, mode, tau);
            double gy = required_separation(g, u, v, Dim::Y, mode, tau);
            double need_x = gx - std::abs(s.x[u] - s.x[v]);
            double need_y = gy - std::abs(s.y[u] - s.y[v]);
            Dim dim = need_x <= need_y ? Dim::X : Dim::Y;
            const auto& c = s.coords(dim);
            bool u_first = c[u] <= c[v];
            SeparationConstraint k;
            k.dim = dim;
            k.left = u_first ? u : v;
            k.right = u_first ? v : u;
            k.gap = dim == Dim::X ? gx : gy;
            out.push_back(k);
        }
    }
    return out;
}

EqualityClasses::EqualityClasses(std::size_t n, std::span<const SeparationConstraint> constraints, Dim dim)
    : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), NodeIndex{0});
    for (const auto& c : constraints) {
        if (c.dim != dim || !c.equality() || !c.satisfiable()) continue;
        NodeIndex a = root(c.left), b = root(c.right);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }
}

NodeIndex EqualityClasses::root(NodeIndex v) const {
    while (parent_[v] != v) {
        parent_[v] = parent_[parent_[v]];
        v = parent_[v];
    }
    return v;
}

OrderEntailment::OrderEntailment(std::size_t n, std::span<const SeparationConstraint> constraints, Dim dim)
    : n_(n), arcs_(n), cache_(n), cached_(n, false) {
    for (const auto& c : constraints) {
        if (c.dim != dim || !c.satisfiable()) continue;
        arcs_[c.left].push_back({c.right, c.gap});
        if (c.equality()) arcs_[c.right].push_back({c.left, -c.gap});
    }
}

std::optional<double> OrderEntailment::lower_bound(NodeIndex a, NodeIndex b) const {
    if (!cached_[a]) {
        // Longest paths from a (queue-based Bellman-Ford, capped for infeasible input).
        constexpr double kNone = -std::numeric_limits<double>::infinity();
        std::vector<double> dist(n_, kNone);
        std::vector<std::size_t> relaxed(n_, 0);
        std::vector<bool> queued(n_, false);
        std::deque<NodeIndex> queue{a};
        dist[a] = 0.0;
        queued[a] = true;
        while (!queue.empty()) {
            NodeIndex v = queue.front();
            queue.pop_front();
            queued[v] = false;
            if (++relaxed[v] > n_ + 1) continue;
            for (const Arc& arc : arcs_[v]) {
                double cand = dist[v] + arc.weight;
                if (cand > dist[arc.to] + 1e-12) {
                    dist[arc.to] = cand;
                    if (!queued[arc.to]) {
                        queued[arc.to] = true;
                        queue.push_back(arc.to);
                    }
                }
            }
        }
        cache_[a] = std::move(dist);
        cached_[a] = true;
    }
    double d = cache_[a][b];
    if (d == -std::numeric_limits<double>::infinity()) return std::nullopt;
    return d;
}

bool OrderEntailment::less(NodeIndex a, NodeIndex b) const {
    if (a == b) return false;
    auto lb = lower_bound(a, b);
    return lb && *lb > 0.0;
}

const char* to_string(Direction d) {
    switch (d) {
        case Direction::N: return "N";
        case Direction::S: return "S";
        case Direction::E: return "E";
        case Direction::W: return "W";
    }
    return "?";
}

Dim alignment_dim(Direction d) { return d == Direction::E || d == Direction::W ? Dim::Y : Dim::X; }

SeparatedAlignment make_separated_alignment(const Graph& g, NodeIndex u, NodeIndex v, Direction dir) {
    // E and S put v on the high side of u; W and N put it on the low side.
    bool v_high = dir == Direction::E || dir == Direction::S;
    NodeIndex lo = v_high ? u : v;
    NodeIndex hi = v_high ? v : u;
    Dim sep = separation_dim(dir);
    SeparatedAlignment sa;
    sa.u = u;
    sa.v = v;
    sa.dir = dir;
    sa.alignment = {alignment_dim(dir), lo, hi, 0.0, Relation::Equality, Priority::Tentative};
    sa.separation = {sep, lo, hi, g.half_extent_sum(lo, hi, sep), Relation::Inequality, Priority::Tentative};
    return sa;
}

void apply_separated_alignment(const SeparatedAlignment& sa, ConstraintList& constraints) {
    SeparationConstraint a = sa.alignment, s = sa.separation;
    a.priority = s.priority = Priority::Tentative;
    constraints.push_back(a);
    constraints.push_back(s);
}

bool same_constraint(const SeparationConstraint& a, const SeparationConstraint& b) {
    return a.dim == b.dim && a.left == b.left && a.right == b.right && a.gap == b.gap && a.relation == b.relation &&
           a.priority == b.priority;
}

void remove_separated_alignment(const SeparatedAlignment& sa, ConstraintList& constraints) {
    for (const SeparationConstraint* target : {&sa.separation, &sa.alignment}) {
        for (auto it = constraints.rbegin(); it != constraints.rend(); ++it) {
            if (same_constraint(*it, *target)) {
                constraints.erase(std::next(it).base());
                break;
            }
        }
    }
}

}  // namespace gridlay
