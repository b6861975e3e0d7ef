#include "gridlay/aca.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "gridlay/stress.hpp"

namespace gridlay {

AlignFlags::AlignFlags(const Graph& g, const ConstraintList& constraints) : g_(&g) {
    for (Dim dim : {Dim::X, Dim::Y}) {
        auto& p = parent_[static_cast<int>(dim)];
        p.resize(g.size());
        std::iota(p.begin(), p.end(), NodeIndex{0});
    }
    for (const auto& c : constraints) {
        if (!c.alignment() || !c.satisfiable()) continue;
        auto& p = parent_[static_cast<int>(c.dim)];
        NodeIndex a = root(c.dim, c.left), b = root(c.dim, c.right);
        if (a != b) p[std::max(a, b)] = std::min(a, b);
    }
}

NodeIndex AlignFlags::root(Dim dim, NodeIndex v) const {
    auto& p = parent_[static_cast<int>(dim)];
    while (p[v] != v) {
        p[v] = p[p[v]];
        v = p[v];
    }
    return v;
}

void AlignFlags::update(const SeparatedAlignment& sa) {
    Dim dim = sa.alignment.dim;
    NodeIndex a = root(dim, sa.u), b = root(dim, sa.v);
    if (a != b) parent_[static_cast<int>(dim)][std::max(a, b)] = std::min(a, b);
}

bool creates_coincidence(const AlignFlags& flags, const Graph& g, const OrderEntailment& order, const LayoutState& s,
                         NodeIndex u, NodeIndex v, Direction dir) {
    if (!g.adjacent(u, v)) throw Error("separated alignments apply to edges only");
    const Dim along = alignment_dim(dir), sep = separation_dim(dir);
    const SeparatedAlignment sa = make_separated_alignment(g, u, v, dir);
    const NodeIndex lo = sa.low(), hi = sa.high();
    const double gap = sa.separation.gap;
    const auto& pos = s.coords(sep);
    // Entailed lower bound on pos(b) - pos(a) once lo + gap <= hi is added.
    auto bound = [&](NodeIndex a, NodeIndex b) -> std::optional<double> {
        std::optional<double> best = order.lower_bound(a, b);
        auto to_lo = a == lo ? std::optional<double>(0.0) : order.lower_bound(a, lo);
        auto from_hi = hi == b ? std::optional<double>(0.0) : order.lower_bound(hi, b);
        if (to_lo && from_hi) {
            double via = *to_lo + gap + *from_hi;
            if (!best || via > *best) best = via;
        }
        return best;
    };
    auto before = [&](NodeIndex a, NodeIndex b) {
        if (auto lb = bound(a, b)) {
            if (*lb > 0.0) return true;
        }
        if (auto lb = bound(b, a); lb && *lb >= 0.0) return false;  // b <= a entailed
        return pos[a] < pos[b];
    };
    auto in_lo = [&](NodeIndex w) { return flags.aligned(along, w, lo); };
    auto in_hi = [&](NodeIndex w) { return flags.aligned(along, w, hi); };
    // Both edges leave p on the same side.
    auto same_side = [&](NodeIndex p, NodeIndex q, NodeIndex r) {
        return (before(p, q) && before(p, r)) || (before(q, p) && before(r, p));
    };
    // Every edge between the two classes becomes aligned, not only (u,v).
    // Without other cross edges this is the classic test: a neighbour of lo
    // to its right, or a neighbour of hi to its left, in either class.
    for (NodeIndex a = 0; a < g.size(); ++a) {
        if (!in_lo(a)) continue;
        for (NodeIndex b : g.neighbours(a)) {
            if (!in_hi(b)) continue;
            for (auto [p, q] : {std::pair{a, b}, std::pair{b, a}}) {
                for (NodeIndex r : g.neighbours(p)) {
                    if (r == q || !(in_lo(r) || in_hi(r))) continue;
                    if (same_side(p, q, r)) return true;
                }
            }
        }
    }
    return false;
}

bool creates_coincidence(const AlignFlags& flags, const Graph& g, const ConstraintList& constraints,
                         const LayoutState& s, NodeIndex u, NodeIndex v, Direction dir) {
    OrderEntailment order(g.size(), constraints, separation_dim(dir));
    return creates_coincidence(flags, g, order, s, u, v, dir);
}

namespace {

double pair_stress(const Graph& g, const IdealDistances& d, const LayoutState& s, NodeIndex a, NodeIndex b) {
    double r = std::hypot(s.x[a] - s.x[b], s.y[a] - s.y[b]);
    double total = 0.0;
    double dab = d(a, b);
    if (std::isfinite(dab) && dab > 0.0 && r < dab) total += (dab - r) * (dab - r) / (dab * dab);
    if (g.adjacent(a, b) && r > d.ideal_edge()) total += (r - d.ideal_edge()) * (r - d.ideal_edge()) / d.ideal_edge();
    return total;
}

double local_stress(const Graph& g, const IdealDistances& d, const LayoutState& s, NodeIndex u, NodeIndex v) {
    double total = 0.0;
    for (NodeIndex k = 0; k < g.size(); ++k) {
        if (k != u) total += pair_stress(g, d, s, u, k);
        if (k != u && k != v) total += pair_stress(g, d, s, v, k);
    }
    return total;
}

}  // namespace

double cost_stress_change(const Graph& g, const IdealDistances& d, const LayoutState& s, NodeIndex u, NodeIndex v,
                          Direction dir) {
    Dim along = alignment_dim(dir);
    const auto& c = s.coords(along);
    if (c[u] == c[v]) return 0.0;
    LayoutState t = s;
    double mean = 0.5 * (c[u] + c[v]);
    t.coords(along)[u] = mean;
    t.coords(along)[v] = mean;
    return local_stress(g, d, t, u, v) - local_stress(g, d, s, u, v);
}

double cost_obliqueness(const LayoutState& s, NodeIndex u, NodeIndex v, Direction dir, const MFunction& m) {
    double angle = edge_angle(s, u, v);
    const double quarter = std::numbers::pi / 4.0;
    bool horizontal = alignment_dim(dir) == Dim::Y;
    if (horizontal ? angle > quarter : angle < quarter) return kNever;
    return -m(angle);
}

double bend_penalty(const Graph& g, const AlignFlags& flags, const CostModel& model, NodeIndex u, NodeIndex v,
                    Direction dir) {
    Dim along = alignment_dim(dir), cross = other(along);
    auto effective = [&](NodeIndex a) {
        std::vector<NodeIndex> out;
        for (NodeIndex b : g.neighbours(a))
            if (model.bend == BendRule::Degree2 || g.degree(b) > 1) out.push_back(b);
        return out;
    };
    for (auto [x, y] : {std::pair{u, v}, std::pair{v, u}}) {
        std::vector<NodeIndex> nb = effective(x);
        if (nb.size() != 2 || std::find(nb.begin(), nb.end(), y) == nb.end()) continue;
        NodeIndex z = nb[0] == y ? nb[1] : nb[0];
        if (flags.aligned(cross, x, z)) return model.bend_cost;
    }
    return 0.0;
}

std::optional<Candidate> choose_sa(const Graph& g, const IdealDistances& d, const AlignFlags& flags,
                                   const LayoutState& s, const ConstraintList& constraints, const CostModel& model,
                                   const Eligibility& eligible) {
    const std::size_t n = g.size();
    OrderEntailment order_x(n, constraints, Dim::X), order_y(n, constraints, Dim::Y);
    std::vector<std::vector<NodeIndex>> members[2];
    for (Dim dim : {Dim::X, Dim::Y}) {
        auto& m = members[static_cast<int>(dim)];
        m.resize(n);
        for (NodeIndex i = 0; i < n; ++i) m[flags.root(dim, i)].push_back(i);
    }
    // Merging the `along` classes of u and v would put two nodes on the same point.
    auto collapses_nodes = [&](Dim along, NodeIndex u, NodeIndex v) {
        Dim cross = other(along);
        const auto& a = members[static_cast<int>(along)][flags.root(along, u)];
        const auto& b = members[static_cast<int>(along)][flags.root(along, v)];
        for (NodeIndex p : a)
            for (NodeIndex q : b)
                if (flags.aligned(cross, p, q)) return true;
        return false;
    };

    std::optional<Candidate> best;
    const auto edges = g.edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
        auto [u, v] = edges[e];
        if (flags.h_aligned(u, v) || flags.v_aligned(u, v)) continue;
        Direction dirs[2] = {s.x[u] <= s.x[v] ? Direction::E : Direction::W,
                             s.y[u] <= s.y[v] ? Direction::S : Direction::N};
        for (Direction dir : dirs) {
            Dim along = alignment_dim(dir);
            if (!eligible.allowed(e, along)) continue;
            double cost = model.basis == CostBasis::StressChange ? cost_stress_change(g, d, s, u, v, dir)
                                                                 : cost_obliqueness(s, u, v, dir, model.m);
            if (cost == kNever) continue;
            cost += bend_penalty(g, flags, model, u, v, dir);
            if (best && !(cost < best->cost)) continue;
            if (collapses_nodes(along, u, v)) continue;
            const OrderEntailment& order = separation_dim(dir) == Dim::X ? order_x : order_y;
            if (creates_coincidence(flags, g, order, s, u, v, dir)) continue;
            best = Candidate{make_separated_alignment(g, u, v, dir), e, cost};
        }
    }
    return best;
}

namespace {

std::size_t aligned_edge_count(const Graph& g, const AlignFlags& flags) {
    std::size_t count = 0;
    for (auto [u, v] : g.edges()) count += flags.h_aligned(u, v) || flags.v_aligned(u, v) ? 1 : 0;
    return count;
}

}  // namespace

AcaResult adapt_const_align(const Graph& g, const IdealDistances& d, ConstraintList constraints,
                            const LayoutState& start, const SolveOptions& options, const CostModel& model) {
    AcaResult out;
    out.layout = start;
    AlignFlags flags(g, constraints);
    Eligibility eligible(g.edge_count());
    const std::size_t coincidences_before = edge_coincidences(g, start);
    for (;;) {
        auto cand = choose_sa(g, d, flags, out.layout, constraints, model, eligible);
        if (!cand) break;
        ++out.selections;
        ConstraintList trial = constraints;
        apply_separated_alignment(cand->sa, trial);
        SolveResult res = cfdl(g, d, trial, out.layout, options);
        // A rejected constraint, or an overlay the order test could not foresee, rolls the alignment back.
        if (res.rejected || edge_coincidences(g, res.layout) > coincidences_before) {
            eligible.forbid(cand->edge, cand->sa.alignment.dim);
            ++out.rejected;
        } else {
            constraints = std::move(trial);
            out.layout = std::move(res.layout);
            flags.update(cand->sa);
            ++out.applied;
        }
        out.alignment_history.push_back(aligned_edge_count(g, flags));
    }
    out.constraints = std::move(constraints);
    return out;
}

}  // namespace gridlay
