#include "gridlay/stress.hpp"

#include <cmath>
#include <numbers>

namespace gridlay {

double q(double sigma, double z) { return std::abs(z) <= sigma ? (z * z) / (sigma * sigma) : 0.0; }

double q_grad(double sigma, double z) { return std::abs(z) <= sigma ? 2.0 * z / (sigma * sigma) : 0.0; }

double q_hess(double sigma, double z) { return std::abs(z) <= sigma ? 2.0 / (sigma * sigma) : 0.0; }

StressParams grid_params(const GridSpec& grid, double k_gs, double k_en, double k_ns) {
    StressParams p;
    p.grid = grid;
    p.sigma = grid.tau / 2.0;
    p.k_gs = k_gs;
    p.k_en = k_en;
    p.k_ns = k_ns;
    return p;
}

AlignedEdges detect_aligned_edges(const Graph& g, const LayoutState& s, double tolerance) {
    AlignedEdges out;
    const auto edges = g.edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
        auto [a, b] = edges[e];
        bool vert = std::abs(s.x[a] - s.x[b]) <= tolerance;
        bool horiz = std::abs(s.y[a] - s.y[b]) <= tolerance;
        if (vert && horiz) continue;  // degenerate, zero length
        if (vert) out.vertical.push_back(e);
        if (horiz) out.horizontal.push_back(e);
    }
    return out;
}

namespace {

struct Unit {
    double x, y;
};

// Direction from v to u; coincident centres get a fixed pseudo-random direction.
Unit separation_direction(NodeIndex u, NodeIndex v, double dx, double dy, double r) {
    if (r > 0.0) return {dx / r, dy / r};
    NodeIndex lo = std::min(u, v), hi = std::max(u, v);
    double frac = std::fmod(static_cast<double>(lo * 7919 + hi * 104729) * 0.6180339887498949, 1.0);
    double theta = 2.0 * std::numbers::pi * frac;
    Unit e{std::cos(theta), std::sin(theta)};
    return u == lo ? e : Unit{-e.x, -e.y};
}

// Contribution of a radial term h(|p_u - p_v|) to a^T H a where a = v_u - v_v.
double radial_curvature(double h1, double h2, double dx, double dy, double r, double ax, double ay) {
    double aa = ax * ax + ay * ay;
    if (r <= 0.0) return h2 * aa;
    double par = (ax * dx + ay * dy) / r;
    double perp2 = std::max(0.0, aa - par * par);
    return h2 * par * par + (h1 / r) * perp2;
}

}  // namespace

double p_stress(const Graph& g, const IdealDistances& d, const LayoutState& s, std::span<double> grad) {
    const std::size_t n = g.size();
    const bool want_grad = !grad.empty();
    double total = 0.0;
    for (NodeIndex u = 0; u < n; ++u) {
        for (NodeIndex v = u + 1; v < n; ++v) {
            double duv = d(u, v);
            if (!std::isfinite(duv) || duv <= 0.0) continue;
            double dx = s.x[u] - s.x[v], dy = s.y[u] - s.y[v];
            double r = std::hypot(dx, dy);
            if (r >= duv) continue;
            double w = 1.0 / (duv * duv);
            double slack = duv - r;
            total += w * slack * slack;
            if (want_grad) {
                Unit e = separation_direction(u, v, dx, dy, r);
                double f = -2.0 * w * slack;
                grad[u] += f * e.x;
                grad[v] -= f * e.x;
                grad[n + u] += f * e.y;
                grad[n + v] -= f * e.y;
            }
        }
    }
    const double dl = d.ideal_edge();
    const double wp = 1.0 / dl;
    for (auto [u, v] : g.edges()) {
        double dx = s.x[u] - s.x[v], dy = s.y[u] - s.y[v];
        double r = std::hypot(dx, dy);
        if (r <= dl) continue;
        double stretch = r - dl;
        total += wp * stretch * stretch;
        if (want_grad) {
            double f = 2.0 * wp * stretch;
            grad[u] += f * dx / r;
            grad[v] -= f * dx / r;
            grad[n + u] += f * dy / r;
            grad[n + v] -= f * dy / r;
        }
    }
    return total;
}

double p_stress_hessian_product(const Graph& g, const IdealDistances& d, const LayoutState& s,
                                std::span<const double> v) {
    const std::size_t n = g.size();
    double acc = 0.0;
    for (NodeIndex a = 0; a < n; ++a) {
        for (NodeIndex b = a + 1; b < n; ++b) {
            double dab = d(a, b);
            if (!std::isfinite(dab) || dab <= 0.0) continue;
            double dx = s.x[a] - s.x[b], dy = s.y[a] - s.y[b];
            double r = std::hypot(dx, dy);
            if (r >= dab) continue;
            double w = 1.0 / (dab * dab);
            Unit e = separation_direction(a, b, dx, dy, r);
            acc += radial_curvature(-2.0 * w * (dab - r), 2.0 * w, e.x * r, e.y * r, r, v[a] - v[b],
                                    v[n + a] - v[n + b]);
        }
    }
    const double dl = d.ideal_edge();
    const double wp = 1.0 / dl;
    for (auto [a, b] : g.edges()) {
        double dx = s.x[a] - s.x[b], dy = s.y[a] - s.y[b];
        double r = std::hypot(dx, dy);
        if (r <= dl) continue;
        acc += radial_curvature(2.0 * wp * (r - dl), 2.0 * wp, dx, dy, r, v[a] - v[b], v[n + a] - v[n + b]);
    }
    return acc;
}

namespace {

std::pair<double, double> snap_radii(const Graph& g, const StressParams& params, NodeIndex u, NodeIndex v) {
    if (params.per_pair_snap) return {g.alpha(u, v), g.beta(u, v)};
    return {params.sigma, params.sigma};
}

}  // namespace

double ns_stress(const Graph& g, const LayoutState& s, const StressParams& params, std::span<double> grad) {
    const std::size_t n = g.size();
    double total = 0.0;
    for (auto [u, v] : g.edges()) {
        auto [sx, sy] = snap_radii(g, params, u, v);
        double dx = s.x[u] - s.x[v], dy = s.y[u] - s.y[v];
        total += q(sx, dx) + q(sy, dy);
        if (!grad.empty()) {
            double gx = q_grad(sx, dx), gy = q_grad(sy, dy);
            grad[u] += gx;
            grad[v] -= gx;
            grad[n + u] += gy;
            grad[n + v] -= gy;
        }
    }
    return total;
}

double ns_stress(const Graph& g, const LayoutState& s, double sigma) {
    StressParams p;
    p.sigma = sigma;
    return ns_stress(g, s, p);
}

double ns_stress_hessian_product(const Graph& g, const LayoutState& s, const StressParams& params,
                                 std::span<const double> v) {
    const std::size_t n = g.size();
    double acc = 0.0;
    for (auto [a, b] : g.edges()) {
        auto [sx, sy] = snap_radii(g, params, a, b);
        double ax = v[a] - v[b], ay = v[n + a] - v[n + b];
        acc += q_hess(sx, s.x[a] - s.x[b]) * ax * ax + q_hess(sy, s.y[a] - s.y[b]) * ay * ay;
    }
    return acc;
}

double gs_stress(const Graph& g, const LayoutState& s, const StressParams& params, std::span<double> grad) {
    if (!params.grid) return 0.0;
    const std::size_t n = g.size();
    const double tau = params.grid->tau;
    const double sigma = params.sigma;
    double total = 0.0;
    for (NodeIndex u = 0; u < n; ++u) {
        if (params.grid_exempt && *params.grid_exempt == u) continue;
        double ox = s.x[u] - closest_grid_coordinate(s.x[u], tau);
        double oy = s.y[u] - closest_grid_coordinate(s.y[u], tau);
        total += q(sigma, ox) + q(sigma, oy);
        if (!grad.empty()) {
            grad[u] += q_grad(sigma, ox);
            grad[n + u] += q_grad(sigma, oy);
        }
    }
    return total;
}

double gs_stress(const Graph& g, const LayoutState& s, const GridSpec& grid, double sigma) {
    StressParams p;
    p.grid = grid;
    p.sigma = sigma;
    return gs_stress(g, s, p);
}

double gs_stress_hessian_product(const Graph& g, const LayoutState& s, const StressParams& params,
                                 std::span<const double> v) {
    if (!params.grid) return 0.0;
    const std::size_t n = g.size();
    const double tau = params.grid->tau;
    double acc = 0.0;
    for (NodeIndex u = 0; u < n; ++u) {
        if (params.grid_exempt && *params.grid_exempt == u) continue;
        double ox = s.x[u] - closest_grid_coordinate(s.x[u], tau);
        double oy = s.y[u] - closest_grid_coordinate(s.y[u], tau);
        acc += q_hess(params.sigma, ox) * v[u] * v[u] + q_hess(params.sigma, oy) * v[n + u] * v[n + u];
    }
    return acc;
}

namespace {

// Visits every (node, aligned edge) pair within sigma of the edge's line, with
// the signed normal offset `l` of the node from the line. `along` / `across`
// pick the coordinate arrays for the edge's direction.
template <typename Fn>
void for_each_close_pair(const Graph& g, const LayoutState& s, const AlignedEdges& aligned, double sigma, Fn&& fn) {
    const std::size_t n = g.size();
    auto visit = [&](const std::vector<std::size_t>& set, const std::vector<double>& along,
                     const std::vector<double>& across, std::size_t across_offset) {
        for (std::size_t e : set) {
            auto [a, b] = g.edges()[e];
            double lo = std::min(along[a], along[b]);
            double hi = std::max(along[a], along[b]);
            double line = 0.5 * (across[a] + across[b]);
            for (NodeIndex u = 0; u < n; ++u) {
                if (u == a || u == b) continue;
                if (along[u] < lo || along[u] > hi) continue;  // no perpendicular foot on the segment
                double l = across[u] - line;
                if (std::abs(l) >= sigma) continue;
                fn(u, a, b, l, across_offset);
            }
        }
    };
    // Horizontal edges separate in y, vertical edges in x.
    visit(aligned.horizontal, s.x, s.y, n);
    visit(aligned.vertical, s.y, s.x, 0);
}

}  // namespace

double en_sep(const Graph& g, const LayoutState& s, const AlignedEdges& aligned, double sigma,
              std::span<double> grad) {
    double total = 0.0;
    for_each_close_pair(g, s, aligned, sigma,
                        [&](NodeIndex u, NodeIndex a, NodeIndex b, double l, std::size_t off) {
                            double z = sigma - std::abs(l);
                            total += q(sigma, z);
                            if (!grad.empty()) {
                                double sgn = (l > 0.0) - (l < 0.0);
                                double dl = -sgn * q_grad(sigma, z);  // d/dl of q(sigma - |l|)
                                grad[off + u] += dl;
                                grad[off + a] -= 0.5 * dl;
                                grad[off + b] -= 0.5 * dl;
                            }
                        });
    return total;
}

double en_sep_hessian_product(const Graph& g, const LayoutState& s, const AlignedEdges& aligned, double sigma,
                              std::span<const double> v) {
    double acc = 0.0;
    for_each_close_pair(g, s, aligned, sigma,
                        [&](NodeIndex u, NodeIndex a, NodeIndex b, double l, std::size_t off) {
                            double t = v[off + u] - 0.5 * (v[off + a] + v[off + b]);
                            acc += q_hess(sigma, sigma - std::abs(l)) * t * t;
                        });
    return acc;
}

GoalBreakdown goal(const Graph& g, const IdealDistances& d, const LayoutState& s, const StressParams& params,
                   const AlignedEdges& aligned) {
    GoalBreakdown out;
    out.p_stress = p_stress(g, d, s);
    if (params.k_ns != 0.0) out.ns_stress = ns_stress(g, s, params);
    if (params.k_gs != 0.0) out.gs_stress = gs_stress(g, s, params);
    if (params.k_en != 0.0) out.en_sep = en_sep(g, s, aligned, params.sigma);
    out.total = out.p_stress + params.k_ns * out.ns_stress + params.k_gs * out.gs_stress + params.k_en * out.en_sep;
    return out;
}

GoalBreakdown goal_and_gradient(const Graph& g, const IdealDistances& d, const LayoutState& s,
                                const StressParams& params, const AlignedEdges& aligned, Gradient& grad) {
    const std::size_t n = g.size();
    grad.assign(2 * n, 0.0);
    Gradient term(2 * n);
    GoalBreakdown out;
    out.p_stress = p_stress(g, d, s, grad);
    auto add_weighted = [&](double k, auto&& eval) {
        if (k == 0.0) return 0.0;
        std::fill(term.begin(), term.end(), 0.0);
        double value = eval(std::span<double>(term));
        for (std::size_t i = 0; i < term.size(); ++i) grad[i] += k * term[i];
        return value;
    };
    out.ns_stress = add_weighted(params.k_ns, [&](std::span<double> t) { return ns_stress(g, s, params, t); });
    out.gs_stress = add_weighted(params.k_gs, [&](std::span<double> t) { return gs_stress(g, s, params, t); });
    out.en_sep =
        add_weighted(params.k_en, [&](std::span<double> t) { return en_sep(g, s, aligned, params.sigma, t); });
    out.total = out.p_stress + params.k_ns * out.ns_stress + params.k_gs * out.gs_stress + params.k_en * out.en_sep;
    return out;
}

double hessian_product(const Graph& g, const IdealDistances& d, const LayoutState& s, const StressParams& params,
                       const AlignedEdges& aligned, std::span<const double> v) {
    double acc = p_stress_hessian_product(g, d, s, v);
    if (params.k_ns != 0.0) acc += params.k_ns * ns_stress_hessian_product(g, s, params, v);
    if (params.k_gs != 0.0) acc += params.k_gs * gs_stress_hessian_product(g, s, params, v);
    if (params.k_en != 0.0) acc += params.k_en * en_sep_hessian_product(g, s, aligned, params.sigma, v);
    return acc;
}

std::optional<double> step_size(std::span<const double> gradient, double g_h_g) {
    double gg = 0.0;
    for (double c : gradient) gg += c * c;
    if (gg == 0.0 || !(g_h_g > 0.0)) return std::nullopt;
    return gg / g_h_g;
}

}  // namespace gridlay
