#include "gridlay/solver.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace gridlay {

namespace {

constexpr double kPinWeight = 1e9;
constexpr int kMaxHalvings = 10;
constexpr int kMaxOverlapPasses = 50;

LayoutState blend(const LayoutState& a, const LayoutState& b, double t) {
    LayoutState out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out.x[i] = a.x[i] + t * (b.x[i] - a.x[i]);
        out.y[i] = a.y[i] + t * (b.y[i] - a.y[i]);
    }
    return out;
}

}  // namespace

Solver::Solver(const Graph& g, const IdealDistances& ideal, ConstraintList& constraints, LayoutState start,
               SolveOptions options)
    : g_(g), ideal_(ideal), constraints_(constraints), x_(std::move(start)), options_(std::move(options)) {
    if (x_.size() != g.size()) throw Error("layout size does not match graph");
    if (!x_.finite()) throw Error("layout has non-finite coordinates");
}

void Solver::restart() {
    converged_ = false;
    feasible_ = false;
}

bool Solver::pin_settled() const {
    if (!options_.pin) return true;
    Point p = x_.at(options_.pin->node);
    return std::abs(p.x - options_.pin->at.x) <= 1e-6 && std::abs(p.y - options_.pin->at.y) <= 1e-6;
}

double Solver::evaluate(const LayoutState& s, const AlignedEdges& aligned) const {
    StressParams params = options_.stress;
    if (options_.pin) params.grid_exempt = options_.pin->node;
    return goal(g_, ideal_, s, params, aligned).total;
}

LayoutState Solver::project_feasible(const LayoutState& desired) {
    const std::size_t n = g_.size();
    std::vector<double> weights;
    if (options_.pin) {
        weights.assign(n, 1.0);
        weights[options_.pin->node] = kPinWeight;
    }
    ConstraintList work = constraints_;
    const std::size_t own = work.size();
    const NonOverlap mode = options_.non_overlap;
    EqualityClasses same_x(n, constraints_, Dim::X), same_y(n, constraints_, Dim::Y);
    std::set<std::pair<NodeIndex, NodeIndex>> covered;

    // Separation for a pair overlapping at `probe`, oriented by the current layout.
    auto add_overlaps = [&](const LayoutState& probe) {
        bool added = false;
        for (NodeIndex u = 0; u < n; ++u) {
            for (NodeIndex v = u + 1; v < n; ++v) {
                if (covered.count({u, v}) || !boxes_overlap(g_, probe, u, v, mode, options_.tau)) continue;
                bool x_ok = !same_x.same(u, v), y_ok = !same_y.same(u, v);
                if (!x_ok && !y_ok) continue;
                double gx = required_separation(g_, u, v, Dim::X, mode, options_.tau);
                double gy = required_separation(g_, u, v, Dim::Y, mode, options_.tau);
                double need_x = gx - std::abs(x_.x[u] - x_.x[v]);
                double need_y = gy - std::abs(x_.y[u] - x_.y[v]);
                Dim dim = !y_ok || (x_ok && need_x <= need_y) ? Dim::X : Dim::Y;
                const auto& ref = x_.coords(dim);
                bool u_first = ref[u] <= ref[v];
                SeparationConstraint c;
                c.dim = dim;
                c.left = u_first ? u : v;
                c.right = u_first ? v : u;
                c.gap = dim == Dim::X ? gx : gy;
                work.push_back(c);
                covered.insert({u, v});
                added = true;
            }
        }
        return added;
    };

    LayoutState p = desired;
    for (int pass = 0; pass < kMaxOverlapPasses; ++pass) {
        bool added = mode != NonOverlap::Off && add_overlaps(p);
        if (pass > 0 && !added) break;
        for (Dim dim : {Dim::X, Dim::Y}) p.coords(dim) = project(dim, desired.coords(dim), work, weights);
        if (mode == NonOverlap::Off) break;
    }
    for (std::size_t i = 0; i < own; ++i) {
        if (constraints_[i].satisfiable() && !work[i].satisfiable()) rejected_ = true;
        constraints_[i].state = work[i].state;
        constraints_[i].multiplier = work[i].multiplier;
    }
    return p;
}

bool Solver::step() {
    if (converged_) return true;
    const std::size_t n = g_.size();
    StressParams params = options_.stress;
    if (options_.pin) params.grid_exempt = options_.pin->node;
    AlignedEdges aligned;
    if (params.k_en != 0.0) aligned = detect_aligned_edges(g_, x_);

    Gradient grad;
    f_ = goal_and_gradient(g_, ideal_, x_, params, aligned, grad).total;
    double gg = 0.0;
    for (double c : grad) gg += c * c;

    LayoutState desired = x_;
    if (gg > 0.0) {
        if (auto t = step_size(grad, hessian_product(g_, ideal_, x_, params, aligned, grad))) {
            for (std::size_t i = 0; i < n; ++i) {
                desired.x[i] -= *t * grad[i];
                desired.y[i] -= *t * grad[n + i];
            }
        } else {
            // Non-positive curvature: fixed-length move along -g, halved until the goal does not rise.
            double len = 0.1 * ideal_.ideal_edge(), norm = std::sqrt(gg);
            for (int k = 0; k <= kMaxHalvings; ++k, len *= 0.5) {
                LayoutState cand = x_;
                for (std::size_t i = 0; i < n; ++i) {
                    cand.x[i] -= len * grad[i] / norm;
                    cand.y[i] -= len * grad[n + i] / norm;
                }
                if (evaluate(cand, aligned) <= f_) {
                    desired = std::move(cand);
                    break;
                }
            }
        }
    }
    if (options_.pin) desired.set(options_.pin->node, options_.pin->at);

    const bool restoring = !feasible_ || !pin_settled();
    LayoutState p = project_feasible(desired);
    LayoutState next;
    double f_next;
    if (restoring) {
        next = std::move(p);
        f_next = evaluate(next, aligned);
    } else {
        bool accepted = false;
        double t = 1.0;
        const double slack = 1e-9 * std::max(1.0, std::abs(f_));
        for (int k = 0; k <= kMaxHalvings; ++k, t *= 0.5) {
            LayoutState cand = t == 1.0 ? p : blend(x_, p, t);
            double fc = evaluate(cand, aligned);
            if (fc <= f_ + slack) {
                if (t < 1.0 && options_.non_overlap != NonOverlap::Off &&
                    count_overlaps(g_, cand, options_.non_overlap, options_.tau) > 0)
                    continue;
                next = std::move(cand);
                f_next = fc;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            ++iterations_;
            converged_ = true;
            return true;
        }
    }
    double before = f_;
    x_ = std::move(next);
    f_ = f_next;
    feasible_ = true;
    ++iterations_;
    if (!restoring && before - f_ <= options_.tolerance * std::abs(before)) converged_ = true;
    if (iterations_ >= options_.max_iterations) converged_ = true;
    return converged_;
}

SolveResult Solver::run() {
    while (!step()) {
    }
    return {x_, iterations_, converged_, f_, rejected_};
}

SolveResult cfdl(const Graph& g, const IdealDistances& ideal, ConstraintList& constraints, const LayoutState& start,
                 const SolveOptions& options) {
    Solver solver(g, ideal, constraints, start, options);
    return solver.run();
}

bool constraints_hold(const ConstraintList& constraints, const LayoutState& s, double tol) {
    for (const auto& c : constraints) {
        if (!c.satisfiable()) continue;
        double v = c.violation(s.coords(c.dim));
        if (c.equality() ? std::abs(v) > tol : v > tol) return false;
    }
    return true;
}

const char* to_string(Mode m) {
    switch (m) {
        case Mode::FD: return "FD";
        case Mode::NS: return "NS";
        case Mode::GS: return "GS";
        case Mode::NS_GS: return "NS_GS";
        case Mode::ACA: return "ACA";
        case Mode::ACA_GS: return "ACA_GS";
    }
    return "?";
}

std::optional<Mode> parse_mode(std::string_view name) {
    std::string up(name);
    for (char& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (up == "ACA+GS") up = "ACA_GS";
    if (up == "NS+GS") up = "NS_GS";
    for (Mode m : kAllModes)
        if (up == to_string(m)) return m;
    return std::nullopt;
}

bool uses_grid(Mode m) { return m == Mode::GS || m == Mode::NS_GS || m == Mode::ACA_GS; }
bool uses_aca(Mode m) { return m == Mode::ACA || m == Mode::ACA_GS; }

}  // namespace gridlay
