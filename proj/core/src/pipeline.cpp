#include "gridlay/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <random>

namespace gridlay {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

SolveOptions base_options(const PipelineOptions& opts) {
    SolveOptions s;
    s.tau = opts.tau;
    s.tolerance = opts.tolerance;
    s.max_iterations = opts.max_iterations;
    return s;
}

}  // namespace

LayoutState random_layout(std::size_t n, double ideal_edge, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(0.0, std::sqrt(static_cast<double>(n)) * ideal_edge);
    LayoutState s(n);
    for (std::size_t i = 0; i < n; ++i) {
        s.x[i] = coord(rng);
        s.y[i] = coord(rng);
    }
    return s;
}

SolveOptions untangle_options(const PipelineOptions& opts) { return base_options(opts); }

SolveOptions beautify_options(Mode mode, const PipelineOptions& opts) {
    SolveOptions s = base_options(opts);
    StressParams& p = s.stress;
    p.sigma = opts.tau / 2.0;
    switch (mode) {
        case Mode::FD:
        case Mode::ACA:
            s.non_overlap = NonOverlap::NodeSizes;
            break;
        case Mode::NS:
            p.k_ns = opts.k_ns;
            p.k_en = opts.k_en;
            s.non_overlap = NonOverlap::NodeSizes;
            break;
        case Mode::NS_GS:
            p.k_ns = opts.k_ns;
            [[fallthrough]];
        case Mode::GS:
        case Mode::ACA_GS:
            p.grid = GridSpec(opts.tau);
            p.k_gs = opts.k_gs;
            p.k_en = opts.k_en;
            s.non_overlap = NonOverlap::Grid;
            break;
    }
    return s;
}

PipelineResult beautify(const Graph& g, const PipelineOptions& opts, const LayoutState& untangled) {
    PipelineResult out;
    out.phase1 = untangled;
    IdealDistances d = shortest_path_distances(g, opts.effective_ideal_edge());
    ConstraintList constraints = opts.user;
    const auto t0 = Clock::now();
    LayoutState layout = untangled;
    if (uses_aca(opts.mode)) {
        // ACA_GS aligns exactly as ACA does (at dL = tau); grid spacing comes in the grid phase.
        SolveOptions aca_opts = beautify_options(Mode::ACA, opts);
        const auto ta = Clock::now();
        out.aca = adapt_const_align(g, d, constraints, layout, aca_opts, opts.aca);
        out.timings.emplace_back("aca", seconds_since(ta));
        constraints = out.aca->constraints;
        layout = out.aca->layout;
        if (opts.mode == Mode::ACA_GS) {
            // Alignments that survived are kept as definite constraints for the grid phase.
            ConstraintList kept;
            for (auto c : constraints) {
                if (!c.satisfiable()) continue;
                c.priority = Priority::Definite;
                kept.push_back(c);
            }
            constraints = std::move(kept);
        }
    }
    SolveOptions final_opts = beautify_options(opts.mode, opts);
    out.layout = cfdl(g, d, constraints, layout, final_opts).layout;
    out.constraints = std::move(constraints);
    out.timings.emplace_back("phase2", seconds_since(t0));
    return out;
}

PipelineResult run_pipeline(const Graph& g, const PipelineOptions& opts) {
    const auto t0 = Clock::now();
    const double dl = opts.effective_ideal_edge();
    LayoutState initial = random_layout(g.size(), dl, opts.seed);
    IdealDistances d = shortest_path_distances(g, dl);
    ConstraintList constraints = opts.user;
    LayoutState untangled = cfdl(g, d, constraints, initial, untangle_options(opts)).layout;
    double phase1 = seconds_since(t0);
    PipelineResult out = beautify(g, opts, untangled);
    out.initial = std::move(initial);
    out.timings.insert(out.timings.begin(), {"phase1", phase1});
    out.timings.emplace_back("total", seconds_since(t0));
    return out;
}

}  // namespace gridlay
