#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gridlay/aca.hpp"
#include "gridlay/constraints.hpp"
#include "gridlay/graph.hpp"
#include "gridlay/solver.hpp"

namespace gridlay {

struct PipelineOptions {
    Mode mode = Mode::FD;
    double tau = 50.0;
    double ideal_edge = 100.0;
    std::uint64_t seed = 1;
    double k_ns = 1.0;
    double k_gs = 1000.0;
    double k_en = 10.0;
    CostModel aca;
    /// Definite constraints supplied by the user, kept in every phase.
    ConstraintList user;
    double tolerance = 1e-4;
    int max_iterations = 10000;

    /// Ideal edge length in effect: tau for grid modes.
    double effective_ideal_edge() const { return uses_grid(mode) ? tau : ideal_edge; }
};

struct PipelineResult {
    LayoutState initial;
    LayoutState phase1;
    LayoutState layout;
    ConstraintList constraints;
    std::optional<AcaResult> aca;
    std::vector<std::pair<std::string, double>> timings;
};

/// Uniform random positions in a square of side sqrt(n) * ideal_edge.
LayoutState random_layout(std::size_t n, double ideal_edge, std::uint64_t seed);

/// Solver settings for the untangling phase: plain P-stress, no snapping, no non-overlap.
SolveOptions untangle_options(const PipelineOptions& opts);
/// Solver settings for the beautification phase of `mode`.
SolveOptions beautify_options(Mode mode, const PipelineOptions& opts);

/// Random start, untangle, then beautify according to opts.mode.
PipelineResult run_pipeline(const Graph& g, const PipelineOptions& opts);

/// Beautification alone, from a given untangled layout.
PipelineResult beautify(const Graph& g, const PipelineOptions& opts, const LayoutState& untangled);

}  // namespace gridlay
