#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gridlay/constraints.hpp"
#include "gridlay/graph.hpp"
#include "gridlay/stress.hpp"

namespace gridlay {

struct SolveOptions {
    StressParams stress;
    NonOverlap non_overlap = NonOverlap::Off;
    /// Separation used by NonOverlap::Grid.
    double tau = 50.0;
    double tolerance = 1e-4;
    int max_iterations = 10000;
    /// A node held at a fixed point (dragging).
    struct Pin {
        NodeIndex node;
        Point at;
    };
    std::optional<Pin> pin;
};

struct SolveResult {
    LayoutState layout;
    int iterations = 0;
    bool converged = false;
    double goal = 0.0;
    /// A tentative constraint was marked unsatisfiable during the solve.
    bool rejected = false;
};

/// Gradient-projection solver. One step() computes the Newton step along the
/// negative gradient, projects the result onto the constraints (plus non-overlap
/// constraints generated on demand) and line-searches between the two.
class Solver {
  public:
    Solver(const Graph& g, const IdealDistances& ideal, ConstraintList& constraints, LayoutState start,
           SolveOptions options);

    /// One iteration. Returns true once converged.
    bool step();
    SolveResult run();

    const LayoutState& layout() const noexcept { return x_; }
    double goal_value() const noexcept { return f_; }
    int iterations() const noexcept { return iterations_; }
    bool converged() const noexcept { return converged_; }
    bool rejected() const noexcept { return rejected_; }
    SolveOptions& options() noexcept { return options_; }
    /// Resets the convergence state after the options or constraints changed.
    void restart();

  private:
    double evaluate(const LayoutState& s, const AlignedEdges& aligned) const;
    LayoutState project_feasible(const LayoutState& desired);
    bool pin_settled() const;

    const Graph& g_;
    const IdealDistances& ideal_;
    ConstraintList& constraints_;
    LayoutState x_;
    SolveOptions options_;
    double f_ = 0.0;
    int iterations_ = 0;
    bool converged_ = false;
    bool feasible_ = false;
    bool rejected_ = false;
};

/// Constrained force-directed layout: runs a Solver to convergence.
SolveResult cfdl(const Graph& g, const IdealDistances& ideal, ConstraintList& constraints, const LayoutState& start,
                 const SolveOptions& options);

/// True when every satisfiable constraint holds within `tol`.
bool constraints_hold(const ConstraintList& constraints, const LayoutState& s, double tol = 1e-9);

enum class Mode { FD, NS, GS, NS_GS, ACA, ACA_GS };

const char* to_string(Mode m);
std::optional<Mode> parse_mode(std::string_view name);
bool uses_grid(Mode m);
bool uses_aca(Mode m);
inline constexpr Mode kAllModes[] = {Mode::FD, Mode::NS, Mode::GS, Mode::NS_GS, Mode::ACA, Mode::ACA_GS};

}  // namespace gridlay
