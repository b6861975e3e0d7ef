#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridlay/graph.hpp"

namespace gridlay {

enum class Relation { Inequality, Equality };
enum class Priority { Definite, Tentative };
enum class ConstraintState { Satisfiable, Unsatisfiable };

/// left + gap <= right (or ==) on one coordinate.
struct SeparationConstraint {
    Dim dim = Dim::X;
    NodeIndex left = 0;
    NodeIndex right = 0;
    double gap = 0.0;
    Relation relation = Relation::Inequality;
    Priority priority = Priority::Definite;
    ConstraintState state = ConstraintState::Satisfiable;
    /// Lagrange multiplier from the last projection; zero when inactive.
    double multiplier = 0.0;

    bool equality() const noexcept { return relation == Relation::Equality; }
    bool tentative() const noexcept { return priority == Priority::Tentative; }
    bool satisfiable() const noexcept { return state == ConstraintState::Satisfiable; }
    bool alignment() const noexcept { return equality() && gap == 0.0; }
    /// pos(left) + gap - pos(right): positive means an inequality is violated,
    /// any nonzero value violates an equality.
    double violation(std::span<const double> pos) const;
};

using ConstraintList = std::vector<SeparationConstraint>;

/// Definite constraints that cannot all hold. `cycle` indexes the input list.
class DefiniteConflict : public Error {
  public:
    DefiniteConflict(std::vector<std::size_t> cycle, const std::string& what)
        : Error(what), cycle_(std::move(cycle)) {}
    const std::vector<std::size_t>& cycle() const noexcept { return cycle_; }

  private:
    std::vector<std::size_t> cycle_;
};

/// Least-squares projection of `desired` onto the satisfiable constraints of
/// `dim` in `constraints`: minimises sum_i weight_i (pos_i - desired_i)^2.
/// Updates multipliers, and marks tentative constraints unsatisfiable when they
/// conflict; throws DefiniteConflict when definite constraints alone conflict.
/// `weights` may be empty (all ones).
std::vector<double> project(Dim dim, std::span<const double> desired, ConstraintList& constraints,
                            std::span<const double> weights = {});

/// Index (into `conflict`) of the constraint with the largest |multiplier|,
/// earliest on ties. Throws on an empty set.
std::size_t choose_rejection(std::span<const SeparationConstraint> conflict);
std::size_t choose_rejection(std::span<const SeparationConstraint* const> conflict);

enum class NonOverlap { Off, NodeSizes, Grid };

/// Required centre separation of u and v in `dim` under a non-overlap mode.
double required_separation(const Graph& g, NodeIndex u, NodeIndex v, Dim dim, NonOverlap mode, double tau);

/// Penetration below this counts as touching, not overlapping.
inline constexpr double kContactTolerance = 1e-9;

/// True when the (inflated) boxes of u and v overlap in both dimensions.
bool boxes_overlap(const Graph& g, const LayoutState& s, NodeIndex u, NodeIndex v, NonOverlap mode, double tau);

/// Number of node pairs whose (inflated) boxes overlap.
std::size_t count_overlaps(const Graph& g, const LayoutState& s, NonOverlap mode = NonOverlap::NodeSizes,
                           double tau = 0.0);

/// One definite separation per currently overlapping pair, in the dimension
/// needing the least displacement (ties go to x).
ConstraintList generate_non_overlap(const Graph& g, const LayoutState& s, NonOverlap mode, double tau = 0.0);

/// Union-find over the satisfiable equality constraints of one dimension.
class EqualityClasses {
  public:
    EqualityClasses(std::size_t n, std::span<const SeparationConstraint> constraints, Dim dim);

    NodeIndex root(NodeIndex v) const;
    bool same(NodeIndex a, NodeIndex b) const { return root(a) == root(b); }

  private:
    mutable std::vector<NodeIndex> parent_;
};

/// Order relations entailed by the satisfiable constraints of one dimension,
/// evaluated by longest paths in the difference-constraint graph.
class OrderEntailment {
  public:
    OrderEntailment(std::size_t n, std::span<const SeparationConstraint> constraints, Dim dim);

    /// Tightest entailed lower bound on pos(b) - pos(a), if any.
    std::optional<double> lower_bound(NodeIndex a, NodeIndex b) const;
    /// pos(a) < pos(b) is entailed.
    bool less(NodeIndex a, NodeIndex b) const;

  private:
    struct Arc {
        NodeIndex to;
        double weight;
    };
    std::size_t n_;
    std::vector<std::vector<Arc>> arcs_;
    mutable std::vector<std::vector<double>> cache_;
    mutable std::vector<bool> cached_;
};

/// Compass direction of v relative to u; north means smaller y.
enum class Direction { N, S, E, W };

const char* to_string(Direction d);
/// Dimension whose coordinates are equalised by an alignment in direction d.
Dim alignment_dim(Direction d);
/// Dimension carrying the ordering separation.
inline Dim separation_dim(Direction d) { return other(alignment_dim(d)); }

/// An alignment equality plus an ordering separation over one edge.
struct SeparatedAlignment {
    NodeIndex u = 0;
    NodeIndex v = 0;
    Direction dir = Direction::E;
    SeparationConstraint alignment;
    SeparationConstraint separation;

    /// Node with the smaller coordinate in the separation dimension.
    NodeIndex low() const { return separation.left; }
    NodeIndex high() const { return separation.right; }
};

/// Builds SA(u,v,dir). Both member constraints are tentative and are written
/// low-to-high, so SA(u,v,S) and SA(v,u,N) produce identical pairs.
SeparatedAlignment make_separated_alignment(const Graph& g, NodeIndex u, NodeIndex v, Direction dir);

/// Appends the alignment then the separation, both tentative.
void apply_separated_alignment(const SeparatedAlignment& sa, ConstraintList& constraints);
/// Removes the most recently appended copy of sa's two constraints.
void remove_separated_alignment(const SeparatedAlignment& sa, ConstraintList& constraints);

bool same_constraint(const SeparationConstraint& a, const SeparationConstraint& b);

}  // namespace gridlay
