#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "gridlay/constraints.hpp"
#include "gridlay/graph.hpp"
#include "gridlay/metrics.hpp"
#include "gridlay/solver.hpp"

namespace gridlay {

enum class CostBasis { StressChange, Obliqueness };
enum class BendRule { Degree2, NonLeafDegree2 };

struct CostModel {
    CostBasis basis = CostBasis::StressChange;
    BendRule bend = BendRule::Degree2;
    double bend_cost = 1000.0;
    MFunction m;
};

inline constexpr double kNever = std::numeric_limits<double>::infinity();

/// Alignment classes per dimension plus adjacency. h_aligned means equal y,
/// v_aligned means equal x.
class AlignFlags {
  public:
    AlignFlags(const Graph& g, const ConstraintList& constraints);

    bool h_aligned(NodeIndex a, NodeIndex b) const { return root(Dim::Y, a) == root(Dim::Y, b); }
    bool v_aligned(NodeIndex a, NodeIndex b) const { return root(Dim::X, a) == root(Dim::X, b); }
    /// Equal coordinate in `dim`.
    bool aligned(Dim dim, NodeIndex a, NodeIndex b) const { return root(dim, a) == root(dim, b); }
    bool adjacent(NodeIndex a, NodeIndex b) const { return g_->adjacent(a, b); }

    /// Merges the classes joined by sa's alignment.
    void update(const SeparatedAlignment& sa);
    NodeIndex root(Dim dim, NodeIndex v) const;
    std::size_t size() const noexcept { return parent_[0].size(); }

  private:
    const Graph* g_;
    mutable std::vector<NodeIndex> parent_[2];
};

/// Would SA(u,v,dir) make two edges collinear with overlapping extent? Order
/// relations come from the constraints where entailed and from `s` otherwise.
bool creates_coincidence(const AlignFlags& flags, const Graph& g, const ConstraintList& constraints,
                         const LayoutState& s, NodeIndex u, NodeIndex v, Direction dir);
/// Same, with order relations from a prepared entailment of the separation dimension.
bool creates_coincidence(const AlignFlags& flags, const Graph& g, const OrderEntailment& order, const LayoutState& s,
                         NodeIndex u, NodeIndex v, Direction dir);

/// Local P-stress change when u and v take the mean of their aligned coordinates.
double cost_stress_change(const Graph& g, const IdealDistances& d, const LayoutState& s, NodeIndex u, NodeIndex v,
                          Direction dir);
/// Negated obliqueness; infinite when dir points along the farther axis.
double cost_obliqueness(const LayoutState& s, NodeIndex u, NodeIndex v, Direction dir, const MFunction& m = {});
double bend_penalty(const Graph& g, const AlignFlags& flags, const CostModel& model, NodeIndex u, NodeIndex v,
                    Direction dir);

/// Per (edge, dimension) permission to propose an alignment.
class Eligibility {
  public:
    explicit Eligibility(std::size_t edges) : ok_(2 * edges, true) {}
    bool allowed(std::size_t edge, Dim d) const { return ok_[2 * edge + static_cast<int>(d)]; }
    void forbid(std::size_t edge, Dim d) { ok_[2 * edge + static_cast<int>(d)] = false; }

  private:
    std::vector<bool> ok_;
};

struct Candidate {
    SeparatedAlignment sa;
    std::size_t edge = 0;
    double cost = 0.0;
};

std::optional<Candidate> choose_sa(const Graph& g, const IdealDistances& d, const AlignFlags& flags,
                                   const LayoutState& s, const ConstraintList& constraints, const CostModel& model,
                                   const Eligibility& eligible);

struct AcaResult {
    LayoutState layout;
    ConstraintList constraints;
    int selections = 0;  ///< candidates returned by choose_sa
    int applied = 0;
    int rejected = 0;
    std::vector<std::size_t> alignment_history;  ///< aligned-edge count after each selection
};

/// Greedy adaptive alignment: repeatedly applies the cheapest safe separated
/// alignment and re-solves, discarding alignments the solve rejects.
AcaResult adapt_const_align(const Graph& g, const IdealDistances& d, ConstraintList constraints,
                            const LayoutState& start, const SolveOptions& options, const CostModel& model = {});

}  // namespace gridlay
