#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "gridlay/graph.hpp"

namespace gridlay {

/// Snap penalty q_sigma(z): (z/sigma)^2 inside the closed radius, zero outside.
double q(double sigma, double z);
/// First derivative of q inside the radius (2z/sigma^2), zero outside.
double q_grad(double sigma, double z);
/// Second derivative of q inside the radius (2/sigma^2), zero outside.
double q_hess(double sigma, double z);

struct StressParams {
    double k_ns = 0.0;
    double k_gs = 0.0;
    double k_en = 0.0;
    /// Snap distance used by every snap term unless `per_pair_snap` is set.
    double sigma = 25.0;
    /// Edge snap radii become ((w_u+w_v)/2, (h_u+h_v)/2) per edge.
    bool per_pair_snap = false;
    std::optional<GridSpec> grid;
    /// Node excluded from the grid term (a node being dragged).
    std::optional<NodeIndex> grid_exempt;
};

/// Builds params for a grid recipe: sigma = tau/2.
StressParams grid_params(const GridSpec& grid, double k_gs, double k_en, double k_ns = 0.0);

/// Edge indices whose endpoints share an x (vertical) or y (horizontal) coordinate.
struct AlignedEdges {
    std::vector<std::size_t> vertical;
    std::vector<std::size_t> horizontal;
};

AlignedEdges detect_aligned_edges(const Graph& g, const LayoutState& s, double tolerance = 1e-9);

struct GoalBreakdown {
    double p_stress = 0.0;
    double ns_stress = 0.0;
    double gs_stress = 0.0;
    double en_sep = 0.0;
    double total = 0.0;
};

/// Gradient laid out as [x_0..x_{n-1}, y_0..y_{n-1}].
using Gradient = std::vector<double>;

// Individual terms. When `grad` is non-empty (size 2n) the term's gradient is
// added into it.
double p_stress(const Graph& g, const IdealDistances& d, const LayoutState& s, std::span<double> grad = {});
double ns_stress(const Graph& g, const LayoutState& s, const StressParams& params, std::span<double> grad = {});
double gs_stress(const Graph& g, const LayoutState& s, const StressParams& params, std::span<double> grad = {});
double en_sep(const Graph& g, const LayoutState& s, const AlignedEdges& aligned, double sigma,
              std::span<double> grad = {});

/// Convenience overloads matching the usual call shapes.
double ns_stress(const Graph& g, const LayoutState& s, double sigma);
double gs_stress(const Graph& g, const LayoutState& s, const GridSpec& grid, double sigma);

GoalBreakdown goal(const Graph& g, const IdealDistances& d, const LayoutState& s, const StressParams& params,
                   const AlignedEdges& aligned);
GoalBreakdown goal_and_gradient(const Graph& g, const IdealDistances& d, const LayoutState& s,
                                const StressParams& params, const AlignedEdges& aligned, Gradient& grad);

/// v^T H v for the goal Hessian at s, assembled term by term without forming H.
double hessian_product(const Graph& g, const IdealDistances& d, const LayoutState& s, const StressParams& params,
                       const AlignedEdges& aligned, std::span<const double> v);

// Per-term Hessian products, used by tests.
double p_stress_hessian_product(const Graph& g, const IdealDistances& d, const LayoutState& s,
                                std::span<const double> v);
double ns_stress_hessian_product(const Graph& g, const LayoutState& s, const StressParams& params,
                                 std::span<const double> v);
double gs_stress_hessian_product(const Graph& g, const LayoutState& s, const StressParams& params,
                                 std::span<const double> v);
double en_sep_hessian_product(const Graph& g, const LayoutState& s, const AlignedEdges& aligned, double sigma,
                              std::span<const double> v);

/// Newton step length g^T g / g^T H g along -g. Empty when the curvature is
/// not positive (the caller falls back to a guarded line search) or when g is zero.
std::optional<double> step_size(std::span<const double> gradient, double g_h_g);

}  // namespace gridlay
