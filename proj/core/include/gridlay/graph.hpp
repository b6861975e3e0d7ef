#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace gridlay {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed input document.
class ParseError : public Error {
  public:
    using Error::Error;
};

/// Structurally invalid graph (duplicate id, dangling endpoint, bad size, ...).
class ValidationError : public Error {
  public:
    enum class Kind { DuplicateId, DanglingEndpoint, NonpositiveDimension, SelfLoop, DuplicateEdge, UnknownNode };

    ValidationError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

  private:
    Kind kind_;
};

enum class Dim { X = 0, Y = 1 };

inline Dim other(Dim d) { return d == Dim::X ? Dim::Y : Dim::X; }

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

struct Node {
    std::string id;
    double w = 1.0;
    double h = 1.0;
    std::vector<std::string> tags;
};

using NodeIndex = std::size_t;
using Edge = std::pair<NodeIndex, NodeIndex>;

/// Immutable graph: boxes plus undirected edges, addressed by dense indices.
class Graph {
  public:
    Graph() = default;

    /// Validates and builds. Edges are given by node id.
    Graph(std::vector<Node> nodes, const std::vector<std::pair<std::string, std::string>>& edges);

    std::size_t size() const noexcept { return nodes_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }

    const Node& node(NodeIndex i) const { return nodes_.at(i); }
    std::span<const Node> nodes() const noexcept { return nodes_; }
    std::span<const Edge> edges() const noexcept { return edges_; }

    /// Neighbours of i in edge order.
    std::span<const NodeIndex> neighbours(NodeIndex i) const { return adjacency_.at(i); }
    std::size_t degree(NodeIndex i) const { return adjacency_.at(i).size(); }
    bool adjacent(NodeIndex a, NodeIndex b) const;

    /// Throws ValidationError(UnknownNode) for an unknown id.
    NodeIndex index_of(std::string_view id) const;
    bool contains(std::string_view id) const;

    /// Half-sum of widths / heights: the centre distance at which two boxes touch.
    double alpha(NodeIndex u, NodeIndex v) const { return (nodes_[u].w + nodes_[v].w) / 2.0; }
    double beta(NodeIndex u, NodeIndex v) const { return (nodes_[u].h + nodes_[v].h) / 2.0; }
    double half_extent_sum(NodeIndex u, NodeIndex v, Dim d) const { return d == Dim::X ? alpha(u, v) : beta(u, v); }

  private:
    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
    std::vector<std::vector<NodeIndex>> adjacency_;
    std::unordered_map<std::string, NodeIndex> index_;
};

/// Node centres, one entry per node in graph order.
struct LayoutState {
    std::vector<double> x;
    std::vector<double> y;

    LayoutState() = default;
    explicit LayoutState(std::size_t n) : x(n, 0.0), y(n, 0.0) {}

    std::size_t size() const noexcept { return x.size(); }
    Point at(NodeIndex i) const { return {x[i], y[i]}; }
    void set(NodeIndex i, Point p) {
        x[i] = p.x;
        y[i] = p.y;
    }
    std::vector<double>& coords(Dim d) { return d == Dim::X ? x : y; }
    const std::vector<double>& coords(Dim d) const { return d == Dim::X ? x : y; }
    bool finite() const;

    friend bool operator==(const LayoutState&, const LayoutState&) = default;
};

struct GridSpec {
    double tau = 50.0;

    explicit GridSpec(double spacing = 50.0);
};

/// Graph-theoretic ideal distances, scaled by the ideal edge length.
class IdealDistances {
  public:
    static constexpr double kUnreachable = std::numeric_limits<double>::infinity();

    IdealDistances() = default;
    IdealDistances(std::size_t n, double ideal_edge) : n_(n), ideal_edge_(ideal_edge), d_(n * n, kUnreachable) {}

    std::size_t size() const noexcept { return n_; }
    double ideal_edge() const noexcept { return ideal_edge_; }
    double operator()(NodeIndex u, NodeIndex v) const { return d_[u * n_ + v]; }
    double& at(NodeIndex u, NodeIndex v) { return d_[u * n_ + v]; }
    bool reachable(NodeIndex u, NodeIndex v) const { return d_[u * n_ + v] != kUnreachable; }

  private:
    std::size_t n_ = 0;
    double ideal_edge_ = 100.0;
    std::vector<double> d_;
};

enum class GraphFormat { Json };

/// Parses a graph document. Node order follows the document.
Graph load_graph(std::istream& source, GraphFormat format = GraphFormat::Json);
Graph load_graph_string(std::string_view text, GraphFormat format = GraphFormat::Json);
Graph load_graph_file(const std::string& path);

/// Canonical document form accepted by load_graph.
std::string serialize_graph(const Graph& g);

/// `{"positions":{id:[x,y]}}`
std::string serialize_positions(const Graph& g, const LayoutState& s);
LayoutState parse_positions(const Graph& g, std::string_view text);

/// BFS hop counts times `ideal_edge`; unreachable pairs stay infinite.
IdealDistances shortest_path_distances(const Graph& g, double ideal_edge);

/// Nearest point of the lattice tau*Z^2. Per-axis ties go to the smaller
/// magnitude, and between equal magnitudes to the nonnegative value.
Point closest_grid_point(Point p, const GridSpec& grid);
double closest_grid_coordinate(double z, double tau);

}  // namespace gridlay
