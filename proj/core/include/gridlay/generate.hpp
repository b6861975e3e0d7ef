#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridlay/graph.hpp"

namespace gridlay {

struct RandomGraphSpec {
    std::size_t nodes = 20;
    /// Edges per node; the edge count is round(density * nodes), at least nodes - 1.
    double density = 1.25;
    std::uint64_t seed = 1;
    std::string prefix = "v";
};

/// Connected random graph: a random spanning tree plus uniformly drawn extra
/// edges. Node boxes are 20-40 wide and 15-25 high.
Graph random_graph(const RandomGraphSpec& spec);

struct NamedGraph {
    std::string name;
    Graph graph;
};

/// `count` graphs with sizes drawn from [min_nodes, max_nodes] and densities
/// from [1.0, 1.5], named rand-000, rand-001, ...
std::vector<NamedGraph> random_corpus(std::size_t count, std::uint64_t seed, std::size_t min_nodes = 10,
                                      std::size_t max_nodes = 244);

}  // namespace gridlay
