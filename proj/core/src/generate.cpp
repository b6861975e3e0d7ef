#include "gridlay/generate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

namespace gridlay {

Graph random_graph(const RandomGraphSpec& spec) {
    std::mt19937_64 rng(spec.seed);
    const std::size_t n = spec.nodes;
    std::vector<Node> nodes;
    std::uniform_int_distribution<int> width(20, 40), height(15, 25);
    for (std::size_t i = 0; i < n; ++i) {
        nodes.push_back({spec.prefix + std::to_string(i), double(width(rng)), double(height(rng)), {}});
    }
    std::set<std::pair<std::size_t, std::size_t>> chosen;
    std::vector<std::pair<std::string, std::string>> edges;
    auto add = [&](std::size_t a, std::size_t b) {
        if (a == b || !chosen.emplace(std::min(a, b), std::max(a, b)).second) return false;
        edges.emplace_back(nodes[a].id, nodes[b].id);
        return true;
    };
    for (std::size_t i = 1; i < n; ++i) {
        std::uniform_int_distribution<std::size_t> parent(0, i - 1);
        add(parent(rng), i);
    }
    const std::size_t max_edges = n * (n - 1) / 2;
    std::size_t target = static_cast<std::size_t>(std::llround(spec.density * static_cast<double>(n)));
    target = std::min(max_edges, std::max(target, n == 0 ? 0 : n - 1));
    if (n > 1) {
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        while (edges.size() < target) add(pick(rng), pick(rng));
    }
    return Graph(std::move(nodes), edges);
}

std::vector<NamedGraph> random_corpus(std::size_t count, std::uint64_t seed, std::size_t min_nodes,
                                      std::size_t max_nodes) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> size(min_nodes, max_nodes);
    std::uniform_real_distribution<double> density(1.0, 1.5);
    std::vector<NamedGraph> out;
    for (std::size_t k = 0; k < count; ++k) {
        RandomGraphSpec spec;
        spec.nodes = size(rng);
        spec.density = density(rng);
        spec.seed = rng();
        char name[32];
        std::snprintf(name, sizeof name, "rand-%03zu", k);
        out.push_back({name, random_graph(spec)});
    }
    return out;
}

}  // namespace gridlay
