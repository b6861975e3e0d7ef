#include <gtest/gtest.h>

#include "gridlay/graph.hpp"
#include "support/oracles.hpp"

using namespace gridlay;

namespace {

const char* kTriangle = R"({
  "nodes": [{"id": "a", "w": 30, "h": 20, "tags": ["t"]}, {"id": "b", "w": 10, "h": 10}, {"id": "c", "w": 10, "h": 40}],
  "edges": [["a", "b"], ["b", "c"]]
})";

ValidationError::Kind validation_kind(const std::string& text) {
    try {
        load_graph_string(text);
    } catch (const ValidationError& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no validation error for " << text;
    return ValidationError::Kind::UnknownNode;
}

}  // namespace

TEST(Graph, LoadsNodesEdgesAndTags) {
    Graph g = load_graph_string(kTriangle);
    ASSERT_EQ(g.size(), 3u);
    EXPECT_EQ(g.edge_count(), 2u);
    EXPECT_EQ(g.node(0).tags, std::vector<std::string>{"t"});
    EXPECT_EQ(g.degree(1), 2u);
    EXPECT_TRUE(g.adjacent(2, 1));
    EXPECT_FALSE(g.adjacent(0, 2));
    EXPECT_DOUBLE_EQ(g.alpha(0, 1), 20.0);
    EXPECT_DOUBLE_EQ(g.beta(1, 2), 25.0);
    EXPECT_EQ(g.index_of("c"), 2u);
}

TEST(Graph, RoundTripsThroughSerialisation) {
    Graph g = load_graph_string(kTriangle);
    Graph h = load_graph_string(serialize_graph(g));
    ASSERT_EQ(h.size(), g.size());
    for (NodeIndex i = 0; i < g.size(); ++i) {
        EXPECT_EQ(h.node(i).id, g.node(i).id);
        EXPECT_EQ(h.node(i).w, g.node(i).w);
        EXPECT_EQ(h.node(i).tags, g.node(i).tags);
    }
    ASSERT_EQ(h.edge_count(), g.edge_count());
    for (std::size_t e = 0; e < g.edge_count(); ++e) EXPECT_EQ(h.edges()[e], g.edges()[e]);
}

TEST(Graph, RejectsStructuralErrors) {
    using K = ValidationError::Kind;
    EXPECT_EQ(validation_kind(R"({"nodes":[{"id":"a","w":1,"h":1},{"id":"a","w":1,"h":1}]})"), K::DuplicateId);
    EXPECT_EQ(validation_kind(R"({"nodes":[{"id":"a","w":1,"h":1}],"edges":[["a","z"]]})"), K::DanglingEndpoint);
    EXPECT_EQ(validation_kind(R"({"nodes":[{"id":"a","w":0,"h":1}]})"), K::NonpositiveDimension);
    EXPECT_EQ(validation_kind(R"({"nodes":[{"id":"a","w":1,"h":-2}]})"), K::NonpositiveDimension);
    EXPECT_EQ(validation_kind(R"({"nodes":[{"id":"a","w":1,"h":1}],"edges":[["a","a"]]})"), K::SelfLoop);
    EXPECT_EQ(
        validation_kind(R"({"nodes":[{"id":"a","w":1,"h":1},{"id":"b","w":1,"h":1}],"edges":[["a","b"],["b","a"]]})"),
        K::DuplicateEdge);
}

TEST(Graph, RejectsMalformedDocuments) {
    EXPECT_THROW(load_graph_string("{"), ParseError);
    EXPECT_THROW(load_graph_string(R"({"edges": []})"), ParseError);
    EXPECT_THROW(load_graph_string(R"({"nodes":[{"id":"a","w":"big","h":1}]})"), ParseError);
    EXPECT_THROW(load_graph_string(R"({"nodes":[{"id":"a","w":1,"h":1}],"edges":[["a"]]})"), ParseError);
}

TEST(Graph, PositionsRoundTrip) {
    Graph g = load_graph_string(kTriangle);
    LayoutState s(3);
    s.set(0, {1.5, -2});
    s.set(1, {1e6, 0.125});
    s.set(2, {-7, 3});
    EXPECT_EQ(parse_positions(g, serialize_positions(g, s)), s);
    EXPECT_THROW(parse_positions(g, R"({"positions":{"a":[0,0]}})"), ParseError);
    EXPECT_THROW(parse_positions(g, R"({"positions":{"a":[0,0],"b":[0,0],"c":[0,0],"q":[1,1]}})"),
                 ValidationError);
}

TEST(Graph, IdealDistancesAreHopCountsTimesEdgeLength) {
    // path 0-1-2-3 plus isolated 4
    Graph g = oracle::make_graph(5, {{0, 1}, {1, 2}, {2, 3}});
    IdealDistances d = shortest_path_distances(g, 100.0);
    EXPECT_DOUBLE_EQ(d(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(d(0, 3), 300.0);
    EXPECT_DOUBLE_EQ(d(3, 1), 200.0);
    EXPECT_FALSE(d.reachable(0, 4));
    EXPECT_TRUE(d.reachable(4, 4));
}

TEST(Grid, ClosestGridPointTiesGoTowardZero) {
    GridSpec grid(50.0);
    EXPECT_EQ(closest_grid_point({24.9, 26}, grid), (Point{0, 50}));
    EXPECT_EQ(closest_grid_point({25, -25}, grid), (Point{0, 0}));
    EXPECT_EQ(closest_grid_point({75, -75}, grid), (Point{50, -50}));
    EXPECT_EQ(closest_grid_point({-0.1, 0.0}, grid), (Point{0, 0}));
    EXPECT_FALSE(std::signbit(closest_grid_point({-0.1, -3}, grid).x));
    EXPECT_THROW(GridSpec(0.0), Error);
}
