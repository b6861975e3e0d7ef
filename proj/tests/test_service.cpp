#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <mutex>

#include "gridlay/service.hpp"

using namespace gridlay;
using namespace gridlay::service;

namespace {

Json graph_doc(std::initializer_list<const char*> ids, std::initializer_list<std::pair<const char*, const char*>> edges,
               double w = 30, double h = 20) {
    Json g = {{"nodes", Json::array()}, {"edges", Json::array()}};
    for (const char* id : ids) g["nodes"].push_back({{"id", id}, {"w", w}, {"h", h}});
    for (auto [a, b] : edges) g["edges"].push_back({a, b});
    return g;
}

Json load_msg(const Json& graph, const Json& positions, const char* mode, double tau = 50) {
    return {{"t", "load"}, {"graph", graph}, {"positions", positions}, {"mode", mode}, {"tau", tau}};
}

Json drag_move(double x, double y) { return {{"t", "drag_move"}, {"x", x}, {"y", y}}; }

bool has_error(const std::vector<Json>& events) {
    for (const auto& e : events)
        if (e["t"] == "error") return true;
    return false;
}

Point pos(const Session& s, const char* id) { return s.layout().at(s.graph().index_of(id)); }

}  // namespace

TEST(Session, MalformedMessagesLeaveStateAlone) {
    Session s;
    EXPECT_TRUE(has_error(s.handle_text("{not json")));
    EXPECT_TRUE(has_error(s.handle(Json{{"t", "drag_start"}, {"id", "a"}})));  // nothing loaded
    auto r = s.handle(load_msg(graph_doc({"a", "b"}, {{"a", "b"}}), {{"a", {0, 0}}, {"b", {100, 0}}}, "FD"));
    ASSERT_FALSE(has_error(r));
    EXPECT_EQ(r[0]["t"], "constraints");
    s.settle();
    LayoutState before = s.layout();
    for (const Json& bad : {Json{{"t", "drag_start"}, {"id", "zz"}}, Json{{"t", "nope"}}, Json{{"x", 1}},
                            Json{{"t", "mode"}, {"mode", "XY"}}, Json{{"t", "drag_move"}, {"x", 1}, {"y", 2}},
                            Json{{"t", "constraint_del"}, {"cid", 99}},
                            Json{{"t", "load"}, {"graph", {{"nodes", {{{"id", "a"}, {"w", -1}, {"h", 1}}}}}}}}) {
        EXPECT_TRUE(has_error(s.handle(bad))) << bad.dump();
        EXPECT_FALSE(s.dragged());
        EXPECT_EQ(s.layout().x, before.x);
        EXPECT_EQ(s.graph().size(), 2u);
    }
}

TEST(Session, LoadWithoutPositionsRunsPipeline) {
    Session s;
    Json msg = {{"t", "load"}, {"graph", graph_doc({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}})}, {"mode", "NS"}};
    ASSERT_FALSE(has_error(s.handle(msg)));
    EXPECT_EQ(s.mode(), Mode::NS);
    EXPECT_TRUE(s.layout().finite());
    Json snap = s.snapshot();
    EXPECT_EQ(snap["positions"].size(), 3u);
    EXPECT_EQ(snap["rev"], 1);
}

TEST(Session, GridModeDragEndSnapsToGrid) {
    Session s;
    Json g = graph_doc({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}}, 4, 4);
    s.handle(load_msg(g, {{"a", {0, 10}}, {"b", {30, 0}}, {"c", {40, 0}}}, "GS", 10));
    s.settle();
    ASSERT_FALSE(has_error(s.handle(Json{{"t", "drag_start"}, {"id", "a"}})));
    s.handle(drag_move(17, 9));
    s.settle();
    s.handle(drag_move(23, 4));
    s.settle();
    EXPECT_NEAR(pos(s, "a").x, 23, 1e-6);
    EXPECT_NEAR(pos(s, "a").y, 4, 1e-6);
    s.handle(Json{{"t", "drag_end"}});
    s.settle();
    Json snap = s.snapshot();
    EXPECT_TRUE(snap["converged"].get<bool>());
    EXPECT_NEAR(snap["positions"]["a"][0].get<double>(), 20.0, 1e-6);
    EXPECT_NEAR(snap["positions"]["a"][1].get<double>(), 0.0, 1e-6);
}

TEST(Session, GridTermExemptsDraggedNode) {
    Session s;
    Json g = graph_doc({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}}, 4, 4);
    s.handle(load_msg(g, {{"a", {0, 0}}, {"b", {10, 0}}, {"c", {20, 0}}}, "GS", 10));
    s.settle();
    s.handle(Json{{"t", "drag_start"}, {"id", "b"}});
    s.handle(drag_move(12, 3));  // inside the snap radius of (10, 0)
    s.settle();
    const LayoutState& x = s.layout();
    SolveOptions o = s.solve_options();
    IdealDistances d = shortest_path_distances(s.graph(), 10);
    AlignedEdges aligned = detect_aligned_edges(s.graph(), x);
    StressParams with_grid = o.stress, exempt = o.stress;
    exempt.grid_exempt = 1;
    Gradient full, skipped;
    goal_and_gradient(s.graph(), d, x, with_grid, aligned, full);
    goal_and_gradient(s.graph(), d, x, exempt, aligned, skipped);
    Gradient live = s.gradient();
    for (std::size_t i = 0; i < live.size(); ++i) EXPECT_NEAR(live[i], skipped[i], 1e-9) << i;
    // the exemption is visible: the grid pulls b back toward (10, 0) when counted
    EXPECT_GT(std::abs(full[1] - skipped[1]), 1.0);
    EXPECT_GT(std::abs(full[3 + 1] - skipped[3 + 1]), 1.0);
    s.handle(Json{{"t", "drag_end"}});
    Gradient after = s.gradient();
    EXPECT_TRUE(std::isfinite(after[1]));
}

TEST(Session, SlowDragPullsNeighbourIntoAlignment) {
    Session s;
    Json g = graph_doc({"a", "b"}, {{"a", "b"}});
    s.handle(load_msg(g, {{"a", {0, 0}}, {"b", {60, 80}}}, "NS"));
    s.settle();
    double gap_before = std::abs(pos(s, "a").x - pos(s, "b").x);
    ASSERT_GT(gap_before, 30.0);
    s.handle(Json{{"t", "drag_start"}, {"id", "a"}});
    for (double x = 0; x <= 40; x += 2) {
        s.handle(drag_move(x, 0));
        s.settle();
    }
    // |x_a - x_b| is now below the average width, so b follows a
    EXPECT_NEAR(pos(s, "b").x, pos(s, "a").x, 1e-6);
    EXPECT_NEAR(pos(s, "a").x, 40, 1e-6);
    s.handle(Json{{"t", "drag_end"}});
    s.settle();
    EXPECT_NEAR(pos(s, "b").x, pos(s, "a").x, 1e-6);
}

TEST(Session, FastDragTearsAlignment) {
    Session s;
    Json g = graph_doc({"a", "b"}, {{"a", "b"}});
    s.handle(load_msg(g, {{"a", {0, 0}}, {"b", {10, 100}}}, "NS"));
    s.settle();
    ASSERT_NEAR(pos(s, "a").x, pos(s, "b").x, 1e-6);
    s.handle(Json{{"t", "drag_start"}, {"id", "a"}});
    s.handle(drag_move(pos(s, "a").x + 120, pos(s, "a").y));
    s.settle();
    s.handle(Json{{"t", "drag_end"}});
    s.settle();
    double alpha = 30.0;
    EXPECT_GT(std::abs(pos(s, "a").x - pos(s, "b").x), alpha);
}

TEST(Session, NonOverlapLiftedDuringDragOnly) {
    Session s;
    Json g = graph_doc({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}});
    s.handle(load_msg(g, {{"a", {0, 0}}, {"b", {100, 0}}, {"c", {200, 0}}}, "FD"));
    s.settle();
    ASSERT_EQ(count_overlaps(s.graph(), s.layout()), 0u);
    s.handle(Json{{"t", "drag_start"}, {"id", "c"}});
    EXPECT_EQ(s.solve_options().non_overlap, NonOverlap::Off);
    s.handle(drag_move(105, 5));
    s.iterate();  // c lands on b and nothing pushes them apart
    EXPECT_GT(count_overlaps(s.graph(), s.layout()), 0u);
    s.handle(Json{{"t", "drag_end"}});
    EXPECT_EQ(s.solve_options().non_overlap, NonOverlap::NodeSizes);
    s.settle();
    EXPECT_EQ(count_overlaps(s.graph(), s.layout()), 0u);
}

TEST(Session, DragRoundTripKeepsQuality) {
    Session s;
    Json g = graph_doc({"a", "b", "c", "d"}, {{"a", "b"}, {"b", "c"}, {"c", "d"}, {"d", "a"}});
    s.handle(load_msg(g, {{"a", {0, 0}}, {"b", {100, 10}}, {"c", {110, 110}}, {"d", {0, 90}}}, "NS"));
    s.settle();
    double before = s.goal_value();
    s.handle(Json{{"t", "drag_start"}, {"id", "b"}});
    s.settle();
    s.handle(Json{{"t", "drag_end"}});
    s.settle();
    EXPECT_LE(s.goal_value(), before * (1 + 1e-3) + 1e-9);
    EXPECT_EQ(count_overlaps(s.graph(), s.layout()), 0u);
}

TEST(Session, ConstraintsAddAndDelete) {
    Session s;
    Json g = graph_doc({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}});
    s.handle(load_msg(g, {{"a", {0, 0}}, {"b", {100, 40}}, {"c", {200, 90}}}, "FD"));
    auto r = s.handle(Json{{"t", "constraint_add"}, {"dim", "y"}, {"left", "a"}, {"right", "c"}, {"eq", true}});
    ASSERT_FALSE(has_error(r));
    ASSERT_EQ(r[0]["constraints"].size(), 1u);
    EXPECT_EQ(r[0]["constraints"][0]["source"], "user");
    std::int64_t cid = r[0]["cid"];
    s.settle();
    EXPECT_LE(std::abs(pos(s, "a").y - pos(s, "c").y), 1e-9);

    // contradicts the equality: refused, nothing changes
    auto bad = s.handle(Json{{"t", "constraint_add"}, {"dim", "y"}, {"left", "a"}, {"right", "c"}, {"gap", 10}});
    EXPECT_TRUE(has_error(bad));
    EXPECT_EQ(s.constraints().size(), 1u);
    EXPECT_TRUE(has_error(s.handle(Json{{"t", "constraint_add"}, {"dim", "z"}, {"left", "a"}, {"right", "c"}})));
    EXPECT_TRUE(has_error(s.handle(Json{{"t", "constraint_add"}, {"dim", "x"}, {"left", "a"}, {"right", "q"}})));

    auto del = s.handle(Json{{"t", "constraint_del"}, {"cid", cid}});
    ASSERT_FALSE(has_error(del));
    EXPECT_TRUE(del[0]["constraints"].empty());
    EXPECT_TRUE(has_error(s.handle(Json{{"t", "constraint_del"}, {"cid", cid}})));
}

TEST(Session, AcaModeAddsAlignments) {
    Session s;
    Json g = graph_doc({"a", "b", "c", "d"}, {{"a", "b"}, {"b", "c"}, {"c", "d"}, {"d", "a"}});
    s.handle(load_msg(g, {{"a", {0, 0}}, {"b", {100, 10}}, {"c", {110, 110}}, {"d", {0, 90}}}, "FD"));
    auto r = s.handle(Json{{"t", "mode"}, {"mode", "ACA"}});
    ASSERT_FALSE(has_error(r));
    EXPECT_EQ(s.mode(), Mode::ACA);
    const Json& list = r[0]["constraints"];
    ASSERT_FALSE(list.empty());
    for (const auto& c : list) EXPECT_EQ(c["source"], "aca");
    s.settle();
    EXPECT_TRUE(constraints_hold(s.constraints(), s.layout(), 1e-6));
    // back to FD drops the derived alignments
    r = s.handle(Json{{"t", "mode"}, {"mode", "FD"}});
    EXPECT_TRUE(r[0]["constraints"].empty());
}

TEST(Session, SaveReturnsDocument) {
    Session s;
    Json g = graph_doc({"a", "b"}, {{"a", "b"}});
    s.handle(load_msg(g, {{"a", {0, 0}}, {"b", {100, 0}}}, "FD"));
    s.settle();
    auto r = s.handle(Json{{"t", "save"}});
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0]["t"], "saved");
    EXPECT_EQ(r[0]["graph"]["nodes"].size(), 2u);
    EXPECT_NEAR(r[0]["positions"]["b"][0].get<double>(), pos(s, "b").x, 1e-12);
    Session copy;
    ASSERT_FALSE(has_error(copy.handle(Json{{"t", "load"}, {"graph", r[0]["graph"]}, {"positions", r[0]["positions"]}})));
    EXPECT_EQ(copy.layout().x, s.layout().x);
}

namespace {

struct Recorder {
    std::mutex m;
    std::vector<Json> events;
    std::vector<std::chrono::steady_clock::time_point> stamps;

    SessionWorker::Sink sink() {
        return [this](const std::string& text) {
            std::lock_guard lock(m);
            events.push_back(Json::parse(text));
            stamps.push_back(std::chrono::steady_clock::now());
        };
    }
    std::vector<Json> snapshots() {
        std::lock_guard lock(m);
        std::vector<Json> out;
        for (auto& e : events)
            if (e["t"] == "snapshot") out.push_back(e);
        return out;
    }
};

}  // namespace

TEST(SessionWorker, PublishesOrderedSnapshotsAndGoesQuiet) {
    Recorder rec;
    SessionWorker w(rec.sink());
    Json g = graph_doc({"a", "b", "c", "d"}, {{"a", "b"}, {"b", "c"}, {"c", "d"}});
    w.post(load_msg(g, {{"a", {0, 0}}, {"b", {10, 0}}, {"c", {20, 300}}, {"d", {400, 0}}}, "FD").dump());
    w.post(Json{{"t", "constraint_add"}, {"dim", "x"}, {"left", "a"}, {"right", "d"}, {"eq", true}}.dump());
    ASSERT_TRUE(w.wait_idle(std::chrono::seconds(20)));
    auto snaps = rec.snapshots();
    ASSERT_FALSE(snaps.empty());
    EXPECT_TRUE(snaps.back()["converged"].get<bool>());
    for (std::size_t i = 1; i < snaps.size(); ++i) EXPECT_GT(snaps[i]["rev"], snaps[i - 1]["rev"]);

    std::size_t settled = snaps.size();
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
    EXPECT_EQ(rec.snapshots().size(), settled);

    // drag: revisions keep increasing, the rate stays capped, the constraint never breaks
    w.post(Json{{"t", "drag_start"}, {"id", "c"}}.dump());
    for (int k = 0; k < 200; ++k) w.post(drag_move(20 + k, 300 - k).dump());
    w.post(Json{{"t", "drag_end"}}.dump());
    ASSERT_TRUE(w.wait_idle(std::chrono::seconds(20)));
    std::vector<Json> all;
    std::vector<std::chrono::steady_clock::time_point> when;
    {
        std::lock_guard lock(rec.m);
        for (std::size_t i = 0; i < rec.events.size(); ++i)
            if (rec.events[i]["t"] == "snapshot") {
                all.push_back(rec.events[i]);
                when.push_back(rec.stamps[i]);
            }
    }
    ASSERT_GT(all.size(), settled);
    for (std::size_t i = 1; i < all.size(); ++i) {
        EXPECT_GT(all[i]["rev"], all[i - 1]["rev"]);
        double gap = std::chrono::duration<double>(when[i] - when[i - 1]).count();
        EXPECT_GE(gap, 1.0 / 60 - 2e-3) << "snapshot " << i;
    }
    // snapshots before constraint_add was applied may legitimately differ
    for (std::size_t i = settled - 1; i < all.size(); ++i) {
        const Json& snap = all[i];
        double ax = snap["positions"]["a"][0], dx = snap["positions"]["d"][0];
        EXPECT_LE(std::abs(ax - dx), 1e-6);
    }
    bool metrics = false;
    {
        std::lock_guard lock(rec.m);
        for (auto& e : rec.events) metrics = metrics || e["t"] == "metrics";
    }
    EXPECT_TRUE(metrics);
}

TEST(SessionWorker, ErrorsAreReportedInOrder) {
    Recorder rec;
    SessionWorker w(rec.sink());
    w.post("garbage");
    w.post(Json{{"t", "save"}}.dump());
    ASSERT_TRUE(w.wait_idle(std::chrono::seconds(5)));
    std::lock_guard lock(rec.m);
    ASSERT_EQ(rec.events.size(), 2u);
    EXPECT_EQ(rec.events[0]["t"], "error");
    EXPECT_EQ(rec.events[1]["t"], "error");
}
