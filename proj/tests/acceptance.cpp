// Acceptance run: one PASS/FAIL line per headline property, non-zero exit if
// any fails. Property checks use independent oracles where one exists.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "gridlay/generate.hpp"
#include "gridlay/metrics.hpp"
#include "gridlay/pipeline.hpp"
#include "gridlay/service.hpp"
#include "support/gradient_check.hpp"
#include "support/overlay_oracle.hpp"
#include "support/projection_check.hpp"

using namespace gridlay;
using service::Json;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void verdict(const char* name, bool ok, const std::string& detail) {
    std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Exact segment test: two edges coincide when they lie on one line (any
// orientation) and share a stretch of positive length.
std::size_t coincident_edge_pairs(const Graph& g, const LayoutState& s) {
    const auto edges = g.edges();
    std::size_t count = 0;
    auto cross = [](Point o, Point a, Point b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); };
    for (std::size_t i = 0; i < edges.size(); ++i) {
        Point p = s.at(edges[i].first), q = s.at(edges[i].second);
        double len = std::hypot(q.x - p.x, q.y - p.y);
        if (len == 0.0) continue;
        for (std::size_t j = i + 1; j < edges.size(); ++j) {
            Point a = s.at(edges[j].first), b = s.at(edges[j].second);
            // distance of a and b from the line through p, q
            if (std::abs(cross(p, q, a)) / len > 1e-9 || std::abs(cross(p, q, b)) / len > 1e-9) continue;
            double ux = (q.x - p.x) / len, uy = (q.y - p.y) / len;
            double ta = (a.x - p.x) * ux + (a.y - p.y) * uy, tb = (b.x - p.x) * ux + (b.y - p.y) * uy;
            double lo = std::max(0.0, std::min(ta, tb)), hi = std::min(len, std::max(ta, tb));
            if (hi - lo > 1e-9) ++count;
        }
    }
    return count;
}

// Open-box overlap of node rectangles, without any contact allowance beyond rounding.
std::size_t overlapping_boxes(const Graph& g, const LayoutState& s) {
    std::size_t count = 0;
    for (NodeIndex u = 0; u < g.size(); ++u)
        for (NodeIndex v = u + 1; v < g.size(); ++v) {
            double px = (g.node(u).w + g.node(v).w) / 2 - std::abs(s.x[u] - s.x[v]);
            double py = (g.node(u).h + g.node(v).h) / 2 - std::abs(s.y[u] - s.y[v]);
            if (px > kContactTolerance && py > kContactTolerance) ++count;
        }
    return count;
}

double worst_violation(const ConstraintList& cs, const LayoutState& s) {
    double worst = 0.0;
    for (const auto& c : cs) {
        if (!c.satisfiable()) continue;
        double v = c.violation(s.coords(c.dim));
        worst = std::max(worst, c.equality() ? std::abs(v) : std::max(0.0, v));
    }
    return worst;
}

double mean_grid_distance(const LayoutState& s, double tau) {
    double total = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        double dx = s.x[i] - tau * std::round(s.x[i] / tau), dy = s.y[i] - tau * std::round(s.y[i] / tau);
        total += std::hypot(dx, dy);
    }
    return s.size() ? total / static_cast<double>(s.size()) : 0.0;
}

void gradient_correctness() {
    auto t0 = Clock::now();
    double worst = 0.0;
    std::string per_term;
    for (auto term : {oracle::Term::PStress, oracle::Term::NodeSnap, oracle::Term::GridSnap, oracle::Term::EdgeNode,
                      oracle::Term::Goal}) {
        auto r = oracle::check_term(term, 100, 20240601);
        worst = std::max(worst, r.worst_gradient);
        per_term += fmt(" %s=%.1e", oracle::term_name(term), r.worst_gradient);
    }
    double secs = since(t0);
    verdict("gradient-correctness", worst <= 1e-5 && secs < 10.0,
            fmt("worst relative error %.2e (limit 1e-5) over 5x100 layouts,%s; %.1f s (limit 10 s)", worst,
                per_term.c_str(), secs));
}

void coincidence_oracle() {
    auto t0 = Clock::now();
    auto ex = oracle::check_coincidence_exhaustive(5, 2, 1234);
    auto rnd = oracle::check_coincidence_random(1000, 4321);
    double secs = since(t0);
    bool ok = ex.agreeing == ex.cases && rnd.agreeing == rnd.cases && rnd.graphs == 1000 && secs < 60.0;
    verdict("coincidence-oracle-equivalence", ok,
            fmt("exhaustive |V|<=5: %ld/%ld agree (%ld overlays); random |V|<=8: %ld/%ld agree over %ld instances; "
                "%.1f s (limit 60 s)",
                ex.agreeing, ex.cases, ex.positives, rnd.agreeing, rnd.cases, rnd.graphs, secs));
}

void projection_oracle() {
    auto plain = oracle::check_projection(500, 777, false);
    auto mixed = oracle::check_projection(500, 778, true);
    bool ok = plain.agreeing == plain.instances && mixed.definite_rejected == 0 && mixed.agreeing == mixed.instances;
    verdict("projection-oracle-equivalence", ok,
            fmt("definite: %d/%d match KKT enumeration (worst %.1e); mixed: %d/%d match, %d conflict instances, "
                "%d definite rejections",
                plain.agreeing, plain.instances, plain.worst_error, mixed.agreeing, mixed.instances, mixed.conflicts,
                mixed.definite_rejected));
}

void aca_structure() {
    auto corpus = random_corpus(50, 91, 10, 60);
    int over_budget = 0;
    std::size_t coincidences = 0;
    double worst = 0.0;
    for (const auto& ng : corpus) {
        PipelineOptions o;
        o.mode = Mode::ACA;
        PipelineResult r = run_pipeline(ng.graph, o);
        if (!r.aca || r.aca->selections > 2 * static_cast<int>(ng.graph.edge_count())) ++over_budget;
        coincidences += coincident_edge_pairs(ng.graph, r.layout);
        worst = std::max(worst, worst_violation(r.constraints, r.layout));
    }

    // square-ish 4-cycle
    Graph sq = oracle::make_graph(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}, 30, 20);
    LayoutState start(4);
    start.set(0, {0, -60});
    start.set(1, {75, 5});
    start.set(2, {5, 70});
    start.set(3, {-70, -5});
    PipelineOptions o;
    o.mode = Mode::ACA;
    PipelineResult r = beautify(sq, o, start);
    int axis = 0;
    for (auto [u, v] : sq.edges())
        axis += r.layout.x[u] == r.layout.x[v] || r.layout.y[u] == r.layout.y[v];

    bool ok = over_budget == 0 && coincidences == 0 && worst <= 1e-9 && axis == 4;
    verdict("aca-structural-guarantees", ok,
            fmt("50 graphs (10-60 nodes): %d over 2|E| selections, %zu coincident edge pairs, worst violation %.1e "
                "(limit 1e-9); 4-cycle: %d/4 edges axis-aligned",
                over_budget, coincidences, worst, axis));
}

struct CorpusRun {
    std::map<Mode, std::vector<PipelineResult>> results;
    std::vector<NamedGraph> graphs;
};

CorpusRun run_corpus() {
    CorpusRun run;
    run.graphs = random_corpus(20, 2024);
    for (Mode m : kAllModes) {
        for (const auto& ng : run.graphs) {
            PipelineOptions o;
            o.mode = m;
            run.results[m].push_back(run_pipeline(ng.graph, o));
        }
    }
    return run;
}

void obliqueness_ordering(const CorpusRun& run) {
    std::map<Mode, double> mean;
    for (Mode m : kAllModes) {
        double total = 0.0;
        for (std::size_t i = 0; i < run.graphs.size(); ++i)
            total += obliqueness(run.graphs[i].graph, run.results.at(m)[i].layout);
        mean[m] = total / static_cast<double>(run.graphs.size());
    }
    bool ok = mean[Mode::ACA] < mean[Mode::NS] && mean[Mode::ACA] < mean[Mode::GS] &&
              mean[Mode::ACA_GS] <= mean[Mode::ACA];
    verdict("obliqueness-ordering", ok,
            fmt("corpus means over 20 graphs: FD %.2f, NS %.2f, GS %.2f, NS_GS %.2f, ACA %.2f, ACA_GS %.2f",
                mean[Mode::FD], mean[Mode::NS], mean[Mode::GS], mean[Mode::NS_GS], mean[Mode::ACA],
                mean[Mode::ACA_GS]));
}

void grid_placement_check(const CorpusRun& run) {
    const double tau = PipelineOptions{}.tau;
    double before = 0.0, after = 0.0;
    std::size_t near = 0, nodes = 0;
    for (std::size_t i = 0; i < run.graphs.size(); ++i) {
        const PipelineResult& gs = run.results.at(Mode::GS)[i];
        before += mean_grid_distance(gs.phase1, tau);
        after += mean_grid_distance(gs.layout, tau);
        const LayoutState& s = run.results.at(Mode::ACA_GS)[i].layout;
        for (std::size_t v = 0; v < s.size(); ++v) {
            double dx = s.x[v] - tau * std::round(s.x[v] / tau), dy = s.y[v] - tau * std::round(s.y[v] / tau);
            near += std::hypot(dx, dy) <= 0.05 * tau;
        }
        nodes += s.size();
    }
    before /= static_cast<double>(run.graphs.size());
    after /= static_cast<double>(run.graphs.size());
    double fraction = static_cast<double>(near) / static_cast<double>(nodes);
    verdict("grid-placement", after <= 0.2 * before && fraction >= 0.9,
            fmt("GS mean distance %.3f vs phase-1 %.3f (ratio %.3f, limit 0.2); ACA_GS %zu/%zu nodes (%.1f%%) within "
                "0.05 tau (limit 90%%)",
                after, before, after / before, near, nodes, 100 * fraction));
}

void non_overlap(const CorpusRun& run) {
    std::string detail;
    std::size_t total = 0;
    for (Mode m : kAllModes) {
        std::size_t count = 0;
        for (std::size_t i = 0; i < run.graphs.size(); ++i)
            count += overlapping_boxes(run.graphs[i].graph, run.results.at(m)[i].layout);
        total += count;
        detail += fmt("%s%s %zu", detail.empty() ? "" : ", ", to_string(m), count);
    }
    verdict("non-overlap", total == 0, "overlapping pairs over 20 graphs: " + detail);
}

void performance() {
    Graph g = random_graph({.nodes = 100, .density = 1.5, .seed = 100});
    std::string detail = fmt("%zu nodes, %zu edges:", g.size(), g.edge_count());
    bool ok = true;
    for (Mode m : kAllModes) {
        PipelineOptions o;
        o.mode = m;
        auto t0 = Clock::now();
        run_pipeline(g, o);
        double secs = since(t0);
        double limit = uses_aca(m) ? 30.0 : 5.0;
        if (m == Mode::FD || m == Mode::NS || m == Mode::GS || m == Mode::ACA) ok = ok && secs <= limit;
        detail += fmt(" %s %.2f s", to_string(m), secs);
    }
    verdict("performance-envelope", ok, detail + " (limits: ACA 30 s, FD/NS/GS 5 s)");
}

// Scripted protocol replay against a Session.
void interaction() {
    auto graph = [](double w, double h, int n) {
        Json g = {{"nodes", Json::array()}, {"edges", Json::array()}};
        const char* ids[] = {"a", "b", "c"};
        for (int i = 0; i < n; ++i) g["nodes"].push_back({{"id", ids[i]}, {"w", w}, {"h", h}});
        for (int i = 0; i + 1 < n; ++i) g["edges"].push_back({ids[i], ids[i + 1]});
        return g;
    };
    auto at = [](const service::Session& s, const char* id) { return s.layout().at(s.graph().index_of(id)); };
    auto move = [](double x, double y) { return Json{{"t", "drag_move"}, {"x", x}, {"y", y}}; };
    std::string detail;
    bool ok = true;

    {  // grid snap on mouse-up
        service::Session s;
        s.handle({{"t", "load"}, {"graph", graph(4, 4, 3)}, {"mode", "GS"}, {"tau", 10},
                  {"positions", {{"a", {0, 10}}, {"b", {30, 0}}, {"c", {40, 0}}}}});
        s.settle();
        s.handle({{"t", "drag_start"}, {"id", "a"}});
        s.handle(move(23, 4));
        s.settle();
        s.handle({{"t", "drag_end"}});
        s.settle();
        Json snap = s.snapshot();
        double x = snap["positions"]["a"][0], y = snap["positions"]["a"][1];
        bool pass = snap["converged"].get<bool>() && std::abs(x - 20) <= 1e-6 && std::abs(y) <= 1e-6;
        ok = ok && pass;
        detail += fmt("GS drag_end (23,4) -> (%.6f,%.6f)", x, y);
    }
    {  // slow drag: the follower aligns once the x gap is below the mean width
        service::Session s;
        s.handle({{"t", "load"}, {"graph", graph(30, 20, 2)}, {"mode", "NS"},
                  {"positions", {{"a", {0, 0}}, {"b", {60, 80}}}}});
        s.settle();
        s.handle({{"t", "drag_start"}, {"id", "a"}});
        for (double x = 0; x <= 40; x += 2) {
            s.handle(move(x, 0));
            s.settle();
        }
        double gap = std::abs(at(s, "a").x - at(s, "b").x);
        ok = ok && gap <= 1e-6;
        detail += fmt("; NS slow drag follower gap %.1e (limit 1e-6)", gap);
        s.handle({{"t", "drag_end"}});
    }
    {  // fast drag tears the alignment
        service::Session s;
        s.handle({{"t", "load"}, {"graph", graph(30, 20, 2)}, {"mode", "NS"},
                  {"positions", {{"a", {0, 0}}, {"b", {10, 100}}}}});
        s.settle();
        s.handle({{"t", "drag_start"}, {"id", "a"}});
        s.handle(move(at(s, "a").x + 120, at(s, "a").y));
        s.settle();
        s.handle({{"t", "drag_end"}});
        s.settle();
        double gap = std::abs(at(s, "a").x - at(s, "b").x);
        ok = ok && gap > 30.0;
        detail += fmt("; NS fast drag gap %.1f (snap radius 30)", gap);
    }
    {  // non-overlap lifted while dragging, restored afterwards
        service::Session s;
        s.handle({{"t", "load"}, {"graph", graph(30, 20, 3)}, {"mode", "FD"},
                  {"positions", {{"a", {0, 0}}, {"b", {100, 0}}, {"c", {200, 0}}}}});
        s.settle();
        s.handle({{"t", "drag_start"}, {"id", "c"}});
        bool off = s.solve_options().non_overlap == NonOverlap::Off;
        s.handle(move(105, 5));
        s.iterate();
        std::size_t during = overlapping_boxes(s.graph(), s.layout());
        s.handle({{"t", "drag_end"}});
        s.settle();
        std::size_t after = overlapping_boxes(s.graph(), s.layout());
        bool pass = off && during > 0 && after == 0;
        ok = ok && pass;
        detail += fmt("; overlaps during drag %zu, after drag_end %zu", during, after);
    }
    verdict("interaction-semantics", ok, detail);
}

}  // namespace

int main() {
    gradient_correctness();
    coincidence_oracle();
    projection_oracle();
    aca_structure();
    performance();
    interaction();
    CorpusRun run = run_corpus();
    obliqueness_ordering(run);
    grid_placement_check(run);
    non_overlap(run);
    std::printf("%d failed\n", failures);
    return failures == 0 ? 0 : 1;
}
