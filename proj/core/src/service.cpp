#include "gridlay/service.hpp"

#include <algorithm>
#include <cmath>

#include "gridlay/metrics.hpp"

namespace gridlay::service {

namespace {

Json error_event(const std::string& msg) { return {{"t", "error"}, {"msg", msg}}; }

const Json& field(const Json& msg, const char* key) {
    auto it = msg.find(key);
    if (it == msg.end()) throw ParseError(std::string("message needs \"") + key + "\"");
    return *it;
}

double number(const Json& msg, const char* key) {
    const Json& v = field(msg, key);
    if (!v.is_number()) throw ParseError(std::string("\"") + key + "\" must be a number");
    double d = v.get<double>();
    if (!std::isfinite(d)) throw ParseError(std::string("\"") + key + "\" must be finite");
    return d;
}

std::string node_id(const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    throw ParseError("node ids are strings");
}

Mode mode_field(const Json& msg) {
    const Json& v = field(msg, "mode");
    if (!v.is_string()) throw ParseError("\"mode\" must be a string");
    auto m = parse_mode(v.get<std::string>());
    if (!m) throw ParseError("unknown mode '" + v.get<std::string>() + "'");
    return *m;
}

Json positions_json(const Graph& g, const LayoutState& s) {
    Json pos = Json::object();
    for (NodeIndex i = 0; i < g.size(); ++i) pos[g.node(i).id] = {s.x[i], s.y[i]};
    return pos;
}

bool mutates(const std::string& text) {
    Json msg = Json::parse(text, nullptr, false);
    if (!msg.is_object()) return false;
    std::string t = msg.value("t", "");
    return t != "save" && t != "metrics";
}

}  // namespace

SolveOptions interactive_options(Mode mode, const PipelineOptions& opts) {
    SolveOptions s = beautify_options(mode, opts);
    if (mode == Mode::NS || mode == Mode::NS_GS) s.stress.per_pair_snap = true;
    return s;
}

Json constraint_to_json(const Graph& g, const SeparationConstraint& c) {
    return {{"dim", c.dim == Dim::X ? "x" : "y"},
            {"left", g.node(c.left).id},
            {"right", g.node(c.right).id},
            {"gap", c.gap},
            {"eq", c.equality()},
            {"priority", c.tentative() ? "tentative" : "definite"}};
}

SeparationConstraint constraint_from_json(const Graph& g, const Json& j) {
    if (!j.is_object()) throw ParseError("a constraint is an object");
    SeparationConstraint c;
    const Json& dim = field(j, "dim");
    if (dim == "x")
        c.dim = Dim::X;
    else if (dim == "y")
        c.dim = Dim::Y;
    else
        throw ParseError("\"dim\" must be \"x\" or \"y\"");
    c.left = g.index_of(node_id(field(j, "left")));
    c.right = g.index_of(node_id(field(j, "right")));
    if (c.left == c.right) throw ParseError("a constraint relates two different nodes");
    if (j.contains("gap")) c.gap = number(j, "gap");
    if (j.contains("eq")) {
        if (!j["eq"].is_boolean()) throw ParseError("\"eq\" must be a boolean");
        c.relation = j["eq"].get<bool>() ? Relation::Equality : Relation::Inequality;
    }
    if (j.contains("priority")) {
        const Json& p = j["priority"];
        if (p == "tentative")
            c.priority = Priority::Tentative;
        else if (p != "definite")
            throw ParseError("\"priority\" must be \"definite\" or \"tentative\"");
    }
    return c;
}

Session::Session(PipelineOptions opts) : opts_(std::move(opts)) {}

const Graph& Session::graph() const {
    if (!graph_) throw Error("no graph loaded");
    return *graph_;
}

const LayoutState& Session::layout() const { return solver_ ? solver_->layout() : layout_; }

std::vector<Json> Session::handle_text(std::string_view text) {
    Json msg;
    try {
        msg = Json::parse(text.begin(), text.end());
    } catch (const Json::parse_error&) {
        return {error_event("malformed JSON")};
    }
    return handle(msg);
}

std::vector<Json> Session::handle(const Json& msg) {
    try {
        if (!msg.is_object() || !msg.contains("t") || !msg["t"].is_string())
            throw ParseError("message needs a string \"t\"");
        const std::string t = msg["t"].get<std::string>();
        if (t == "load") return load(msg);
        if (!graph_) throw Error("no graph loaded");
        if (t == "mode") return set_mode(msg);
        if (t == "drag_start") return drag_start(msg);
        if (t == "drag_move") return drag_move(msg);
        if (t == "drag_end") return drag_end();
        if (t == "constraint_add") return constraint_add(msg);
        if (t == "constraint_del") return constraint_del(msg);
        if (t == "save") return {save()};
        if (t == "metrics") return {metrics_event()};
        throw ParseError("unknown message type '" + t + "'");
    } catch (const Error& e) {
        return {error_event(e.what())};
    } catch (const Json::exception& e) {
        return {error_event(e.what())};
    }
}

std::vector<Json> Session::load(const Json& msg) {
    // Everything is built aside first so a bad document leaves the session untouched.
    auto g = std::make_unique<Graph>(load_graph_string(field(msg, "graph").dump()));
    PipelineOptions opts = opts_;
    if (msg.contains("mode")) opts.mode = mode_field(msg);
    if (msg.contains("tau")) {
        opts.tau = number(msg, "tau");
        GridSpec check(opts.tau);
    }
    if (msg.contains("seed")) opts.seed = field(msg, "seed").get<std::uint64_t>();
    opts.user.clear();
    LayoutState start;
    if (msg.contains("positions")) {
        start = parse_positions(*g, Json{{"positions", msg["positions"]}}.dump());
    } else {
        start = run_pipeline(*g, opts).layout;
    }
    solver_.reset();
    graph_ = std::move(g);
    opts_ = std::move(opts);
    ideal_ = std::make_unique<IdealDistances>(shortest_path_distances(*graph_, opts_.effective_ideal_edge()));
    layout_ = std::move(start);
    entries_.clear();
    drag_node_.reset();
    rebuild_active();
    restart_solver();
    return {constraints_event()};
}

std::vector<Json> Session::set_mode(const Json& msg) {
    PipelineOptions opts = opts_;
    opts.mode = mode_field(msg);
    if (msg.contains("tau")) {
        opts.tau = number(msg, "tau");
        GridSpec check(opts.tau);
    }
    opts.user = user_constraints();
    LayoutState current = layout();
    PipelineResult r = beautify(*graph_, opts, current);
    opts.user.clear();
    opts_ = std::move(opts);
    ideal_ = std::make_unique<IdealDistances>(shortest_path_distances(*graph_, opts_.effective_ideal_edge()));
    // User constraints come first in the result; anything after was added by ACA.
    std::vector<Entry> kept;
    for (const auto& e : entries_)
        if (!e.from_aca) kept.push_back(e);
    for (std::size_t i = 0; i < kept.size() && i < r.constraints.size(); ++i) kept[i].c.state = r.constraints[i].state;
    entries_ = std::move(kept);
    for (std::size_t i = entries_.size(); i < r.constraints.size(); ++i) {
        SeparationConstraint c = r.constraints[i];
        if (!c.satisfiable()) continue;
        c.priority = Priority::Definite;
        c.multiplier = 0.0;
        add_entry(c, true);
    }
    solver_.reset();
    layout_ = std::move(r.layout);
    drag_node_.reset();
    rebuild_active();
    restart_solver();
    return {constraints_event()};
}

std::vector<Json> Session::drag_start(const Json& msg) {
    NodeIndex v = graph_->index_of(node_id(field(msg, "id")));
    layout_ = layout();
    drag_node_ = v;
    cursor_ = layout_.at(v);
    restart_solver();
    return {};
}

std::vector<Json> Session::drag_move(const Json& msg) {
    if (!drag_node_) throw Error("drag_move without drag_start");
    Point p{number(msg, "x"), number(msg, "y")};
    layout_ = layout();
    cursor_ = p;
    restart_solver();
    return {};
}

std::vector<Json> Session::drag_end() {
    if (!drag_node_) throw Error("drag_end without drag_start");
    layout_ = layout();
    NodeIndex v = *drag_node_;
    // The node lands where the cursor left it; grid modes put it on the nearest grid point.
    Point at = cursor_;
    if (uses_grid(opts_.mode)) at = closest_grid_point(at, GridSpec(opts_.tau));
    layout_.set(v, at);
    drag_node_.reset();
    restart_solver();
    return {};
}

std::vector<Json> Session::constraint_add(const Json& msg) {
    const Json& body = msg.contains("constraint") ? msg["constraint"] : msg;
    SeparationConstraint c = constraint_from_json(*graph_, body);
    // Reject additions that make the definite set infeasible.
    ConstraintList trial = active_;
    trial.push_back(c);
    for (auto& t : trial) t.state = ConstraintState::Satisfiable;
    const LayoutState& now = layout();
    try {
        for (Dim d : {Dim::X, Dim::Y}) project(d, now.coords(d), trial);
    } catch (const DefiniteConflict& e) {
        throw Error(std::string("constraint conflicts with the existing ones: ") + e.what());
    }
    layout_ = now;
    std::int64_t cid = add_entry(c, false);
    rebuild_active();
    restart_solver();
    Json reply = constraints_event();
    reply["cid"] = cid;
    return {reply};
}

std::vector<Json> Session::constraint_del(const Json& msg) {
    const Json& cid = field(msg, "cid");
    if (!cid.is_number_integer()) throw ParseError("\"cid\" must be an integer");
    auto it = std::find_if(entries_.begin(), entries_.end(),
                           [&](const Entry& e) { return e.cid == cid.get<std::int64_t>(); });
    if (it == entries_.end()) throw Error("unknown constraint id " + cid.dump());
    layout_ = layout();
    entries_.erase(it);
    rebuild_active();
    restart_solver();
    return {constraints_event()};
}

Json Session::save() const {
    return {{"t", "saved"},
            {"graph", Json::parse(serialize_graph(*graph_))},
            {"positions", positions_json(*graph_, layout())},
            {"mode", to_string(opts_.mode)},
            {"tau", opts_.tau}};
}

ConstraintList Session::user_constraints() const {
    ConstraintList out;
    for (const auto& e : entries_)
        if (!e.from_aca) out.push_back(e.c);
    return out;
}

std::int64_t Session::add_entry(const SeparationConstraint& c, bool from_aca) {
    entries_.push_back({next_cid_, c, from_aca});
    return next_cid_++;
}

void Session::rebuild_active() {
    active_.clear();
    for (const auto& e : entries_) {
        active_.push_back(e.c);
        active_.back().state = ConstraintState::Satisfiable;
    }
}

SolveOptions Session::solve_options() const {
    SolveOptions s = interactive_options(opts_.mode, opts_);
    if (drag_node_) {
        // Pinned to the cursor, with non-overlap lifted until the drag ends.
        s.pin = SolveOptions::Pin{*drag_node_, cursor_};
        s.non_overlap = NonOverlap::Off;
    }
    return s;
}

void Session::restart_solver() {
    stalled_ = false;
    solver_ = std::make_unique<Solver>(*graph_, *ideal_, active_, layout_, solve_options());
}

bool Session::has_work() const { return solver_ && !solver_->converged() && !stalled_; }

bool Session::converged() const { return !solver_ || solver_->converged() || stalled_; }

bool Session::quiescent() const { return !graph_ || (converged() && !drag_node_); }

bool Session::iterate() {
    if (!has_work()) return false;
    try {
        solver_->step();
    } catch (const DefiniteConflict& e) {
        // Keep the last feasible state and stop until something changes.
        stalled_ = true;
        events_.push_back(error_event(std::string("definite constraints conflict: ") + e.what()));
        return false;
    }
    return true;
}

int Session::settle(int limit) {
    int n = 0;
    while (n < limit && has_work()) {
        iterate();
        ++n;
    }
    return n;
}

std::vector<Json> Session::take_events() { return std::exchange(events_, {}); }

Json Session::snapshot() {
    Json out = {{"t", "snapshot"}, {"rev", ++rev_}, {"converged", converged()}};
    out["positions"] = graph_ ? positions_json(*graph_, layout()) : Json::object();
    return out;
}

Json Session::constraints_event() const {
    Json list = Json::array();
    for (const auto& e : entries_) {
        Json j = constraint_to_json(*graph_, e.c);
        j["cid"] = e.cid;
        j["source"] = e.from_aca ? "aca" : "user";
        list.push_back(std::move(j));
    }
    return {{"t", "constraints"}, {"constraints", std::move(list)}};
}

Json Session::metrics_event() const {
    std::optional<GridSpec> grid;
    if (uses_grid(opts_.mode)) grid = GridSpec(opts_.tau);
    MetricsReport r = measure(*graph_, layout(), opts_.effective_ideal_edge(), grid);
    Json out = Json::parse(to_json(r));
    out["t"] = "metrics";
    return out;
}

Gradient Session::gradient() const {
    SolveOptions s = solve_options();
    StressParams params = s.stress;
    if (s.pin) params.grid_exempt = s.pin->node;
    AlignedEdges aligned;
    if (params.k_en != 0.0) aligned = detect_aligned_edges(*graph_, layout());
    Gradient grad;
    goal_and_gradient(*graph_, *ideal_, layout(), params, aligned, grad);
    return grad;
}

double Session::goal_value() const {
    SolveOptions s = solve_options();
    StressParams params = s.stress;
    if (s.pin) params.grid_exempt = s.pin->node;
    AlignedEdges aligned;
    if (params.k_en != 0.0) aligned = detect_aligned_edges(*graph_, layout());
    return goal(*graph_, *ideal_, layout(), params, aligned).total;
}

SessionWorker::SessionWorker(Sink sink, PipelineOptions opts, double max_rate)
    : sink_(std::move(sink)), session_(std::move(opts)), min_interval_(1.0 / max_rate) {
    thread_ = std::thread([this] { run(); });
}

SessionWorker::~SessionWorker() { stop(); }

void SessionWorker::stop() {
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
    }
    wake_.notify_all();
    if (thread_.joinable()) thread_.join();
}

void SessionWorker::post(std::string message) {
    {
        std::lock_guard lock(mutex_);
        queue_.push_back(std::move(message));
        idle_ = false;
    }
    wake_.notify_all();
}

bool SessionWorker::wait_idle(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mutex_);
    return idle_cv_.wait_for(lock, timeout, [this] { return idle_ && queue_.empty(); });
}

void SessionWorker::publish(const Json& event) { sink_(event.dump()); }

void SessionWorker::run() {
    using Clock = std::chrono::steady_clock;
    auto last_publish = Clock::now() - std::chrono::hours(1);
    bool unpublished = false;
    bool metrics_due = false;
    for (;;) {
        std::deque<std::string> batch;
        {
            std::unique_lock lock(mutex_);
            if (queue_.empty() && !session_.has_work()) {
                if (unpublished) {
                    // Hold the final snapshot until the rate cap allows it.
                    auto due = last_publish + std::chrono::duration_cast<Clock::duration>(min_interval_);
                    if (!wake_.wait_until(lock, due, [this] { return stopping_ || !queue_.empty(); })) {
                        lock.unlock();
                        publish(session_.snapshot());
                        last_publish = Clock::now();
                        unpublished = false;
                        if (metrics_due && session_.loaded() && session_.quiescent()) publish(session_.metrics_event());
                        metrics_due = false;
                        continue;
                    }
                } else {
                    idle_ = true;
                    idle_cv_.notify_all();
                    wake_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
                }
            }
            if (stopping_) return;
            batch.swap(queue_);
            idle_ = false;
        }
        for (std::size_t i = 0; i < batch.size(); ++i) {
            // A drag_move followed directly by another one is superseded by it.
            if (i + 1 < batch.size() && batch[i].find("\"drag_move\"") != std::string::npos &&
                batch[i + 1].find("\"drag_move\"") != std::string::npos) {
                Json a = Json::parse(batch[i], nullptr, false), b = Json::parse(batch[i + 1], nullptr, false);
                if (a.is_object() && b.is_object() && a.value("t", "") == "drag_move" && b.value("t", "") == "drag_move")
                    continue;
            }
            bool failed = false;
            for (const Json& reply : session_.handle_text(batch[i])) {
                failed = failed || reply.value("t", "") == "error";
                publish(reply);
            }
            // Requests that only read state do not call for a snapshot.
            if (!failed && !mutates(batch[i])) continue;
            if (!failed) unpublished = true;
        }
        if (session_.iterate()) {
            unpublished = true;
            metrics_due = true;
        }
        for (const Json& e : session_.take_events()) publish(e);
        if (unpublished && session_.loaded() && Clock::now() - last_publish >= min_interval_) {
            publish(session_.snapshot());
            last_publish = Clock::now();
            unpublished = false;
            if (metrics_due && session_.quiescent()) {
                publish(session_.metrics_event());
                metrics_due = false;
            }
        }
    }
}

}  // namespace gridlay::service
