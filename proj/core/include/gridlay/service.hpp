#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridlay/pipeline.hpp"

namespace gridlay::service {

using Json = nlohmann::json;

/// Solver settings while interacting in `mode`: the batch recipe, except that
/// edge snap radii follow the node pair in the node-snap modes.
SolveOptions interactive_options(Mode mode, const PipelineOptions& opts);

/// {"dim":"x"|"y","left":id,"right":id,"gap":num,"eq":bool,"priority":"definite"|"tentative"}
Json constraint_to_json(const Graph& g, const SeparationConstraint& c);
SeparationConstraint constraint_from_json(const Graph& g, const Json& j);

/// One interactive layout: graph, positions, constraints, mode and drag state.
/// Not thread-safe; SessionWorker gives it a thread of its own.
class Session {
  public:
    explicit Session(PipelineOptions opts = {});

    /// Applies one client message and returns the replies to send right away.
    /// A malformed message yields an error event and leaves the session as it was.
    std::vector<Json> handle(const Json& msg);
    std::vector<Json> handle_text(std::string_view text);

    /// One solver iteration if there is work; true when positions changed.
    bool iterate();
    /// Iterates until nothing is left to do or `limit` iterations ran.
    int settle(int limit = 100000);
    /// Events raised while iterating (definite conflicts).
    std::vector<Json> take_events();

    bool loaded() const noexcept { return graph_ != nullptr; }
    /// The solver has something left to do.
    bool has_work() const;
    /// Nothing loaded, or converged with no drag in progress.
    bool quiescent() const;
    bool converged() const;

    /// Snapshot event under a fresh revision.
    Json snapshot();
    Json constraints_event() const;
    Json metrics_event() const;

    const Graph& graph() const;
    const LayoutState& layout() const;
    Mode mode() const noexcept { return opts_.mode; }
    const PipelineOptions& options() const noexcept { return opts_; }
    std::optional<NodeIndex> dragged() const noexcept { return drag_node_; }
    std::int64_t revision() const noexcept { return rev_; }
    /// Settings of the running solver (pin and non-overlap reflect the drag).
    SolveOptions solve_options() const;
    /// Goal gradient at the current layout under solve_options().
    Gradient gradient() const;
    double goal_value() const;
    /// Constraints in force, user and alignment alike.
    const ConstraintList& constraints() const noexcept { return active_; }

  private:
    struct Entry {
        std::int64_t cid;
        SeparationConstraint c;
        bool from_aca;
    };

    std::vector<Json> load(const Json& msg);
    std::vector<Json> set_mode(const Json& msg);
    std::vector<Json> drag_start(const Json& msg);
    std::vector<Json> drag_move(const Json& msg);
    std::vector<Json> drag_end();
    std::vector<Json> constraint_add(const Json& msg);
    std::vector<Json> constraint_del(const Json& msg);
    Json save() const;

    ConstraintList user_constraints() const;
    void rebuild_active();
    void restart_solver();
    std::int64_t add_entry(const SeparationConstraint& c, bool from_aca);

    PipelineOptions opts_;
    std::unique_ptr<Graph> graph_;
    std::unique_ptr<IdealDistances> ideal_;
    LayoutState layout_;
    std::vector<Entry> entries_;
    ConstraintList active_;
    std::unique_ptr<Solver> solver_;
    std::optional<NodeIndex> drag_node_;
    Point cursor_;
    std::int64_t rev_ = 0;
    std::int64_t next_cid_ = 1;
    bool stalled_ = false;
    std::vector<Json> events_;
};

/// Runs a Session on a background thread. Messages are applied in order,
/// exactly once; runs of queued drag_move messages collapse to the latest.
/// Snapshots are published at most `max_rate` times a second, and the last
/// state before going idle is always published.
class SessionWorker {
  public:
    using Sink = std::function<void(const std::string&)>;

    explicit SessionWorker(Sink sink, PipelineOptions opts = {}, double max_rate = 60.0);
    ~SessionWorker();
    SessionWorker(const SessionWorker&) = delete;
    SessionWorker& operator=(const SessionWorker&) = delete;

    void post(std::string message);
    /// Waits until every posted message is applied and the session is idle.
    bool wait_idle(std::chrono::milliseconds timeout);
    void stop();

  private:
    void run();
    void publish(const Json& event);

    Sink sink_;
    Session session_;
    const std::chrono::duration<double> min_interval_;
    std::mutex mutex_;
    std::condition_variable wake_;
    std::condition_variable idle_cv_;
    std::deque<std::string> queue_;
    bool stopping_ = false;
    bool idle_ = true;
    std::thread thread_;
};

}  // namespace gridlay::service
