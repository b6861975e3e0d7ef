// Per-dimension least-squares projection onto separation constraints.
//
// Variables are grouped into blocks held rigidly together by a spanning tree of
// active constraints. Violated constraints merge blocks; a block whose tree has
// an inequality with a negative multiplier is split. A violated constraint whose
// endpoints already share a block closes a cycle: if the tree path between them
// holds an inequality that can relax, the block is split there first, otherwise
// the cycle is infeasible and one member is rejected by priority.

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include "gridlay/constraints.hpp"

namespace gridlay {

double SeparationConstraint::violation(std::span<const double> pos) const {
    double v = pos[left] + gap - pos[right];
    return v;
}

namespace {

constexpr double kViolationTol = 1e-10;
constexpr double kMultiplierTol = 1e-9;

struct PathStep {
    std::size_t constraint;
    bool forward;  // traversed from its left variable to its right variable
};

class BlockSolver {
  public:
    BlockSolver(Dim dim, std::span<const double> desired, ConstraintList& cs, std::span<const double> weights)
        : cs_(cs),
          desired_(desired.begin(), desired.end()),
          weight_(desired.size(), 1.0),
          offset_(desired.size(), 0.0),
          block_of_(desired.size()),
          active_(cs.size(), false) {
        const std::size_t n = desired.size();
        if (!weights.empty()) {
            if (weights.size() != n) throw Error("projection weights size mismatch");
            std::copy(weights.begin(), weights.end(), weight_.begin());
        }
        for (std::size_t i = 0; i < cs.size(); ++i) {
            SeparationConstraint& c = cs[i];
            if (c.dim != dim) continue;
            c.multiplier = 0.0;
            if (c.left >= n || c.right >= n) throw Error("constraint refers to a variable out of range");
            if (c.left == c.right) throw Error("constraint relates a variable to itself");
            ids_.push_back(i);
        }
        blocks_.reserve(n);
        for (NodeIndex v = 0; v < n; ++v) {
            Block b;
            b.vars = {v};
            b.wsum = weight_[v];
            b.wdsum = weight_[v] * desired_[v];
            block_of_[v] = blocks_.size();
            blocks_.push_back(std::move(b));
        }
        scale_ = 1.0;
        for (double d : desired_) scale_ = std::max(scale_, std::abs(d));
    }

    std::vector<double> solve() {
        satisfy();
        const std::size_t cap = 50 * (ids_.size() + 10);
        for (std::size_t round = 0; round < cap; ++round) {
            bool split_any = false;
            const std::size_t count = blocks_.size();
            for (std::size_t b = 0; b < count; ++b) {
                if (!blocks_[b].alive || blocks_[b].active.empty()) continue;
                compute_multipliers(b);
                std::size_t worst = kNone;
                double worst_lm = -kMultiplierTol * lm_scale(b);
                for (std::size_t c : blocks_[b].active) {
                    if (cs_[c].equality()) continue;
                    if (cs_[c].multiplier < worst_lm) {
                        worst_lm = cs_[c].multiplier;
                        worst = c;
                    }
                }
                if (worst != kNone) {
                    split(b, worst);
                    split_any = true;
                }
            }
            if (!split_any) break;
            satisfy();
        }
        for (std::size_t c : ids_) cs_[c].multiplier = 0.0;
        for (std::size_t b = 0; b < blocks_.size(); ++b) {
            if (blocks_[b].alive && !blocks_[b].active.empty()) compute_multipliers(b);
        }
        std::vector<double> out(desired_.size());
        for (NodeIndex v = 0; v < out.size(); ++v) out[v] = pos(v);
        return out;
    }

  private:
    static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

    struct Block {
        std::vector<NodeIndex> vars;
        std::vector<std::size_t> active;
        double wsum = 0.0;
        double wdsum = 0.0;  // sum of w * (desired - offset)
        bool alive = true;
        double posn() const { return wdsum / wsum; }
    };

    double pos(NodeIndex v) const { return blocks_[block_of_[v]].posn() + offset_[v]; }

    double lm_scale(std::size_t b) const {
        double s = 0.0;
        for (NodeIndex v : blocks_[b].vars) s = std::max(s, weight_[v]);
        return std::max(1.0, s) * scale_;
    }

    double violation(std::size_t c) const { return pos(cs_[c].left) + cs_[c].gap - pos(cs_[c].right); }

    void recompute(Block& b) {
        b.wsum = 0.0;
        b.wdsum = 0.0;
        for (NodeIndex v : b.vars) {
            b.wsum += weight_[v];
            b.wdsum += weight_[v] * (desired_[v] - offset_[v]);
        }
    }

    void merge(std::size_t c) {
        const SeparationConstraint& k = cs_[c];
        std::size_t bl = block_of_[k.left], br = block_of_[k.right];
        std::size_t keep, gone;
        double shift;
        if (blocks_[bl].vars.size() >= blocks_[br].vars.size()) {
            keep = bl;
            gone = br;
            shift = offset_[k.left] + k.gap - offset_[k.right];
        } else {
            keep = br;
            gone = bl;
            shift = offset_[k.right] - k.gap - offset_[k.left];
        }
        Block& into = blocks_[keep];
        Block& from = blocks_[gone];
        for (NodeIndex v : from.vars) {
            offset_[v] += shift;
            block_of_[v] = keep;
        }
        into.wsum += from.wsum;
        into.wdsum += from.wdsum - shift * from.wsum;
        into.vars.insert(into.vars.end(), from.vars.begin(), from.vars.end());
        into.active.insert(into.active.end(), from.active.begin(), from.active.end());
        into.active.push_back(c);
        active_[c] = true;
        from = Block{};
        from.alive = false;
    }

    // Adjacency of the active tree of block b: var -> (constraint, neighbour).
    std::vector<std::vector<std::pair<std::size_t, NodeIndex>>>& adjacency(std::size_t b) {
        adj_.resize(desired_.size());
        for (NodeIndex v : blocks_[b].vars) adj_[v].clear();
        for (std::size_t c : blocks_[b].active) {
            adj_[cs_[c].left].emplace_back(c, cs_[c].right);
            adj_[cs_[c].right].emplace_back(c, cs_[c].left);
        }
        return adj_;
    }

    void split(std::size_t b, std::size_t c) {
        Block& blk = blocks_[b];
        blk.active.erase(std::find(blk.active.begin(), blk.active.end(), c));
        active_[c] = false;
        auto& adj = adjacency(b);
        mark_.assign(desired_.size(), false);
        std::deque<NodeIndex> queue{cs_[c].left};
        mark_[cs_[c].left] = true;
        while (!queue.empty()) {
            NodeIndex v = queue.front();
            queue.pop_front();
            for (auto [k, w] : adj[v]) {
                if (!mark_[w]) {
                    mark_[w] = true;
                    queue.push_back(w);
                }
            }
        }
        Block left, right;
        for (NodeIndex v : blk.vars) (mark_[v] ? left : right).vars.push_back(v);
        for (std::size_t k : blk.active) (mark_[cs_[k].left] ? left : right).active.push_back(k);
        recompute(left);
        recompute(right);
        std::size_t rb = blocks_.size();
        for (NodeIndex v : right.vars) block_of_[v] = rb;
        blocks_[b] = std::move(left);
        blocks_.push_back(std::move(right));
    }

    void compute_multipliers(std::size_t b) {
        auto& adj = adjacency(b);
        const Block& blk = blocks_[b];
        NodeIndex root = blk.vars.front();
        // Iterative DFS recording parent links, then accumulate in reverse order.
        order_.clear();
        parent_c_.assign(desired_.size(), kNone);
        mark_.assign(desired_.size(), false);
        std::vector<NodeIndex> stack{root};
        mark_[root] = true;
        while (!stack.empty()) {
            NodeIndex v = stack.back();
            stack.pop_back();
            order_.push_back(v);
            for (auto [k, w] : adj[v]) {
                if (!mark_[w]) {
                    mark_[w] = true;
                    parent_c_[w] = k;
                    stack.push_back(w);
                }
            }
        }
        sub_.assign(desired_.size(), 0.0);
        for (NodeIndex v : blk.vars) sub_[v] = weight_[v] * (pos(v) - desired_[v]);
        for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
            NodeIndex v = *it;
            std::size_t k = parent_c_[v];
            if (k == kNone) continue;
            const SeparationConstraint& c = cs_[k];
            // The multiplier equals the summed force on the right-hand side of the cut.
            cs_[k].multiplier = v == c.right ? sub_[v] : -sub_[v];
            NodeIndex p = v == c.right ? c.left : c.right;
            sub_[p] += sub_[v];
        }
    }

    std::vector<PathStep> tree_path(std::size_t b, NodeIndex from, NodeIndex to) {
        auto& adj = adjacency(b);
        parent_c_.assign(desired_.size(), kNone);
        mark_.assign(desired_.size(), false);
        std::deque<NodeIndex> queue{from};
        mark_[from] = true;
        while (!queue.empty() && !mark_[to]) {
            NodeIndex v = queue.front();
            queue.pop_front();
            for (auto [k, w] : adj[v]) {
                if (!mark_[w]) {
                    mark_[w] = true;
                    parent_c_[w] = k;
                    queue.push_back(w);
                }
            }
        }
        std::vector<PathStep> path;
        NodeIndex v = to;
        while (v != from) {
            std::size_t k = parent_c_[v];
            const SeparationConstraint& c = cs_[k];
            NodeIndex prev = v == c.right ? c.left : c.right;
            path.push_back({k, prev == c.left});
            v = prev;
        }
        std::reverse(path.begin(), path.end());
        return path;
    }

    std::size_t pick_candidate() const {
        std::size_t best = kNone;
        double best_key = -1.0;
        const double tol = kViolationTol * scale_;
        for (std::size_t c : ids_) {
            const SeparationConstraint& k = cs_[c];
            if (active_[c] || !k.satisfiable()) continue;
            double v = violation(c);
            bool split_blocks = block_of_[k.left] != block_of_[k.right];
            double key;
            if (k.equality()) {
                if (!split_blocks && std::abs(v) <= tol) continue;
                key = std::abs(v);
            } else {
                if (v <= tol) continue;
                key = v;
            }
            if (key > best_key) {
                best_key = key;
                best = c;
            }
        }
        return best;
    }

    void reject(std::size_t c) {
        cs_[c].state = ConstraintState::Unsatisfiable;
        cs_[c].multiplier = 0.0;
    }

    [[noreturn]] void definite_conflict(std::size_t c, const std::vector<PathStep>& path) {
        std::vector<std::size_t> cycle{c};
        for (const PathStep& s : path) cycle.push_back(s.constraint);
        std::ostringstream msg;
        msg << "definite constraints conflict:";
        for (std::size_t k : cycle) msg << " #" << k;
        throw DefiniteConflict(std::move(cycle), msg.str());
    }

    void close_cycle(std::size_t c) {
        const SeparationConstraint& k = cs_[c];
        std::size_t b = block_of_[k.left];
        compute_multipliers(b);
        std::vector<PathStep> path = tree_path(b, k.left, k.right);
        // Violation > 0 needs right - left to grow: forward inequalities can relax.
        // Violation < 0 (equalities only) needs it to shrink: backward inequalities.
        const bool grow = violation(c) > 0.0;
        std::size_t relax = kNone;
        double relax_lm = std::numeric_limits<double>::infinity();
        for (const PathStep& s : path) {
            const SeparationConstraint& p = cs_[s.constraint];
            if (p.equality() || s.forward != grow) continue;
            if (p.multiplier < relax_lm) {
                relax_lm = p.multiplier;
                relax = s.constraint;
            }
        }
        if (relax != kNone) {
            split(b, relax);
            return;  // c is re-examined by the caller's loop
        }
        if (k.tentative()) {
            reject(c);
            return;
        }
        std::vector<const SeparationConstraint*> eqs, ineqs;
        std::vector<std::size_t> eq_ids, ineq_ids;
        for (const PathStep& s : path) {
            const SeparationConstraint& p = cs_[s.constraint];
            if (!p.tentative()) continue;
            (p.equality() ? eqs : ineqs).push_back(&p);
            (p.equality() ? eq_ids : ineq_ids).push_back(s.constraint);
        }
        std::size_t victim;
        if (!eqs.empty()) {
            victim = eq_ids[choose_rejection(std::span<const SeparationConstraint* const>(eqs))];
        } else if (!ineqs.empty()) {
            victim = ineq_ids[choose_rejection(std::span<const SeparationConstraint* const>(ineqs))];
        } else {
            definite_conflict(c, path);
        }
        split(b, victim);
        reject(victim);
    }

    void satisfy() {
        const std::size_t cap = 20 * (ids_.size() + desired_.size()) + 100;
        for (std::size_t guard = 0; guard < cap; ++guard) {
            std::size_t c = pick_candidate();
            if (c == kNone) return;
            const SeparationConstraint& k = cs_[c];
            if (block_of_[k.left] != block_of_[k.right]) {
                merge(c);
            } else {
                close_cycle(c);
            }
        }
        throw Error("projection failed to converge");
    }

    ConstraintList& cs_;
    std::vector<double> desired_;
    std::vector<double> weight_;
    std::vector<double> offset_;
    std::vector<std::size_t> block_of_;
    std::vector<Block> blocks_;
    std::vector<std::size_t> ids_;
    std::vector<bool> active_;
    double scale_ = 1.0;

    // scratch
    std::vector<std::vector<std::pair<std::size_t, NodeIndex>>> adj_;
    std::vector<bool> mark_;
    std::vector<NodeIndex> order_;
    std::vector<std::size_t> parent_c_;
    std::vector<double> sub_;
};

}  // namespace

std::vector<double> project(Dim dim, std::span<const double> desired, ConstraintList& constraints,
                            std::span<const double> weights) {
    BlockSolver solver(dim, desired, constraints, weights);
    return solver.solve();
}

std::size_t choose_rejection(std::span<const SeparationConstraint* const> conflict) {
    if (conflict.empty()) throw Error("choose_rejection: empty conflict set");
    std::size_t best = 0;
    for (std::size_t i = 1; i < conflict.size(); ++i) {
        if (std::abs(conflict[i]->multiplier) > std::abs(conflict[best]->multiplier)) best = i;
    }
    return best;
}

std::size_t choose_rejection(std::span<const SeparationConstraint> conflict) {
    std::vector<const SeparationConstraint*> ptrs;
    ptrs.reserve(conflict.size());
    for (const auto& c : conflict) ptrs.push_back(&c);
    return choose_rejection(std::span<const SeparationConstraint* const>(ptrs));
}

}  // namespace gridlay
