#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <utility>
#include <vector>

#include "swarmsense/csv.hpp"
#include "swarmsense/errors.hpp"
#include "swarmsense/mat.hpp"
#include "swarmsense/plan.hpp"

namespace swarmsense {

// Tree-structured iterative plan selection. Agents sit in a balanced
// binary tree; each learning iteration runs one bottom-up pass (agents
// re-select against the latest aggregate they can see) and one top-down
// pass (the root's aggregate is broadcast back). An iteration's
// selections are kept only if the root-evaluated cost does not increase.

inline MatI make_initial_target(std::size_t cells, std::size_t slots) {
    return MatI(cells, slots, 1);
}

// Per-agent cost: (1-beta) * RMSE(own + others vs target) + beta * E.
inline double local_cost(const Plan& own, const MatI& others, const MatI& target, double beta) {
    if (!others.same_shape(target) || !own.occupancy.same_shape(target))
        throw InvalidInput("local_cost: dimension mismatch");
    double sq = 0.0;
    for (std::size_t i = 0; i < others.size(); ++i) {
        const double p = others.data()[i] + own.occupancy.data()[i];
        const double d = p - target.data()[i];
        sq += d * d;
    }
    return (1.0 - beta) * std::sqrt(sq / static_cast<double>(others.size())) + beta * own.energy;
}

class TreeTopology {
  public:
    TreeTopology() = default;
    explicit TreeTopology(std::vector<int> level_order) : agents_(std::move(level_order)) {}

    int size() const { return static_cast<int>(agents_.size()); }
    bool empty() const { return agents_.empty(); }
    const std::vector<int>& agents() const { return agents_; }
    int agent_at(int pos) const { return agents_[static_cast<std::size_t>(pos)]; }

    int parent(int pos) const { return pos == 0 ? -1 : (pos - 1) / 2; }
    std::array<int, 2> children(int pos) const {
        std::array<int, 2> c{-1, -1};
        if (2 * pos + 1 < size()) c[0] = 2 * pos + 1;
        if (2 * pos + 2 < size()) c[1] = 2 * pos + 2;
        return c;
    }

    int depth() const {
        int d = 0;
        for (int pos = size() - 1; pos > 0; pos = parent(pos)) ++d;
        return d;
    }

    int position_of(int agent_id) const {
        for (int pos = 0; pos < size(); ++pos)
            if (agents_[static_cast<std::size_t>(pos)] == agent_id) return pos;
        return -1;
    }

  private:
    std::vector<int> agents_;
};

// Agents sorted by proximity to the swarm centroid are placed in
// level order, closest at the root. Ties break on agent id.
inline TreeTopology build_tree(const std::vector<int>& agent_ids,
                               const std::vector<std::pair<double, double>>& positions) {
    if (agent_ids.empty()) throw InvalidInput("build_tree: need at least one agent");
    if (agent_ids.size() != positions.size())
        throw InvalidInput("build_tree: one position per agent required");

    double cx = 0.0, cy = 0.0;
    for (const auto& p : positions) {
        cx += p.first;
        cy += p.second;
    }
    cx /= static_cast<double>(positions.size());
    cy /= static_cast<double>(positions.size());

    std::vector<std::size_t> idx(agent_ids.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    auto dist2 = [&](std::size_t i) {
        const double dx = positions[i].first - cx;
        const double dy = positions[i].second - cy;
        return dx * dx + dy * dy;
    };
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        const double da = dist2(a), db = dist2(b);
        if (da != db) return da < db;
        return agent_ids[a] < agent_ids[b];
    });

    std::vector<int> order;
    order.reserve(agent_ids.size());
    for (std::size_t i : idx) order.push_back(agent_ids[i]);
    return TreeTopology(std::move(order));
}

// Removes a failed agent; the deepest rightmost leaf (last in level
// order) takes over its slot, which keeps the tree balanced.
inline void inject_failure(TreeTopology& tree, int agent_id) {
    const int pos = tree.position_of(agent_id);
    if (pos < 0) throw InvalidInput("inject_failure: agent not in tree");
    if (tree.size() < 2) throw InvalidInput("inject_failure: removing the sole node empties the tree");
    std::vector<int> order = tree.agents();
    order[static_cast<std::size_t>(pos)] = order.back();
    order.pop_back();
    // If the removed node was the last one itself the swap is a no-op.
    tree = TreeTopology(std::move(order));
}

// In-process stand-in for the tree's network transport. Payloads are
// queued per receiving tree position; the selection algorithm only
// talks through this seam.
template <class Payload>
class Mailbox {
  public:
    explicit Mailbox(int nodes) : queues_(static_cast<std::size_t>(nodes)) {}

    void send(int to_pos, Payload payload) {
        queues_[static_cast<std::size_t>(to_pos)].push_back(std::move(payload));
        ++sent_;
    }

    std::vector<Payload> drain(int pos) {
        std::vector<Payload> out = std::move(queues_[static_cast<std::size_t>(pos)]);
        queues_[static_cast<std::size_t>(pos)].clear();
        return out;
    }

    std::uint64_t sent() const { return sent_; }

  private:
    std::vector<std::vector<Payload>> queues_;
    std::uint64_t sent_ = 0;
};

struct SelectionTraceRow {
    int iteration = 0;
    double global_rmse = 0.0;
    double global_energy = 0.0;  // mean selected-plan energy
};

struct SelectionResult {
    std::vector<int> selected;  // candidate index per tree agent id (1-based ids; -1 = absent)
    MatI global;                // accepted aggregate of all selected occupancies
    double global_rmse = 0.0;
    double global_cost = 0.0;
    std::vector<SelectionTraceRow> trace;
    std::uint64_t messages_total = 0;
    std::uint64_t messages_per_iteration = 0;
};

namespace detail {

struct UpMsg {
    MatI subtree;       // aggregate of the sending subtree's new selections
    double energy_sum;  // summed selected-plan energy in that subtree
};

struct DownMsg {
    MatI global;
};

}  // namespace detail

// One selection run: I iterations of bottom-up re-selection and
// top-down broadcast. During the bottom-up pass an agent evaluates its
// candidates against (previous global aggregate) - (its own previous
// pick) - (its subtree's previous contribution) + (its subtree's fresh
// contribution), which is everything it can know at that point in the
// pass. The root accepts an iteration only if the global cost
// (1-beta) * RMSE + beta * mean-energy does not increase; a rejected
// iteration keeps the previous selections.
inline SelectionResult run_collective_selection(
    const TreeTopology& tree, const std::vector<std::vector<const Plan*>>& candidates_by_agent,
    const MatI& target, double beta, int iterations) {
    if (iterations < 1) throw InvalidInput("run_collective_selection: iterations must be >= 1");
    const int nodes = tree.size();
    if (nodes == 0) throw InvalidInput("run_collective_selection: empty tree");
    const std::size_t cells = target.rows();
    const std::size_t slots = target.cols();
    const double entries = static_cast<double>(target.size());

    // Candidate occupancy nonzero positions, flattened, for incremental
    // cost deltas (occupancies are 0/1 and sparse).
    std::vector<const std::vector<const Plan*>*> cand(static_cast<std::size_t>(nodes));
    std::vector<std::vector<std::vector<std::size_t>>> nnz(static_cast<std::size_t>(nodes));
    for (int pos = 0; pos < nodes; ++pos) {
        const int id = tree.agent_at(pos);
        if (id < 1 || static_cast<std::size_t>(id) > candidates_by_agent.size())
            throw InvalidInput("run_collective_selection: no candidates for agent " +
                               std::to_string(id));
        const auto& list = candidates_by_agent[static_cast<std::size_t>(id - 1)];
        if (list.empty())
            throw InvalidInput("run_collective_selection: agent " + std::to_string(id) +
                               " has no candidate plans");
        cand[static_cast<std::size_t>(pos)] = &list;
        auto& plan_nnz = nnz[static_cast<std::size_t>(pos)];
        plan_nnz.resize(list.size());
        for (std::size_t l = 0; l < list.size(); ++l) {
            const MatI& occ = list[l]->occupancy;
            if (!occ.same_shape(target))
                throw InvalidInput("run_collective_selection: plan/target shape mismatch");
            for (std::size_t i = 0; i < occ.size(); ++i)
                if (occ.data()[i] != 0) plan_nnz[l].push_back(i);
        }
    }

    std::vector<int> prev_sel(static_cast<std::size_t>(nodes), -1);
    std::vector<MatI> sub_prev(static_cast<std::size_t>(nodes), MatI(cells, slots, 0));
    MatI global_prev(cells, slots, 0);
    double cost_prev = std::numeric_limits<double>::infinity();
    double rmse_prev = 0.0;
    double energy_prev = 0.0;

    SelectionResult result;
    Mailbox<detail::UpMsg> up_box(nodes);
    Mailbox<detail::DownMsg> down_box(nodes);

    std::vector<int> new_sel(static_cast<std::size_t>(nodes));
    std::vector<MatI> sub_new(static_cast<std::size_t>(nodes));

    for (int it = 1; it <= iterations; ++it) {
        // Bottom-up: leaves first (reverse level order visits children
        // before parents).
        for (int pos = nodes - 1; pos >= 0; --pos) {
            MatI children_new(cells, slots, 0);
            double children_energy = 0.0;
            for (const detail::UpMsg& m : up_box.drain(pos)) {
                children_new += m.subtree;
                children_energy += m.energy_sum;
            }

            // Previous contribution of this node's children subtrees.
            MatI children_prev(cells, slots, 0);
            for (int c : tree.children(pos))
                if (c >= 0) children_prev += sub_prev[static_cast<std::size_t>(c)];

            MatI others = global_prev;
            others -= children_prev;
            if (prev_sel[static_cast<std::size_t>(pos)] >= 0)
                others -= (*cand[static_cast<std::size_t>(pos)])
                              [static_cast<std::size_t>(prev_sel[static_cast<std::size_t>(pos)])]
                                  ->occupancy;
            others += children_new;

            double base_sq = 0.0;
            for (std::size_t i = 0; i < others.size(); ++i) {
                const double d = others.data()[i] - target.data()[i];
                base_sq += d * d;
            }

            const auto& list = *cand[static_cast<std::size_t>(pos)];
            int best = 0;
            double best_cost = std::numeric_limits<double>::infinity();
            for (std::size_t l = 0; l < list.size(); ++l) {
                double sq = base_sq;
                for (std::size_t i : nnz[static_cast<std::size_t>(pos)][l])
                    sq += 2.0 * (others.data()[i] - target.data()[i]) + 1.0;
                const double cost =
                    (1.0 - beta) * std::sqrt(sq / entries) + beta * list[l]->energy;
                if (cost < best_cost) {  // strict: ties keep the lowest index
                    best = static_cast<int>(l);
                    best_cost = cost;
                }
            }
            new_sel[static_cast<std::size_t>(pos)] = best;

            MatI sub = std::move(children_new);
            sub += list[static_cast<std::size_t>(best)]->occupancy;
            const double energy =
                children_energy + list[static_cast<std::size_t>(best)]->energy;
            sub_new[static_cast<std::size_t>(pos)] = sub;
            if (pos != 0) up_box.send(tree.parent(pos), detail::UpMsg{std::move(sub), energy});
        }

        // Root evaluates the iteration's proposal.
        double proposal_energy_sum = 0.0;
        for (int pos = 0; pos < nodes; ++pos)
            proposal_energy_sum +=
                (*cand[static_cast<std::size_t>(pos)])
                    [static_cast<std::size_t>(new_sel[static_cast<std::size_t>(pos)])]
                        ->energy;
        const MatI& proposal = sub_new[0];
        const double proposal_rmse = rmse(proposal, target);
        const double proposal_mean_energy = proposal_energy_sum / static_cast<double>(nodes);
        const double proposal_cost =
            (1.0 - beta) * proposal_rmse + beta * proposal_mean_energy;

        if (proposal_cost <= cost_prev) {
            prev_sel = new_sel;
            sub_prev = sub_new;
            global_prev = proposal;
            cost_prev = proposal_cost;
            rmse_prev = proposal_rmse;
            energy_prev = proposal_mean_energy;
        }

        // Top-down: every non-root node receives the accepted global
        // aggregate from its parent.
        for (int pos = 0; pos < nodes; ++pos)
            for (int c : tree.children(pos))
                if (c >= 0) down_box.send(c, detail::DownMsg{global_prev});
        for (int pos = 1; pos < nodes; ++pos) down_box.drain(pos);

        result.trace.push_back({it, rmse_prev, energy_prev});
    }

    result.selected.assign(candidates_by_agent.size(), -1);
    for (int pos = 0; pos < nodes; ++pos)
        result.selected[static_cast<std::size_t>(tree.agent_at(pos) - 1)] =
            prev_sel[static_cast<std::size_t>(pos)];
    result.global = global_prev;
    result.global_rmse = rmse_prev;
    result.global_cost = cost_prev;
    result.messages_total = up_box.sent() + down_box.sent();
    result.messages_per_iteration = result.messages_total / static_cast<std::uint64_t>(iterations);
    return result;
}

inline const char* kSelectionTraceHeader = "iteration,global_rmse,global_energy";

inline void export_selection_trace(const std::filesystem::path& path,
                                   const std::vector<SelectionTraceRow>& trace) {
    CsvWriter w(path);
    w.header(kSelectionTraceHeader);
    for (const SelectionTraceRow& r : trace) w.row(r.iteration, r.global_rmse, r.global_energy);
}

}  // namespace swarmsense
