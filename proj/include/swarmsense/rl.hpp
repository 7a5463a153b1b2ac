#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <span>
#include <vector>

#include "swarmsense/errors.hpp"
#include "swarmsense/mat.hpp"
#include "swarmsense/nn.hpp"
#include "swarmsense/rng.hpp"

namespace swarmsense {

// PPO building blocks: observation encoding, per-agent actor/critic
// pair, experience replay and the clip-objective updates. Everything
// here is dimension-agnostic; the period-level and timeslot-level
// methods reuse these primitives unchanged.

// Period-level observation: charging-station one-hot, battery fraction,
// own previous plan and the aggregate of the others' previous plans.
struct ObservationSpec {
    int stations = 0;
    int cells = 0;
    int slots = 0;

    int dim() const { return stations + 1 + 2 * cells * slots; }
};

inline std::vector<double> build_observation(const ObservationSpec& spec, int station,
                                             double battery, const MatI& own,
                                             const MatI& others) {
    if (station < 1 || station > spec.stations)
        throw InvalidInput("build_observation: station out of range");
    const auto cs = static_cast<std::size_t>(spec.cells) * static_cast<std::size_t>(spec.slots);
    if (own.size() != cs || others.size() != cs)
        throw InvalidInput("build_observation: plan dimension mismatch");
    std::vector<double> o;
    o.reserve(static_cast<std::size_t>(spec.dim()));
    for (int m = 1; m <= spec.stations; ++m) o.push_back(m == station ? 1.0 : 0.0);
    o.push_back(battery);
    for (int v : own.data()) o.push_back(static_cast<double>(v));
    for (int v : others.data()) o.push_back(static_cast<double>(v));
    return o;
}

struct Transition {
    std::vector<double> obs;
    int action = 0;
    double reward = 0.0;
    std::vector<double> next_obs;
    bool terminal = false;
    bool valid = true;  // false for slots where no decision was taken (drone parked)
};

// One stored step: the transitions of every agent at one decision
// tick. Minibatches are sampled at this granularity, matching the
// H-groups convention of the update rules.
using StepGroup = std::vector<Transition>;

class TransitionBuffer {
  public:
    explicit TransitionBuffer(std::size_t capacity) : capacity_(capacity) {
        if (capacity_ == 0) throw InvalidInput("transition buffer: capacity must be >= 1");
    }

    void add(StepGroup group) {
        groups_.push_back(std::move(group));
        if (groups_.size() > capacity_) groups_.pop_front();
    }

    std::size_t size() const { return groups_.size(); }
    const StepGroup& group(std::size_t i) const { return groups_[i]; }

    // H distinct groups, uniform; fewer only if the buffer is smaller.
    std::vector<std::size_t> sample(std::size_t h, Rng& rng) const {
        return rng.sample_without_replacement(groups_.size(), std::min(h, groups_.size()));
    }

  private:
    std::size_t capacity_;
    std::deque<StepGroup> groups_;
};

// Actor, critic and their per-round snapshots, for one agent. The
// snapshots double as the target networks: the bootstrap term reads the
// critic snapshot, ratios read the actor snapshot, and both refresh by
// direct copy exactly once per update round.
struct PolicyPair {
    Mlp actor;
    Mlp actor_old;
    Mlp critic;
    Mlp critic_target;

    static PolicyPair make(int obs_dim, int actions, int hidden_width, int hidden_layers,
                           Rng& rng) {
        PolicyPair p;
        p.actor = Mlp(obs_dim, hidden_width, hidden_layers, actions);
        p.actor.init_uniform(rng);
        p.critic = Mlp(obs_dim + actions, hidden_width, hidden_layers, 1);
        p.critic.init_uniform(rng);
        p.actor_old = p.actor;
        p.critic_target = p.critic;
        return p;
    }

    void refresh_snapshots() {
        actor_old = actor;
        critic_target = critic;
    }
};

// Decentralized execution: an action depends only on the agent's own
// observation. explore samples the softmax; otherwise the argmax wins,
// lowest action code on ties.
inline int act(const Mlp& actor, std::span<const double> obs, bool explore, Rng& rng) {
    if (static_cast<int>(obs.size()) != actor.input_dim())
        throw InvalidInput("act: observation dimension mismatch");
    const std::vector<double> logits = actor.forward(obs);
    if (!explore) return static_cast<int>(argmax(logits));
    const std::vector<double> p = softmax(logits);
    const double u = rng.next_real();
    double acc = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) {
        acc += p[a];
        if (u < acc) return static_cast<int>(a);
    }
    return static_cast<int>(p.size() - 1);
}

namespace detail {

inline std::vector<double> critic_input(std::span<const double> obs, int action, int actions) {
    std::vector<double> x(obs.begin(), obs.end());
    for (int a = 0; a < actions; ++a) x.push_back(a == action ? 1.0 : 0.0);
    return x;
}

}  // namespace detail

inline double critic_value(const Mlp& critic, std::span<const double> obs, int action,
                           int actions) {
    return critic.forward(detail::critic_input(obs, action, actions))[0];
}

// One-step advantage: A = r + gamma * Q(o', a') - Q(o, a). Terminal
// transitions drop the bootstrap term. next_action is the acting
// policy's argmax at o' (the buffer stores no action for the step after
// the last).
inline double advantage(const Mlp& critic, const Transition& tr, double gamma, int next_action,
                        int actions) {
    double a = tr.reward - critic_value(critic, tr.obs, tr.action, actions);
    if (!tr.terminal) a += gamma * critic_value(critic, tr.next_obs, next_action, actions);
    return a;
}

inline int greedy_next_action(const Mlp& actor, const Transition& tr) {
    if (tr.terminal) return 0;
    return static_cast<int>(argmax(actor.forward(tr.next_obs)));
}

struct CriticBatchItem {
    const Transition* tr = nullptr;
    int next_action = 0;
};

// Mean squared advantage over the batch, with the bootstrap read from
// the frozen critic snapshot. This is the exact function the update
// takes one descent step on, and the one the finite-difference check
// probes.
inline double critic_loss(const Mlp& critic, const Mlp& critic_target,
                          std::span<const CriticBatchItem> batch, double gamma, int actions) {
    if (batch.empty()) throw InvalidInput("critic_loss: empty batch");
    double loss = 0.0;
    for (const CriticBatchItem& it : batch) {
        const Transition& tr = *it.tr;
        double y = tr.reward;
        if (!tr.terminal)
            y += gamma * critic_value(critic_target, tr.next_obs, it.next_action, actions);
        const double a = y - critic_value(critic, tr.obs, tr.action, actions);
        loss += a * a;
    }
    return loss / static_cast<double>(batch.size());
}

// One gradient-descent step on the squared-advantage loss; returns the
// pre-step loss.
inline double critic_update(Mlp& critic, const Mlp& critic_target,
                            std::span<const CriticBatchItem> batch, double gamma, int actions,
                            double learning_rate) {
    if (batch.empty()) throw InvalidInput("critic_update: empty batch");
    Mlp::Gradients grad = critic.make_gradients();
    double loss = 0.0;
    Mlp::Trace trace;
    for (const CriticBatchItem& it : batch) {
        const Transition& tr = *it.tr;
        double y = tr.reward;
        if (!tr.terminal)
            y += gamma * critic_value(critic_target, tr.next_obs, it.next_action, actions);
        const std::vector<double> x = detail::critic_input(tr.obs, tr.action, actions);
        const double q = critic.forward(x, trace)[0];
        const double a = y - q;
        loss += a * a;
        // d/dtheta (y - Q)^2 = -2 (y - Q) dQ/dtheta
        const double dLdq = -2.0 * a / static_cast<double>(batch.size());
        critic.backward(trace, std::span<const double>(&dLdq, 1), grad);
    }
    loss /= static_cast<double>(batch.size());
    if (!std::isfinite(loss)) throw NumericalError("critic_update: non-finite loss");
    critic.apply(grad, -learning_rate);
    return loss;
}

struct ActorBatchItem {
    const Transition* tr = nullptr;
    double advantage = 0.0;
};

struct ActorUpdateStats {
    double objective = 0.0;      // pre-step clip objective
    double clip_fraction = 0.0;  // samples with ratio outside [1-eps, 1+eps]
    int skipped = 0;             // non-finite ratios (old-policy underflow)
};

// Mean clipped surrogate over the batch (the quantity the update
// ascends and the finite-difference check probes).
inline double clip_objective(const Mlp& actor, const Mlp& actor_old,
                             std::span<const ActorBatchItem> batch, double eps) {
    if (batch.empty()) throw InvalidInput("clip_objective: empty batch");
    double obj = 0.0;
    int used = 0;
    for (const ActorBatchItem& it : batch) {
        const Transition& tr = *it.tr;
        const auto a = static_cast<std::size_t>(tr.action);
        const double lp = log_softmax_at(actor.forward(tr.obs), a);
        const double lp_old = log_softmax_at(actor_old.forward(tr.obs), a);
        const double ratio = std::exp(lp - lp_old);
        if (!std::isfinite(ratio)) continue;
        const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
        obj += std::min(ratio * it.advantage, clipped * it.advantage);
        ++used;
    }
    if (used == 0) throw NumericalError("clip_objective: every ratio was non-finite");
    return obj / static_cast<double>(used);
}

// One gradient-ascent step on the clip objective. Samples whose ratio
// saturates the clip contribute no gradient; samples whose old-policy
// probability underflows are skipped and counted.
inline ActorUpdateStats actor_update(Mlp& actor, const Mlp& actor_old,
                                     std::span<const ActorBatchItem> batch, double eps,
                                     double learning_rate) {
    if (batch.empty()) throw InvalidInput("actor_update: empty batch");
    Mlp::Gradients grad = actor.make_gradients();
    ActorUpdateStats stats;
    int used = 0;
    Mlp::Trace trace;
    for (const ActorBatchItem& it : batch) {
        const Transition& tr = *it.tr;
        const auto a = static_cast<std::size_t>(tr.action);
        const std::vector<double> logits = actor.forward(tr.obs, trace);
        const double lp = log_softmax_at(logits, a);
        const double lp_old = log_softmax_at(actor_old.forward(tr.obs), a);
        const double ratio = std::exp(lp - lp_old);
        if (!std::isfinite(ratio)) {
            ++stats.skipped;
            continue;
        }
        ++used;
        const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
        if (ratio < 1.0 - eps || ratio > 1.0 + eps) stats.clip_fraction += 1.0;
        stats.objective += std::min(ratio * it.advantage, clipped * it.advantage);

        // Gradient flows only while the unclipped branch attains the min.
        if (ratio * it.advantage <= clipped * it.advantage) {
            const std::vector<double> p = softmax(logits);
            std::vector<double> dOdz(p.size());
            const double scale = it.advantage * ratio;
            for (std::size_t j = 0; j < p.size(); ++j)
                dOdz[j] = scale * ((j == a ? 1.0 : 0.0) - p[j]);
            actor.backward(trace, dOdz, grad);
        }
    }
    if (used == 0) throw NumericalError("actor_update: every ratio was non-finite");
    stats.objective /= static_cast<double>(used);
    stats.clip_fraction /= static_cast<double>(used);
    grad.scale(1.0 / static_cast<double>(used));
    actor.apply(grad, learning_rate);
    return stats;
}

}  // namespace swarmsense
