#pragma once

#include <cstdint>
#include <vector>

#include "swarmsense/collective.hpp"
#include "swarmsense/coordinators.hpp"
#include "swarmsense/rl.hpp"
#include "swarmsense/simworld.hpp"

namespace swarmsense {

struct TrainConfig {
    int episodes = 300;           // E
    int minibatch = 64;           // H sampled step groups per update round
    double gamma = 0.95;
    double clip = 0.2;            // PPO epsilon
    int hidden = 64;              // W
    int hidden_layers = 3;
    double actor_lr = 3e-4;
    double critic_lr = 1e-3;
    int update_epochs = 4;        // gradient steps per round, one snapshot refresh per round
    std::size_t buffer_capacity = 512;
};

struct TrainLogRow {
    int episode = 0;
    double mean_reward = 0.0;
    double critic_loss = 0.0;
    double actor_objective = 0.0;
    double clip_fraction = 0.0;
};

struct TrainResult {
    std::vector<PolicyPair> policies;
    std::vector<TrainLogRow> log;
    std::uint64_t skipped_ratios = 0;
};

inline const char* kTrainLogCsvHeader =
    "episode,mean_reward,critic_loss,actor_objective,clip_fraction";

namespace detail {

// Shared post-episode update round: advantages frozen from the critic
// snapshot, critic descends its loss, actor ascends the clip objective,
// snapshots refresh once at the end.
inline void update_round(std::vector<PolicyPair>& policies, const TransitionBuffer& buffer,
                         const std::vector<std::size_t>& picks, const TrainConfig& cfg,
                         TrainLogRow& row, std::uint64_t& skipped) {
    const int agents = static_cast<int>(policies.size());
    double critic_loss_sum = 0.0;
    double actor_obj_sum = 0.0;
    double clip_frac_sum = 0.0;
    for (int u = 0; u < agents; ++u) {
        PolicyPair& pp = policies[static_cast<std::size_t>(u)];
        const int actions = pp.actor.output_dim();

        std::vector<CriticBatchItem> critic_batch;
        std::vector<ActorBatchItem> actor_batch;
        critic_batch.reserve(picks.size());
        actor_batch.reserve(picks.size());
        for (std::size_t gi : picks) {
            const Transition& tr = buffer.group(gi)[static_cast<std::size_t>(u)];
            if (!tr.valid) continue;
            const int next_a = greedy_next_action(pp.actor, tr);
            critic_batch.push_back({&tr, next_a});
            actor_batch.push_back(
                {&tr, advantage(pp.critic_target, tr, cfg.gamma, next_a, actions)});
        }
        if (critic_batch.empty()) {
            pp.refresh_snapshots();
            continue;
        }

        for (int e = 0; e < cfg.update_epochs; ++e) {
            const double loss = critic_update(pp.critic, pp.critic_target, critic_batch,
                                              cfg.gamma, actions, cfg.critic_lr);
            if (e == 0) critic_loss_sum += loss;
        }
        for (int e = 0; e < cfg.update_epochs; ++e) {
            const ActorUpdateStats st =
                actor_update(pp.actor, pp.actor_old, actor_batch, cfg.clip, cfg.actor_lr);
            skipped += static_cast<std::uint64_t>(st.skipped);
            if (e == 0) {
                actor_obj_sum += st.objective;
                clip_frac_sum += st.clip_fraction;
            }
        }
        pp.refresh_snapshots();
    }
    row.critic_loss = critic_loss_sum / agents;
    row.actor_objective = actor_obj_sum / agents;
    row.clip_fraction = clip_frac_sum / agents;
}

}  // namespace detail

// The full training loop: per period every agent picks a direction from
// its own observation, the swarm runs collective plan selection, the
// period executes, transitions land in the replay buffer; after each
// episode one update round runs (critic first, then actor, then the
// snapshot refresh). Deterministic for a fixed world seed.
inline TrainResult train_dorl(SimWorld& world, const TrainConfig& cfg, int train_periods) {
    if (cfg.episodes < 1) throw InvalidInput("train: episodes must be >= 1");
    if (train_periods < 1 || train_periods > world.time().periods)
        throw InvalidInput("train: bad training period count");

    const int agents = world.drones();
    const ObservationSpec ospec = world.obs_spec();

    TrainResult result;
    result.policies.reserve(static_cast<std::size_t>(agents));
    for (int u = 1; u <= agents; ++u) {
        Rng rng(sub_seed(world.master_seed(), "net-init", static_cast<std::uint64_t>(u)));
        result.policies.push_back(
            PolicyPair::make(ospec.dim(), kActionCount, cfg.hidden, cfg.hidden_layers, rng));
    }

    TransitionBuffer buffer(cfg.buffer_capacity);

    for (int ep = 1; ep <= cfg.episodes; ++ep) {
        world.reset(ep);
        std::vector<std::vector<double>> obs(static_cast<std::size_t>(agents));
        for (int u = 1; u <= agents; ++u)
            obs[static_cast<std::size_t>(u - 1)] = world.observation(u);

        double reward_sum = 0.0;
        for (int t = 1; t <= train_periods; ++t) {
            std::vector<int> actions(static_cast<std::size_t>(agents));
            std::vector<std::vector<PlanGroup>> groups(static_cast<std::size_t>(agents));
            std::vector<std::vector<const Plan*>> candidates(static_cast<std::size_t>(agents));
            for (int u = 1; u <= agents; ++u) {
                Rng arng(sub_seed(world.master_seed(), "act", static_cast<std::uint64_t>(ep),
                                  static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(u)));
                const int a = act(result.policies[static_cast<std::size_t>(u - 1)].actor,
                                  obs[static_cast<std::size_t>(u - 1)], true, arng);
                actions[static_cast<std::size_t>(u - 1)] = a;
                groups[static_cast<std::size_t>(u - 1)] = world.plan_groups(u, t);
                for (const Plan& p :
                     groups[static_cast<std::size_t>(u - 1)][static_cast<std::size_t>(a)].plans)
                    candidates[static_cast<std::size_t>(u - 1)].push_back(&p);
            }

            const SelectionResult sel =
                run_collective_selection(world.tree(), candidates, world.target(),
                                         world.knobs().beta, world.knobs().iterations);

            std::vector<Plan> plans;
            plans.reserve(static_cast<std::size_t>(agents));
            for (int u = 1; u <= agents; ++u)
                plans.push_back(*candidates[static_cast<std::size_t>(u - 1)][static_cast<std::size_t>(
                    sel.selected[static_cast<std::size_t>(u - 1)])]);

            const PeriodOutcome outcome = world.execute_period(t, plans);

            StepGroup group(static_cast<std::size_t>(agents));
            const bool terminal = t == train_periods;
            for (int u = 1; u <= agents; ++u) {
                Transition& tr = group[static_cast<std::size_t>(u - 1)];
                tr.obs = std::move(obs[static_cast<std::size_t>(u - 1)]);
                tr.action = actions[static_cast<std::size_t>(u - 1)];
                tr.reward = outcome.reward[static_cast<std::size_t>(u - 1)];
                tr.next_obs = world.observation(u);
                tr.terminal = terminal;
                reward_sum += tr.reward;
                obs[static_cast<std::size_t>(u - 1)] = tr.next_obs;
            }
            buffer.add(std::move(group));
        }

        TrainLogRow row;
        row.episode = ep;
        row.mean_reward = reward_sum / (static_cast<double>(agents) * train_periods);

        Rng srng(sub_seed(world.master_seed(), "sample", static_cast<std::uint64_t>(ep)));
        const std::vector<std::size_t> picks =
            buffer.sample(static_cast<std::size_t>(cfg.minibatch), srng);
        detail::update_round(result.policies, buffer, picks, cfg, row, result.skipped_ratios);
        result.log.push_back(row);
    }
    return result;
}

}  // namespace swarmsense
