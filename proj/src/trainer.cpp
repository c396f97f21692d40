#include "seqnav/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace seqnav {

namespace {

using nlohmann::json;

std::string iter_checkpoint_name(std::uint64_t iter) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "model_iter%06llu.bin",
                  static_cast<unsigned long long>(iter));
    return buf;
}

Checkpoint make_checkpoint(const TrainConfig& cfg, std::uint64_t seed, std::uint64_t iter,
                           const ActorCritic& ac, const RunningNorm& norm, const Adam& adam,
                           const VecEnv& env) {
    Checkpoint ckpt;
    ckpt.config_hash = config_hash(cfg);
    ckpt.seed = seed;
    ckpt.iteration = iter;
    ckpt.params = ac;
    ckpt.norm_count = norm.count();
    ckpt.norm_mean = norm.mean();
    ckpt.norm_m2 = norm.m2();
    TrainState ts;
    ts.adam_t = adam.t();
    ts.adam_m = adam.m();
    ts.adam_v = adam.v();
    ts.env = env.snapshot();
    ckpt.train_state = std::move(ts);
    return ckpt;
}

}  // namespace

TrainSummary train(const TrainConfig& cfg, std::uint64_t seed, const TrainOptions& opts) {
    cfg.ppo.validate();
    if (opts.out_dir.empty()) {
        throw std::invalid_argument("train: out_dir must be set");
    }
    std::error_code ec;
    std::filesystem::create_directories(opts.out_dir, ec);
    if (ec) {
        throw std::runtime_error("train: cannot create output directory " + opts.out_dir + ": " +
                                 ec.message());
    }

    VecEnv env(cfg.env, seed);
    CurriculumState& cur = env.curriculum();
    cur.c = cfg.curriculum.c_init;
    cur.step_size = cfg.curriculum.delta_c;
    cur.expand_threshold = cfg.curriculum.expand_threshold;
    cur.contract_threshold = cfg.curriculum.contract_threshold;
    cur.capacity = cfg.curriculum.window;

    const auto obs_dim = static_cast<Eigen::Index>(cfg.env.observation_dim());
    RngStream init_rng{seed, kRngInit};
    ActorCritic ac = ActorCritic::make(obs_dim, cfg.ppo.hidden, 3, cfg.ppo.init_log_std, init_rng);
    RunningNorm norm(obs_dim);
    Adam adam(ac.param_count(), cfg.ppo.lr);

    std::uint64_t start_iter = 0;
    const bool resuming = !opts.resume_from.empty();
    if (resuming) {
        Checkpoint ckpt = load_checkpoint(opts.resume_from);
        if (ckpt.config_hash != config_hash(cfg)) {
            throw std::runtime_error(
                "train: checkpoint was written under a different configuration");
        }
        if (!ckpt.train_state) {
            throw std::runtime_error("train: checkpoint has no training state, cannot resume");
        }
        ac = ckpt.params;
        norm.restore(ckpt.norm_count, ckpt.norm_mean, ckpt.norm_m2);
        adam.m() = ckpt.train_state->adam_m;
        adam.v() = ckpt.train_state->adam_v;
        adam.set_t(ckpt.train_state->adam_t);
        env.restore(ckpt.train_state->env);
        start_iter = ckpt.iteration;
    } else {
        env.reset_all();
    }

    const std::filesystem::path out_dir(opts.out_dir);
    std::ofstream metrics(out_dir / "metrics.ndjson",
                          resuming ? std::ios::app : std::ios::trunc);
    if (!metrics) {
        throw std::runtime_error("train: cannot open metrics file in " + opts.out_dir);
    }
    if (!resuming) {
        std::ofstream cfg_out(out_dir / "config.txt");
        cfg_out << serialize_config(cfg);
    }

    const auto t_len = static_cast<Eigen::Index>(cfg.ppo.steps_per_env);
    const auto b = static_cast<Eigen::Index>(cfg.env.num_envs);
    const Eigen::Index act_dim = 3;

    std::vector<Eigen::MatrixXd> obs_steps(static_cast<std::size_t>(t_len));
    std::vector<Eigen::MatrixXd> act_steps(static_cast<std::size_t>(t_len));
    std::vector<Eigen::VectorXd> logp_steps(static_cast<std::size_t>(t_len));
    Eigen::MatrixXd rewards(t_len, b);
    Eigen::MatrixXd values(t_len, b);
    Eigen::MatrixXd dones(t_len, b);

    const auto wall_start = std::chrono::steady_clock::now();
    TrainSummary summary;

    for (std::uint64_t iter = start_iter + 1; iter <= cfg.ppo.iterations; ++iter) {
        if (cfg.ppo.lr_anneal) {
            const double frac = 1.0 - static_cast<double>(iter - 1) /
                                          static_cast<double>(cfg.ppo.iterations);
            adam.set_lr(cfg.ppo.lr * frac);
        }

        // --- rollout collection ---
        std::size_t ep_count = 0;
        std::size_t falls = 0;
        std::size_t timeouts = 0;
        std::size_t completions = 0;
        double ep_return_sum = 0.0;
        double ep_len_sum = 0.0;

        const Eigen::ArrayXd sigma = ac.log_std.array().exp();
        for (Eigen::Index t = 0; t < t_len; ++t) {
            const Eigen::MatrixXd raw = env.observations();
            norm.update(raw);
            const Eigen::MatrixXd obs_n = norm.normalize(raw);
            const Eigen::MatrixXd mean = ac.actor.forward(obs_n);
            const Eigen::VectorXd value = ac.critic.forward(obs_n).col(0);

            RngStream action_rng{seed, kRngAction, iter, static_cast<std::uint64_t>(t)};
            Eigen::MatrixXd actions(b, act_dim);
            for (Eigen::Index i = 0; i < b; ++i) {
                for (Eigen::Index j = 0; j < act_dim; ++j) {
                    actions(i, j) = mean(i, j) + sigma(j) * action_rng.normal();
                }
            }
            const Eigen::VectorXd logp = gaussian_log_prob(actions, mean, ac.log_std);

            env.step(actions);
            Eigen::VectorXd r = env.rewards();

            // Time-limit terminations bootstrap from the terminal observation.
            const auto& trunc = env.truncated();
            for (Eigen::Index i = 0; i < b; ++i) {
                if (trunc[static_cast<std::size_t>(i)] != 0) {
                    const Eigen::MatrixXd fin =
                        norm.normalize(env.final_observations().row(i));
                    r(i) += cfg.ppo.gamma * ac.critic.forward(fin)(0, 0);
                }
            }

            for (const EpisodeRecord& rec : env.finished_episodes()) {
                ep_count += 1;
                ep_return_sum += rec.episode_return;
                ep_len_sum += static_cast<double>(rec.episode_length);
                switch (rec.cause) {
                    case TerminationCause::fallen: falls += 1; break;
                    case TerminationCause::timeout:
                        timeouts += 1;
                        // A timeout with every goal reached is a finished
                        // sequence holding its completed state.
                        if (cfg.env.reward_mode == RewardMode::sequential &&
                            rec.goals_reached >= cfg.env.n_train) {
                            completions += 1;
                        }
                        break;
                    case TerminationCause::sequence_complete: completions += 1; break;
                    case TerminationCause::none: break;
                }
            }

            obs_steps[static_cast<std::size_t>(t)] = obs_n;
            act_steps[static_cast<std::size_t>(t)] = actions;
            logp_steps[static_cast<std::size_t>(t)] = logp;
            rewards.row(t) = r.transpose();
            values.row(t) = value.transpose();
            for (Eigen::Index i = 0; i < b; ++i) {
                dones(t, i) = env.terminated()[static_cast<std::size_t>(i)] != 0 ? 1.0 : 0.0;
            }
        }

        const Eigen::VectorXd bootstrap =
            ac.critic.forward(norm.normalize(env.observations())).col(0);
        Eigen::MatrixXd advantages;
        Eigen::MatrixXd returns;
        gae(rewards, values, dones, bootstrap, cfg.ppo.gamma, cfg.ppo.lambda_gae, advantages,
            returns);

        // --- flatten to sample-major and normalize advantages ---
        const Eigen::Index m = t_len * b;
        Rollout ro;
        ro.obs.resize(m, obs_dim);
        ro.actions.resize(m, act_dim);
        ro.log_probs.resize(m);
        ro.values.resize(m);
        ro.advantages.resize(m);
        ro.returns.resize(m);
        for (Eigen::Index t = 0; t < t_len; ++t) {
            const auto st = static_cast<std::size_t>(t);
            ro.obs.middleRows(t * b, b) = obs_steps[st];
            ro.actions.middleRows(t * b, b) = act_steps[st];
            ro.log_probs.segment(t * b, b) = logp_steps[st];
            ro.values.segment(t * b, b) = values.row(t).transpose();
            ro.advantages.segment(t * b, b) = advantages.row(t).transpose();
            ro.returns.segment(t * b, b) = returns.row(t).transpose();
        }
        const double adv_mean = ro.advantages.mean();
        const double adv_std = std::sqrt(
            (ro.advantages.array() - adv_mean).square().sum() / static_cast<double>(m));
        ro.advantages = (ro.advantages.array() - adv_mean) / (adv_std + 1e-8);

        const UpdateStats stats = ppo_update(ac, ro, cfg.ppo, adam, seed, iter);
        if (!ac.all_finite()) {
            throw std::runtime_error("train: non-finite parameters after update at iteration " +
                                     std::to_string(iter));
        }

        if (cfg.curriculum.enabled && cfg.curriculum.update_period > 0 &&
            iter % cfg.curriculum.update_period == 0) {
            env.update_curriculum();
        }

        // --- metrics record (deterministic fields only) ---
        json rec;
        rec["iter"] = iter;
        rec["env_steps"] = iter * cfg.ppo.steps_per_env * cfg.env.num_envs;
        rec["episodes"] = ep_count;
        if (ep_count > 0) {
            rec["ep_return_mean"] = ep_return_sum / static_cast<double>(ep_count);
            rec["ep_len_mean"] = ep_len_sum / static_cast<double>(ep_count);
        } else {
            rec["ep_return_mean"] = nullptr;
            rec["ep_len_mean"] = nullptr;
        }
        rec["falls"] = falls;
        rec["timeouts"] = timeouts;
        rec["completions"] = completions;
        rec["success_rate"] = env.curriculum().success_rate();
        rec["window_fill"] = env.curriculum().window.size();
        rec["curriculum_c"] = env.curriculum().c;
        rec["loss_policy"] = stats.loss_policy;
        rec["loss_value"] = stats.loss_value;
        rec["entropy"] = stats.entropy;
        rec["kl"] = stats.kl;
        rec["clip_fraction"] = stats.clip_fraction;
        rec["grad_norm"] = stats.grad_norm;
        rec["aborted_minibatches"] = stats.aborted_minibatches;
        rec["log_std_mean"] = ac.log_std.mean();
        rec["lr"] = adam.lr();
        metrics << rec.dump() << "\n";
        metrics.flush();

        if (!opts.quiet && (iter == 1 || iter % 10 == 0 || iter == cfg.ppo.iterations)) {
            const double elapsed =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start)
                    .count();
            std::fprintf(stderr,
                         "iter %5llu/%llu  ret %8.3f  c %.2f  sr %.2f  kl %.4f  %6.1fs\n",
                         static_cast<unsigned long long>(iter),
                         static_cast<unsigned long long>(cfg.ppo.iterations),
                         ep_count > 0 ? ep_return_sum / static_cast<double>(ep_count) : 0.0,
                         env.curriculum().c, env.curriculum().success_rate(), stats.kl, elapsed);
        }

        if (cfg.checkpoint_interval > 0 && iter % cfg.checkpoint_interval == 0 &&
            iter != cfg.ppo.iterations) {
            const Checkpoint ckpt = make_checkpoint(cfg, seed, iter, ac, norm, adam, env);
            save_checkpoint(ckpt, (out_dir / iter_checkpoint_name(iter)).string());
        }
        summary.iterations_run = iter - start_iter;
    }

    const Checkpoint final_ckpt =
        make_checkpoint(cfg, seed, cfg.ppo.iterations, ac, norm, adam, env);
    const std::string final_path = (out_dir / "model_final.bin").string();
    save_checkpoint(final_ckpt, final_path);

    summary.final_checkpoint = final_path;
    summary.final_c = env.curriculum().c;
    summary.final_success_rate = env.curriculum().success_rate();
    return summary;
}

}  // namespace seqnav
