#include "seqnav/env.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

namespace seqnav {

namespace {

double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

GoalSequence make_sequence(const std::vector<Goal>& goals) { return GoalSequence{goals}; }

}  // namespace

const char* to_string(TerminationCause cause) {
    switch (cause) {
        case TerminationCause::none: return "none";
        case TerminationCause::fallen: return "fallen";
        case TerminationCause::timeout: return "timeout";
        case TerminationCause::sequence_complete: return "sequence_complete";
    }
    return "unknown";
}

VecEnv::VecEnv(EnvConfig config, std::uint64_t seed)
    : config_(std::move(config)), seed_(seed) {
    if (config_.num_envs == 0) {
        throw std::invalid_argument("VecEnv: num_envs must be positive");
    }
    if (config_.n_train == 0) {
        throw std::invalid_argument("VecEnv: n_train must be positive");
    }
    slots_.resize(config_.num_envs);
    const auto b = static_cast<Eigen::Index>(config_.num_envs);
    const auto d = static_cast<Eigen::Index>(config_.observation_dim());
    obs_.setZero(b, d);
    final_obs_.setZero(b, d);
    rewards_.setZero(b);
    terminated_.assign(config_.num_envs, 0);
    truncated_.assign(config_.num_envs, 0);
    causes_.assign(config_.num_envs, TerminationCause::none);
    infos_.resize(config_.num_envs);
}

SamplingRanges VecEnv::active_ranges() const {
    return interp_ranges(curriculum_.c, config_.curriculum_ranges);
}

void VecEnv::set_fixed_sequence(const GoalSequence& seq) { fixed_goals_ = seq.goals(); }

const Eigen::MatrixXd& VecEnv::reset_all() {
    for (std::size_t i = 0; i < slots_.size(); ++i) {
        Slot& slot = slots_[i];
        RngStream rng{seed_, kRngEpisode, static_cast<std::uint64_t>(i),
                      slot.episode_counter + 1};
        reset_env(i, rng);
    }
    return obs_;
}

void VecEnv::reset_env(std::size_t index, RngStream& rng) {
    if (index >= slots_.size()) {
        throw std::invalid_argument("VecEnv: environment index out of range");
    }
    sample_episode(slots_[index], index, rng);
    write_observation(index);
}

void VecEnv::sample_episode(Slot& slot, std::size_t index, RngStream& rng) {
    slot.episode_counter += 1;
    slot.sequence_index = 0;

    const RandomizationConfig& rz = config_.randomization;
    slot.mu = rng.uniform(rz.mu_lo, rz.mu_hi);
    slot.accel_gain = rng.uniform(1.0 - rz.a_max_jitter, 1.0 + rz.a_max_jitter);

    slot.state = PlanarState{};
    slot.state.pose.x = rng.uniform(-rz.pos_jitter, rz.pos_jitter);
    slot.state.pose.y = rng.uniform(-rz.pos_jitter, rz.pos_jitter);
    slot.state.pose.theta = wrap(rng.uniform(-rz.heading_jitter, rz.heading_jitter));
    slot.state.v_long = rng.uniform(rz.init_speed_lo, rz.init_speed_hi);

    if (fixed_goals_) {
        slot.goals = *fixed_goals_;
    } else {
        RngStream seq_rng{seed_, kRngSequence, static_cast<std::uint64_t>(index),
                          slot.episode_counter, slot.sequence_index};
        slot.goals = sample_sequence(slot.state.pose, config_.n_train, active_ranges(), seq_rng,
                                     config_.pre_step)
                         .goals();
    }

    slot.progress = GoalProgress{};
    slot.step_in_episode = 0;
    slot.prev_cmd.setZero();
    slot.done = false;
    slot.cause = TerminationCause::none;
    slot.completion_step = -1;
    slot.reached_any = false;
    slot.episode_return = 0.0;

    if (!traj_dir_.empty()) {
        write_goal_sidecar(index);
        log_row(index, slot, 0.0, "-");
    }
}

void VecEnv::write_goal_sidecar(std::size_t index) const {
    if (traj_dir_.empty()) {
        return;
    }
    char name[64];
    std::snprintf(name, sizeof(name), "env_%03zu.goals.csv", index);
    std::ofstream out(std::filesystem::path(traj_dir_) / name);
    out << "x,y,theta\n";
    for (const Goal& g : slots_[index].goals) {
        char line[128];
        std::snprintf(line, sizeof(line), "%.9g,%.9g,%.9g\n", g.x, g.y, g.theta);
        out << line;
    }
}

void VecEnv::regenerate_sequence(Slot& slot, std::size_t index) {
    slot.sequence_index += 1;
    if (fixed_goals_) {
        slot.goals = *fixed_goals_;
    } else {
        RngStream seq_rng{seed_, kRngSequence, static_cast<std::uint64_t>(index),
                          slot.episode_counter, slot.sequence_index};
        slot.goals = sample_sequence(slot.state.pose, config_.n_train, active_ranges(), seq_rng,
                                     config_.pre_step)
                         .goals();
    }
    slot.progress = GoalProgress{};
    if (!traj_dir_.empty()) {
        write_goal_sidecar(index);
    }
}

DynamicsConfig VecEnv::episode_dynamics(const Slot& slot) const {
    DynamicsConfig dyn = config_.dynamics;
    dyn.mu = slot.mu;
    dyn.a_max *= slot.accel_gain;
    return dyn;
}

void VecEnv::step(const Eigen::MatrixXd& actions) {
    if (actions.rows() != static_cast<Eigen::Index>(config_.num_envs) || actions.cols() != 3) {
        throw std::invalid_argument("VecEnv::step: expected a num_envs x 3 action batch");
    }
    finished_.clear();

    for (std::size_t i = 0; i < slots_.size(); ++i) {
        Slot& slot = slots_[i];
        terminated_[i] = 0;
        truncated_[i] = 0;
        causes_[i] = TerminationCause::none;
        infos_[i] = StepInfo{};

        if (slot.done) {  // eval latch: sequence finished or fell, hold position
            rewards_(static_cast<Eigen::Index>(i)) = 0.0;
            infos_[i].k = slot.progress.k;
            infos_[i].speed = slot.state.speed();
            continue;
        }

        const DynamicsConfig dyn = episode_dynamics(slot);
        Eigen::Vector3d cmd_vec;
        cmd_vec.x() = clamp_unit(actions(static_cast<Eigen::Index>(i), 0)) * dyn.a_max;
        cmd_vec.y() = clamp_unit(actions(static_cast<Eigen::Index>(i), 1)) * dyn.a_max;
        cmd_vec.z() = clamp_unit(actions(static_cast<Eigen::Index>(i), 2)) * dyn.alpha_max;
        const ActionCmd cmd{cmd_vec.x(), cmd_vec.y(), cmd_vec.z()};

        slot.state = step_dynamics(slot.state, cmd, dyn);
        slot.step_in_episode += 1;
        const double t = static_cast<double>(slot.step_in_episode) * dyn.dt;
        const bool fell = check_fall(slot.state, dyn);

        std::size_t switches_this_step = 0;
        if (config_.reward_mode == RewardMode::sequential) {
            const GoalSequence seq = make_sequence(slot.goals);
            const std::size_t before = slot.progress.k;
            slot.progress =
                advance_goal(slot.progress, seq, slot.state.pose, slot.state.speed(),
                             std::abs(slot.state.omega), config_.thresholds, slot.step_in_episode);
            switches_this_step = slot.progress.k - before;
            if (switches_this_step > 0) {
                infos_[i].new_switches.push_back(slot.progress.switch_events.back());
                if (!config_.eval_mode) {
                    curriculum_ = record_outcome(curriculum_, true);
                }
            }
        } else {
            const Goal& g = slot.goals.front();
            if (reached_direct(slot.state.pose, g, config_.thresholds) ||
                reached_stop(slot.state.pose, slot.state.speed(), std::abs(slot.state.omega), g,
                             config_.thresholds)) {
                slot.reached_any = true;
            }
        }

        const double reward = compute_reward(slot, cmd, slot.prev_cmd, fell, t);
        slot.episode_return += reward;
        rewards_(static_cast<Eigen::Index>(i)) = reward;
        slot.prev_cmd = cmd_vec;

        const bool seq_done = config_.reward_mode == RewardMode::sequential &&
                              slot.progress.k == slot.goals.size();
        TerminationCause cause = TerminationCause::none;
        if (fell) {
            cause = TerminationCause::fallen;
        } else if (seq_done && config_.eval_mode) {
            cause = TerminationCause::sequence_complete;
            slot.completion_step = slot.step_in_episode;
        } else if (slot.step_in_episode >= config_.episode_steps()) {
            cause = TerminationCause::timeout;
        }

        if (!traj_dir_.empty()) {
            const char* event = "-";
            if (cause == TerminationCause::fallen) {
                event = "fall";
            } else if (cause == TerminationCause::sequence_complete) {
                event = "complete";
            } else if (cause == TerminationCause::timeout) {
                event = "timeout";
            } else if (switches_this_step > 0) {
                event = slot.progress.switch_events.back().kind == SwitchKind::direct
                            ? "switch_direct"
                            : "switch_stop";
            }
            log_row(i, slot, reward, event);
        }

        infos_[i].k = slot.progress.k;
        infos_[i].speed = slot.state.speed();

        if (cause != TerminationCause::none) {
            terminated_[i] = 1;
            truncated_[i] = cause == TerminationCause::timeout ? 1 : 0;
            causes_[i] = cause;
            slot.cause = cause;

            EpisodeRecord rec;
            rec.cause = cause;
            rec.episode_return = slot.episode_return;
            rec.episode_length = slot.step_in_episode;
            rec.goals_reached = slot.progress.k;
            finished_.push_back(rec);

            if (!config_.eval_mode) {
                if (config_.reward_mode == RewardMode::sequential) {
                    // Unreached goals of the active sequence count against the
                    // curriculum window.
                    for (std::size_t g = slot.progress.k; g < slot.goals.size(); ++g) {
                        curriculum_ = record_outcome(curriculum_, false);
                    }
                } else {
                    curriculum_ = record_outcome(curriculum_, slot.reached_any);
                }
            }

            write_observation(i);
            final_obs_.row(static_cast<Eigen::Index>(i)) = obs_.row(static_cast<Eigen::Index>(i));
            if (config_.eval_mode) {
                slot.done = true;
            } else {
                RngStream rng{seed_, kRngEpisode, static_cast<std::uint64_t>(i),
                              slot.episode_counter + 1};
                sample_episode(slot, i, rng);
                write_observation(i);
            }
        } else {
            if (seq_done && config_.regenerate_on_complete) {
                regenerate_sequence(slot, i);
            }
            write_observation(i);
        }
    }
}

double VecEnv::compute_reward(Slot& slot, const ActionCmd& cmd, const Eigen::Vector3d& prev_cmd,
                              bool fell, double t) const {
    const AuxRewardConfig& aux = config_.aux;
    double r = 0.0;

    if (config_.reward_mode == RewardMode::sequential) {
        const GoalSequence seq = make_sequence(slot.goals);
        r = sequential_reward(slot.progress, seq, slot.state.pose, config_.seq_reward);
    } else {
        const Goal& g = slot.goals.front();
        const double d_xy = goal_distance(slot.state.pose, g);
        const double d_th = goal_heading_error(slot.state.pose, g);
        r += aux.w_track_pos * baseline_track_reward(d_xy, config_.base_reward.sigma_pos, t,
                                                     config_.base_reward);
        r += aux.w_track_heading * baseline_track_reward(d_th, config_.base_reward.sigma_heading,
                                                         t, config_.base_reward);
        const double speed = slot.state.speed();
        if (d_xy > aux.forward_dist) {
            // Reward the velocity component pointing at the goal.
            const Heading h = heading_vec(slot.state.pose.theta);
            const double vx = slot.state.v_long * h.cx - slot.state.v_lat * h.cy;
            const double vy = slot.state.v_long * h.cy + slot.state.v_lat * h.cx;
            const double proj =
                (vx * (g.x - slot.state.pose.x) + vy * (g.y - slot.state.pose.y)) / d_xy;
            r += aux.w_forward * std::max(0.0, proj) / config_.dynamics.v_max;
        }
        if (d_xy < aux.stand_dist) {
            r += aux.w_stand * (1.0 - std::min(speed, 1.0));
        }
        if (speed < aux.stall_speed && d_xy > aux.stall_dist) {
            r -= aux.w_stall;
        }
    }

    const double ddx = cmd.a_long - prev_cmd.x();
    const double ddy = cmd.a_lat - prev_cmd.y();
    const double dda = cmd.alpha - prev_cmd.z();
    r -= aux.w_action_rate * (ddx * ddx + ddy * ddy + dda * dda);
    r -= aux.w_yaw_accel * cmd.alpha * cmd.alpha;
    if (fell) {
        r -= aux.fall_penalty;
    }
    return r;
}

void VecEnv::write_observation(std::size_t index) {
    Slot& slot = slots_[index];
    auto row = obs_.row(static_cast<Eigen::Index>(index));
    const bool noisy = !config_.eval_mode;
    RngStream noise{seed_, kRngObsNoise, static_cast<std::uint64_t>(index), slot.episode_counter,
                    static_cast<std::uint64_t>(slot.step_in_episode)};
    const RandomizationConfig& rz = config_.randomization;

    row(0) = slot.state.v_long + (noisy ? rz.noise_vel * noise.normal() : 0.0);
    row(1) = slot.state.v_lat + (noisy ? rz.noise_vel * noise.normal() : 0.0);
    row(2) = slot.state.omega + (noisy ? rz.noise_omega * noise.normal() : 0.0);
    row(3) = slot.prev_cmd.x() / config_.dynamics.a_max;
    row(4) = slot.prev_cmd.y() / config_.dynamics.a_max;
    row(5) = slot.prev_cmd.z() / config_.dynamics.alpha_max;
    const double steps = static_cast<double>(config_.episode_steps());
    row(6) = std::max(0.0, 1.0 - static_cast<double>(slot.step_in_episode) / steps);

    const GoalSequence seq = make_sequence(slot.goals);
    const auto cmds = lookahead_commands(slot.progress, seq, slot.state.pose, config_.n_lookahead);
    for (std::size_t j = 0; j < cmds.size(); ++j) {
        const auto base = static_cast<Eigen::Index>(7 + 3 * j);
        double dx = cmds[j].dx;
        double dy = cmds[j].dy;
        double dth = cmds[j].dtheta;
        if (noisy) {
            dx += rz.noise_cmd_pos * noise.normal();
            dy += rz.noise_cmd_pos * noise.normal();
            dth = wrap(dth + rz.noise_cmd_theta * noise.normal());
        }
        row(base) = dx;
        row(base + 1) = dy;
        row(base + 2) = dth;
    }
}

bool VecEnv::all_done() const {
    return std::all_of(slots_.begin(), slots_.end(), [](const Slot& s) { return s.done; });
}

std::optional<double> VecEnv::completion_time(std::size_t index) const {
    const Slot& slot = slots_.at(index);
    if (slot.cause != TerminationCause::sequence_complete || slot.completion_step < 0) {
        return std::nullopt;
    }
    return static_cast<double>(slot.completion_step) * config_.dynamics.dt;
}

void VecEnv::update_curriculum() { curriculum_ = update_progress(curriculum_); }

void VecEnv::enable_trajectory_log(const std::string& dir) {
    std::filesystem::create_directories(dir);
    traj_dir_ = dir;
    traj_files_.clear();
    traj_files_.reserve(slots_.size());
    for (std::size_t i = 0; i < slots_.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof(name), "env_%03zu.csv", i);
        std::filesystem::path path = std::filesystem::path(dir) / name;
        std::ofstream out(path);
        if (!out) {
            throw std::runtime_error("VecEnv: cannot open trajectory file " + path.string());
        }
        out << "t,x,y,theta,v_long,v_lat,omega,speed,k,reward,event\n";
        traj_files_.push_back(std::move(out));

        // Goal sidecar so plots can draw the track without re-deriving it.
        if (!slots_[i].goals.empty()) {
            write_goal_sidecar(i);
        }
    }
}

void VecEnv::log_row(std::size_t index, const Slot& slot, double reward, const char* event) {
    if (traj_files_.size() <= index) {
        return;
    }
    const double t = static_cast<double>(slot.step_in_episode) * config_.dynamics.dt;
    char line[320];
    std::snprintf(line, sizeof(line), "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%zu,%.9g,%s\n", t,
                  slot.state.pose.x, slot.state.pose.y, slot.state.pose.theta, slot.state.v_long,
                  slot.state.v_lat, slot.state.omega, slot.state.speed(), slot.progress.k, reward,
                  event);
    traj_files_[index] << line;
}

VecEnv::Snapshot VecEnv::snapshot() const {
    Snapshot snap;
    for (const Slot& slot : slots_) {
        snap.doubles.insert(snap.doubles.end(),
                            {slot.state.pose.x, slot.state.pose.y, slot.state.pose.theta,
                             slot.state.v_long, slot.state.v_lat, slot.state.omega,
                             slot.prev_cmd.x(), slot.prev_cmd.y(), slot.prev_cmd.z(), slot.mu,
                             slot.accel_gain, slot.episode_return});
        for (const Goal& g : slot.goals) {
            snap.doubles.insert(snap.doubles.end(), {g.x, g.y, g.theta});
        }
        snap.counters.push_back(static_cast<std::uint64_t>(slot.step_in_episode));
        snap.counters.push_back(slot.episode_counter);
        snap.counters.push_back(slot.sequence_index);
        snap.counters.push_back(slot.progress.k);
        snap.counters.push_back(slot.goals.size());
        snap.counters.push_back(slot.reached_any ? 1 : 0);
    }
    snap.counters.push_back(curriculum_.head);
    snap.counters.push_back(curriculum_.window.size());
    for (std::uint8_t o : curriculum_.window) {
        snap.counters.push_back(o);
    }
    snap.doubles.push_back(curriculum_.c);
    return snap;
}

void VecEnv::restore(const Snapshot& snap) {
    std::size_t di = 0;
    std::size_t ci = 0;
    auto take_d = [&]() { return snap.doubles.at(di++); };
    auto take_c = [&]() { return snap.counters.at(ci++); };
    for (Slot& slot : slots_) {
        slot.state.pose.x = take_d();
        slot.state.pose.y = take_d();
        slot.state.pose.theta = take_d();
        slot.state.v_long = take_d();
        slot.state.v_lat = take_d();
        slot.state.omega = take_d();
        slot.prev_cmd.x() = take_d();
        slot.prev_cmd.y() = take_d();
        slot.prev_cmd.z() = take_d();
        slot.mu = take_d();
        slot.accel_gain = take_d();
        slot.episode_return = take_d();
        slot.step_in_episode = static_cast<std::int64_t>(take_c());
        slot.episode_counter = take_c();
        slot.sequence_index = static_cast<std::uint32_t>(take_c());
        slot.progress = GoalProgress{};
        slot.progress.k = take_c();
        slot.goals.resize(take_c());
        slot.reached_any = take_c() != 0;
        for (Goal& g : slot.goals) {
            g.x = take_d();
            g.y = take_d();
            g.theta = take_d();
        }
        slot.done = false;
        slot.cause = TerminationCause::none;
    }
    curriculum_.head = take_c();
    curriculum_.window.resize(take_c());
    for (std::uint8_t& o : curriculum_.window) {
        o = static_cast<std::uint8_t>(take_c());
    }
    curriculum_.c = take_d();
    for (std::size_t i = 0; i < slots_.size(); ++i) {
        write_observation(i);
    }
}

}  // namespace seqnav
