#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "seqnav/curriculum.hpp"
#include "seqnav/rng.hpp"
#include "seqnav/sim.hpp"
#include "seqnav/task.hpp"

namespace seqnav {

enum class RewardMode { sequential, baseline };

enum class TerminationCause { none, fallen, timeout, sequence_complete };

const char* to_string(TerminationCause cause);

/// Per-episode randomization ranges. Position jitter is zero during training
/// (goals are sampled relative to the start pose anyway) and small at
/// evaluation so a benchmark batch forms a perturbation ensemble around the
/// fixed track.
struct RandomizationConfig {
    double mu_lo = 0.4;
    double mu_hi = 1.0;
    double init_speed_lo = 0.0;
    double init_speed_hi = 1.0;
    double heading_jitter = kPi;  // rad, +/- on the initial heading
    double pos_jitter = 0.0;      // m, +/- on the initial position
    double a_max_jitter = 0.2;    // fraction, +/- on the acceleration gain

    // Observation noise standard deviations (training only).
    double noise_vel = 0.05;        // m/s, longitudinal and lateral channels
    double noise_omega = 0.05;      // rad/s
    double noise_cmd_pos = 0.02;    // m, goal command dx/dy
    double noise_cmd_theta = 0.02;  // rad, goal command dtheta
};

/// Weights of the auxiliary reward terms. The task reward dominates; these
/// keep the actions smooth and penalize traction loss. The baseline-specific
/// terms reproduce the single-goal reward suite.
struct AuxRewardConfig {
    double w_action_rate = 1e-4;  // on |cmd_t - cmd_{t-1}|^2, physical units
    double w_yaw_accel = 1e-4;    // on alpha^2
    double fall_penalty = 10.0;   // subtracted once on a traction violation

    // Baseline reward suite.
    double w_track_pos = 1.0;
    double w_track_heading = 0.5;
    double w_forward = 0.1;    // velocity projection toward the goal when far
    double forward_dist = 1.0; // m, "far" threshold
    double w_stand = 0.1;      // low-speed bonus near the goal
    double stand_dist = 0.5;   // m
    double w_stall = 0.1;      // penalty for idling far from the goal
    double stall_speed = 0.3;  // m/s
    double stall_dist = 1.0;   // m
};

struct EnvConfig {
    std::size_t num_envs = 256;
    double episode_length = 8.0;  // s
    std::size_t n_train = 2;      // goals per sampled sequence
    std::size_t n_lookahead = 2;  // goal commands in the observation
    RewardMode reward_mode = RewardMode::sequential;
    // After the last goal the reward holds at 1 until timeout, which is what
    // makes finishing worth more than hovering at the final switch boundary.
    // Enabling regeneration resamples goals instead (continuous operation).
    bool regenerate_on_complete = false;
    bool eval_mode = false;  // no noise, no auto-reset, terminate on completion
    double pre_step = 0.5;   // m, goal generation forward offset

    ReachThresholds thresholds;
    RandomizationConfig randomization;
    DynamicsConfig dynamics;
    SequentialRewardConfig seq_reward;
    BaselineRewardConfig base_reward;
    AuxRewardConfig aux;
    CurriculumRanges curriculum_ranges;

    std::size_t observation_dim() const { return 7 + 3 * n_lookahead; }
    std::int64_t episode_steps() const {
        return static_cast<std::int64_t>(std::llround(episode_length / dynamics.dt));
    }
};

/// Everything the trainer needs to know about one environment step.
struct StepInfo {
    std::size_t k = 0;
    double speed = 0.0;
    std::vector<SwitchEvent> new_switches;
};

struct EpisodeRecord {
    TerminationCause cause = TerminationCause::none;
    double episode_return = 0.0;
    std::int64_t episode_length = 0;
    std::size_t goals_reached = 0;
};

/// Vectorized episode manager: batched reset/step over num_envs independent
/// environments, observation assembly with the lookahead window, reward
/// dispatch, termination, domain randomization, and curriculum accounting.
class VecEnv {
public:
    VecEnv(EnvConfig config, std::uint64_t seed);

    /// Reset every environment and return the initial observation batch.
    const Eigen::MatrixXd& reset_all();

    /// Reset one environment from an explicit stream (testing hook).
    void reset_env(std::size_t index, RngStream& rng);

    /// Step every live environment with one action row each (raw policy
    /// actions in [-1, 1] per axis, scaled to the acceleration limits).
    /// Throws if the batch dimension does not match.
    void step(const Eigen::MatrixXd& actions);

    // Batched results of the last step/reset.
    const Eigen::MatrixXd& observations() const { return obs_; }
    const Eigen::VectorXd& rewards() const { return rewards_; }
    const std::vector<std::uint8_t>& terminated() const { return terminated_; }
    const std::vector<TerminationCause>& causes() const { return causes_; }
    const std::vector<StepInfo>& infos() const { return infos_; }

    /// Time-limit terminations (a subset of terminated): the value target
    /// should bootstrap from the final observation instead of stopping.
    const std::vector<std::uint8_t>& truncated() const { return truncated_; }
    /// Observation at the terminal state, before any auto-reset, valid on
    /// rows where terminated is set.
    const Eigen::MatrixXd& final_observations() const { return final_obs_; }

    /// Episodes that finished during the most recent step call.
    const std::vector<EpisodeRecord>& finished_episodes() const { return finished_; }

    /// True once every environment is done (eval mode only).
    bool all_done() const;

    /// Completion time in seconds for a done eval environment, if it
    /// completed its sequence.
    std::optional<double> completion_time(std::size_t index) const;

    CurriculumState& curriculum() { return curriculum_; }
    const CurriculumState& curriculum() const { return curriculum_; }
    /// Apply one curriculum update from the rolling success window.
    void update_curriculum();

    /// Sampling ranges at the current curriculum progress.
    SamplingRanges active_ranges() const;

    /// Use a fixed goal sequence (world frame) for every episode instead of
    /// curriculum sampling. Benchmark tracks are pinned this way.
    void set_fixed_sequence(const GoalSequence& seq);

    /// Write per-environment trajectory CSV files into a directory.
    void enable_trajectory_log(const std::string& dir);

    const EnvConfig& config() const { return config_; }

    // Mid-episode state capture for exact training resume.
    struct Snapshot {
        std::vector<double> doubles;
        std::vector<std::uint64_t> counters;
    };
    Snapshot snapshot() const;
    void restore(const Snapshot& snap);

private:
    struct Slot {
        PlanarState state;
        std::vector<Goal> goals;
        GoalProgress progress;
        std::int64_t step_in_episode = 0;
        std::uint64_t episode_counter = 0;
        std::uint32_t sequence_index = 0;
        Eigen::Vector3d prev_cmd = Eigen::Vector3d::Zero();  // clamped, physical units
        double mu = 0.7;
        double accel_gain = 1.0;
        bool done = false;
        TerminationCause cause = TerminationCause::none;
        std::int64_t completion_step = -1;
        bool reached_any = false;  // baseline-mode outcome flag
        double episode_return = 0.0;
    };

    void sample_episode(Slot& slot, std::size_t index, RngStream& rng);
    void regenerate_sequence(Slot& slot, std::size_t index);
    void write_observation(std::size_t index);
    double compute_reward(Slot& slot, const ActionCmd& cmd, const Eigen::Vector3d& prev_cmd,
                          bool fell, double t) const;
    DynamicsConfig episode_dynamics(const Slot& slot) const;
    void log_row(std::size_t index, const Slot& slot, double reward, const char* event);
    void write_goal_sidecar(std::size_t index) const;

    EnvConfig config_;
    std::uint64_t seed_;
    std::vector<Slot> slots_;
    CurriculumState curriculum_;
    std::optional<std::vector<Goal>> fixed_goals_;

    Eigen::MatrixXd obs_;
    Eigen::MatrixXd final_obs_;
    Eigen::VectorXd rewards_;
    std::vector<std::uint8_t> terminated_;
    std::vector<std::uint8_t> truncated_;
    std::vector<TerminationCause> causes_;
    std::vector<StepInfo> infos_;
    std::vector<EpisodeRecord> finished_;

    std::string traj_dir_;
    std::vector<std::ofstream> traj_files_;
};

}  // namespace seqnav
