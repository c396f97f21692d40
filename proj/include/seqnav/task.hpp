#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "seqnav/angles.hpp"

namespace seqnav {

/// SE(2) robot pose. theta stays in (-pi, pi] after any write.
struct PlanarPose {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
};

/// SE(2) goal pose.
struct Goal {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
};

/// Ordered goal sequence for one episode. Immutable once built.
class GoalSequence {
public:
    explicit GoalSequence(std::vector<Goal> goals);

    const Goal& at(std::size_t index_1based) const { return goals_[index_1based - 1]; }
    std::size_t size() const { return goals_.size(); }
    const std::vector<Goal>& goals() const { return goals_; }

private:
    std::vector<Goal> goals_;
};

enum class SwitchKind { direct, stop };

struct SwitchEvent {
    std::int64_t step = 0;
    SwitchKind kind = SwitchKind::direct;
};

/// Goal counter k plus the switch bookkeeping for the episode.
/// k counts goals reached: the active goal is g_{k+1} while k < N.
struct GoalProgress {
    std::size_t k = 0;
    std::vector<SwitchEvent> switch_events;
};

/// Reaching-condition thresholds. Angular limits are optional: an empty
/// optional means unbounded, used by the relaxed training variants.
struct ReachThresholds {
    double eps_xy = 0.1;
    std::optional<double> eps_theta = kPi / 36.0;
    double eps_xy_plus = 0.1;
    std::optional<double> eps_theta_plus = kPi / 36.0;
    double v_stop = 0.1;      // m/s
    double omega_stop = 0.1;  // rad/s
};

/// Parameters of the sequential goal reward: kernel width on the combined
/// error, width of the distance gate on the heading term, heading weight.
struct SequentialRewardConfig {
    double sigma_g = 1.0;      // m
    double sigma_theta = 1.0;  // m, gate width on d_xy
    double lambda_theta = 0.5; // 0 disables the heading term
};

/// Parameters of the single-goal time-gated tracking reward.
struct BaselineRewardConfig {
    double sigma_pos = 0.5;        // m
    double sigma_heading = kPi / 6.0;
    double episode_length = 8.0;   // T, s
    double reward_window = 2.0;    // T_r, s
};

/// Goal expressed in the robot base frame.
struct GoalCommand {
    double dx = 0.0;
    double dy = 0.0;
    double dtheta = 0.0;
};

/// Smooth unit kernel 1 / (1 + (e/sigma)^2). Throws for sigma <= 0.
double kernel(double e, double sigma);

/// Planar distance to the goal position.
double goal_distance(const PlanarPose& pose, const Goal& goal);

/// Absolute wrapped heading error to the goal.
double goal_heading_error(const PlanarPose& pose, const Goal& goal);

/// Combined position/heading error d_xy + lambda * kernel(d_xy, sigma_theta) * d_theta.
/// The gate fades the heading term out when the robot is far from the goal.
double pose_error(const PlanarPose& pose, const Goal& goal, const SequentialRewardConfig& cfg);

/// Direct-switch condition: inside both pose thresholds, velocity unrestricted.
bool reached_direct(const PlanarPose& pose, const Goal& goal, const ReachThresholds& th);

/// Stop-switch condition: inside the relaxed thresholds while nearly
/// stationary. v and omega are magnitudes.
bool reached_stop(const PlanarPose& pose, double v, double omega, const Goal& goal,
                  const ReachThresholds& th);

/// Advance the goal counter by at most one if the active goal's reaching
/// condition holds. The direct condition wins when both hold in one step.
GoalProgress advance_goal(const GoalProgress& progress, const GoalSequence& seq,
                          const PlanarPose& pose, double v, double omega,
                          const ReachThresholds& th, std::int64_t step = 0);

/// Sequential goal reward: (k + kernel(e, sigma_g)) / N while goals remain,
/// 1 once the sequence is complete. Continuous across switches.
double sequential_reward(const GoalProgress& progress, const GoalSequence& seq,
                         const PlanarPose& pose, const SequentialRewardConfig& cfg);

/// Single-goal tracking reward: kernel(e, sigma) gated to the final
/// reward_window seconds of the episode, normalized by the window length.
double baseline_track_reward(double e, double sigma, double t, const BaselineRewardConfig& cfg);

/// Rotate a world-frame goal into the robot base frame.
GoalCommand goal_command(const PlanarPose& pose, const Goal& goal);

/// Lookahead window of n goal commands starting at the active goal; indices
/// past the end repeat the final goal so the window size never changes.
std::vector<GoalCommand> lookahead_commands(const GoalProgress& progress, const GoalSequence& seq,
                                            const PlanarPose& pose, std::size_t n);

}  // namespace seqnav
