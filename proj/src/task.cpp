#include "seqnav/task.hpp"

#include <cmath>
#include <stdexcept>

namespace seqnav {

GoalSequence::GoalSequence(std::vector<Goal> goals) : goals_(std::move(goals)) {
    if (goals_.empty()) {
        throw std::invalid_argument("GoalSequence: needs at least one goal");
    }
}

double kernel(double e, double sigma) {
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("kernel: sigma must be positive");
    }
    double q = e / sigma;
    return 1.0 / (1.0 + q * q);
}

double goal_distance(const PlanarPose& pose, const Goal& goal) {
    return std::hypot(pose.x - goal.x, pose.y - goal.y);
}

double goal_heading_error(const PlanarPose& pose, const Goal& goal) {
    return std::abs(wrap(pose.theta - goal.theta));
}

double pose_error(const PlanarPose& pose, const Goal& goal, const SequentialRewardConfig& cfg) {
    double d_xy = goal_distance(pose, goal);
    if (cfg.lambda_theta == 0.0) {
        return d_xy;
    }
    double d_theta = goal_heading_error(pose, goal);
    return d_xy + cfg.lambda_theta * kernel(d_xy, cfg.sigma_theta) * d_theta;
}

bool reached_direct(const PlanarPose& pose, const Goal& goal, const ReachThresholds& th) {
    if (goal_distance(pose, goal) >= th.eps_xy) return false;
    if (th.eps_theta && goal_heading_error(pose, goal) >= *th.eps_theta) return false;
    return true;
}

bool reached_stop(const PlanarPose& pose, double v, double omega, const Goal& goal,
                  const ReachThresholds& th) {
    if (v >= th.v_stop || omega >= th.omega_stop) return false;
    if (goal_distance(pose, goal) >= th.eps_xy_plus) return false;
    if (th.eps_theta_plus && goal_heading_error(pose, goal) >= *th.eps_theta_plus) return false;
    return true;
}

GoalProgress advance_goal(const GoalProgress& progress, const GoalSequence& seq,
                          const PlanarPose& pose, double v, double omega,
                          const ReachThresholds& th, std::int64_t step) {
    GoalProgress next = progress;
    if (next.k >= seq.size()) {
        return next;
    }
    const Goal& active = seq.at(next.k + 1);
    // At most one increment per call, even if the following goal's condition
    // would also hold at this pose.
    if (reached_direct(pose, active, th)) {
        next.k += 1;
        next.switch_events.push_back({step, SwitchKind::direct});
    } else if (reached_stop(pose, v, omega, active, th)) {
        next.k += 1;
        next.switch_events.push_back({step, SwitchKind::stop});
    }
    return next;
}

double sequential_reward(const GoalProgress& progress, const GoalSequence& seq,
                         const PlanarPose& pose, const SequentialRewardConfig& cfg) {
    const std::size_t n = seq.size();
    if (progress.k >= n) {
        return 1.0;
    }
    double e = pose_error(pose, seq.at(progress.k + 1), cfg);
    return (static_cast<double>(progress.k) + kernel(e, cfg.sigma_g)) / static_cast<double>(n);
}

double baseline_track_reward(double e, double sigma, double t, const BaselineRewardConfig& cfg) {
    if (!(t > cfg.episode_length - cfg.reward_window)) {
        return 0.0;
    }
    return kernel(e, sigma) / cfg.reward_window;
}

GoalCommand goal_command(const PlanarPose& pose, const Goal& goal) {
    double dxw = goal.x - pose.x;
    double dyw = goal.y - pose.y;
    double c = std::cos(pose.theta);
    double s = std::sin(pose.theta);
    return {c * dxw + s * dyw, -s * dxw + c * dyw, wrap(goal.theta - pose.theta)};
}

std::vector<GoalCommand> lookahead_commands(const GoalProgress& progress, const GoalSequence& seq,
                                            const PlanarPose& pose, std::size_t n) {
    std::vector<GoalCommand> commands;
    commands.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t index = std::min(progress.k + i + 1, seq.size());
        commands.push_back(goal_command(pose, seq.at(index)));
    }
    return commands;
}

}  // namespace seqnav
