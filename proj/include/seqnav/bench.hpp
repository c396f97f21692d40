#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "seqnav/checkpoint.hpp"
#include "seqnav/env.hpp"

namespace seqnav {

/// One of the four pinned evaluation tracks: N=3 goals chained with a 3 m
/// step length; the first goal is straight ahead, the later goals apply the
/// named turn pattern.
struct FixedSequenceSpec {
    std::string name;
    std::vector<double> turn_pattern;  // signed delta-theta per goal
    double step_length = 3.0;          // m
};

/// Look up cw60 / ccw90 / zz120 / zz150. Throws std::invalid_argument for
/// anything else.
FixedSequenceSpec fixed_sequence_spec(const std::string& name);
const std::vector<std::string>& fixed_sequence_names();

/// Chain the spec's goals from a start pose via the standard goal geometry
/// (0.5 m pre-step along the reference heading, then the travel leg).
GoalSequence build_fixed_sequence(const FixedSequenceSpec& spec, const PlanarPose& start);

/// Named reaching-threshold configuration: direct (eps_xy, eps_theta) and
/// stop (eps_xy_plus, eps_theta_plus) with the standard stationarity limits.
struct ThresholdPreset {
    std::string name;
    ReachThresholds thresholds;
};

/// loose, tight_loose, mid_mid, mid_loose, relax_theta, relax_xy.
ThresholdPreset threshold_preset(const std::string& name);
const std::vector<std::string>& threshold_preset_names();
/// The four presets of the paired-threshold evaluation table.
const std::vector<std::string>& table_preset_names();

struct EpisodeOutcome {
    TerminationCause cause = TerminationCause::none;
    std::optional<double> time_s;  // completion time, set on success
};

struct BenchReport {
    std::string policy;
    std::string sequence;
    std::string preset;
    std::size_t n_episodes = 0;
    std::size_t falls = 0;
    std::size_t successes = 0;
    std::size_t timeouts = 0;
    double fr_pct = 0.0;
    double sr_pct = 0.0;
    double timeout_pct = 0.0;
    std::optional<double> time_mean_s;
    std::optional<double> time_std_s;
    std::optional<double> time_median_s;
    std::vector<EpisodeOutcome> episodes;
};

struct BenchOptions {
    std::size_t num_envs = 512;
    double time_limit = 10.0;  // s
    std::uint64_t seed = 0;
    std::string policy_name;      // label in reports
    std::string record_traj_dir;  // empty = no trajectory logging
};

/// Evaluate a policy on one sequence/preset: 512 independent episodes with
/// deterministic mean actions, randomized friction/actuation/initial state,
/// goals fixed in the world frame. Episodes partition into fallen, success
/// (all goals reached), and timeout. Completion-time statistics cover
/// successes only. Throws on an observation-dimension mismatch.
BenchReport run_benchmark(const Checkpoint& ckpt, const FixedSequenceSpec& spec,
                          const ThresholdPreset& preset, const BenchOptions& opts);

/// Controller hook: maps the raw observation batch to a normalized action
/// batch (num_envs x 3 in [-1, 1]).
using BenchPolicyFn = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;

/// Run the same benchmark machinery with an arbitrary controller instead of
/// a checkpointed policy; n_lookahead fixes the observation layout it sees.
BenchReport run_scripted_benchmark(const BenchPolicyFn& policy, std::size_t n_lookahead,
                                   const FixedSequenceSpec& spec, const ThresholdPreset& preset,
                                   const BenchOptions& opts);

/// Cross-product evaluation of several checkpoints over presets x sequences.
std::vector<BenchReport> sweep_thresholds(const std::vector<std::string>& checkpoint_paths,
                                          const std::vector<std::string>& presets,
                                          const std::vector<std::string>& sequences,
                                          const BenchOptions& opts);

/// Pinned report schema:
/// {policy, sequence, preset, n_episodes, fr_pct, sr_pct, timeout_pct,
///  time_mean_s, time_std_s}; the time fields are null without successes.
std::string report_to_json(const BenchReport& report);
std::string reports_to_json(const std::vector<BenchReport>& reports);

/// Fixed-width text table grouped by policy: presets down, sequences across.
std::string format_sweep_table(const std::vector<BenchReport>& reports);

}  // namespace seqnav
