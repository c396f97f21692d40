#include "seqnav/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "seqnav/policy.hpp"

namespace seqnav {

namespace {

using nlohmann::json;

constexpr double kThird = kPi / 3.0;

const std::vector<FixedSequenceSpec>& sequence_table() {
    static const std::vector<FixedSequenceSpec> table = {
        {"cw60", {0.0, -kThird, -kThird}, 3.0},
        {"ccw90", {0.0, kPi / 2.0, kPi / 2.0}, 3.0},
        {"zz120", {0.0, -2.0 * kThird, 2.0 * kThird}, 3.0},
        {"zz150", {0.0, -5.0 * kPi / 6.0, 5.0 * kPi / 6.0}, 3.0},
    };
    return table;
}

ReachThresholds make_thresholds(double xy, std::optional<double> th, double xy_plus,
                                std::optional<double> th_plus) {
    ReachThresholds t;
    t.eps_xy = xy;
    t.eps_theta = th;
    t.eps_xy_plus = xy_plus;
    t.eps_theta_plus = th_plus;
    return t;
}

const std::vector<ThresholdPreset>& preset_table() {
    static const std::vector<ThresholdPreset> table = {
        {"loose", make_thresholds(0.5, kThird, 0.5, kThird)},
        {"tight_loose", make_thresholds(0.1, kPi / 36.0, 0.5, kThird)},
        {"mid_mid", make_thresholds(0.2, kPi / 6.0, 0.2, kPi / 6.0)},
        {"mid_loose", make_thresholds(0.2, kPi / 6.0, 0.5, kThird)},
        {"relax_theta", make_thresholds(0.2, std::nullopt, 0.5, std::nullopt)},
        {"relax_xy", make_thresholds(0.5, std::nullopt, 0.5, std::nullopt)},
    };
    return table;
}

json report_json_object(const BenchReport& r) {
    json j;
    j["policy"] = r.policy;
    j["sequence"] = r.sequence;
    j["preset"] = r.preset;
    j["n_episodes"] = r.n_episodes;
    j["fr_pct"] = r.fr_pct;
    j["sr_pct"] = r.sr_pct;
    j["timeout_pct"] = r.timeout_pct;
    if (r.time_mean_s) {
        j["time_mean_s"] = *r.time_mean_s;
        j["time_std_s"] = *r.time_std_s;
    } else {
        j["time_mean_s"] = nullptr;
        j["time_std_s"] = nullptr;
    }
    return j;
}

}  // namespace

FixedSequenceSpec fixed_sequence_spec(const std::string& name) {
    for (const FixedSequenceSpec& spec : sequence_table()) {
        if (spec.name == name) {
            return spec;
        }
    }
    throw std::invalid_argument("unknown sequence '" + name +
                                "' (expected cw60|ccw90|zz120|zz150)");
}

const std::vector<std::string>& fixed_sequence_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const FixedSequenceSpec& spec : sequence_table()) {
            n.push_back(spec.name);
        }
        return n;
    }();
    return names;
}

GoalSequence build_fixed_sequence(const FixedSequenceSpec& spec, const PlanarPose& start) {
    std::vector<Goal> goals;
    double ref_x = start.x;
    double ref_y = start.y;
    double ref_theta = start.theta;
    for (double dtheta : spec.turn_pattern) {
        const double theta_g = wrap(ref_theta + dtheta);
        const Heading h_ref = heading_vec(ref_theta);
        const Heading h_goal = heading_vec(theta_g);
        Goal g;
        g.x = ref_x + 0.5 * h_ref.cx + spec.step_length * h_goal.cx;
        g.y = ref_y + 0.5 * h_ref.cy + spec.step_length * h_goal.cy;
        g.theta = theta_g;
        goals.push_back(g);
        ref_x = g.x;
        ref_y = g.y;
        ref_theta = g.theta;
    }
    return GoalSequence{std::move(goals)};
}

ThresholdPreset threshold_preset(const std::string& name) {
    for (const ThresholdPreset& preset : preset_table()) {
        if (preset.name == name) {
            return preset;
        }
    }
    throw std::invalid_argument("unknown threshold preset '" + name + "'");
}

const std::vector<std::string>& threshold_preset_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const ThresholdPreset& preset : preset_table()) {
            n.push_back(preset.name);
        }
        return n;
    }();
    return names;
}

const std::vector<std::string>& table_preset_names() {
    static const std::vector<std::string> names = {"loose", "tight_loose", "mid_mid",
                                                   "mid_loose"};
    return names;
}

BenchReport run_scripted_benchmark(const BenchPolicyFn& policy, std::size_t n_lookahead,
                                   const FixedSequenceSpec& spec, const ThresholdPreset& preset,
                                   const BenchOptions& opts) {
    EnvConfig cfg;
    cfg.num_envs = opts.num_envs;
    cfg.episode_length = opts.time_limit;
    cfg.n_train = spec.turn_pattern.size();
    cfg.n_lookahead = n_lookahead;
    cfg.reward_mode = RewardMode::sequential;
    cfg.eval_mode = true;
    cfg.thresholds = preset.thresholds;
    cfg.base_reward.episode_length = opts.time_limit;
    // Evaluation ensemble: randomized friction, actuation gain, and initial
    // state, with a small pose scatter around the track start.
    cfg.randomization.heading_jitter = 0.1;
    cfg.randomization.pos_jitter = 0.1;

    // Decorrelate evaluation episode randomization from training streams.
    const std::uint64_t env_seed = RngStream{opts.seed, kRngEval}.next_u64();
    VecEnv env(cfg, env_seed);
    env.set_fixed_sequence(build_fixed_sequence(spec, PlanarPose{}));
    if (!opts.record_traj_dir.empty()) {
        env.enable_trajectory_log(opts.record_traj_dir);
    }

    env.reset_all();
    std::vector<EpisodeOutcome> outcomes(opts.num_envs);
    const std::int64_t max_steps = cfg.episode_steps();
    for (std::int64_t step = 0; step < max_steps && !env.all_done(); ++step) {
        env.step(policy(env.observations()));
        for (std::size_t i = 0; i < opts.num_envs; ++i) {
            if (env.terminated()[i] != 0) {
                outcomes[i].cause = env.causes()[i];
                outcomes[i].time_s = env.completion_time(i);
            }
        }
    }

    BenchReport report;
    report.policy = opts.policy_name;
    report.sequence = spec.name;
    report.preset = preset.name;
    report.n_episodes = opts.num_envs;
    report.episodes = outcomes;

    std::vector<double> times;
    for (const EpisodeOutcome& o : outcomes) {
        switch (o.cause) {
            case TerminationCause::fallen:
                report.falls += 1;
                break;
            case TerminationCause::sequence_complete:
                report.successes += 1;
                times.push_back(o.time_s.value());
                break;
            case TerminationCause::timeout:
            case TerminationCause::none:  // still running at the limit
                report.timeouts += 1;
                break;
        }
    }
    const double n = static_cast<double>(report.n_episodes);
    report.fr_pct = 100.0 * static_cast<double>(report.falls) / n;
    report.sr_pct = 100.0 * static_cast<double>(report.successes) / n;
    report.timeout_pct = 100.0 * static_cast<double>(report.timeouts) / n;

    if (!times.empty()) {
        std::sort(times.begin(), times.end());
        const double count = static_cast<double>(times.size());
        double sum = 0.0;
        for (double t : times) {
            sum += t;
        }
        const double mean_t = sum / count;
        double sq = 0.0;
        for (double t : times) {
            sq += (t - mean_t) * (t - mean_t);
        }
        report.time_mean_s = mean_t;
        report.time_std_s = std::sqrt(sq / count);
        const std::size_t mid = times.size() / 2;
        report.time_median_s = times.size() % 2 == 1
                                   ? times[mid]
                                   : 0.5 * (times[mid - 1] + times[mid]);
    }
    return report;
}

BenchReport run_benchmark(const Checkpoint& ckpt, const FixedSequenceSpec& spec,
                          const ThresholdPreset& preset, const BenchOptions& opts) {
    const std::size_t n_lookahead = ckpt.n_lookahead();
    EnvConfig probe;
    probe.n_lookahead = n_lookahead;
    if (static_cast<Eigen::Index>(probe.observation_dim()) != ckpt.obs_dim()) {
        throw std::invalid_argument("run_benchmark: checkpoint observation dimension " +
                                    std::to_string(ckpt.obs_dim()) +
                                    " does not match the evaluation layout");
    }

    RunningNorm norm(ckpt.obs_dim());
    norm.restore(ckpt.norm_count, ckpt.norm_mean, ckpt.norm_m2);
    const BenchPolicyFn policy = [&](const Eigen::MatrixXd& obs) {
        return ckpt.params.actor.forward(norm.normalize(obs));
    };
    return run_scripted_benchmark(policy, n_lookahead, spec, preset, opts);
}

std::vector<BenchReport> sweep_thresholds(const std::vector<std::string>& checkpoint_paths,
                                          const std::vector<std::string>& presets,
                                          const std::vector<std::string>& sequences,
                                          const BenchOptions& opts) {
    std::vector<BenchReport> reports;
    for (const std::string& path : checkpoint_paths) {
        const Checkpoint ckpt = load_checkpoint(path);
        for (const std::string& preset_name : presets) {
            const ThresholdPreset preset = threshold_preset(preset_name);
            for (const std::string& seq_name : sequences) {
                BenchOptions cell = opts;
                cell.policy_name = path;
                cell.record_traj_dir.clear();
                reports.push_back(
                    run_benchmark(ckpt, fixed_sequence_spec(seq_name), preset, cell));
            }
        }
    }
    return reports;
}

std::string report_to_json(const BenchReport& report) {
    return report_json_object(report).dump(2);
}

std::string reports_to_json(const std::vector<BenchReport>& reports) {
    json arr = json::array();
    for (const BenchReport& r : reports) {
        arr.push_back(report_json_object(r));
    }
    return arr.dump(2);
}

std::string format_sweep_table(const std::vector<BenchReport>& reports) {
    // Group rows by (policy, preset); one column block per sequence.
    std::vector<std::string> policies;
    std::vector<std::string> presets;
    std::vector<std::string> sequences;
    for (const BenchReport& r : reports) {
        if (std::find(policies.begin(), policies.end(), r.policy) == policies.end()) {
            policies.push_back(r.policy);
        }
        if (std::find(presets.begin(), presets.end(), r.preset) == presets.end()) {
            presets.push_back(r.preset);
        }
        if (std::find(sequences.begin(), sequences.end(), r.sequence) == sequences.end()) {
            sequences.push_back(r.sequence);
        }
    }
    auto find_report = [&](const std::string& pol, const std::string& pre,
                           const std::string& seq) -> const BenchReport* {
        for (const BenchReport& r : reports) {
            if (r.policy == pol && r.preset == pre && r.sequence == seq) {
                return &r;
            }
        }
        return nullptr;
    };

    std::ostringstream out;
    char buf[128];
    for (const std::string& policy : policies) {
        out << "policy: " << policy << "\n";
        std::snprintf(buf, sizeof(buf), "%-12s", "preset");
        out << buf;
        for (const std::string& seq : sequences) {
            std::snprintf(buf, sizeof(buf), " | %-26s", seq.c_str());
            out << buf;
        }
        out << "\n";
        for (const std::string& preset : presets) {
            std::snprintf(buf, sizeof(buf), "%-12s", preset.c_str());
            out << buf;
            for (const std::string& seq : sequences) {
                const BenchReport* r = find_report(policy, preset, seq);
                if (r == nullptr) {
                    std::snprintf(buf, sizeof(buf), " | %-26s", "-");
                } else if (r->time_mean_s) {
                    std::snprintf(buf, sizeof(buf), " | FR%5.1f SR%5.1f %5.2fs+-%4.2f",
                                  r->fr_pct, r->sr_pct, *r->time_mean_s, *r->time_std_s);
                } else {
                    std::snprintf(buf, sizeof(buf), " | FR%5.1f SR%5.1f      --    ",
                                  r->fr_pct, r->sr_pct);
                }
                out << buf;
            }
            out << "\n";
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace seqnav
