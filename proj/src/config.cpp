#include "seqnav/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace seqnav {

namespace {

struct KeyEntry {
    std::string key;
    std::function<void(TrainConfig&, const std::string&)> set;
    std::function<std::string(const TrainConfig&)> get;
};

std::string format_double(double v) {
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& s) {
    if (s == "inf" || s == "+inf") {
        return std::numeric_limits<double>::infinity();
    }
    if (s == "-inf") {
        return -std::numeric_limits<double>::infinity();
    }
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw std::runtime_error("expected a number, got '" + s + "'");
    }
    if (pos != s.size()) {
        throw std::runtime_error("trailing characters in number '" + s + "'");
    }
    return v;
}

std::size_t parse_size(const std::string& s) {
    std::size_t v = 0;
    const auto* begin = s.data();
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end) {
        throw std::runtime_error("expected a non-negative integer, got '" + s + "'");
    }
    return v;
}

bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1") {
        return true;
    }
    if (s == "false" || s == "0") {
        return false;
    }
    throw std::runtime_error("expected true/false, got '" + s + "'");
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return "";
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

using DoubleRef = std::function<double&(TrainConfig&)>;
using SizeRef = std::function<std::size_t&(TrainConfig&)>;
using BoolRef = std::function<bool&(TrainConfig&)>;
using OptRef = std::function<std::optional<double>&(TrainConfig&)>;

const std::vector<KeyEntry>& key_table() {
    static const std::vector<KeyEntry> table = [] {
        std::vector<KeyEntry> t;
        auto reg_d = [&t](const char* key, DoubleRef ref) {
            t.push_back({key,
                         [ref](TrainConfig& c, const std::string& v) { ref(c) = parse_double(v); },
                         [ref](const TrainConfig& c) {
                             return format_double(ref(const_cast<TrainConfig&>(c)));
                         }});
        };
        auto reg_z = [&t](const char* key, SizeRef ref) {
            t.push_back({key,
                         [ref](TrainConfig& c, const std::string& v) { ref(c) = parse_size(v); },
                         [ref](const TrainConfig& c) {
                             return std::to_string(ref(const_cast<TrainConfig&>(c)));
                         }});
        };
        auto reg_b = [&t](const char* key, BoolRef ref) {
            t.push_back({key,
                         [ref](TrainConfig& c, const std::string& v) { ref(c) = parse_bool(v); },
                         [ref](const TrainConfig& c) {
                             return ref(const_cast<TrainConfig&>(c)) ? "true" : "false";
                         }});
        };
        // Optional angular thresholds: "inf" disables the bound.
        auto reg_opt = [&t](const char* key, OptRef ref) {
            t.push_back({key,
                         [ref](TrainConfig& c, const std::string& v) {
                             const double d = parse_double(v);
                             ref(c) = std::isinf(d) ? std::nullopt : std::optional<double>(d);
                         },
                         [ref](const TrainConfig& c) {
                             const auto& o = ref(const_cast<TrainConfig&>(c));
                             return o ? format_double(*o) : std::string("inf");
                         }});
        };

        reg_z("env.num_envs", [](TrainConfig& c) -> std::size_t& { return c.env.num_envs; });
        reg_d("env.episode_length",
              [](TrainConfig& c) -> double& { return c.env.episode_length; });
        reg_z("env.n_train", [](TrainConfig& c) -> std::size_t& { return c.env.n_train; });
        reg_z("env.n_lookahead",
              [](TrainConfig& c) -> std::size_t& { return c.env.n_lookahead; });
        t.push_back({"env.reward_mode",
                     [](TrainConfig& c, const std::string& v) {
                         if (v == "sequential") {
                             c.env.reward_mode = RewardMode::sequential;
                         } else if (v == "baseline") {
                             c.env.reward_mode = RewardMode::baseline;
                         } else {
                             throw std::runtime_error("reward_mode must be sequential|baseline");
                         }
                     },
                     [](const TrainConfig& c) {
                         return std::string(c.env.reward_mode == RewardMode::sequential
                                                ? "sequential"
                                                : "baseline");
                     }});
        reg_b("env.regenerate_on_complete",
              [](TrainConfig& c) -> bool& { return c.env.regenerate_on_complete; });
        reg_d("env.pre_step", [](TrainConfig& c) -> double& { return c.env.pre_step; });

        reg_d("thresholds.eps_xy",
              [](TrainConfig& c) -> double& { return c.env.thresholds.eps_xy; });
        reg_opt("thresholds.eps_theta",
                [](TrainConfig& c) -> std::optional<double>& { return c.env.thresholds.eps_theta; });
        reg_d("thresholds.eps_xy_plus",
              [](TrainConfig& c) -> double& { return c.env.thresholds.eps_xy_plus; });
        reg_opt("thresholds.eps_theta_plus", [](TrainConfig& c) -> std::optional<double>& {
            return c.env.thresholds.eps_theta_plus;
        });
        reg_d("thresholds.v_stop",
              [](TrainConfig& c) -> double& { return c.env.thresholds.v_stop; });
        reg_d("thresholds.omega_stop",
              [](TrainConfig& c) -> double& { return c.env.thresholds.omega_stop; });

        reg_d("dynamics.dt", [](TrainConfig& c) -> double& { return c.env.dynamics.dt; });
        reg_d("dynamics.v_max", [](TrainConfig& c) -> double& { return c.env.dynamics.v_max; });
        reg_d("dynamics.omega_max",
              [](TrainConfig& c) -> double& { return c.env.dynamics.omega_max; });
        reg_d("dynamics.a_max", [](TrainConfig& c) -> double& { return c.env.dynamics.a_max; });
        reg_d("dynamics.alpha_max",
              [](TrainConfig& c) -> double& { return c.env.dynamics.alpha_max; });
        reg_d("dynamics.mu", [](TrainConfig& c) -> double& { return c.env.dynamics.mu; });
        reg_d("dynamics.gravity",
              [](TrainConfig& c) -> double& { return c.env.dynamics.gravity; });
        reg_d("dynamics.lat_damping",
              [](TrainConfig& c) -> double& { return c.env.dynamics.lat_damping; });

        reg_d("random.mu_lo", [](TrainConfig& c) -> double& { return c.env.randomization.mu_lo; });
        reg_d("random.mu_hi", [](TrainConfig& c) -> double& { return c.env.randomization.mu_hi; });
        reg_d("random.init_speed_lo",
              [](TrainConfig& c) -> double& { return c.env.randomization.init_speed_lo; });
        reg_d("random.init_speed_hi",
              [](TrainConfig& c) -> double& { return c.env.randomization.init_speed_hi; });
        reg_d("random.heading_jitter",
              [](TrainConfig& c) -> double& { return c.env.randomization.heading_jitter; });
        reg_d("random.pos_jitter",
              [](TrainConfig& c) -> double& { return c.env.randomization.pos_jitter; });
        reg_d("random.a_max_jitter",
              [](TrainConfig& c) -> double& { return c.env.randomization.a_max_jitter; });
        reg_d("random.noise_vel",
              [](TrainConfig& c) -> double& { return c.env.randomization.noise_vel; });
        reg_d("random.noise_omega",
              [](TrainConfig& c) -> double& { return c.env.randomization.noise_omega; });
        reg_d("random.noise_cmd_pos",
              [](TrainConfig& c) -> double& { return c.env.randomization.noise_cmd_pos; });
        reg_d("random.noise_cmd_theta",
              [](TrainConfig& c) -> double& { return c.env.randomization.noise_cmd_theta; });

        reg_d("reward.sigma_g", [](TrainConfig& c) -> double& { return c.env.seq_reward.sigma_g; });
        reg_d("reward.sigma_theta",
              [](TrainConfig& c) -> double& { return c.env.seq_reward.sigma_theta; });
        reg_d("reward.lambda_theta",
              [](TrainConfig& c) -> double& { return c.env.seq_reward.lambda_theta; });
        reg_d("reward.sigma_pos",
              [](TrainConfig& c) -> double& { return c.env.base_reward.sigma_pos; });
        reg_d("reward.sigma_heading",
              [](TrainConfig& c) -> double& { return c.env.base_reward.sigma_heading; });
        reg_d("reward.baseline_T",
              [](TrainConfig& c) -> double& { return c.env.base_reward.episode_length; });
        reg_d("reward.baseline_window",
              [](TrainConfig& c) -> double& { return c.env.base_reward.reward_window; });

        reg_d("aux.w_action_rate",
              [](TrainConfig& c) -> double& { return c.env.aux.w_action_rate; });
        reg_d("aux.w_yaw_accel", [](TrainConfig& c) -> double& { return c.env.aux.w_yaw_accel; });
        reg_d("aux.fall_penalty",
              [](TrainConfig& c) -> double& { return c.env.aux.fall_penalty; });
        reg_d("aux.w_track_pos", [](TrainConfig& c) -> double& { return c.env.aux.w_track_pos; });
        reg_d("aux.w_track_heading",
              [](TrainConfig& c) -> double& { return c.env.aux.w_track_heading; });
        reg_d("aux.w_forward", [](TrainConfig& c) -> double& { return c.env.aux.w_forward; });
        reg_d("aux.forward_dist",
              [](TrainConfig& c) -> double& { return c.env.aux.forward_dist; });
        reg_d("aux.w_stand", [](TrainConfig& c) -> double& { return c.env.aux.w_stand; });
        reg_d("aux.stand_dist", [](TrainConfig& c) -> double& { return c.env.aux.stand_dist; });
        reg_d("aux.w_stall", [](TrainConfig& c) -> double& { return c.env.aux.w_stall; });
        reg_d("aux.stall_speed", [](TrainConfig& c) -> double& { return c.env.aux.stall_speed; });
        reg_d("aux.stall_dist", [](TrainConfig& c) -> double& { return c.env.aux.stall_dist; });

        reg_b("curriculum.enabled",
              [](TrainConfig& c) -> bool& { return c.curriculum.enabled; });
        reg_d("curriculum.c_init", [](TrainConfig& c) -> double& { return c.curriculum.c_init; });
        reg_z("curriculum.window",
              [](TrainConfig& c) -> std::size_t& { return c.curriculum.window; });
        reg_z("curriculum.update_period",
              [](TrainConfig& c) -> std::size_t& { return c.curriculum.update_period; });
        reg_d("curriculum.delta_c", [](TrainConfig& c) -> double& { return c.curriculum.delta_c; });
        reg_d("curriculum.expand_threshold",
              [](TrainConfig& c) -> double& { return c.curriculum.expand_threshold; });
        reg_d("curriculum.contract_threshold",
              [](TrainConfig& c) -> double& { return c.curriculum.contract_threshold; });
        reg_d("curriculum.easy_dtheta_lo",
              [](TrainConfig& c) -> double& { return c.env.curriculum_ranges.easy.dtheta_lo; });
        reg_d("curriculum.easy_dtheta_hi",
              [](TrainConfig& c) -> double& { return c.env.curriculum_ranges.easy.dtheta_hi; });
        reg_d("curriculum.easy_len_lo",
              [](TrainConfig& c) -> double& { return c.env.curriculum_ranges.easy.length_lo; });
        reg_d("curriculum.easy_len_hi",
              [](TrainConfig& c) -> double& { return c.env.curriculum_ranges.easy.length_hi; });
        reg_d("curriculum.hard_dtheta_lo",
              [](TrainConfig& c) -> double& { return c.env.curriculum_ranges.hard.dtheta_lo; });
        reg_d("curriculum.hard_dtheta_hi",
              [](TrainConfig& c) -> double& { return c.env.curriculum_ranges.hard.dtheta_hi; });
        reg_d("curriculum.hard_len_lo",
              [](TrainConfig& c) -> double& { return c.env.curriculum_ranges.hard.length_lo; });
        reg_d("curriculum.hard_len_hi",
              [](TrainConfig& c) -> double& { return c.env.curriculum_ranges.hard.length_hi; });

        reg_d("ppo.gamma", [](TrainConfig& c) -> double& { return c.ppo.gamma; });
        reg_d("ppo.lambda_gae", [](TrainConfig& c) -> double& { return c.ppo.lambda_gae; });
        reg_d("ppo.clip", [](TrainConfig& c) -> double& { return c.ppo.clip; });
        reg_z("ppo.epochs", [](TrainConfig& c) -> std::size_t& { return c.ppo.epochs; });
        reg_z("ppo.minibatches",
              [](TrainConfig& c) -> std::size_t& { return c.ppo.minibatches; });
        reg_d("ppo.lr", [](TrainConfig& c) -> double& { return c.ppo.lr; });
        reg_b("ppo.lr_anneal", [](TrainConfig& c) -> bool& { return c.ppo.lr_anneal; });
        reg_d("ppo.vf_coef", [](TrainConfig& c) -> double& { return c.ppo.vf_coef; });
        reg_d("ppo.ent_coef", [](TrainConfig& c) -> double& { return c.ppo.ent_coef; });
        reg_d("ppo.max_grad_norm",
              [](TrainConfig& c) -> double& { return c.ppo.max_grad_norm; });
        reg_z("ppo.iterations", [](TrainConfig& c) -> std::size_t& { return c.ppo.iterations; });
        reg_z("ppo.steps_per_env",
              [](TrainConfig& c) -> std::size_t& { return c.ppo.steps_per_env; });
        t.push_back({"ppo.hidden",
                     [](TrainConfig& c, const std::string& v) {
                         std::vector<Eigen::Index> sizes;
                         std::stringstream ss(v);
                         std::string part;
                         while (std::getline(ss, part, ',')) {
                             sizes.push_back(
                                 static_cast<Eigen::Index>(parse_size(trim(part))));
                         }
                         if (sizes.empty()) {
                             throw std::runtime_error("ppo.hidden needs at least one size");
                         }
                         c.ppo.hidden = std::move(sizes);
                     },
                     [](const TrainConfig& c) {
                         std::string out;
                         for (std::size_t i = 0; i < c.ppo.hidden.size(); ++i) {
                             if (i > 0) {
                                 out += ",";
                             }
                             out += std::to_string(c.ppo.hidden[i]);
                         }
                         return out;
                     }});
        reg_d("ppo.init_log_std",
              [](TrainConfig& c) -> double& { return c.ppo.init_log_std; });

        reg_z("train.checkpoint_interval",
              [](TrainConfig& c) -> std::size_t& { return c.checkpoint_interval; });
        return t;
    }();
    return table;
}

}  // namespace

void apply_config_value(TrainConfig& cfg, const std::string& key, const std::string& value) {
    for (const KeyEntry& entry : key_table()) {
        if (entry.key == key) {
            entry.set(cfg, value);
            return;
        }
    }
    throw std::runtime_error("unknown config key '" + key + "'");
}

TrainConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("config: cannot open " + path);
    }
    TrainConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        line_no += 1;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            apply_config_value(cfg, key, value);
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return cfg;
}

std::string serialize_config(const TrainConfig& cfg) {
    std::string out;
    for (const KeyEntry& entry : key_table()) {
        out += entry.key;
        out += " = ";
        out += entry.get(cfg);
        out += "\n";
    }
    return out;
}

std::uint64_t config_hash(const TrainConfig& cfg) {
    const std::string text = serialize_config(cfg);
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace seqnav
