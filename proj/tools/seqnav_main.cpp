#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "seqnav/bench.hpp"
#include "seqnav/config.hpp"
#include "seqnav/plot.hpp"
#include "seqnav/trainer.hpp"

namespace {

using namespace seqnav;

int run_train(const std::string& config_path, std::uint64_t seed, const std::string& out_dir,
              const std::string& resume, bool quiet) {
    TrainConfig cfg;
    if (!config_path.empty()) {
        cfg = parse_config_file(config_path);
    }
    TrainOptions opts;
    opts.out_dir = out_dir;
    opts.resume_from = resume;
    opts.quiet = quiet;
    const TrainSummary summary = train(cfg, seed, opts);
    nlohmann::json j;
    j["final_checkpoint"] = summary.final_checkpoint;
    j["iterations_run"] = summary.iterations_run;
    j["final_c"] = summary.final_c;
    j["final_success_rate"] = summary.final_success_rate;
    std::cout << j.dump(2) << "\n";
    return 0;
}

int run_eval(const std::string& checkpoint, const std::string& sequence,
             const std::string& preset, std::size_t envs, double time_limit, std::uint64_t seed,
             const std::string& record_traj) {
    const Checkpoint ckpt = load_checkpoint(checkpoint);
    BenchOptions opts;
    opts.num_envs = envs;
    opts.time_limit = time_limit;
    opts.seed = seed;
    opts.policy_name = checkpoint;
    opts.record_traj_dir = record_traj;
    const BenchReport report =
        run_benchmark(ckpt, fixed_sequence_spec(sequence), threshold_preset(preset), opts);
    std::cout << report_to_json(report) << "\n";
    return 0;
}

int run_sweep(const std::vector<std::string>& checkpoints, const std::string& out_dir,
              std::size_t envs, double time_limit, std::uint64_t seed) {
    BenchOptions opts;
    opts.num_envs = envs;
    opts.time_limit = time_limit;
    opts.seed = seed;
    const std::vector<BenchReport> reports =
        sweep_thresholds(checkpoints, table_preset_names(), fixed_sequence_names(), opts);
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream json_out(std::filesystem::path(out_dir) / "sweep.json");
        json_out << reports_to_json(reports) << "\n";
    }
    const std::string table = format_sweep_table(reports);
    {
        std::ofstream table_out(std::filesystem::path(out_dir) / "sweep.txt");
        table_out << table;
    }
    std::cout << table;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sequential-goal navigation: training, evaluation, and reporting"};
    app.require_subcommand(1);

    // train
    std::string train_config;
    std::uint64_t train_seed = 0;
    std::string train_out;
    std::string train_resume;
    bool train_quiet = false;
    CLI::App* train_cmd = app.add_subcommand("train", "Run PPO training");
    train_cmd->add_option("--config", train_config, "Config file (key = value lines)");
    train_cmd->add_option("--seed", train_seed, "Root RNG seed")->required();
    train_cmd->add_option("--out", train_out, "Output directory")->required();
    train_cmd->add_option("--resume", train_resume, "Checkpoint to resume from");
    train_cmd->add_flag("--quiet", train_quiet, "Suppress progress output");

    // eval
    std::string eval_checkpoint;
    std::string eval_sequence;
    std::string eval_preset = "tight_loose";
    std::size_t eval_envs = 512;
    double eval_time_limit = 10.0;
    std::uint64_t eval_seed = 0;
    std::string eval_record;
    CLI::App* eval_cmd = app.add_subcommand("eval", "Benchmark a checkpoint on a fixed sequence");
    eval_cmd->add_option("--checkpoint", eval_checkpoint, "Checkpoint file")->required();
    eval_cmd->add_option("--sequence", eval_sequence, "cw60|ccw90|zz120|zz150")->required();
    eval_cmd->add_option("--preset", eval_preset,
                         "loose|tight_loose|mid_mid|mid_loose|relax_theta|relax_xy");
    eval_cmd->add_option("--envs", eval_envs, "Evaluation episode count");
    eval_cmd->add_option("--time-limit", eval_time_limit, "Episode time limit, seconds");
    eval_cmd->add_option("--seed", eval_seed, "Evaluation seed");
    eval_cmd->add_option("--record-traj", eval_record, "Directory for per-episode CSV logs");

    // sweep
    std::vector<std::string> sweep_checkpoints;
    std::string sweep_out;
    std::size_t sweep_envs = 512;
    double sweep_time_limit = 10.0;
    std::uint64_t sweep_seed = 0;
    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "Threshold-preset sweep over all fixed sequences");
    sweep_cmd->add_option("--checkpoints", sweep_checkpoints, "Checkpoint files")
        ->required()
        ->expected(-1);
    sweep_cmd->add_option("--out", sweep_out, "Output directory")->required();
    sweep_cmd->add_option("--envs", sweep_envs, "Episode count per cell");
    sweep_cmd->add_option("--time-limit", sweep_time_limit, "Episode time limit, seconds");
    sweep_cmd->add_option("--seed", sweep_seed, "Evaluation seed");

    // plot
    std::string plot_traj;
    std::string plot_out;
    CLI::App* plot_cmd = app.add_subcommand("plot", "Render a trajectory CSV as SVG");
    plot_cmd->add_option("--traj", plot_traj, "Trajectory CSV file")->required();
    plot_cmd->add_option("--out", plot_out, "Output SVG path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_cmd->parsed()) {
            return run_train(train_config, train_seed, train_out, train_resume, train_quiet);
        }
        if (eval_cmd->parsed()) {
            return run_eval(eval_checkpoint, eval_sequence, eval_preset, eval_envs,
                            eval_time_limit, eval_seed, eval_record);
        }
        if (sweep_cmd->parsed()) {
            return run_sweep(sweep_checkpoints, sweep_out, sweep_envs, sweep_time_limit,
                             sweep_seed);
        }
        if (plot_cmd->parsed()) {
            export_trajectory_plot(plot_traj, plot_out);
            return 0;
        }
    } catch (const std::exception& e) {
        nlohmann::json err;
        err["error"] = e.what();
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 0;
}
