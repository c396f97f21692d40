#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "seqnav/env.hpp"
#include "seqnav/policy.hpp"

namespace seqnav {

/// Optimizer and environment state carried only by checkpoints written mid
/// training run; restoring it continues a run with metrics identical to an
/// uninterrupted one.
struct TrainState {
    std::uint64_t adam_t = 0;
    Eigen::VectorXd adam_m;
    Eigen::VectorXd adam_v;
    VecEnv::Snapshot env;
};

/// Versioned policy container. Layout (little-endian, 64-bit floats):
/// magic "SQNVCKPT", format version, config hash, seed, iteration, tensor
/// shape table (actor layers, critic layers, log-std), tensor data
/// (row-major), observation-normalization statistics, then an optional
/// training-state section.
struct Checkpoint {
    static constexpr std::uint32_t kVersion = 1;

    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::uint64_t iteration = 0;
    ActorCritic params;
    double norm_count = 0.0;
    Eigen::VectorXd norm_mean;
    Eigen::VectorXd norm_m2;
    std::optional<TrainState> train_state;

    Eigen::Index obs_dim() const { return params.actor.input_dim(); }
    /// Lookahead window length implied by the observation layout.
    std::size_t n_lookahead() const {
        return static_cast<std::size_t>((obs_dim() - 7) / 3);
    }
};

/// Write the checkpoint; serialization is canonical, so identical contents
/// produce identical bytes. Throws std::runtime_error with context on I/O
/// failure.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);

/// Read a checkpoint back. Throws std::runtime_error on I/O failure, bad
/// magic, or an unsupported version.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace seqnav
