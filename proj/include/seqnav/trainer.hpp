#pragma once

#include <cstdint>
#include <string>

#include "seqnav/checkpoint.hpp"
#include "seqnav/config.hpp"

namespace seqnav {

struct TrainOptions {
    std::string out_dir;
    std::string resume_from;  // checkpoint with training state; empty = fresh run
    bool quiet = false;       // suppress stderr progress lines
};

struct TrainSummary {
    std::string final_checkpoint;
    std::uint64_t iterations_run = 0;
    double final_c = 0.0;
    double final_success_rate = 0.0;
};

/// Run PPO training: alternate rollout collection over the vectorized
/// environments with clipped-surrogate updates, adapt the curriculum, write
/// one NDJSON metrics record per iteration to <out_dir>/metrics.ndjson, and
/// checkpoint periodically plus at the end (<out_dir>/model_final.bin).
/// Fixed seed implies bit-identical metrics and checkpoints across runs on
/// one machine. Resuming from a mid-run checkpoint continues with metrics
/// identical to the uninterrupted run.
TrainSummary train(const TrainConfig& cfg, std::uint64_t seed, const TrainOptions& opts);

}  // namespace seqnav
