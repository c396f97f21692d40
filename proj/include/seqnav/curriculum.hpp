#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "seqnav/rng.hpp"
#include "seqnav/task.hpp"

namespace seqnav {

/// Uniform sampling ranges for the signed turning offset and travel length.
struct SamplingRanges {
    double dtheta_lo = 0.0;  // rad
    double dtheta_hi = 0.0;
    double length_lo = 1.5;  // m
    double length_hi = 2.0;
};

/// Endpoint regimes of the difficulty interpolation.
struct CurriculumRanges {
    SamplingRanges easy{0.0, 0.0, 1.5, 2.0};
    SamplingRanges hard{-kPi, kPi, 0.0, 4.5};
};

/// Curriculum progress plus the rolling window of goal outcomes it adapts on.
/// Outcomes may arrive from many environments; updates happen at batch
/// boundaries under a single writer.
struct CurriculumState {
    double c = 0.0;
    double step_size = 0.05;          // delta c per update
    double expand_threshold = 0.8;    // raise difficulty above this rate
    double contract_threshold = 0.2;  // lower difficulty below this rate
    std::size_t capacity = 1000;      // rolling window length W

    std::vector<std::uint8_t> window;  // ring buffer of outcomes
    std::size_t head = 0;              // next write slot once full

    std::size_t successes() const;
    double success_rate() const;  // 0 if empty
};

/// Per-episode goal generation parameters.
struct EpisodeGoalSpec {
    double pre_step = 0.5;   // m, forward offset along the reference heading
    std::size_t n_goals = 2; // N
    std::uint64_t seed = 0;  // RNG stream identifier
};

/// Linear interpolation of the sampling ranges between the easy and hard
/// regimes. c outside [0, 1] is clamped with a warning on stderr.
SamplingRanges interp_ranges(double c, const CurriculumRanges& regimes = {});

/// One goal relative to a reference pose: pre-step along the reference
/// heading, then a travel leg along the sampled goal heading.
Goal sample_goal(const PlanarPose& ref, const SamplingRanges& ranges, RngStream& rng,
                 double pre_step = 0.5);

/// Chain of n goals; the first uses the start pose as reference, each later
/// goal uses its predecessor's pose.
GoalSequence sample_sequence(const PlanarPose& start, std::size_t n,
                             const SamplingRanges& ranges, RngStream& rng,
                             double pre_step = 0.5);

/// Append one goal outcome to the rolling window, evicting the oldest entry
/// at capacity.
CurriculumState record_outcome(const CurriculumState& state, bool success);

/// Adapt c by +/- step_size from the windowed success rate. No-op while the
/// window is empty.
CurriculumState update_progress(const CurriculumState& state);

}  // namespace seqnav
