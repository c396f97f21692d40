#include "seqnav/curriculum.hpp"

#include <algorithm>
#include <cstdio>

namespace seqnav {

std::size_t CurriculumState::successes() const {
    std::size_t n = 0;
    for (std::uint8_t o : window) n += o;
    return n;
}

double CurriculumState::success_rate() const {
    if (window.empty()) return 0.0;
    return static_cast<double>(successes()) / static_cast<double>(window.size());
}

namespace {
double lerp(double a, double b, double t) { return a + (b - a) * t; }
}  // namespace

SamplingRanges interp_ranges(double c, const CurriculumRanges& regimes) {
    if (c < 0.0 || c > 1.0) {
        std::fprintf(stderr, "[curriculum] warning: progress %.6f outside [0,1], clamping\n", c);
        c = std::clamp(c, 0.0, 1.0);
    }
    SamplingRanges r;
    r.dtheta_lo = lerp(regimes.easy.dtheta_lo, regimes.hard.dtheta_lo, c);
    r.dtheta_hi = lerp(regimes.easy.dtheta_hi, regimes.hard.dtheta_hi, c);
    r.length_lo = lerp(regimes.easy.length_lo, regimes.hard.length_lo, c);
    r.length_hi = lerp(regimes.easy.length_hi, regimes.hard.length_hi, c);
    return r;
}

Goal sample_goal(const PlanarPose& ref, const SamplingRanges& ranges, RngStream& rng,
                 double pre_step) {
    const double dtheta = rng.uniform(ranges.dtheta_lo, ranges.dtheta_hi);
    const double length = rng.uniform(ranges.length_lo, ranges.length_hi);
    const double theta_g = wrap(ref.theta + dtheta);
    const Heading h_ref = heading_vec(ref.theta);
    const Heading h_goal = heading_vec(theta_g);
    Goal g;
    g.x = ref.x + pre_step * h_ref.cx + length * h_goal.cx;
    g.y = ref.y + pre_step * h_ref.cy + length * h_goal.cy;
    g.theta = theta_g;
    return g;
}

GoalSequence sample_sequence(const PlanarPose& start, std::size_t n,
                             const SamplingRanges& ranges, RngStream& rng, double pre_step) {
    std::vector<Goal> goals;
    goals.reserve(n);
    PlanarPose ref = start;
    for (std::size_t i = 0; i < n; ++i) {
        Goal g = sample_goal(ref, ranges, rng, pre_step);
        goals.push_back(g);
        ref = {g.x, g.y, g.theta};
    }
    return GoalSequence(std::move(goals));
}

CurriculumState record_outcome(const CurriculumState& state, bool success) {
    CurriculumState next = state;
    if (next.window.size() < next.capacity) {
        next.window.push_back(success ? 1 : 0);
    } else {
        next.window[next.head] = success ? 1 : 0;
        next.head = (next.head + 1) % next.capacity;
    }
    return next;
}

CurriculumState update_progress(const CurriculumState& state) {
    if (state.window.empty()) return state;
    CurriculumState next = state;
    const double rate = state.success_rate();
    if (rate > state.expand_threshold) {
        next.c = std::min(1.0, next.c + next.step_size);
    } else if (rate < state.contract_threshold) {
        next.c = std::max(0.0, next.c - next.step_size);
    }
    return next;
}

}  // namespace seqnav
