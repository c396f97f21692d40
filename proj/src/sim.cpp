#include "seqnav/sim.hpp"

#include <algorithm>
#include <stdexcept>

namespace seqnav {

PlanarState step_dynamics(const PlanarState& state, const ActionCmd& cmd,
                          const DynamicsConfig& cfg) {
    if (!std::isfinite(cmd.a_long) || !std::isfinite(cmd.a_lat) || !std::isfinite(cmd.alpha)) {
        throw std::invalid_argument("step_dynamics: non-finite command");
    }

    const double a_long = std::clamp(cmd.a_long, -cfg.a_max, cfg.a_max);
    const double a_lat = std::clamp(cmd.a_lat, -cfg.a_max, cfg.a_max);
    const double alpha = std::clamp(cmd.alpha, -cfg.alpha_max, cfg.alpha_max);

    PlanarState next = state;

    // Lateral damping before the acceleration update.
    next.v_lat *= std::max(0.0, 1.0 - cfg.lat_damping * cfg.dt);

    next.v_long += a_long * cfg.dt;
    next.v_lat += a_lat * cfg.dt;
    next.omega += alpha * cfg.dt;

    // Rescale the planar velocity vector onto the speed limit.
    const double speed = next.speed();
    if (speed > cfg.v_max) {
        const double scale = cfg.v_max / speed;
        next.v_long *= scale;
        next.v_lat *= scale;
    }
    next.omega = std::clamp(next.omega, -cfg.omega_max, cfg.omega_max);

    // Semi-implicit: the pose advances with the updated velocities, rotated
    // through the pre-step heading.
    const double c = std::cos(state.pose.theta);
    const double s = std::sin(state.pose.theta);
    next.pose.x += (next.v_long * c - next.v_lat * s) * cfg.dt;
    next.pose.y += (next.v_long * s + next.v_lat * c) * cfg.dt;
    next.pose.theta = wrap(state.pose.theta + next.omega * cfg.dt);

    return next;
}

bool check_fall(const PlanarState& state, const DynamicsConfig& cfg) {
    return std::abs(state.speed() * state.omega) > cfg.mu * cfg.gravity;
}

}  // namespace seqnav
