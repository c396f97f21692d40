#pragma once

#include <cmath>

#include "seqnav/task.hpp"

namespace seqnav {

/// Full physical state: pose plus body-frame velocities.
struct PlanarState {
    PlanarPose pose;
    double v_long = 0.0;  // m/s, body longitudinal
    double v_lat = 0.0;   // m/s, body lateral
    double omega = 0.0;   // rad/s, yaw rate

    double speed() const { return std::hypot(v_long, v_lat); }
};

/// Body-frame acceleration command. Components are clamped to the configured
/// limits before integration.
struct ActionCmd {
    double a_long = 0.0;  // m/s^2
    double a_lat = 0.0;   // m/s^2
    double alpha = 0.0;   // rad/s^2
};

struct DynamicsConfig {
    double dt = 0.02;         // s, control step
    double v_max = 4.0;       // m/s
    double omega_max = 4.0;   // rad/s
    double a_max = 6.0;       // m/s^2
    double alpha_max = 12.0;  // rad/s^2
    double mu = 0.7;          // friction coefficient
    double gravity = 9.81;    // m/s^2
    double lat_damping = 3.0; // 1/s, lateral velocity decay
};

/// One semi-implicit Euler step: damp lateral velocity, integrate clamped
/// accelerations, saturate speed and yaw rate, then advance the pose with the
/// new velocities. Throws for non-finite commands.
PlanarState step_dynamics(const PlanarState& state, const ActionCmd& cmd,
                          const DynamicsConfig& cfg);

/// Friction-circle traction check: |speed * omega| > mu * g means the
/// centripetal demand exceeds traction and the episode counts as fallen.
bool check_fall(const PlanarState& state, const DynamicsConfig& cfg);

}  // namespace seqnav
