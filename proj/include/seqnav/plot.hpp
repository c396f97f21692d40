#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace seqnav {

struct TrajPoint {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
    double v_long = 0.0;
    double v_lat = 0.0;
    double omega = 0.0;
    double speed = 0.0;
    std::size_t k = 0;
    double reward = 0.0;
    std::string event;
};

/// Parse a trajectory CSV (header `t,x,y,theta,v_long,v_lat,omega,speed,k,
/// reward,event`). Throws std::runtime_error naming the offending line on
/// malformed input, including an empty file.
std::vector<TrajPoint> load_trajectory_csv(const std::string& path);

/// Render the trajectory as a standalone SVG: path segments colored by
/// instantaneous speed (blue = slow through red = fast, scale in the
/// legend), goal poses as arrows when `<base>.goals.csv` sits next to the
/// input, and event markers (goal switches, falls, completion). Nothing is
/// written if parsing fails.
void export_trajectory_plot(const std::string& traj_csv, const std::string& out_path);

}  // namespace seqnav
