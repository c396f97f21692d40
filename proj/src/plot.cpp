#include "seqnav/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "seqnav/angles.hpp"
#include "seqnav/task.hpp"

namespace seqnav {

namespace {

constexpr const char* kHeader = "t,x,y,theta,v_long,v_lat,omega,speed,k,reward,event";

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.push_back("");
    }
    return fields;
}

double parse_field(const std::string& s, const std::string& path, std::size_t line_no) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) {
            throw std::invalid_argument("trailing characters");
        }
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": expected a number, got '" + s + "'");
    }
}

// Piecewise-linear speed colormap: blue, cyan, green, yellow, red.
std::string speed_color(double speed, double v_hi) {
    static const double stops[5][3] = {
        {40, 70, 220}, {40, 200, 220}, {60, 200, 80}, {235, 200, 40}, {220, 50, 40}};
    const double u = v_hi > 0.0 ? std::clamp(speed / v_hi, 0.0, 1.0) : 0.0;
    const double pos = u * 4.0;
    const int lo = std::min(3, static_cast<int>(pos));
    const double f = pos - lo;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
        static_cast<int>(stops[lo][0] + f * (stops[lo + 1][0] - stops[lo][0])),
        static_cast<int>(stops[lo][1] + f * (stops[lo + 1][1] - stops[lo][1])),
        static_cast<int>(stops[lo][2] + f * (stops[lo + 1][2] - stops[lo][2])));
    return buf;
}

struct Mapper {
    double min_x, max_x, min_y, max_y;
    double scale;
    double width, height;
    static constexpr double kMargin = 40.0;

    Mapper(double x0, double x1, double y0, double y1) {
        const double pad = 0.6;
        min_x = x0 - pad;
        max_x = x1 + pad;
        min_y = y0 - pad;
        max_y = y1 + pad;
        const double span_x = std::max(1e-6, max_x - min_x);
        const double span_y = std::max(1e-6, max_y - min_y);
        scale = 760.0 / std::max(span_x, span_y);
        width = span_x * scale + 2 * kMargin;
        height = span_y * scale + 2 * kMargin + 60.0;  // room for the legend
    }

    double px(double x) const { return kMargin + (x - min_x) * scale; }
    // SVG y grows downward; world y grows upward.
    double py(double y) const { return kMargin + (max_y - y) * scale; }
};

}  // namespace

std::vector<TrajPoint> load_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("trajectory: cannot open " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error(path + ":1: empty trajectory file");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != kHeader) {
        throw std::runtime_error(path + ":1: unexpected header '" + line + "'");
    }
    std::vector<TrajPoint> points;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        line_no += 1;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const std::vector<std::string> f = split_csv_line(line);
        if (f.size() != 11) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected 11 fields, got " +
                                     std::to_string(f.size()));
        }
        TrajPoint p;
        p.t = parse_field(f[0], path, line_no);
        p.x = parse_field(f[1], path, line_no);
        p.y = parse_field(f[2], path, line_no);
        p.theta = parse_field(f[3], path, line_no);
        p.v_long = parse_field(f[4], path, line_no);
        p.v_lat = parse_field(f[5], path, line_no);
        p.omega = parse_field(f[6], path, line_no);
        p.speed = parse_field(f[7], path, line_no);
        p.k = static_cast<std::size_t>(parse_field(f[8], path, line_no));
        p.reward = parse_field(f[9], path, line_no);
        p.event = f[10];
        points.push_back(std::move(p));
    }
    if (points.empty()) {
        throw std::runtime_error(path + ": no data rows");
    }
    return points;
}

void export_trajectory_plot(const std::string& traj_csv, const std::string& out_path) {
    const std::vector<TrajPoint> points = load_trajectory_csv(traj_csv);

    // Optional goal sidecar written alongside recorded trajectories.
    std::vector<Goal> goals;
    std::string goals_path = traj_csv;
    const std::string suffix = ".csv";
    if (goals_path.size() > suffix.size() &&
        goals_path.compare(goals_path.size() - suffix.size(), suffix.size(), suffix) == 0) {
        goals_path.replace(goals_path.size() - suffix.size(), suffix.size(), ".goals.csv");
        std::ifstream gin(goals_path);
        if (gin) {
            std::string line;
            std::getline(gin, line);  // header
            std::size_t line_no = 1;
            while (std::getline(gin, line)) {
                line_no += 1;
                if (!line.empty() && line.back() == '\r') {
                    line.pop_back();
                }
                if (line.empty()) {
                    continue;
                }
                const std::vector<std::string> f = split_csv_line(line);
                if (f.size() != 3) {
                    throw std::runtime_error(goals_path + ":" + std::to_string(line_no) +
                                             ": expected 3 fields");
                }
                Goal g;
                g.x = parse_field(f[0], goals_path, line_no);
                g.y = parse_field(f[1], goals_path, line_no);
                g.theta = parse_field(f[2], goals_path, line_no);
                goals.push_back(g);
            }
        }
    }

    double min_x = points.front().x;
    double max_x = min_x;
    double min_y = points.front().y;
    double max_y = min_y;
    double v_hi = 0.0;
    for (const TrajPoint& p : points) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
        v_hi = std::max(v_hi, p.speed);
    }
    for (const Goal& g : goals) {
        min_x = std::min(min_x, g.x);
        max_x = std::max(max_x, g.x);
        min_y = std::min(min_y, g.y);
        max_y = std::max(max_y, g.y);
    }
    if (v_hi <= 0.0) {
        v_hi = 1.0;
    }
    const Mapper m(min_x, max_x, min_y, max_y);

    std::ostringstream svg;
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                  "viewBox=\"0 0 %.0f %.0f\">\n",
                  m.width, m.height, m.width, m.height);
    svg << buf;
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // Goal poses as arrows (shaft plus head), drawn under the path.
    for (std::size_t i = 0; i < goals.size(); ++i) {
        const Goal& g = goals[i];
        const Heading h = heading_vec(g.theta);
        const double len = 0.45;
        const double x0 = m.px(g.x - 0.5 * len * h.cx);
        const double y0 = m.py(g.y - 0.5 * len * h.cy);
        const double x1 = m.px(g.x + 0.5 * len * h.cx);
        const double y1 = m.py(g.y + 0.5 * len * h.cy);
        const double head = 0.14 * m.scale;
        const double ang = std::atan2(y1 - y0, x1 - x0);
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#888\" "
                      "stroke-width=\"2.5\"/>\n",
                      x0, y0, x1, y1);
        svg << buf;
        std::snprintf(
            buf, sizeof(buf),
            "<polygon points=\"%.1f,%.1f %.1f,%.1f %.1f,%.1f\" fill=\"#888\"/>\n", x1, y1,
            x1 - head * std::cos(ang - 0.4), y1 - head * std::sin(ang - 0.4),
            x1 - head * std::cos(ang + 0.4), y1 - head * std::sin(ang + 0.4));
        svg << buf;
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%.1f\" y=\"%.1f\" font-size=\"13\" fill=\"#555\">g%zu</text>\n",
                      m.px(g.x) + 8, m.py(g.y) - 8, i + 1);
        svg << buf;
    }

    // Path segments colored by the segment-end speed.
    for (std::size_t i = 1; i < points.size(); ++i) {
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"%s\" "
                      "stroke-width=\"2.2\" stroke-linecap=\"round\"/>\n",
                      m.px(points[i - 1].x), m.py(points[i - 1].y), m.px(points[i].x),
                      m.py(points[i].y), speed_color(points[i].speed, v_hi).c_str());
        svg << buf;
    }

    // Start marker plus event markers.
    std::snprintf(buf, sizeof(buf),
                  "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"4.5\" fill=\"black\"/>\n",
                  m.px(points.front().x), m.py(points.front().y));
    svg << buf;
    for (const TrajPoint& p : points) {
        if (p.event == "switch_direct" || p.event == "complete") {
            std::snprintf(buf, sizeof(buf),
                          "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"5.5\" fill=\"none\" "
                          "stroke=\"#111\" stroke-width=\"2.2\"/>\n",
                          m.px(p.x), m.py(p.y));
            svg << buf;
        } else if (p.event == "switch_stop") {
            std::snprintf(buf, sizeof(buf),
                          "<rect x=\"%.1f\" y=\"%.1f\" width=\"10\" height=\"10\" fill=\"none\" "
                          "stroke=\"#111\" stroke-width=\"2.2\"/>\n",
                          m.px(p.x) - 5, m.py(p.y) - 5);
            svg << buf;
        } else if (p.event == "fall") {
            const double x = m.px(p.x);
            const double y = m.py(p.y);
            std::snprintf(buf, sizeof(buf),
                          "<path d=\"M%.1f %.1f L%.1f %.1f M%.1f %.1f L%.1f %.1f\" "
                          "stroke=\"#c22\" stroke-width=\"2.6\"/>\n",
                          x - 6, y - 6, x + 6, y + 6, x - 6, y + 6, x + 6, y - 6);
            svg << buf;
        }
    }

    // Legend: speed colorbar with numeric endpoints.
    const double ly = m.height - 38.0;
    for (int i = 0; i < 120; ++i) {
        const double u = static_cast<double>(i) / 119.0;
        std::snprintf(buf, sizeof(buf),
                      "<rect x=\"%.1f\" y=\"%.1f\" width=\"2.0\" height=\"12\" fill=\"%s\"/>\n",
                      Mapper::kMargin + i * 2.0, ly, speed_color(u * v_hi, v_hi).c_str());
        svg << buf;
    }
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.1f\" y=\"%.1f\" font-size=\"13\" fill=\"#333\">0 m/s</text>\n",
                  Mapper::kMargin, ly + 26);
    svg << buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.1f\" y=\"%.1f\" font-size=\"13\" fill=\"#333\">%.2f m/s</text>\n",
                  Mapper::kMargin + 200, ly + 26, v_hi);
    svg << buf;
    svg << "<text x=\"" << (Mapper::kMargin + 320) << "\" y=\"" << (ly + 26)
        << "\" font-size=\"13\" fill=\"#333\">o switch/complete  [] stop-switch  x fall</text>\n";
    svg << "</svg>\n";

    std::ofstream out(out_path, std::ios::trunc);
    if (!out) {
        throw std::runtime_error("plot: cannot open output file " + out_path);
    }
    out << svg.str();
    if (!out) {
        throw std::runtime_error("plot: write failed: " + out_path);
    }
}

}  // namespace seqnav
