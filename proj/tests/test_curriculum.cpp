#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "seqnav/angles.hpp"
#include "seqnav/curriculum.hpp"
#include "seqnav/rng.hpp"

using namespace seqnav;

TEST_CASE("range interpolation endpoints") {
    const SamplingRanges easy = interp_ranges(0.0);
    CHECK(easy.dtheta_lo == 0.0);
    CHECK(easy.dtheta_hi == 0.0);
    CHECK(easy.length_lo == doctest::Approx(1.5));
    CHECK(easy.length_hi == doctest::Approx(2.0));
    const SamplingRanges hard = interp_ranges(1.0);
    CHECK(hard.dtheta_lo == doctest::Approx(-kPi));
    CHECK(hard.dtheta_hi == doctest::Approx(kPi));
    CHECK(hard.length_lo == doctest::Approx(0.0));
    CHECK(hard.length_hi == doctest::Approx(4.5));
}

TEST_CASE("range interpolation midpoint") {
    const SamplingRanges mid = interp_ranges(0.5);
    CHECK(mid.dtheta_lo == doctest::Approx(-kPi / 2.0));
    CHECK(mid.dtheta_hi == doctest::Approx(kPi / 2.0));
    CHECK(mid.length_lo == doctest::Approx(0.75));
    CHECK(mid.length_hi == doctest::Approx(3.25));
}

TEST_CASE("range interpolation clamps out-of-range progress") {
    const SamplingRanges lo = interp_ranges(-0.3);
    const SamplingRanges easy = interp_ranges(0.0);
    CHECK(lo.dtheta_lo == easy.dtheta_lo);
    CHECK(lo.length_hi == easy.length_hi);
    const SamplingRanges hi = interp_ranges(1.7);
    const SamplingRanges hard = interp_ranges(1.0);
    CHECK(hi.dtheta_hi == hard.dtheta_hi);
    CHECK(hi.length_lo == hard.length_lo);
}

TEST_CASE("goal placement frozen examples") {
    SamplingRanges r;
    RngStream rng({1, static_cast<std::uint64_t>(RngDomain::kRngTest), 20});

    // ref=(0,0,0), dtheta=0, l=2 -> (2.5, 0, 0): 0.5 pre-step + 2 travel along x.
    r.dtheta_lo = r.dtheta_hi = 0.0;
    r.length_lo = r.length_hi = 2.0;
    Goal g = sample_goal({0.0, 0.0, 0.0}, r, rng);
    CHECK(g.x == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(g.y == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(g.theta == doctest::Approx(0.0));

    // dtheta=pi/2, l=2 -> (0.5, 2, pi/2): pre-step along x, travel along y.
    r.dtheta_lo = r.dtheta_hi = kPi / 2.0;
    g = sample_goal({0.0, 0.0, 0.0}, r, rng);
    CHECK(g.x == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(g.y == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(g.theta == doctest::Approx(kPi / 2.0));

    // dtheta=pi, l=1 -> (-0.5, 0, pi): 0.5 - 1 along x.
    r.dtheta_lo = r.dtheta_hi = kPi;
    r.length_lo = r.length_hi = 1.0;
    g = sample_goal({0.0, 0.0, 0.0}, r, rng);
    CHECK(g.x == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(g.y == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(std::abs(g.theta) == doctest::Approx(kPi));
}

TEST_CASE("sequence chains goal poses") {
    SamplingRanges r;
    r.dtheta_lo = r.dtheta_hi = 0.0;
    r.length_lo = r.length_hi = 2.0;
    RngStream rng({1, static_cast<std::uint64_t>(RngDomain::kRngTest), 21});
    const GoalSequence seq = sample_sequence({0.0, 0.0, 0.0}, 2, r, rng);
    REQUIRE(seq.size() == 2);
    CHECK(seq.at(1).x == doctest::Approx(2.5));
    CHECK(seq.at(2).x == doctest::Approx(5.0));
    CHECK(seq.at(1).y == doctest::Approx(0.0));
    CHECK(seq.at(2).y == doctest::Approx(0.0));

    const GoalSequence single = sample_sequence({1.0, 1.0, 0.0}, 1, r, rng);
    CHECK(single.size() == 1);
    CHECK(single.at(1).x == doctest::Approx(3.5));
}

TEST_CASE("identical rng streams give identical sequences") {
    SamplingRanges r = interp_ranges(0.8);
    RngStream a({42, static_cast<std::uint64_t>(RngDomain::kRngSequence), 3, 7});
    RngStream b({42, static_cast<std::uint64_t>(RngDomain::kRngSequence), 3, 7});
    const GoalSequence sa = sample_sequence({0.5, -0.2, 0.3}, 3, r, a);
    const GoalSequence sb = sample_sequence({0.5, -0.2, 0.3}, 3, r, b);
    for (std::size_t i = 1; i <= 3; ++i) {
        CHECK(sa.at(i).x == sb.at(i).x);  // bitwise
        CHECK(sa.at(i).y == sb.at(i).y);
        CHECK(sa.at(i).theta == sb.at(i).theta);
    }
}

TEST_CASE("sampled parameters stay inside the interpolated ranges") {
    RngStream rng({7, static_cast<std::uint64_t>(RngDomain::kRngTest), 22});
    for (int i = 0; i < 100000; ++i) {
        const double c = rng.uniform01();
        const SamplingRanges r = interp_ranges(c);
        const PlanarPose ref{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0),
                             wrap(rng.uniform(-3.0, 3.0))};
        const Goal g = sample_goal(ref, r, rng);
        // Recover dtheta and l from the placement.
        const double dtheta = wrap(g.theta - ref.theta);
        const Heading hr = heading_vec(ref.theta);
        const double px = ref.x + 0.5 * hr.cx;
        const double py = ref.y + 0.5 * hr.cy;
        const double l = std::hypot(g.x - px, g.y - py);
        CHECK(dtheta >= r.dtheta_lo - 1e-9);
        CHECK(dtheta <= r.dtheta_hi + 1e-9);
        CHECK(l >= r.length_lo - 1e-9);
        CHECK(l <= r.length_hi + 1e-9);
    }
}

TEST_CASE("travel segment length matches the drawn length exactly") {
    RngStream rng({7, static_cast<std::uint64_t>(RngDomain::kRngTest), 23});
    const SamplingRanges r = interp_ranges(1.0);
    for (int i = 0; i < 10000; ++i) {
        const PlanarPose ref{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0),
                             wrap(rng.uniform(-3.0, 3.0))};
        const Goal g = sample_goal(ref, r, rng);
        const Heading hr = heading_vec(ref.theta);
        const Heading hg = heading_vec(g.theta);
        const double px = ref.x + 0.5 * hr.cx;
        const double py = ref.y + 0.5 * hr.cy;
        const double l = std::hypot(g.x - px, g.y - py);
        // The travel leg lies along the goal heading: p + l*h(theta_g) = g.
        CHECK(std::abs(px + l * hg.cx - g.x) < 1e-9);
        CHECK(std::abs(py + l * hg.cy - g.y) < 1e-9);
    }
}

TEST_CASE("outcome window appends and evicts as a ring") {
    CurriculumState s;
    s.capacity = 3;
    s = record_outcome(s, true);
    REQUIRE(s.window.size() == 1);
    CHECK(s.window[0] == 1);
    s = record_outcome(s, false);
    s = record_outcome(s, false);
    CHECK(s.window.size() == 3);
    CHECK(s.successes() == 1);
    // Full: the next outcome evicts the oldest (the initial success).
    s = record_outcome(s, false);
    CHECK(s.window.size() == 3);
    CHECK(s.successes() == 0);
    s = record_outcome(s, true);
    CHECK(s.successes() == 1);
    CHECK(s.window.size() == 3);
}

TEST_CASE("progress updates follow the windowed success rate") {
    CurriculumState s;
    s.capacity = 100;
    s.c = 0.5;

    // 85% success -> expand by exactly step_size.
    for (int i = 0; i < 100; ++i) s = record_outcome(s, i < 85);
    CurriculumState up = update_progress(s);
    CHECK(up.c == doctest::Approx(0.55));

    // 50% -> unchanged.
    CurriculumState mid = s;
    mid.window.clear();
    mid.head = 0;
    for (int i = 0; i < 100; ++i) mid = record_outcome(mid, i % 2 == 0);
    CHECK(update_progress(mid).c == doctest::Approx(0.5));

    // 10% -> contract.
    CurriculumState low = s;
    low.window.clear();
    low.head = 0;
    for (int i = 0; i < 100; ++i) low = record_outcome(low, i < 10);
    CHECK(update_progress(low).c == doctest::Approx(0.45));
}

TEST_CASE("progress clamps at the boundaries") {
    CurriculumState s;
    s.capacity = 10;
    s.c = 0.02;
    for (int i = 0; i < 10; ++i) s = record_outcome(s, i == 0);  // 10% success
    s = update_progress(s);
    CHECK(s.c == 0.0);  // floor, not 0.02 - 0.05

    CurriculumState t;
    t.capacity = 10;
    t.c = 0.98;
    for (int i = 0; i < 10; ++i) t = record_outcome(t, true);
    t = update_progress(t);
    CHECK(t.c == 1.0);  // ceiling
}

TEST_CASE("empty window leaves progress untouched") {
    CurriculumState s;
    s.c = 0.4;
    const CurriculumState after = update_progress(s);
    CHECK(after.c == 0.4);
}

TEST_CASE("progress moves only in exact step increments") {
    RngStream rng({7, static_cast<std::uint64_t>(RngDomain::kRngTest), 24});
    CurriculumState s;
    s.capacity = 50;
    for (int round = 0; round < 2000; ++round) {
        const double before = s.c;
        const int n = 1 + static_cast<int>(rng.uniform_index(20));
        for (int i = 0; i < n; ++i) s = record_outcome(s, rng.uniform01() < 0.7);
        s = update_progress(s);
        CHECK(s.c >= 0.0);
        CHECK(s.c <= 1.0);
        const double delta = s.c - before;
        const bool legal = std::abs(delta) < 1e-12 ||
                           std::abs(std::abs(delta) - s.step_size) < 1e-12 ||
                           s.c == 0.0 || s.c == 1.0;  // clamped partial step
        CHECK(legal);
    }
}
