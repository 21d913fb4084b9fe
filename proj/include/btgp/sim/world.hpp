#pragma once

#include <cmath>
#include <cstdint>

namespace btgp::sim {

/// Planar position in meters.
struct Pose {
    double x = 0.0;
    double y = 0.0;

    friend Pose operator+(Pose a, Pose b) noexcept { return {a.x + b.x, a.y + b.y}; }
    friend Pose operator-(Pose a, Pose b) noexcept { return {a.x - b.x, a.y - b.y}; }
    friend Pose operator*(double k, Pose p) noexcept { return {k * p.x, k * p.y}; }
    friend bool operator==(const Pose&, const Pose&) = default;

    [[nodiscard]] double norm() const noexcept { return std::hypot(x, y); }
};

inline double distance(Pose a, Pose b) noexcept { return (a - b).norm(); }

inline Pose midpoint(Pose a, Pose b) noexcept { return 0.5 * (a + b); }

enum class Head : std::uint8_t { Up, Down };

struct WorldState {
    Pose robot_true;
    Pose robot_est;
    bool localized = false;
    bool arm_tucked = false;
    Head head = Head::Up;
    bool holding_cube = false;
    Pose cube;
    double elapsed_time = 0.0;  // T, seconds
    double risk_sum = 0.0;      // P, sum of nominal failure probabilities
    bool picked_once = false;
    bool placed_at_goal = false;
    std::uint32_t root_failures = 0;

    [[nodiscard]] double loc_error() const noexcept { return distance(robot_true, robot_est); }

    /// Robot-cube distance as used by the cost; zero while the cube is held.
    [[nodiscard]] double robot_cube_distance() const noexcept {
        return holding_cube ? 0.0 : distance(robot_true, cube);
    }

    friend bool operator==(const WorldState&, const WorldState&) = default;
};

} // namespace btgp::sim
