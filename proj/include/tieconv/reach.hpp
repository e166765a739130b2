#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "tieconv/geometry.hpp"

namespace tieconv {

/// Result of the pairwise tangent-deviation reach estimator. global_reach is
/// +infinity when every pair was skipped (perfectly flat data).
struct ReachEstimate {
    double global_reach = 0;
    std::vector<double> per_point;                       // +inf where undefined
    std::array<std::int64_t, 2> contributing_pair{-1, -1};
    std::size_t neighbor_cap = 0;                        // 0 = full pair scan
};

/// Estimate the reach of an embedded sample set carrying tangent frames.
/// For each ordered pair (x, y) the bound r(x,y) = |y-x|^2 / (2 dist(y-x, T_x))
/// is evaluated; pairs whose tangent-plane distance falls below 1e-12 are
/// skipped. per_point[x] is the minimum over y, global_reach the minimum over
/// x. neighbor_cap limits the scan to the cap nearest neighbors of each point
/// (0 = all pairs); the default policy scans all pairs below 5000 points and
/// the 64 nearest above.
ReachEstimate estimate_reach(const EmbeddedSamples& samples);
ReachEstimate estimate_reach(const EmbeddedSamples& samples, std::size_t neighbor_cap);

struct CircleShape { double radius; };
struct SphereShape { double radius; };
struct TorusOfRevolution { double major_radius, minor_radius; };

/// Closed-form reach values: circle(r) -> r, sphere(r) -> r,
/// torus_of_revolution(R, r) -> min(r, R - r).
double analytic_reach(const CircleShape& shape);
double analytic_reach(const SphereShape& shape);
double analytic_reach(const TorusOfRevolution& shape);

}  // namespace tieconv
