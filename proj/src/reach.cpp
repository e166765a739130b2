#include "tieconv/reach.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "tieconv/kdtree.hpp"
#include "tieconv/parallel.hpp"

namespace tieconv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPerpFloor = 1e-12;

// r(x, y) for one ordered pair; +inf when the pair is skipped.
double pair_bound(const EmbeddedSamples& s, std::size_t x, std::size_t y) {
    const int d = s.dim;
    const auto px = s.point(x);
    const auto py = s.point(y);
    double disp[16];
    double norm2 = 0;
    for (int c = 0; c < d; ++c) {
        disp[c] = py[c] - px[c];
        norm2 += disp[c] * disp[c];
    }
    // residual of disp against the tangent frame at x
    double res[16];
    for (int c = 0; c < d; ++c) res[c] = disp[c];
    for (int r = 0; r < s.frame_dim; ++r) {
        const auto row = s.frame_vector(x, r);
        double t = 0;
        for (int c = 0; c < d; ++c) t += disp[c] * row[c];
        for (int c = 0; c < d; ++c) res[c] -= t * row[c];
    }
    double perp2 = 0;
    for (int c = 0; c < d; ++c) perp2 += res[c] * res[c];
    const double perp = std::sqrt(perp2);
    if (perp < kPerpFloor) return kInf;
    return norm2 / (2.0 * perp);
}

}  // namespace

ReachEstimate estimate_reach(const EmbeddedSamples& samples) {
    const std::size_t cap = samples.count() < 5000 ? 0 : 64;
    return estimate_reach(samples, cap);
}

ReachEstimate estimate_reach(const EmbeddedSamples& samples, std::size_t neighbor_cap) {
    samples.validate();
    const std::size_t n = samples.count();
    if (n < 3) throw std::runtime_error("estimate_reach: need at least 3 points");
    if (!samples.has_frames()) throw std::runtime_error("estimate_reach: tangent frames required");
    if (samples.dim > 16) throw std::runtime_error("estimate_reach: ambient dimension above 16");

    ReachEstimate out;
    out.neighbor_cap = neighbor_cap;
    out.per_point.assign(n, kInf);
    std::vector<std::int64_t> arg(n, -1);

    std::optional<KdTree> tree;
    if (neighbor_cap > 0) tree.emplace(samples.points.data(), n, samples.dim);

    parallel_chunks(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t x = begin; x < end; ++x) {
            if (samples.is_degenerate(x)) continue;
            double best = kInf;
            std::int64_t best_y = -1;
            auto consider = [&](std::size_t y) {
                if (y == x) return;
                const double r = pair_bound(samples, x, y);
                if (r < best) {
                    best = r;
                    best_y = static_cast<std::int64_t>(y);
                }
            };
            if (neighbor_cap == 0) {
                for (std::size_t y = 0; y < n; ++y) consider(y);
            } else {
                const auto hits = tree->nearest(samples.point(x), neighbor_cap + 1);
                for (const auto& h : hits) consider(h.index);
            }
            out.per_point[x] = best;
            arg[x] = best_y;
        }
    });

    double global = kInf;
    std::int64_t gx = -1;
    for (std::size_t x = 0; x < n; ++x) {
        if (out.per_point[x] < global) {
            global = out.per_point[x];
            gx = static_cast<std::int64_t>(x);
        }
    }
    out.global_reach = global;
    if (gx >= 0) out.contributing_pair = {gx, arg[static_cast<std::size_t>(gx)]};
    return out;
}

double analytic_reach(const CircleShape& shape) {
    if (!(shape.radius > 0)) throw std::invalid_argument("analytic_reach: radius must be positive");
    return shape.radius;
}

double analytic_reach(const SphereShape& shape) {
    if (!(shape.radius > 0)) throw std::invalid_argument("analytic_reach: radius must be positive");
    return shape.radius;
}

double analytic_reach(const TorusOfRevolution& shape) {
    if (!(shape.minor_radius > 0))
        throw std::invalid_argument("analytic_reach: minor radius must be positive");
    if (!(shape.major_radius > shape.minor_radius))
        throw std::invalid_argument("analytic_reach: major radius must exceed minor radius");
    return std::min(shape.minor_radius, shape.major_radius - shape.minor_radius);
}

}  // namespace tieconv
