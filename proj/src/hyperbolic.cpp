#include "tieconv/hyperbolic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace tieconv {

namespace {

constexpr double kDedupTolerance = 1e-6;

}  // namespace

Mobius compose(const Mobius& m, const Mobius& n) {
    // [[a, b], [conj b, conj a]] matrix product, renormalized to det 1
    Mobius out;
    out.a = m.a * n.a + m.b * std::conj(n.b);
    out.b = m.a * n.b + m.b * std::conj(n.a);
    const double det = std::norm(out.a) - std::norm(out.b);
    const double scale = 1.0 / std::sqrt(det);
    out.a *= scale;
    out.b *= scale;
    return out;
}

Mobius inverse(const Mobius& m) { return Mobius{std::conj(m.a), -m.b}; }

std::complex<double> mobius_apply(const Mobius& m, std::complex<double> z) {
    return (m.a * z + m.b) / (std::conj(m.b) * z + std::conj(m.a));
}

Mobius hyperbolic_translation(double angle, double length) {
    const std::complex<double> dir = std::polar(1.0, angle);
    return Mobius{{std::cosh(length / 2), 0.0}, dir * std::sinh(length / 2)};
}

double hyperbolic_distance_to_origin(std::complex<double> z) {
    const double r = std::abs(z);
    if (r >= 1.0) return std::numeric_limits<double>::infinity();
    return std::log((1.0 + r) / (1.0 - r));
}

double OctagonGroup::apothem() { return std::acosh(1.0 + std::numbers::sqrt2); }
double OctagonGroup::circumradius() { return std::acosh(3.0 + 2.0 * std::numbers::sqrt2); }
double OctagonGroup::translation_length() { return 2.0 * apothem(); }

const std::array<int, 8>& OctagonGroup::relator_indices() {
    // With opposite sides paired by pure translations the vertex cycle reads
    // g0 g1^-1 g2 g3^-1 g0^-1 g1 g2^-1 g3.
    static const std::array<int, 8> rel{0, 5, 2, 7, 4, 1, 6, 3};
    return rel;
}

OctagonGroup::OctagonGroup() {
    const double t = translation_length();
    for (int k = 0; k < 8; ++k)
        gens_[static_cast<std::size_t>(k)] =
            hyperbolic_translation(k * std::numbers::pi / 4, t);

    Mobius rel;
    for (int idx : relator_indices()) rel = compose(rel, gens_[static_cast<std::size_t>(idx)]);
    relator_error_ = std::abs(mobius_apply(rel, {0.0, 0.0}));
    if (!(relator_error_ <= 1e-6))
        throw std::logic_error("OctagonGroup: side-pairing relator does not fix the origin");
}

namespace {

// Spatial hash over disk coordinates for 1e-6 deduplication.
class PointSet {
public:
    bool insert(std::complex<double> z) {
        const std::int64_t kx = static_cast<std::int64_t>(std::floor(z.real() / kDedupTolerance));
        const std::int64_t ky = static_cast<std::int64_t>(std::floor(z.imag() / kDedupTolerance));
        for (std::int64_t dx = -1; dx <= 1; ++dx)
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                const auto range = cells_.equal_range(key(kx + dx, ky + dy));
                for (auto it = range.first; it != range.second; ++it)
                    if (std::abs(points_[it->second] - z) < kDedupTolerance) return false;
            }
        cells_.emplace(key(kx, ky), points_.size());
        points_.push_back(z);
        return true;
    }

    const std::vector<std::complex<double>>& points() const { return points_; }

private:
    static std::uint64_t key(std::int64_t kx, std::int64_t ky) {
        return (static_cast<std::uint64_t>(kx) << 32) ^ static_cast<std::uint64_t>(ky & 0xffffffff);
    }
    std::unordered_multimap<std::uint64_t, std::size_t> cells_;
    std::vector<std::complex<double>> points_;
};

// All orbit distances d(0, gamma 0) up to `limit` + pruning slack, sorted.
std::vector<double> orbit_distances(double limit) {
    const OctagonGroup group;
    const double slack = 2.0 * OctagonGroup::circumradius();
    const double bound = limit + slack;

    PointSet seen;
    seen.insert({0.0, 0.0});
    std::vector<Mobius> frontier{Mobius{}};
    std::vector<double> dists{0.0};

    while (!frontier.empty()) {
        std::vector<Mobius> next;
        for (const Mobius& m : frontier) {
            for (const Mobius& g : group.generators()) {
                const Mobius candidate = compose(m, g);
                const std::complex<double> z = mobius_apply(candidate, {0.0, 0.0});
                const double dist = hyperbolic_distance_to_origin(z);
                if (dist > bound) continue;
                if (seen.insert(z)) {
                    next.push_back(candidate);
                    dists.push_back(dist);
                }
            }
        }
        frontier = std::move(next);
    }
    std::sort(dists.begin(), dists.end());
    return dists;
}

}  // namespace

long long orbit_count_hyperbolic(double length) {
    if (length < 0) throw std::invalid_argument("orbit_count_hyperbolic: negative length");
    if (length > 12)
        throw std::invalid_argument("orbit_count_hyperbolic: length capped at 12 (orbit sizes explode)");
    const auto dists = orbit_distances(length);
    return static_cast<long long>(
        std::upper_bound(dists.begin(), dists.end(), length) - dists.begin());
}

GrowthSeries orbit_growth_hyperbolic(double max_length) {
    if (!(max_length >= 1)) throw std::invalid_argument("orbit_growth_hyperbolic: max_length must be >= 1");
    if (max_length > 12)
        throw std::invalid_argument("orbit_growth_hyperbolic: length capped at 12 (orbit sizes explode)");
    const auto dists = orbit_distances(max_length);
    GrowthSeries series;
    series.label = "hyperbolic orbit counts, genus-2 octagon group";
    for (int l = 1; l <= static_cast<int>(std::floor(max_length)); ++l) {
        series.radii.push_back(l);
        series.counts.push_back(static_cast<long long>(
            std::upper_bound(dists.begin(), dists.end(), static_cast<double>(l)) - dists.begin()));
    }
    series.validate();
    return series;
}

}  // namespace tieconv
