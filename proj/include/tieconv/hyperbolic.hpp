#pragma once

#include <array>
#include <complex>

#include "tieconv/growth.hpp"

namespace tieconv {

/// Orientation-preserving isometry of the Poincare disk,
/// z -> (a z + b) / (conj(b) z + conj(a)) with |a|^2 - |b|^2 = 1.
struct Mobius {
    std::complex<double> a{1.0, 0.0};
    std::complex<double> b{0.0, 0.0};
};

Mobius compose(const Mobius& m, const Mobius& n);
Mobius inverse(const Mobius& m);
std::complex<double> mobius_apply(const Mobius& m, std::complex<double> z);

/// Hyperbolic translation along the geodesic through the origin in direction
/// `angle`, by hyperbolic length `length` (moves the origin toward angle).
Mobius hyperbolic_translation(double angle, double length);

/// d(0, z) in curvature -1 normalization.
double hyperbolic_distance_to_origin(std::complex<double> z);

/// The genus-2 Fuchsian group generated by the 8 side-pairing translations of
/// the regular hyperbolic octagon with vertex angle pi/4 centered at the
/// origin (opposite sides paired). Generator k translates toward angle k pi/4
/// by twice the apothem; generators k and k+4 are mutually inverse. The
/// defining relator is validated to fix the origin at construction.
class OctagonGroup {
public:
    OctagonGroup();

    const std::array<Mobius, 8>& generators() const { return gens_; }
    /// Disk-model distance of relator(origin) from the origin (<= 1e-6).
    double relator_origin_error() const { return relator_error_; }
    /// The relator as generator indices (g[i] and g[i+4] are inverse).
    static const std::array<int, 8>& relator_indices();

    static double apothem();             // acosh(1 + sqrt 2)
    static double circumradius();        // acosh(3 + 2 sqrt 2)
    static double translation_length();  // 2 * apothem

private:
    std::array<Mobius, 8> gens_;
    double relator_error_ = 0;
};

/// Number of orbit points of the origin under the octagon group within
/// hyperbolic distance `length` (the identity counts). Words are pruned when
/// their orbit point exceeds length + 2 * circumradius; points closer than
/// 1e-6 in the disk model are identified. length <= 12.
long long orbit_count_hyperbolic(double length);

/// Series of orbit counts at integer radii 1 .. floor(max_length), from a
/// single enumeration.
GrowthSeries orbit_growth_hyperbolic(double max_length);

}  // namespace tieconv
