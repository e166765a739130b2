#pragma once

#include <cstdint>
#include <optional>
#include <variant>

#include "tieconv/conv.hpp"
#include "tieconv/geometry.hpp"
#include "tieconv/torus.hpp"

namespace tieconv {

enum class ConvMethod { Spectral, Direct };

/// Explicit box override (fixed side/origin instead of the automatic
/// sample-centered box); used to compare runs on a common grid.
struct GridFrame {
    double side = 0;
    std::vector<double> origin;
};

/// Configuration of the end-to-end convolution pipeline. The kernel is either
/// a grid kernel (delta/gaussian/box/file, living on the torus grid) or a
/// manifold field extended exactly like f.
struct TieConfig {
    int resolution = 64;
    BumpKind bump = BumpKind::QuinticSmoothstep;
    std::optional<double> reach_override;
    std::variant<KernelDescriptor, ScalarField> kernel = KernelDescriptor{DeltaKernel{}};
    ConvMethod method = ConvMethod::Spectral;
    bool normalize_tube_mass = false;
    int k_neighbors = 12;                  // tangent estimation when reach is estimated
    std::optional<int> manifold_dim;       // default dim - 1
    std::optional<GridFrame> grid_frame;
};

struct TieDiagnostics {
    std::int64_t tube_cell_count = 0;
    double resolution_margin = 0;  // (reach/2) / cell diagonal, >= 1 by construction
};

struct TieResult {
    TorusGrid grid_out;
    ScalarField restricted;
    double reach_used = 0;
    double side_used = 0;
    TieDiagnostics diagnostics;
};

/// embed -> box -> quotient -> extend -> convolve -> restrict.
TieResult tie_convolve(const EmbeddedSamples& samples, const ScalarField& field,
                       const TieConfig& config);

/// Multilinear periodic interpolation of grid values at the samples' torus
/// coordinates.
ScalarField restrict_to_samples(const TorusGrid& grid, const EmbeddedSamples& samples);

}  // namespace tieconv
