#include "tieconv/pipeline.hpp"

#include <cmath>
#include <stdexcept>

#include "tieconv/reach.hpp"

namespace tieconv {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

double resolve_reach(const EmbeddedSamples& samples, const TieConfig& config) {
    if (config.reach_override) {
        if (!(*config.reach_override > 0)) fail("tie_convolve: reach override must be positive");
        return *config.reach_override;
    }
    EmbeddedSamples framed;
    const EmbeddedSamples* input = &samples;
    if (!samples.has_frames()) {
        if (samples.has_normals()) {
            framed = frames_from_normals(samples);
        } else {
            const int mdim = config.manifold_dim.value_or(samples.dim - 1);
            framed = estimate_tangents(samples, config.k_neighbors, mdim);
        }
        input = &framed;
    }
    const ReachEstimate est = estimate_reach(*input);
    if (!std::isfinite(est.global_reach) || !(est.global_reach > 0))
        fail("tie_convolve: reach estimate is not a positive finite value; pass an override");
    return est.global_reach;
}

TorusGrid make_grid(const EmbeddedSamples& samples, const TieConfig& config, double reach) {
    if (!config.grid_frame) return build_torus_grid(samples, config.resolution, reach);

    const GridFrame& frame = *config.grid_frame;
    TorusGrid grid;
    grid.dim = samples.dim;
    grid.resolution.assign(static_cast<std::size_t>(samples.dim), config.resolution);
    grid.side = frame.side;
    grid.origin = frame.origin;
    grid.values.assign(grid.cell_count(), 0.0);
    grid.validate();
    const double diagonal = std::sqrt(static_cast<double>(grid.dim)) * grid.spacing(0);
    if (diagonal > reach / 2) fail("tie_convolve: grid frame cannot resolve the tube");
    return grid;
}

}  // namespace

ScalarField restrict_to_samples(const TorusGrid& grid, const EmbeddedSamples& samples) {
    grid.validate();
    samples.validate();
    if (grid.dim != samples.dim) fail("restrict: grid/sample dimension mismatch");
    const int d = grid.dim;
    if (d > 20) fail("restrict: dimension too large for multilinear interpolation");

    std::vector<std::size_t> stride(static_cast<std::size_t>(d), 1);
    for (int a = d - 2; a >= 0; --a)
        stride[static_cast<std::size_t>(a)] =
            stride[static_cast<std::size_t>(a + 1)] *
            static_cast<std::size_t>(grid.resolution[static_cast<std::size_t>(a + 1)]);

    ScalarField out;
    out.values.resize(samples.count());
    std::vector<double> corner(static_cast<std::size_t>(1) << d);
    for (std::size_t i = 0; i < samples.count(); ++i) {
        const auto p = samples.point(i);
        double frac[20];
        std::int64_t base[20];
        for (int a = 0; a < d; ++a) {
            const double g = (p[a] - grid.origin[static_cast<std::size_t>(a)]) / grid.spacing(a);
            const double fl = std::floor(g);
            base[a] = static_cast<std::int64_t>(fl);
            frac[a] = g - fl;
        }
        const std::size_t corners = static_cast<std::size_t>(1) << d;
        for (std::size_t mask = 0; mask < corners; ++mask) {
            std::size_t flat = 0;
            for (int a = 0; a < d; ++a) {
                const std::int64_t N = grid.resolution[static_cast<std::size_t>(a)];
                std::int64_t idx = base[a] + ((mask >> a) & 1);
                idx %= N;
                if (idx < 0) idx += N;
                flat += static_cast<std::size_t>(idx) * stride[static_cast<std::size_t>(a)];
            }
            corner[mask] = grid.values[flat];
        }
        // nested lerps, one axis at a time (constant fields stay exact)
        std::size_t active = corners;
        for (int a = d - 1; a >= 0; --a) {
            active >>= 1;
            for (std::size_t m = 0; m < active; ++m)
                corner[m] = corner[2 * m] + frac[a] * (corner[2 * m + 1] - corner[2 * m]);
        }
        out.values[i] = corner[0];
    }
    return out;
}

TieResult tie_convolve(const EmbeddedSamples& samples, const ScalarField& field,
                       const TieConfig& config) {
    samples.validate();
    if (field.values.size() != samples.count())
        fail("tie_convolve: field length does not match sample count");
    if (config.resolution < 4) fail("tie_convolve: resolution must be >= 4");

    TieResult result;
    result.reach_used = resolve_reach(samples, config);

    TorusGrid grid = make_grid(samples, config, result.reach_used);
    result.side_used = grid.side;

    ExtendStats stats;
    const TorusGrid extended =
        extend_field(samples, field, grid, result.reach_used, config.bump, &stats);

    TorusGrid kernel_grid;
    if (const auto* manifold_kernel = std::get_if<ScalarField>(&config.kernel)) {
        if (manifold_kernel->values.size() != samples.count())
            fail("tie_convolve: kernel/manifold resolution mismatch");
        kernel_grid = extend_field(samples, *manifold_kernel, grid, result.reach_used, config.bump);
    } else {
        const GridSpec spec{grid.dim, grid.resolution, grid.side};
        kernel_grid = make_kernel(spec, std::get<KernelDescriptor>(config.kernel));
    }

    result.grid_out = config.method == ConvMethod::Spectral
                          ? convolve_spectral(extended, kernel_grid)
                          : convolve_direct(extended, kernel_grid);

    if (config.normalize_tube_mass) {
        double mass = 0;
        for (double v : kernel_grid.values) mass += v;
        if (std::abs(mass) < 1e-300) fail("tie_convolve: kernel has zero mass, cannot normalize");
        for (double& v : result.grid_out.values) v /= mass;
    }

    result.restricted = restrict_to_samples(result.grid_out, samples);
    result.diagnostics.tube_cell_count = stats.tube_cell_count;
    const double diagonal =
        std::sqrt(static_cast<double>(grid.dim)) * grid.spacing(0);
    result.diagnostics.resolution_margin = (result.reach_used / 2) / diagonal;
    return result;
}

}  // namespace tieconv
