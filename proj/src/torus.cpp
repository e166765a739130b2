#include "tieconv/torus.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "tieconv/parallel.hpp"

static_assert(std::endian::native == std::endian::little,
              "TIEG I/O assumes a little-endian host");

namespace tieconv {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void TorusGrid::validate() const {
    if (dim < 1) fail("TorusGrid: dimension must be >= 1");
    if (static_cast<int>(resolution.size()) != dim || static_cast<int>(origin.size()) != dim)
        fail("TorusGrid: resolution/origin size mismatch");
    for (int r : resolution)
        if (r < 1) fail("TorusGrid: nonpositive resolution");
    if (!(side > 0)) fail("TorusGrid: nonpositive side length");
    if (values.size() != cell_count()) fail("TorusGrid: value array size mismatch");
    for (double v : values)
        if (!std::isfinite(v)) fail("TorusGrid: non-finite value");
}

double bump(const BumpProfile& profile, double t) {
    if (t < 0) throw std::invalid_argument("bump: negative distance");
    if (!(profile.cutoff > 0)) throw std::invalid_argument("bump: nonpositive cutoff");
    const double s = std::min(t / profile.cutoff, 1.0);
    switch (profile.kind) {
        case BumpKind::QuinticSmoothstep:
            // 1 - smoothstep5(s); C^2, beta(cutoff/2) = 1/2 exactly
            return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
        case BumpKind::ExponentialMollifier:
            if (s >= 1.0) return 0.0;
            return std::exp(1.0 - 1.0 / (1.0 - s * s));
    }
    return 0.0;
}

TorusGrid build_torus_grid(const EmbeddedSamples& samples, int resolution, double reach) {
    samples.validate();
    if (resolution < 4) fail("build_torus_grid: resolution must be >= 4");
    if (!(reach > 0)) fail("build_torus_grid: reach must be positive");
    const int d = samples.dim;
    const std::size_t n = samples.count();
    if (n < 2) fail("build_torus_grid: need at least 2 points");

    const double diam = diameter(samples);
    const double side = std::max(2.0 * diam, diam + 2.0 * reach);

    const double cell_diagonal = std::sqrt(static_cast<double>(d)) * side / resolution;
    if (cell_diagonal > reach / 2) {
        const int min_n = static_cast<int>(
            std::ceil(2.0 * std::sqrt(static_cast<double>(d)) * side / reach));
        fail("build_torus_grid: grid cannot resolve the tube (cell diagonal " +
             format_double(cell_diagonal) + " > reach/2 = " + format_double(reach / 2) +
             "); minimum admissible resolution is " + std::to_string(min_n));
    }

    TorusGrid grid;
    grid.dim = d;
    grid.resolution.assign(static_cast<std::size_t>(d), resolution);
    grid.side = side;
    grid.origin.resize(static_cast<std::size_t>(d));
    for (int c = 0; c < d; ++c) {
        double lo = samples.points[static_cast<std::size_t>(c)];
        double hi = lo;
        for (std::size_t i = 1; i < n; ++i) {
            const double v = samples.points[i * static_cast<std::size_t>(d) + c];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        grid.origin[static_cast<std::size_t>(c)] = (lo + hi) / 2 - side / 2;
    }
    grid.values.assign(grid.cell_count(), 0.0);
    return grid;
}

TorusGrid extend_field(const EmbeddedSamples& samples, const ScalarField& field,
                       const TorusGrid& grid, double reach, BumpKind kind, ExtendStats* stats) {
    samples.validate();
    grid.validate();
    if (field.values.size() != samples.count())
        fail("extend_field: field length does not match sample count");
    if (grid.dim != samples.dim) fail("extend_field: grid/sample dimension mismatch");
    if (!(reach > 0)) fail("extend_field: reach must be positive");

    const int d = grid.dim;
    const std::size_t n = samples.count();
    const std::size_t cells = grid.cell_count();
    const double tube = reach / 2;
    const double L = grid.side;
    const BumpProfile profile{kind, tube};

    std::vector<double> best_d2(cells, std::numeric_limits<double>::infinity());
    std::vector<std::int64_t> best_idx(cells, -1);

    // Row strides for flat indexing (last axis fastest).
    std::vector<std::size_t> stride(static_cast<std::size_t>(d), 1);
    for (int a = d - 2; a >= 0; --a)
        stride[static_cast<std::size_t>(a)] =
            stride[static_cast<std::size_t>(a + 1)] *
            static_cast<std::size_t>(grid.resolution[static_cast<std::size_t>(a + 1)]);

    // Per-sample index boxes covering every site within tube radius.
    struct Box {
        std::vector<std::int64_t> lo, hi;  // inclusive, unwrapped
    };
    std::vector<Box> boxes(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto p = samples.point(i);
        boxes[i].lo.resize(static_cast<std::size_t>(d));
        boxes[i].hi.resize(static_cast<std::size_t>(d));
        for (int a = 0; a < d; ++a) {
            const double h = grid.spacing(a);
            const double g = (p[a] - grid.origin[static_cast<std::size_t>(a)]) / h;
            const double half = tube / h;
            std::int64_t lo = static_cast<std::int64_t>(std::floor(g - half));
            std::int64_t hi = static_cast<std::int64_t>(std::ceil(g + half));
            const std::int64_t N = grid.resolution[static_cast<std::size_t>(a)];
            if (hi - lo + 1 >= N) {
                lo = 0;
                hi = N - 1;
            }
            boxes[i].lo[static_cast<std::size_t>(a)] = lo;
            boxes[i].hi[static_cast<std::size_t>(a)] = hi;
        }
    }

    // Partition the grid along axis 0; each worker stamps every sample into
    // its own slab, so writes are disjoint and results schedule-independent.
    const std::size_t n0 = static_cast<std::size_t>(grid.resolution[0]);
    parallel_chunks(n0, [&](std::size_t slab_begin, std::size_t slab_end) {
        std::vector<std::int64_t> cur(d > 1 ? static_cast<std::size_t>(d - 1) : 1);
        for (std::size_t i = 0; i < n; ++i) {
            const auto p = samples.point(i);
            const Box& box = boxes[i];
            // axis-0 range intersected with the slab (unwrapped range may
            // cover the slab via several wraps; enumerate raw indices and
            // test membership after wrapping)
            for (std::int64_t r0 = box.lo[0]; r0 <= box.hi[0]; ++r0) {
                const std::int64_t N0 = grid.resolution[0];
                const std::int64_t w0 = ((r0 % N0) + N0) % N0;
                if (static_cast<std::size_t>(w0) < slab_begin ||
                    static_cast<std::size_t>(w0) >= slab_end)
                    continue;
                // iterate remaining axes with an odometer
                for (int a = 1; a < d; ++a)
                    cur[static_cast<std::size_t>(a - 1)] = box.lo[static_cast<std::size_t>(a)];
                while (true) {
                    // flat index and squared periodic distance
                    std::size_t flat = static_cast<std::size_t>(w0) * stride[0];
                    double d2 = 0;
                    {
                        const double h0 = grid.spacing(0);
                        double dx = static_cast<double>(w0) * h0 + grid.origin[0] - p[0];
                        dx -= L * std::round(dx / L);
                        d2 += dx * dx;
                    }
                    for (int a = 1; a < d; ++a) {
                        const std::int64_t N = grid.resolution[static_cast<std::size_t>(a)];
                        const std::int64_t w = ((cur[static_cast<std::size_t>(a - 1)] % N) + N) % N;
                        flat += static_cast<std::size_t>(w) * stride[static_cast<std::size_t>(a)];
                        const double h = grid.spacing(a);
                        double dx = static_cast<double>(w) * h +
                                    grid.origin[static_cast<std::size_t>(a)] - p[a];
                        dx -= L * std::round(dx / L);
                        d2 += dx * dx;
                    }
                    if (d2 < best_d2[flat]) {  // samples visited in index order:
                        best_d2[flat] = d2;    // strict < keeps the lowest index on ties
                        best_idx[flat] = static_cast<std::int64_t>(i);
                    }
                    // odometer over axes 1..d-1
                    int a = d - 1;
                    for (; a >= 1; --a) {
                        if (++cur[static_cast<std::size_t>(a - 1)] <=
                            box.hi[static_cast<std::size_t>(a)])
                            break;
                        cur[static_cast<std::size_t>(a - 1)] = box.lo[static_cast<std::size_t>(a)];
                    }
                    if (a < 1) break;
                }
            }
        }
    });

    TorusGrid out = grid;
    std::int64_t tube_cells = 0;
    for (std::size_t c = 0; c < cells; ++c) {
        if (best_idx[c] >= 0) {
            const double dist = std::sqrt(best_d2[c]);
            if (dist <= tube) {
                ++tube_cells;
                out.values[c] = bump(profile, dist) * field.values[static_cast<std::size_t>(best_idx[c])];
                continue;
            }
        }
        out.values[c] = 0.0;
    }
    if (stats) stats->tube_cell_count = tube_cells;
    return out;
}

namespace {

// Periodic distance of grid site index i from site 0 along one axis.
double periodic_site_distance(std::int64_t i, std::int64_t n, double h) {
    const std::int64_t k = std::min(i, n - i);
    return static_cast<double>(k) * h;
}

}  // namespace

TorusGrid make_kernel(const GridSpec& spec, const KernelDescriptor& descriptor) {
    if (spec.dim < 1 || static_cast<int>(spec.resolution.size()) != spec.dim)
        fail("make_kernel: invalid grid spec");
    if (!(spec.side > 0)) fail("make_kernel: nonpositive side");

    TorusGrid grid;
    grid.dim = spec.dim;
    grid.resolution = spec.resolution;
    grid.side = spec.side;
    grid.origin.assign(static_cast<std::size_t>(spec.dim), 0.0);
    grid.values.assign(grid.cell_count(), 0.0);

    if (std::holds_alternative<DeltaKernel>(descriptor)) {
        grid.values[0] = 1.0;
        return grid;
    }
    if (const auto* g = std::get_if<GaussianKernel>(&descriptor)) {
        if (!(g->sigma > 0)) fail("make_kernel: sigma must be positive");
        if (!(g->sigma < spec.side / 6))
            fail("make_kernel: sigma must be below side/6 to keep periodic truncation error < 1e-8");
        // separable: per-axis wrapped 1D profiles, then outer product
        std::vector<std::vector<double>> axis_profiles;
        for (int a = 0; a < spec.dim; ++a) {
            const std::int64_t N = spec.resolution[static_cast<std::size_t>(a)];
            const double h = grid.spacing(a);
            std::vector<double> prof(static_cast<std::size_t>(N), 0.0);
            for (std::int64_t i = 0; i < N; ++i) {
                const double x = static_cast<double>(i) * h;
                double s = 0;
                for (int k = -4; k <= 4; ++k) {
                    const double dx = x + k * spec.side;
                    s += std::exp(-dx * dx / (2 * g->sigma * g->sigma));
                }
                prof[static_cast<std::size_t>(i)] = s;
            }
            axis_profiles.push_back(std::move(prof));
        }
        std::vector<std::int64_t> idx(static_cast<std::size_t>(spec.dim), 0);
        double total = 0;
        for (std::size_t c = 0; c < grid.values.size(); ++c) {
            double v = 1;
            for (int a = 0; a < spec.dim; ++a)
                v *= axis_profiles[static_cast<std::size_t>(a)]
                                  [static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
            grid.values[c] = v;
            total += v;
            for (int a = spec.dim - 1; a >= 0; --a) {
                if (++idx[static_cast<std::size_t>(a)] <
                    spec.resolution[static_cast<std::size_t>(a)])
                    break;
                idx[static_cast<std::size_t>(a)] = 0;
            }
        }
        for (double& v : grid.values) v /= total;
        return grid;
    }
    if (const auto* b = std::get_if<BoxKernel>(&descriptor)) {
        if (!(b->radius > 0)) fail("make_kernel: box radius must be positive");
        std::vector<std::int64_t> idx(static_cast<std::size_t>(spec.dim), 0);
        std::vector<std::size_t> inside;
        for (std::size_t c = 0; c < grid.values.size(); ++c) {
            double d2 = 0;
            for (int a = 0; a < spec.dim; ++a) {
                const double dist = periodic_site_distance(
                    idx[static_cast<std::size_t>(a)],
                    spec.resolution[static_cast<std::size_t>(a)], grid.spacing(a));
                d2 += dist * dist;
            }
            if (std::sqrt(d2) <= b->radius) inside.push_back(c);
            for (int a = spec.dim - 1; a >= 0; --a) {
                if (++idx[static_cast<std::size_t>(a)] <
                    spec.resolution[static_cast<std::size_t>(a)])
                    break;
                idx[static_cast<std::size_t>(a)] = 0;
            }
        }
        const double w = 1.0 / static_cast<double>(inside.size());
        for (std::size_t c : inside) grid.values[c] = w;
        return grid;
    }
    const auto& f = std::get<FileKernel>(descriptor);
    TorusGrid loaded = read_tieg(f.path);
    if (loaded.dim != spec.dim || loaded.resolution != spec.resolution || loaded.side != spec.side)
        fail("make_kernel: kernel file '" + f.path + "' does not match the requested grid shape");
    return loaded;
}

void write_tieg(const TorusGrid& grid, const std::string& path) {
    grid.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot open '" + path + "' for writing");
    std::ostringstream header;
    header << "TIEG " << grid.dim;
    for (int r : grid.resolution) header << ' ' << r;
    header << ' ' << format_double(grid.side);
    for (double o : grid.origin) header << ' ' << format_double(o);
    header << '\n';
    out << header.str();
    out.write(reinterpret_cast<const char*>(grid.values.data()),
              static_cast<std::streamsize>(grid.values.size() * sizeof(double)));
    if (!out) fail("write failed for '" + path + "'");
}

TorusGrid read_tieg(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open '" + path + "'");
    std::string header;
    if (!std::getline(in, header)) fail(path + ": missing TIEG header");
    std::istringstream hs(header);
    std::string magic;
    TorusGrid grid;
    hs >> magic >> grid.dim;
    if (magic != "TIEG" || !hs || grid.dim < 1) fail(path + ": malformed TIEG header");
    grid.resolution.resize(static_cast<std::size_t>(grid.dim));
    for (auto& r : grid.resolution) hs >> r;
    hs >> grid.side;
    grid.origin.resize(static_cast<std::size_t>(grid.dim));
    for (auto& o : grid.origin) hs >> o;
    if (!hs) fail(path + ": malformed TIEG header");
    grid.values.resize(grid.cell_count());
    in.read(reinterpret_cast<char*>(grid.values.data()),
            static_cast<std::streamsize>(grid.values.size() * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(grid.values.size() * sizeof(double)))
        fail(path + ": truncated TIEG payload");
    grid.validate();
    return grid;
}

void write_grid_csv(const TorusGrid& grid, std::ostream& out) {
    grid.validate();
    std::vector<std::int64_t> idx(static_cast<std::size_t>(grid.dim), 0);
    for (std::size_t c = 0; c < grid.values.size(); ++c) {
        for (int a = 0; a < grid.dim; ++a) out << idx[static_cast<std::size_t>(a)] << ',';
        out << format_double(grid.values[c]) << '\n';
        for (int a = grid.dim - 1; a >= 0; --a) {
            if (++idx[static_cast<std::size_t>(a)] < grid.resolution[static_cast<std::size_t>(a)])
                break;
            idx[static_cast<std::size_t>(a)] = 0;
        }
    }
}

void write_slice_pgm(const TorusGrid& grid, std::ostream& out, int axis_u, int axis_v,
                     const std::vector<int>& fixed) {
    grid.validate();
    if (grid.dim < 2) fail("write_slice_pgm: grid must be at least 2D");
    if (axis_u == axis_v || axis_u < 0 || axis_v < 0 || axis_u >= grid.dim || axis_v >= grid.dim)
        fail("write_slice_pgm: invalid slice axes");

    std::vector<std::size_t> stride(static_cast<std::size_t>(grid.dim), 1);
    for (int a = grid.dim - 2; a >= 0; --a)
        stride[static_cast<std::size_t>(a)] =
            stride[static_cast<std::size_t>(a + 1)] *
            static_cast<std::size_t>(grid.resolution[static_cast<std::size_t>(a + 1)]);

    std::size_t base = 0;
    std::size_t fi = 0;
    for (int a = 0; a < grid.dim; ++a) {
        if (a == axis_u || a == axis_v) continue;
        const int v = fi < fixed.size() ? fixed[fi] : 0;
        ++fi;
        if (v < 0 || v >= grid.resolution[static_cast<std::size_t>(a)])
            fail("write_slice_pgm: fixed index out of range");
        base += static_cast<std::size_t>(v) * stride[static_cast<std::size_t>(a)];
    }

    const int nu = grid.resolution[static_cast<std::size_t>(axis_u)];
    const int nv = grid.resolution[static_cast<std::size_t>(axis_v)];
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int u = 0; u < nu; ++u)
        for (int v = 0; v < nv; ++v) {
            const double x = grid.values[base + static_cast<std::size_t>(u) * stride[static_cast<std::size_t>(axis_u)] +
                                         static_cast<std::size_t>(v) * stride[static_cast<std::size_t>(axis_v)]];
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;

    out << "P2\n" << nu << ' ' << nv << "\n255\n";
    for (int v = 0; v < nv; ++v) {
        for (int u = 0; u < nu; ++u) {
            const double x = grid.values[base + static_cast<std::size_t>(u) * stride[static_cast<std::size_t>(axis_u)] +
                                         static_cast<std::size_t>(v) * stride[static_cast<std::size_t>(axis_v)]];
            const int g = static_cast<int>(std::lround((x - lo) * scale));
            out << g << (u + 1 < nu ? ' ' : '\n');
        }
    }
}

}  // namespace tieconv
