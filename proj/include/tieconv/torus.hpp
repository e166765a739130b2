#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "tieconv/geometry.hpp"

namespace tieconv {

/// A d-dimensional periodic grid of reals on the flat torus (R/LZ)^d.
/// Grid site with multi-index (i_0, ..., i_{d-1}) sits at world coordinate
/// origin + i_j * spacing(j); values are row-major with the last axis fastest.
struct TorusGrid {
    int dim = 0;
    std::vector<int> resolution;   // N_j per axis
    double side = 0;               // physical length L, same for every axis
    std::vector<double> origin;    // world coordinates of index 0
    std::vector<double> values;

    std::size_t cell_count() const {
        std::size_t n = 1;
        for (int r : resolution) n *= static_cast<std::size_t>(r);
        return n;
    }
    double spacing(int axis) const { return side / resolution[static_cast<std::size_t>(axis)]; }
    bool same_shape(const TorusGrid& o) const {
        return dim == o.dim && resolution == o.resolution && side == o.side;
    }
    void validate() const;
};

enum class BumpKind { QuinticSmoothstep, ExponentialMollifier };

/// Radial cutoff profile: 1 at t = 0, 0 for t >= cutoff, monotone in between.
struct BumpProfile {
    BumpKind kind = BumpKind::QuinticSmoothstep;
    double cutoff = 0;
};

/// Evaluate the profile at distance t >= 0.
double bump(const BumpProfile& profile, double t);

/// Build the zeroed periodic grid that boxes the samples: side
/// L = max(2 diam, diam + 2 reach), origin centered on the sample bounding
/// box. Throws when the cell diagonal sqrt(d) L/N exceeds reach/2.
TorusGrid build_torus_grid(const EmbeddedSamples& samples, int resolution, double reach);

struct ExtendStats {
    std::int64_t tube_cell_count = 0;  // grid sites within reach/2 of a sample
};

/// Tube extension of a per-sample scalar field: every grid site within
/// (periodic) distance reach/2 of its nearest sample x gets bump(dist) * f(x),
/// all other sites 0. Nearest-sample ties resolve to the lowest sample index.
TorusGrid extend_field(const EmbeddedSamples& samples, const ScalarField& field,
                       const TorusGrid& grid, double reach, BumpKind kind,
                       ExtendStats* stats = nullptr);

struct GridSpec {
    int dim = 0;
    std::vector<int> resolution;
    double side = 0;
};

struct DeltaKernel {};
struct GaussianKernel { double sigma; };
struct BoxKernel { double radius; };
struct FileKernel { std::string path; };
using KernelDescriptor = std::variant<DeltaKernel, GaussianKernel, BoxKernel, FileKernel>;

/// Kernels living directly on the grid, centered at index 0. The Gaussian is
/// periodically wrapped and normalized to plain sum 1; the box is the uniform
/// average over sites within the radius; file kernels are loaded verbatim and
/// must match the requested shape.
TorusGrid make_kernel(const GridSpec& spec, const KernelDescriptor& descriptor);

/// TIEG grid file: one ASCII header line
///   TIEG <dim> <N_1> ... <N_d> <side> <origin_1> ... <origin_d>
/// followed by the values as 64-bit little-endian IEEE-754, row-major.
void write_tieg(const TorusGrid& grid, const std::string& path);
TorusGrid read_tieg(const std::string& path);

/// CSV rows "i_0,...,i_{d-1},value".
void write_grid_csv(const TorusGrid& grid, std::ostream& out);

/// ASCII PGM of a 2D slice (axes axis_u, axis_v; remaining indices taken from
/// `fixed`, default 0), values affinely mapped to 0..255.
void write_slice_pgm(const TorusGrid& grid, std::ostream& out, int axis_u = 0, int axis_v = 1,
                     const std::vector<int>& fixed = {});

}  // namespace tieconv
