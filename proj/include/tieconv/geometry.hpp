#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tieconv {

/// A finite sample of a manifold embedded in R^d. Points are stored flat,
/// row-major (point i occupies [i*dim, (i+1)*dim)). Normals are per-point
/// unit vectors (hypersurfaces only). Tangent frames are `frame_dim`
/// orthonormal row vectors per point, principal direction first.
struct EmbeddedSamples {
    int dim = 0;
    std::vector<double> points;
    std::vector<double> normals;        // empty or count()*dim
    std::vector<double> frames;         // empty or count()*frame_dim*dim
    int frame_dim = 0;
    std::vector<std::array<std::int64_t, 3>> faces;
    std::vector<std::uint8_t> degenerate;  // empty or count(); set by tangent estimation

    std::size_t count() const { return dim > 0 ? points.size() / static_cast<std::size_t>(dim) : 0; }
    bool has_normals() const { return !normals.empty(); }
    bool has_frames() const { return !frames.empty(); }
    bool has_faces() const { return !faces.empty(); }
    bool is_degenerate(std::size_t i) const { return !degenerate.empty() && degenerate[i] != 0; }

    std::span<const double> point(std::size_t i) const {
        return {points.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
    }
    std::span<const double> normal(std::size_t i) const {
        return {normals.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
    }
    /// Row r of point i's tangent frame.
    std::span<const double> frame_vector(std::size_t i, int r) const {
        const std::size_t stride = static_cast<std::size_t>(frame_dim) * dim;
        return {frames.data() + i * stride + static_cast<std::size_t>(r) * dim,
                static_cast<std::size_t>(dim)};
    }

    /// Throws std::runtime_error if any structural invariant is violated
    /// (entry counts, finiteness, unit normals, face index range/degeneracy).
    void validate() const;
};

/// One real value per sample point of an associated EmbeddedSamples.
struct ScalarField {
    std::vector<double> values;
};

enum class PointFormat { Xyz, Csv };
enum class MeshFormat { Off, Obj };

/// Parse a point cloud with d coordinates per line (whitespace- or
/// comma-separated). If every line has 2d columns with a unit-norm trailing
/// half, the trailing half is taken as per-point normals.
EmbeddedSamples load_point_cloud(const std::string& path, PointFormat format);

/// Parse an ASCII OFF or OBJ (v/f records) triangle mesh. Polygonal faces are
/// fan-triangulated; zero-area faces are skipped with a warning on stderr.
/// Per-vertex normals are area-weighted averages of incident face normals.
EmbeddedSamples load_mesh(const std::string& path, MeshFormat format);

/// Draw n points area-uniformly from a triangle mesh (face chosen with
/// probability proportional to area, barycentric-uniform within the face).
/// Normals are the face normals. Deterministic for a fixed seed.
EmbeddedSamples sample_surface(const EmbeddedSamples& mesh, std::size_t n, std::uint64_t seed);

/// Exact O(n^2) pairwise diameter.
double diameter(const EmbeddedSamples& samples);

/// Per-point tangent frames by local PCA over the k-nearest-neighbor cloud
/// (the point plus its k nearest). For hypersurfaces (manifold_dim == dim-1)
/// also fills a unit normal, sign-aligned to any preexisting normal.
/// Points with a rank-deficient neighborhood get flagged in `degenerate`.
EmbeddedSamples estimate_tangents(const EmbeddedSamples& samples, int k_neighbors, int manifold_dim);

/// Build tangent frames for a hypersurface directly from the stored unit
/// normals (frame = orthonormal basis of the normal's complement).
EmbeddedSamples frames_from_normals(const EmbeddedSamples& samples);

}  // namespace tieconv
