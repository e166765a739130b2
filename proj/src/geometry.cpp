#include "tieconv/geometry.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "tieconv/kdtree.hpp"
#include "tieconv/parallel.hpp"

namespace tieconv {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

double parse_double(std::string_view tok, const std::string& path, std::size_t line_no) {
    double v = 0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
        fail(path + ":" + std::to_string(line_no) + ": cannot parse number '" + std::string(tok) + "'");
    if (!std::isfinite(v))
        fail(path + ":" + std::to_string(line_no) + ": non-finite value");
    return v;
}

std::vector<std::string_view> split_line(std::string_view line, bool comma) {
    std::vector<std::string_view> toks;
    std::size_t i = 0;
    auto is_sep = [&](char c) {
        return comma ? (c == ',' || c == ' ' || c == '\t') : (c == ' ' || c == '\t' || c == '\r');
    };
    while (i < line.size()) {
        while (i < line.size() && is_sep(line[i])) ++i;
        std::size_t j = i;
        while (j < line.size() && !is_sep(line[j])) ++j;
        if (j > i) {
            std::string_view t = line.substr(i, j - i);
            while (!t.empty() && (t.back() == '\r' || t.back() == '\n')) t.remove_suffix(1);
            if (!t.empty()) toks.push_back(t);
        }
        i = j;
    }
    return toks;
}

double sqnorm(std::span<const double> v) {
    double s = 0;
    for (double x : v) s += x * x;
    return s;
}

// Unit double in [0,1) from the top 53 bits; avoids the unspecified behavior
// of std::uniform_real_distribution across standard libraries.
double unit_double(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

void EmbeddedSamples::validate() const {
    if (dim < 1) fail("EmbeddedSamples: ambient dimension must be >= 1");
    if (points.size() % static_cast<std::size_t>(dim) != 0)
        fail("EmbeddedSamples: point array size is not a multiple of dim");
    const std::size_t n = count();
    for (double v : points)
        if (!std::isfinite(v)) fail("EmbeddedSamples: non-finite point coordinate");
    if (!normals.empty()) {
        if (normals.size() != points.size()) fail("EmbeddedSamples: normals/points size mismatch");
        for (std::size_t i = 0; i < n; ++i) {
            if (is_degenerate(i)) continue;
            const double s = sqnorm(normal(i));
            if (std::abs(std::sqrt(s) - 1.0) > 1e-9)
                fail("EmbeddedSamples: normal " + std::to_string(i) + " is not unit length");
        }
    }
    if (!frames.empty()) {
        if (frame_dim < 1 || frame_dim > dim) fail("EmbeddedSamples: invalid frame_dim");
        if (frames.size() != n * static_cast<std::size_t>(frame_dim) * dim)
            fail("EmbeddedSamples: frames size mismatch");
    }
    if (!degenerate.empty() && degenerate.size() != n)
        fail("EmbeddedSamples: degeneracy flag size mismatch");
    for (const auto& f : faces) {
        for (std::int64_t idx : f)
            if (idx < 0 || idx >= static_cast<std::int64_t>(n))
                fail("EmbeddedSamples: face index " + std::to_string(idx) + " out of range");
        if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2])
            fail("EmbeddedSamples: degenerate face (repeated vertex)");
    }
}

EmbeddedSamples load_point_cloud(const std::string& path, PointFormat format) {
    std::ifstream in(path);
    if (!in) fail("cannot open '" + path + "'");
    const bool comma = format == PointFormat::Csv;

    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    std::size_t cols = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto toks = split_line(line, comma);
        if (toks.empty()) continue;
        std::vector<double> row;
        row.reserve(toks.size());
        for (auto t : toks) row.push_back(parse_double(t, path, line_no));
        if (cols == 0) {
            cols = row.size();
            if (cols < 1) fail(path + ": no data columns");
        } else if (row.size() != cols) {
            fail(path + ":" + std::to_string(line_no) + ": inconsistent column count (" +
                 std::to_string(row.size()) + " vs " + std::to_string(cols) + ")");
        }
        rows.push_back(std::move(row));
    }
    if (rows.size() < 2) fail(path + ": fewer than 2 points");

    // Trailing half of each row is taken as a normal only when it is a unit
    // vector on every line; otherwise all columns are coordinates.
    bool with_normals = false;
    std::size_t d = cols;
    if (cols % 2 == 0 && cols >= 4) {
        const std::size_t half = cols / 2;
        with_normals = true;
        for (const auto& row : rows) {
            double s = 0;
            for (std::size_t j = half; j < cols; ++j) s += row[j] * row[j];
            if (std::abs(std::sqrt(s) - 1.0) > 1e-9) {
                with_normals = false;
                break;
            }
        }
        if (with_normals) d = half;
    }

    EmbeddedSamples out;
    out.dim = static_cast<int>(d);
    out.points.reserve(rows.size() * d);
    if (with_normals) out.normals.reserve(rows.size() * d);
    for (const auto& row : rows) {
        for (std::size_t j = 0; j < d; ++j) out.points.push_back(row[j]);
        if (with_normals)
            for (std::size_t j = d; j < 2 * d; ++j) out.normals.push_back(row[j]);
    }
    out.validate();
    return out;
}

namespace {

struct RawMesh {
    std::vector<double> vertices;  // 3 per vertex
    std::vector<std::array<std::int64_t, 3>> faces;
};

void push_triangle(RawMesh& mesh, std::int64_t a, std::int64_t b, std::int64_t c,
                   const std::string& path, std::size_t* skipped) {
    const std::int64_t nv = static_cast<std::int64_t>(mesh.vertices.size() / 3);
    for (std::int64_t idx : {a, b, c})
        if (idx < 0 || idx >= nv)
            fail(path + ": face index " + std::to_string(idx) + " out of range (have " +
                 std::to_string(nv) + " vertices)");
    const double* va = mesh.vertices.data() + 3 * a;
    const double* vb = mesh.vertices.data() + 3 * b;
    const double* vc = mesh.vertices.data() + 3 * c;
    double e1[3], e2[3];
    for (int j = 0; j < 3; ++j) {
        e1[j] = vb[j] - va[j];
        e2[j] = vc[j] - va[j];
    }
    const double cx = e1[1] * e2[2] - e1[2] * e2[1];
    const double cy = e1[2] * e2[0] - e1[0] * e2[2];
    const double cz = e1[0] * e2[1] - e1[1] * e2[0];
    if (a == b || b == c || a == c || cx * cx + cy * cy + cz * cz <= 0.0) {
        ++*skipped;
        return;
    }
    mesh.faces.push_back({a, b, c});
}

RawMesh parse_off(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open '" + path + "'");
    // Token stream with '#' comments stripped per line.
    std::vector<std::string> toks;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        std::string t;
        while (ls >> t) toks.push_back(t);
    }
    std::size_t pos = 0;
    auto next = [&]() -> const std::string& {
        if (pos >= toks.size()) fail(path + ": unexpected end of OFF file");
        return toks[pos++];
    };
    auto next_ll = [&]() {
        const std::string& t = next();
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc{} || p != t.data() + t.size())
            fail(path + ": expected integer, got '" + t + "'");
        return v;
    };
    auto next_d = [&]() {
        const std::string& t = next();
        return parse_double(t, path, 0);
    };

    if (next() != "OFF") fail(path + ": malformed OFF header");
    const std::int64_t nv = next_ll(), nf = next_ll();
    (void)next_ll();  // edge count, ignored
    if (nv < 0 || nf < 0) fail(path + ": malformed OFF header counts");

    RawMesh mesh;
    mesh.vertices.reserve(static_cast<std::size_t>(nv) * 3);
    for (std::int64_t i = 0; i < nv; ++i)
        for (int j = 0; j < 3; ++j) mesh.vertices.push_back(next_d());
    std::size_t skipped = 0;
    for (std::int64_t f = 0; f < nf; ++f) {
        const std::int64_t k = next_ll();
        if (k < 3) fail(path + ": face with fewer than 3 vertices");
        std::vector<std::int64_t> idx(static_cast<std::size_t>(k));
        for (auto& v : idx) v = next_ll();
        for (std::int64_t j = 1; j + 1 < k; ++j)
            push_triangle(mesh, idx[0], idx[static_cast<std::size_t>(j)],
                          idx[static_cast<std::size_t>(j) + 1], path, &skipped);
    }
    if (skipped > 0)
        std::cerr << "warning: " << path << ": skipped " << skipped << " zero-area face(s)\n";
    return mesh;
}

RawMesh parse_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open '" + path + "'");
    RawMesh mesh;
    std::string line;
    std::size_t line_no = 0, skipped = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto toks = split_line(line, false);
        if (toks.empty() || toks[0][0] == '#') continue;
        if (toks[0] == "v") {
            if (toks.size() < 4) fail(path + ":" + std::to_string(line_no) + ": malformed vertex");
            for (int j = 1; j <= 3; ++j)
                mesh.vertices.push_back(parse_double(toks[static_cast<std::size_t>(j)], path, line_no));
        } else if (toks[0] == "f") {
            if (toks.size() < 4) fail(path + ":" + std::to_string(line_no) + ": face with fewer than 3 vertices");
            const std::int64_t nv = static_cast<std::int64_t>(mesh.vertices.size() / 3);
            std::vector<std::int64_t> idx;
            for (std::size_t t = 1; t < toks.size(); ++t) {
                std::string_view ref = toks[t];
                const auto slash = ref.find('/');
                if (slash != std::string_view::npos) ref = ref.substr(0, slash);
                std::int64_t v = 0;
                auto [p, ec] = std::from_chars(ref.data(), ref.data() + ref.size(), v);
                if (ec != std::errc{} || p != ref.data() + ref.size() || v == 0)
                    fail(path + ":" + std::to_string(line_no) + ": bad face index '" +
                         std::string(toks[t]) + "'");
                idx.push_back(v > 0 ? v - 1 : nv + v);  // OBJ indices are 1-based
            }
            for (std::size_t j = 1; j + 1 < idx.size(); ++j)
                push_triangle(mesh, idx[0], idx[j], idx[j + 1], path, &skipped);
        }
        // all other record types ignored
    }
    if (skipped > 0)
        std::cerr << "warning: " << path << ": skipped " << skipped << " zero-area face(s)\n";
    return mesh;
}

}  // namespace

EmbeddedSamples load_mesh(const std::string& path, MeshFormat format) {
    RawMesh mesh = format == MeshFormat::Off ? parse_off(path) : parse_obj(path);
    if (mesh.vertices.size() < 6) fail(path + ": fewer than 2 vertices");

    EmbeddedSamples out;
    out.dim = 3;
    out.points = std::move(mesh.vertices);
    out.faces = std::move(mesh.faces);

    // Area-weighted vertex normals: accumulate cross products (twice the
    // area-weighted face normal), then normalize.
    const std::size_t n = out.count();
    std::vector<double> acc(3 * n, 0.0);
    for (const auto& f : out.faces) {
        const double* a = out.points.data() + 3 * f[0];
        const double* b = out.points.data() + 3 * f[1];
        const double* c = out.points.data() + 3 * f[2];
        const double e1[3] = {b[0] - a[0], b[1] - a[1], b[2] - a[2]};
        const double e2[3] = {c[0] - a[0], c[1] - a[1], c[2] - a[2]};
        const double cr[3] = {e1[1] * e2[2] - e1[2] * e2[1], e1[2] * e2[0] - e1[0] * e2[2],
                              e1[0] * e2[1] - e1[1] * e2[0]};
        for (std::int64_t v : f)
            for (int j = 0; j < 3; ++j) acc[3 * static_cast<std::size_t>(v) + j] += cr[j];
    }
    bool all_ok = !out.faces.empty();
    for (std::size_t i = 0; i < n && all_ok; ++i) {
        const double s = std::sqrt(acc[3 * i] * acc[3 * i] + acc[3 * i + 1] * acc[3 * i + 1] +
                                   acc[3 * i + 2] * acc[3 * i + 2]);
        if (s <= 0) {
            all_ok = false;
        } else {
            for (int j = 0; j < 3; ++j) acc[3 * i + j] /= s;
        }
    }
    if (all_ok) {
        out.normals = std::move(acc);
    } else if (!out.faces.empty()) {
        std::cerr << "warning: " << path << ": vertex without incident area, normals dropped\n";
    }
    out.validate();
    return out;
}

EmbeddedSamples sample_surface(const EmbeddedSamples& mesh, std::size_t n, std::uint64_t seed) {
    mesh.validate();
    if (mesh.dim != 3 || !mesh.has_faces()) fail("sample_surface: mesh with triangle faces required");

    std::vector<double> cum;
    std::vector<std::array<double, 3>> face_normals;
    cum.reserve(mesh.faces.size());
    double total = 0;
    for (const auto& f : mesh.faces) {
        const double* a = mesh.points.data() + 3 * f[0];
        const double* b = mesh.points.data() + 3 * f[1];
        const double* c = mesh.points.data() + 3 * f[2];
        const double e1[3] = {b[0] - a[0], b[1] - a[1], b[2] - a[2]};
        const double e2[3] = {c[0] - a[0], c[1] - a[1], c[2] - a[2]};
        double cr[3] = {e1[1] * e2[2] - e1[2] * e2[1], e1[2] * e2[0] - e1[0] * e2[2],
                        e1[0] * e2[1] - e1[1] * e2[0]};
        const double norm = std::sqrt(cr[0] * cr[0] + cr[1] * cr[1] + cr[2] * cr[2]);
        total += 0.5 * norm;
        cum.push_back(total);
        if (norm > 0)
            for (double& v : cr) v /= norm;
        face_normals.push_back({cr[0], cr[1], cr[2]});
    }
    if (!(total > 0)) fail("sample_surface: all faces degenerate");

    std::mt19937_64 rng(seed);
    EmbeddedSamples out;
    out.dim = 3;
    out.points.reserve(3 * n);
    out.normals.reserve(3 * n);
    for (std::size_t s = 0; s < n; ++s) {
        const double target = unit_double(rng) * total;
        const std::size_t fi = static_cast<std::size_t>(
            std::upper_bound(cum.begin(), cum.end(), target) - cum.begin());
        const auto& f = mesh.faces[std::min(fi, mesh.faces.size() - 1)];
        double u = unit_double(rng), v = unit_double(rng);
        if (u + v > 1.0) {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        const double* a = mesh.points.data() + 3 * f[0];
        const double* b = mesh.points.data() + 3 * f[1];
        const double* c = mesh.points.data() + 3 * f[2];
        for (int j = 0; j < 3; ++j)
            out.points.push_back(a[j] + u * (b[j] - a[j]) + v * (c[j] - a[j]));
        const auto& fn = face_normals[std::min(fi, mesh.faces.size() - 1)];
        for (int j = 0; j < 3; ++j) out.normals.push_back(fn[j]);
    }
    out.validate();
    return out;
}

double diameter(const EmbeddedSamples& samples) {
    const std::size_t n = samples.count();
    if (n < 2) fail("diameter: fewer than 2 points");
    const int d = samples.dim;
    const double* pts = samples.points.data();

    // Chunked scan over i; each chunk keeps its own max, merged afterwards.
    const std::size_t workers = static_cast<std::size_t>(thread_count());
    const std::size_t cs = (n + workers - 1) / workers;
    std::vector<double> chunk_max((n + cs - 1) / cs, 0.0);
    parallel_chunks(n, [&](std::size_t begin, std::size_t end) {
        const std::size_t ci = begin / cs;
        double local = 0;
        for (std::size_t i = begin; i < end; ++i) {
            const double* pi = pts + i * static_cast<std::size_t>(d);
            for (std::size_t j = i + 1; j < n; ++j) {
                const double* pj = pts + j * static_cast<std::size_t>(d);
                double s = 0;
                for (int c = 0; c < d; ++c) {
                    const double dx = pi[c] - pj[c];
                    s += dx * dx;
                }
                if (s > local) local = s;
            }
        }
        chunk_max[ci] = local;
    });
    double m = 0;
    for (double v : chunk_max) m = std::max(m, v);
    return std::sqrt(m);
}

namespace {

// Deterministic sign convention: make the entry of largest magnitude positive
// (first such index on ties).
void canonicalize_sign(double* v, int d) {
    int arg = 0;
    for (int j = 1; j < d; ++j)
        if (std::abs(v[j]) > std::abs(v[arg])) arg = j;
    if (v[arg] < 0)
        for (int j = 0; j < d; ++j) v[j] = -v[j];
}

}  // namespace

EmbeddedSamples estimate_tangents(const EmbeddedSamples& samples, int k_neighbors, int manifold_dim) {
    samples.validate();
    const std::size_t n = samples.count();
    const int d = samples.dim;
    if (manifold_dim < 1 || manifold_dim > d)
        fail("estimate_tangents: manifold_dim out of range");
    if (k_neighbors < manifold_dim + 1)
        fail("estimate_tangents: k_neighbors must be >= manifold_dim + 1");
    if (n <= static_cast<std::size_t>(k_neighbors))
        fail("estimate_tangents: need more points than k_neighbors");

    EmbeddedSamples out = samples;
    out.frame_dim = manifold_dim;
    out.frames.assign(n * static_cast<std::size_t>(manifold_dim) * d, 0.0);
    out.degenerate.assign(n, 0);
    const bool hypersurface = manifold_dim == d - 1;
    const bool had_normals = samples.has_normals();
    if (hypersurface && !had_normals) out.normals.assign(n * static_cast<std::size_t>(d), 0.0);

    const KdTree tree(samples.points.data(), n, d);

    parallel_chunks(n, [&](std::size_t begin, std::size_t end) {
        Eigen::MatrixXd cov(d, d);
        std::vector<double> centroid(static_cast<std::size_t>(d));
        for (std::size_t i = begin; i < end; ++i) {
            const auto hits = tree.nearest(samples.point(i), static_cast<std::size_t>(k_neighbors) + 1);
            std::fill(centroid.begin(), centroid.end(), 0.0);
            for (const auto& h : hits) {
                const auto p = samples.point(h.index);
                for (int c = 0; c < d; ++c) centroid[static_cast<std::size_t>(c)] += p[c];
            }
            for (double& c : centroid) c /= static_cast<double>(hits.size());
            cov.setZero();
            for (const auto& h : hits) {
                const auto p = samples.point(h.index);
                for (int r = 0; r < d; ++r)
                    for (int c = r; c < d; ++c)
                        cov(r, c) += (p[r] - centroid[static_cast<std::size_t>(r)]) *
                                     (p[c] - centroid[static_cast<std::size_t>(c)]);
            }
            for (int r = 0; r < d; ++r)
                for (int c = 0; c < r; ++c) cov(r, c) = cov(c, r);

            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
            const auto& w = es.eigenvalues();   // ascending
            const auto& V = es.eigenvectors();

            const double w_max = w(d - 1);
            const double w_tangent_min = w(d - manifold_dim);
            if (!(w_max > 0) || w_tangent_min <= 1e-12 * w_max) {
                out.degenerate[i] = 1;
                continue;
            }
            double* frame = out.frames.data() + i * static_cast<std::size_t>(manifold_dim) * d;
            for (int r = 0; r < manifold_dim; ++r) {
                for (int c = 0; c < d; ++c) frame[r * d + c] = V(c, d - 1 - r);
                canonicalize_sign(frame + r * d, d);
            }
            if (hypersurface) {
                double nrm[16];
                for (int c = 0; c < d; ++c) nrm[c] = V(c, 0);
                if (had_normals) {
                    double dot = 0;
                    const auto pre = samples.normal(i);
                    for (int c = 0; c < d; ++c) dot += nrm[c] * pre[c];
                    if (dot < 0)
                        for (int c = 0; c < d; ++c) nrm[c] = -nrm[c];
                } else {
                    canonicalize_sign(nrm, d);
                }
                for (int c = 0; c < d; ++c) out.normals[i * static_cast<std::size_t>(d) + c] = nrm[c];
            }
        }
    });
    return out;
}

EmbeddedSamples frames_from_normals(const EmbeddedSamples& samples) {
    samples.validate();
    if (!samples.has_normals()) fail("frames_from_normals: samples carry no normals");
    const std::size_t n = samples.count();
    const int d = samples.dim;
    if (d < 2) fail("frames_from_normals: ambient dimension must be >= 2");

    EmbeddedSamples out = samples;
    out.frame_dim = d - 1;
    out.frames.assign(n * static_cast<std::size_t>(d - 1) * d, 0.0);
    if (out.degenerate.empty()) out.degenerate.assign(n, 0);

    for (std::size_t i = 0; i < n; ++i) {
        const auto nv = samples.normal(i);
        int skip = 0;
        for (int j = 1; j < d; ++j)
            if (std::abs(nv[j]) > std::abs(nv[skip])) skip = j;
        double* frame = out.frames.data() + i * static_cast<std::size_t>(d - 1) * d;
        int r = 0;
        for (int axis = 0; axis < d; ++axis) {
            if (axis == skip) continue;
            double* row = frame + r * d;
            for (int c = 0; c < d; ++c) row[c] = (c == axis) ? 1.0 : 0.0;
            // orthogonalize against the normal and previous rows
            const double dn = nv[axis];
            for (int c = 0; c < d; ++c) row[c] -= dn * nv[c];
            for (int p = 0; p < r; ++p) {
                const double* prev = frame + p * d;
                double dp = 0;
                for (int c = 0; c < d; ++c) dp += row[c] * prev[c];
                for (int c = 0; c < d; ++c) row[c] -= dp * prev[c];
            }
            double s = 0;
            for (int c = 0; c < d; ++c) s += row[c] * row[c];
            s = std::sqrt(s);
            if (s <= 1e-12) {
                out.degenerate[i] = 1;
                break;
            }
            for (int c = 0; c < d; ++c) row[c] /= s;
            ++r;
        }
    }
    return out;
}

}  // namespace tieconv
