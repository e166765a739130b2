// tieconv — command-line front end: reach estimation, tube extension,
// toroidal convolution, spectra, the end-to-end pipeline, and the growth lab.

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "tieconv/conv.hpp"
#include "tieconv/geometry.hpp"
#include "tieconv/growth.hpp"
#include "tieconv/hyperbolic.hpp"
#include "tieconv/pipeline.hpp"
#include "tieconv/reach.hpp"
#include "tieconv/torus.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tieconv;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for digest");
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0)
        EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    hex.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        char b[3];
        std::snprintf(b, sizeof b, "%02x", digest[i]);
        hex += b;
    }
    return hex;
}

// Every run emits exactly one manifest; parameters are recorded after
// defaulting.
struct Manifest {
    std::string command;
    json parameters = json::object();
    json inputs = json::object();
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    void add_input(const std::string& path) { inputs[path] = sha256_file(path); }

    json finish() const {
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return json{{"command", command},
                    {"parameters", parameters},
                    {"inputs", inputs},
                    {"tool_version", kVersion},
                    {"duration_seconds", seconds}};
    }
};

// Write-to-temp-then-rename so failed runs leave no partial output behind.
void atomic_write(const std::string& path, const std::function<void(const std::string&)>& writer) {
    const std::string tmp = path + ".tmp";
    try {
        writer(tmp);
        fs::rename(tmp, path);
    } catch (...) {
        std::error_code ec;
        fs::remove(tmp, ec);
        throw;
    }
}

EmbeddedSamples load_samples(const std::string& path, const std::string& format) {
    std::string fmt = format;
    if (fmt.empty()) {
        const auto dot = path.rfind('.');
        fmt = dot == std::string::npos ? "" : path.substr(dot + 1);
        for (char& c : fmt) c = static_cast<char>(std::tolower(c));
    }
    if (fmt == "off") return load_mesh(path, MeshFormat::Off);
    if (fmt == "obj") return load_mesh(path, MeshFormat::Obj);
    if (fmt == "xyz" || fmt == "txt" || fmt == "pts") return load_point_cloud(path, PointFormat::Xyz);
    if (fmt == "csv") return load_point_cloud(path, PointFormat::Csv);
    throw std::runtime_error("unknown input format '" + fmt + "' (use xyz|csv|off|obj)");
}

ScalarField load_field_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open field file '" + path + "'");
    ScalarField field;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        // last comma/space-separated token is the value
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        std::string tok, last;
        while (ls >> tok) last = tok;
        if (last.empty()) continue;
        try {
            field.values.push_back(std::stod(last));
        } catch (const std::exception&) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": cannot parse field value '" + last + "'");
        }
    }
    if (field.values.empty()) throw std::runtime_error(path + ": empty field file");
    return field;
}

void write_field_csv(const ScalarField& field, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    for (std::size_t i = 0; i < field.values.size(); ++i) {
        char buf[48];
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, field.values[i]);
        out << buf;
    }
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

// Tangent frames for reach estimation: prefer normals shipped with the data,
// fall back to local PCA.
EmbeddedSamples ensure_frames(const EmbeddedSamples& samples, int k, int manifold_dim) {
    if (samples.has_frames()) return samples;
    if (samples.has_normals()) return frames_from_normals(samples);
    const int mdim = manifold_dim > 0 ? manifold_dim : samples.dim - 1;
    return estimate_tangents(samples, k, mdim);
}

KernelDescriptor parse_kernel_spec(const std::string& spec) {
    if (spec == "delta") return DeltaKernel{};
    const auto colon = spec.find(':');
    const std::string head = spec.substr(0, colon);
    const std::string tail = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (head == "gaussian") return GaussianKernel{std::stod(tail)};
    if (head == "box") return BoxKernel{std::stod(tail)};
    if (head == "grid") return FileKernel{tail};
    throw std::runtime_error("bad kernel spec '" + spec +
                             "' (delta | gaussian:SIGMA | box:RADIUS | grid:FILE | field:CSV)");
}

json reach_record(const ReachEstimate& est, std::size_t n_points) {
    json rec{{"argmin_pair", {est.contributing_pair[0], est.contributing_pair[1]}},
             {"n_points", n_points},
             {"estimator", "pairwise-tangent"},
             {"neighbor_cap", est.neighbor_cap}};
    if (std::isfinite(est.global_reach))
        rec["global_reach"] = est.global_reach;
    else
        rec["global_reach"] = "infinity";
    return rec;
}

void emit(const json& result, Manifest& manifest, const std::string& manifest_path) {
    if (manifest_path.empty()) {
        json out = result;
        out["manifest"] = manifest.finish();
        std::cout << out.dump(2) << '\n';
    } else {
        atomic_write(manifest_path, [&](const std::string& tmp) {
            std::ofstream mf(tmp);
            mf << manifest.finish().dump(2) << '\n';
            if (!mf) throw std::runtime_error("write failed for '" + tmp + "'");
        });
        std::cout << result.dump(2) << '\n';
    }
}

// ---------------------------------------------------------------------------

int run(int argc, char** argv) {
    CLI::App app{"TIE convolution toolkit: reach, tube extension, toroidal convolution, growth"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string manifest_path;
    app.add_option("--manifest", manifest_path, "write the run manifest to FILE instead of stdout")
        ->configurable(false);
    // let --manifest appear after the subcommand as well
    app.fallthrough();

    // ---- reach ----
    auto* reach_cmd = app.add_subcommand("reach", "estimate the reach of an embedded sample set");
    reach_cmd->fallthrough();
    std::string reach_input, reach_format;
    int reach_k = 12, reach_mdim = 0;
    reach_cmd->add_option("--input", reach_input, "point cloud or mesh file")->required();
    reach_cmd->add_option("--format", reach_format, "xyz|csv|off|obj (default: by extension)");
    reach_cmd->add_option("--k", reach_k, "neighbors for tangent estimation (default 12)");
    reach_cmd->add_option("--manifold-dim", reach_mdim,
                          "intrinsic dimension (default: ambient - 1)");

    // ---- extend ----
    auto* extend_cmd = app.add_subcommand("extend", "tube-extend a per-sample field onto the torus grid");
    extend_cmd->fallthrough();
    std::string ext_input, ext_format, ext_field, ext_bump = "quintic", ext_out;
    int ext_resolution = 64, ext_k = 12, ext_mdim = 0;
    double ext_reach = 0;
    extend_cmd->add_option("--input", ext_input)->required();
    extend_cmd->add_option("--format", ext_format, "xyz|csv|off|obj");
    extend_cmd->add_option("--field", ext_field, "CSV with one value per sample")->required();
    extend_cmd->add_option("--resolution", ext_resolution, "grid sites per axis (default 64)");
    extend_cmd->add_option("--reach", ext_reach, "reach override (default: estimate)");
    extend_cmd->add_option("--bump", ext_bump, "quintic|mollifier (default quintic)");
    extend_cmd->add_option("--k", ext_k, "neighbors for tangent estimation");
    extend_cmd->add_option("--manifold-dim", ext_mdim);
    extend_cmd->add_option("--out", ext_out, "output TIEG grid")->required();

    // ---- conv ----
    auto* conv_cmd = app.add_subcommand("conv", "convolve two TIEG grids on the torus");
    conv_cmd->fallthrough();
    std::string conv_f, conv_k, conv_method = "spectral", conv_out;
    conv_cmd->add_option("--f", conv_f, "field grid (TIEG)")->required();
    conv_cmd->add_option("--k", conv_k, "kernel grid (TIEG)")->required();
    conv_cmd->add_option("--method", conv_method, "direct|spectral (default spectral)");
    conv_cmd->add_option("--out", conv_out)->required();

    // ---- spectrum ----
    auto* spec_cmd = app.add_subcommand("spectrum", "DFT of a TIEG grid as CSV");
    spec_cmd->fallthrough();
    std::string spec_input, spec_out;
    spec_cmd->add_option("--input", spec_input, "grid file (TIEG)")->required();
    spec_cmd->add_option("--out", spec_out, "CSV: frequency tuple, real, imaginary")->required();

    // ---- pipeline ----
    auto* pipe_cmd = app.add_subcommand("pipeline",
                                        "end-to-end: box, extend, convolve, restrict");
    pipe_cmd->fallthrough();
    std::string pipe_input, pipe_format, pipe_field, pipe_kernel, pipe_bump = "quintic";
    std::string pipe_method = "spectral", pipe_normalize, pipe_out_grid, pipe_out_field;
    int pipe_resolution = 64, pipe_k = 12, pipe_mdim = 0;
    double pipe_reach = 0;
    pipe_cmd->add_option("--input", pipe_input)->required();
    pipe_cmd->add_option("--format", pipe_format, "xyz|csv|off|obj");
    pipe_cmd->add_option("--field", pipe_field, "CSV with one value per sample")->required();
    pipe_cmd->add_option("--kernel", pipe_kernel,
                         "delta | gaussian:SIGMA | box:RADIUS | grid:FILE | field:CSV")
        ->required();
    pipe_cmd->add_option("--resolution", pipe_resolution, "grid sites per axis (default 64)");
    pipe_cmd->add_option("--reach", pipe_reach, "reach override (default: estimate)");
    pipe_cmd->add_option("--bump", pipe_bump, "quintic|mollifier");
    pipe_cmd->add_option("--method", pipe_method, "direct|spectral");
    pipe_cmd->add_option("--normalize", pipe_normalize, "tube_mass: divide by kernel mass");
    pipe_cmd->add_option("--k", pipe_k, "neighbors for tangent estimation");
    pipe_cmd->add_option("--manifold-dim", pipe_mdim);
    pipe_cmd->add_option("--out-grid", pipe_out_grid, "output TIEG grid")->required();
    pipe_cmd->add_option("--out-field", pipe_out_field, "output restricted field CSV")->required();

    // ---- growth ----
    auto* growth_cmd = app.add_subcommand("growth", "word growth and geodesic counting lab");
    growth_cmd->fallthrough();
    std::string growth_model, growth_out;
    int growth_d = 2, growth_genus = 2;
    double growth_max = 10;
    bool growth_classify = false, growth_entropy = false;
    growth_cmd->add_option("--model", growth_model, "lattice|surface|flat-torus|hyperbolic")
        ->required();
    growth_cmd->add_option("--d", growth_d, "lattice/torus dimension (default 2)");
    growth_cmd->add_option("--genus", growth_genus, "surface genus (default 2)");
    growth_cmd->add_option("--max", growth_max, "maximum radius (default 10)");
    growth_cmd->add_flag("--classify", growth_classify, "emit a growth classification");
    growth_cmd->add_flag("--entropy", growth_entropy, "emit the entropy estimate");
    growth_cmd->add_option("--out", growth_out, "output CSV (radius,count)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;  // usage error
    }

    Manifest manifest;

    if (*reach_cmd) {
        manifest.command = "reach";
        manifest.add_input(reach_input);
        const auto samples = load_samples(reach_input, reach_format);
        const int mdim = reach_mdim > 0 ? reach_mdim : samples.dim - 1;
        manifest.parameters = {{"input", reach_input},
                               {"format", reach_format.empty() ? "auto" : reach_format},
                               {"k", reach_k},
                               {"manifold_dim", mdim}};
        const auto framed = ensure_frames(samples, reach_k, mdim);
        const auto est = estimate_reach(framed);
        emit(reach_record(est, samples.count()), manifest, manifest_path);
        return 0;
    }

    if (*extend_cmd) {
        manifest.command = "extend";
        manifest.add_input(ext_input);
        manifest.add_input(ext_field);
        const auto samples = load_samples(ext_input, ext_format);
        const auto field = load_field_csv(ext_field);
        if (ext_bump != "quintic" && ext_bump != "mollifier")
            throw std::runtime_error("bad --bump value '" + ext_bump + "'");
        const BumpKind bump_kind = ext_bump == "mollifier" ? BumpKind::ExponentialMollifier
                                                           : BumpKind::QuinticSmoothstep;
        double rho = ext_reach;
        if (!(rho > 0)) {
            const int mdim = ext_mdim > 0 ? ext_mdim : samples.dim - 1;
            rho = estimate_reach(ensure_frames(samples, ext_k, mdim)).global_reach;
            if (!std::isfinite(rho) || !(rho > 0))
                throw std::runtime_error("reach estimate unusable; pass --reach");
        }
        manifest.parameters = {{"input", ext_input},       {"field", ext_field},
                               {"resolution", ext_resolution}, {"reach", rho},
                               {"bump", ext_bump},         {"out", ext_out}};
        const auto grid = build_torus_grid(samples, ext_resolution, rho);
        ExtendStats stats;
        const auto extended = extend_field(samples, field, grid, rho, bump_kind, &stats);
        atomic_write(ext_out, [&](const std::string& tmp) { write_tieg(extended, tmp); });
        emit(json{{"reach_used", rho},
                  {"side", grid.side},
                  {"tube_cell_count", stats.tube_cell_count},
                  {"out", ext_out}},
             manifest, manifest_path);
        return 0;
    }

    if (*conv_cmd) {
        manifest.command = "conv";
        manifest.add_input(conv_f);
        manifest.add_input(conv_k);
        manifest.parameters = {{"f", conv_f}, {"k", conv_k}, {"method", conv_method},
                               {"out", conv_out}};
        const auto f = read_tieg(conv_f);
        const auto k = read_tieg(conv_k);
        TorusGrid out;
        if (conv_method == "direct")
            out = convolve_direct(f, k);
        else if (conv_method == "spectral")
            out = convolve_spectral(f, k);
        else
            throw std::runtime_error("bad --method value '" + conv_method + "'");
        atomic_write(conv_out, [&](const std::string& tmp) { write_tieg(out, tmp); });
        emit(json{{"cells", out.cell_count()}, {"method", conv_method}, {"out", conv_out}},
             manifest, manifest_path);
        return 0;
    }

    if (*spec_cmd) {
        manifest.command = "spectrum";
        manifest.add_input(spec_input);
        manifest.parameters = {{"input", spec_input}, {"out", spec_out}};
        const auto grid = read_tieg(spec_input);
        const auto spec = dft(grid);
        atomic_write(spec_out, [&](const std::string& tmp) {
            std::ofstream out(tmp);
            if (!out) throw std::runtime_error("cannot open '" + tmp + "'");
            std::vector<int> idx(static_cast<std::size_t>(spec.dim), 0);
            for (std::size_t c = 0; c < spec.coefficients.size(); ++c) {
                for (int a = 0; a < spec.dim; ++a) out << idx[static_cast<std::size_t>(a)] << ',';
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", spec.coefficients[c].real(),
                              spec.coefficients[c].imag());
                out << buf;
                for (int a = spec.dim - 1; a >= 0; --a) {
                    if (++idx[static_cast<std::size_t>(a)] <
                        spec.resolution[static_cast<std::size_t>(a)])
                        break;
                    idx[static_cast<std::size_t>(a)] = 0;
                }
            }
            if (!out) throw std::runtime_error("write failed for '" + tmp + "'");
        });
        emit(json{{"cells", spec.cell_count()}, {"out", spec_out}}, manifest, manifest_path);
        return 0;
    }

    if (*pipe_cmd) {
        manifest.command = "pipeline";
        manifest.add_input(pipe_input);
        manifest.add_input(pipe_field);
        const auto samples = load_samples(pipe_input, pipe_format);
        const auto field = load_field_csv(pipe_field);

        TieConfig cfg;
        cfg.resolution = pipe_resolution;
        cfg.k_neighbors = pipe_k;
        if (pipe_mdim > 0) cfg.manifold_dim = pipe_mdim;
        if (pipe_reach > 0) cfg.reach_override = pipe_reach;
        if (pipe_bump == "mollifier")
            cfg.bump = BumpKind::ExponentialMollifier;
        else if (pipe_bump != "quintic")
            throw std::runtime_error("bad --bump value '" + pipe_bump + "'");
        if (pipe_method == "direct")
            cfg.method = ConvMethod::Direct;
        else if (pipe_method != "spectral")
            throw std::runtime_error("bad --method value '" + pipe_method + "'");
        if (!pipe_normalize.empty()) {
            if (pipe_normalize != "tube_mass")
                throw std::runtime_error("bad --normalize value '" + pipe_normalize + "'");
            cfg.normalize_tube_mass = true;
        }
        if (pipe_kernel.rfind("field:", 0) == 0) {
            const std::string path = pipe_kernel.substr(6);
            manifest.add_input(path);
            cfg.kernel = load_field_csv(path);
        } else {
            cfg.kernel = parse_kernel_spec(pipe_kernel);
            if (const auto* fk = std::get_if<FileKernel>(&std::get<KernelDescriptor>(cfg.kernel)))
                manifest.add_input(fk->path);
        }
        manifest.parameters = {{"input", pipe_input},   {"field", pipe_field},
                               {"kernel", pipe_kernel}, {"resolution", pipe_resolution},
                               {"bump", pipe_bump},     {"method", pipe_method},
                               {"normalize", pipe_normalize.empty() ? "none" : pipe_normalize},
                               {"out_grid", pipe_out_grid},
                               {"out_field", pipe_out_field}};

        const auto result = tie_convolve(samples, field, cfg);
        atomic_write(pipe_out_grid,
                     [&](const std::string& tmp) { write_tieg(result.grid_out, tmp); });
        atomic_write(pipe_out_field,
                     [&](const std::string& tmp) { write_field_csv(result.restricted, tmp); });
        emit(json{{"reach_used", result.reach_used},
                  {"side_used", result.side_used},
                  {"tube_cell_count", result.diagnostics.tube_cell_count},
                  {"resolution_margin", result.diagnostics.resolution_margin},
                  {"out_grid", pipe_out_grid},
                  {"out_field", pipe_out_field}},
             manifest, manifest_path);
        return 0;
    }

    if (*growth_cmd) {
        manifest.command = "growth";
        manifest.parameters = {{"model", growth_model}, {"d", growth_d},
                               {"genus", growth_genus}, {"max", growth_max},
                               {"classify", growth_classify}, {"entropy", growth_entropy},
                               {"out", growth_out}};
        GrowthSeries series;
        json result = json::object();
        if (growth_model == "lattice") {
            series = ball_growth_lattice(growth_d, static_cast<int>(growth_max));
        } else if (growth_model == "surface") {
            series = ball_growth_surface_group(growth_genus, static_cast<int>(growth_max));
        } else if (growth_model == "flat-torus") {
            std::vector<double> x(static_cast<std::size_t>(growth_d), 0.0);
            std::vector<double> y(static_cast<std::size_t>(growth_d), 0.0);
            y[0] = 0.5;  // side defaults to 1, base pair offset L/2 along axis 0
            series = geodesic_growth_flat_torus(growth_d, 1.0, x, y, growth_max);
            result["note"] = "base pair x != y; x == y would count only nonconstant geodesics";
        } else if (growth_model == "hyperbolic") {
            series = orbit_growth_hyperbolic(growth_max);
        } else {
            throw std::runtime_error("bad --model value '" + growth_model + "'");
        }
        result["model"] = growth_model;
        result["label"] = series.label;
        result["entries"] = series.radii.size();
        result["out"] = growth_out;
        // classify/estimate before touching --out so a failing run writes nothing
        if (growth_classify) {
            const auto c = classify_growth(series);
            const char* kind = c.kind == GrowthKind::Polynomial    ? "polynomial"
                               : c.kind == GrowthKind::Exponential ? "exponential"
                                                                   : "bounded";
            result["classification"] = {{"kind", kind},
                                        {"parameter", c.parameter},
                                        {"fit_residual", c.fit_residual}};
        }
        if (growth_entropy) result["entropy"] = entropy_estimate(series);
        atomic_write(growth_out, [&](const std::string& tmp) {
            std::ofstream out(tmp);
            if (!out) throw std::runtime_error("cannot open '" + tmp + "'");
            out << "radius,count\n";
            for (std::size_t i = 0; i < series.radii.size(); ++i) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.17g,%lld\n", series.radii[i], series.counts[i]);
                out << buf;
            }
            if (!out) throw std::runtime_error("write failed for '" + tmp + "'");
        });
        emit(result, manifest, manifest_path);
        return 0;
    }

    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
