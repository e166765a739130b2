// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exit code = number of failures.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include "shapes.hpp"
#include "tieconv/conv.hpp"
#include "tieconv/geometry.hpp"
#include "tieconv/growth.hpp"
#include "tieconv/hyperbolic.hpp"
#include "tieconv/pipeline.hpp"
#include "tieconv/reach.hpp"
#include "tieconv/torus.hpp"

namespace fs = std::filesystem;
using namespace tieconv;

namespace {

const std::string kCli = TIECONV_CLI_PATH;
const std::string kFixtures = TIECONV_FIXTURE_DIR;

struct Criterion {
    int index;
    std::string name;
    bool ok = true;
    std::vector<std::string> notes;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            notes.push_back(what);
        }
    }
};

int failures = 0;

template <class Fn>
void run_criterion(int index, const std::string& name, double budget_seconds, Fn&& fn) {
    Criterion c;
    c.index = index;
    c.name = name;
    const auto start = std::chrono::steady_clock::now();
    try {
        fn(c);
    } catch (const std::exception& e) {
        c.ok = false;
        c.notes.push_back(std::string("exception: ") + e.what());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (budget_seconds > 0 && seconds >= budget_seconds) {
        c.ok = false;
        c.notes.push_back("runtime budget exceeded");
    }
    std::printf("%s criterion %d: %s (%.2fs)\n", c.ok ? "PASS" : "FAIL", index, name.c_str(),
                seconds);
    for (const auto& n : c.notes) std::printf("       - %s\n", n.c_str());
    std::fflush(stdout);
    if (!c.ok) ++failures;
}

double spec_rel_l2(const SpectralGrid& a, const SpectralGrid& b) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < a.coefficients.size(); ++i) {
        num += std::norm(a.coefficients[i] - b.coefficients[i]);
        den += std::norm(b.coefficients[i]);
    }
    return den > 0 ? std::sqrt(num / den) : std::sqrt(num);
}

int run_cli(const std::string& args) {
    const std::string cmd = kCli + " " + args + " >/dev/null 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// --------------------------------------------------------------------------

void criterion_convolution_theorem(Criterion& c) {
    const std::vector<std::vector<int>> shapes_list = {
        {32}, {32}, {32}, {32}, {32}, {32}, {32},
        {16, 16}, {16, 16}, {16, 16}, {16, 16}, {16, 16}, {16, 16}, {16, 16},
        {16, 16, 16}, {16, 16, 16}, {16, 16, 16}, {16, 16, 16}, {16, 16, 16}, {16, 16, 16}};
    std::uint64_t seed = 1000;
    for (const auto& shape : shapes_list) {
        const auto f = shapes::random_grid(shape, 1.0, seed++);
        const auto k = shapes::random_grid(shape, 1.0, seed++);

        const auto direct = convolve_direct(f, k);
        const auto spectral = convolve_spectral(f, k);
        c.require(shapes::rel_l2_error(spectral.values, direct.values) <= 1e-9,
                  "convolve_spectral vs convolve_direct above 1e-9");

        auto pointwise = dft(f);
        const auto kk = dft(k);
        for (std::size_t i = 0; i < pointwise.coefficients.size(); ++i)
            pointwise.coefficients[i] *= kk.coefficients[i];
        c.require(spec_rel_l2(dft(direct), pointwise) <= 1e-9,
                  "dft(f*k) vs dft(f).dft(k) above 1e-9");

        const auto round = idft(dft(f));
        c.require(shapes::rel_l2_error(round.values, f.values) <= 1e-10,
                  "idft(dft(f)) identity above 1e-10");
    }
}

void criterion_equivariance(Criterion& c) {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<int> shape;
        switch (trial % 3) {
            case 0: shape = {32}; break;
            case 1: shape = {12, 12}; break;
            default: shape = {8, 8, 8}; break;
        }
        const auto f = shapes::random_grid(shape, 1.0, 5000 + static_cast<std::uint64_t>(trial));
        const auto k = shapes::random_grid(shape, 1.0, 6000 + static_cast<std::uint64_t>(trial));
        std::vector<int> v(shape.size());
        for (auto& s : v) s = static_cast<int>(rng() % 64) - 32;

        const auto lhs = convolve_direct(translate(f, v), k);
        const auto rhs = translate(convolve_direct(f, k), v);
        c.require(shapes::rel_l2_error(lhs.values, rhs.values) <= 1e-12,
                  "translate(f,v)*k vs translate(f*k,v) above 1e-12");
    }
}

void criterion_reach_oracles(Criterion& c) {
    {
        const auto circle = frames_from_normals(shapes::circle(2000));
        const double est = estimate_reach(circle).global_reach;
        c.require(est >= 0.99 && est <= 1.0 + 1e-9, "circle reach outside [0.99, 1.0]");
    }
    {
        const auto sphere = frames_from_normals(shapes::fibonacci_sphere(4000));
        const double est = estimate_reach(sphere).global_reach;
        c.require(est >= 0.95 && est <= 1.0 + 1e-9, "sphere reach outside [0.95, 1.0]");
    }
    {
        const auto torus = frames_from_normals(shapes::torus_of_revolution(2.0, 0.5, 160, 50));
        const double est = estimate_reach(torus).global_reach;
        c.require(est >= 0.45 && est <= 0.5 + 1e-9, "torus reach outside [0.45, 0.5]");
        c.require(std::abs(analytic_reach(TorusOfRevolution{2.0, 0.5}) - 0.5) == 0.0,
                  "analytic torus reach is not 0.5");
    }
}

void criterion_extension(Criterion& c) {
    const auto sphere = frames_from_normals(shapes::fibonacci_sphere(2000));
    const double rho = estimate_reach(sphere).global_reach;

    // nonconstant positive field bounded away from zero
    ScalarField f;
    for (std::size_t i = 0; i < sphere.count(); ++i)
        f.values.push_back(2.0 + sphere.point(i)[0]);

    // h <= rho/20
    const double diam = diameter(sphere);
    const double side = std::max(2 * diam, diam + 2 * rho);
    const int resolution = static_cast<int>(std::ceil(20.0 * side / rho)) + 1;
    const auto grid = build_torus_grid(sphere, resolution, rho);
    c.require(grid.spacing(0) <= rho / 20, "cell spacing above rho/20");

    const auto ext = extend_field(sphere, f, grid, rho, BumpKind::QuinticSmoothstep);

    double sup_f = 0;
    for (double v : f.values) sup_f = std::max(sup_f, std::abs(v));
    double sup_ext = 0;
    for (double v : ext.values) sup_ext = std::max(sup_ext, std::abs(v));
    c.require(sup_ext <= sup_f, "sup of extension exceeds sup |f|");

    // support: every nonzero site is within rho/2 of some sample (exact
    // brute-force distance check over all nonzero sites)
    const int n0 = grid.resolution[0], n1 = grid.resolution[1], n2 = grid.resolution[2];
    const double h = grid.spacing(0);
    const std::size_t n_samples = sphere.count();
    const double* pts = sphere.points.data();
    bool support_ok = true;
    std::size_t flat = 0;
    for (int i0 = 0; i0 < n0 && support_ok; ++i0)
        for (int i1 = 0; i1 < n1 && support_ok; ++i1)
            for (int i2 = 0; i2 < n2; ++i2, ++flat) {
                if (ext.values[flat] == 0.0) continue;
                const double x0 = grid.origin[0] + i0 * h;
                const double x1 = grid.origin[1] + i1 * h;
                const double x2 = grid.origin[2] + i2 * h;
                double best = 1e300;
                for (std::size_t s = 0; s < n_samples; ++s) {
                    const double d0 = x0 - pts[3 * s];
                    const double d1 = x1 - pts[3 * s + 1];
                    const double d2 = x2 - pts[3 * s + 2];
                    const double d = d0 * d0 + d1 * d1 + d2 * d2;
                    if (d < best) best = d;
                }
                if (std::sqrt(best) > rho / 2) {
                    support_ok = false;
                    break;
                }
            }
    c.require(support_ok, "nonzero value outside the rho/2 tube");

    // values at sites within h/2 of a sample stay within 5% of f there
    std::size_t checked = 0;
    bool near_ok = true;
    for (std::size_t s = 0; s < n_samples; ++s) {
        std::size_t site = 0;
        double d2 = 0;
        for (int a = 0; a < 3; ++a) {
            const double g = (sphere.point(s)[a] - grid.origin[static_cast<std::size_t>(a)]) / h;
            long long idx = std::llround(g);
            const double dx = (g - static_cast<double>(idx)) * h;
            d2 += dx * dx;
            long long wrapped = idx % grid.resolution[static_cast<std::size_t>(a)];
            if (wrapped < 0) wrapped += grid.resolution[static_cast<std::size_t>(a)];
            site = site * static_cast<std::size_t>(grid.resolution[static_cast<std::size_t>(a)]) +
                   static_cast<std::size_t>(wrapped);
        }
        if (std::sqrt(d2) > h / 2) continue;  // no site within h/2 of this sample
        ++checked;
        if (std::abs(ext.values[site] - f.values[s]) > 0.05 * std::abs(f.values[s]))
            near_ok = false;
    }
    c.require(checked > 100, "too few samples with a site within h/2");
    c.require(near_ok, "extension deviates more than 5% at a near-sample site");
}

void criterion_end_to_end(Criterion& c) {
    const auto sphere = frames_from_normals(shapes::fibonacci_sphere(2000));
    const double rho = estimate_reach(sphere).global_reach;

    TieConfig cfg;
    cfg.resolution = 64;
    cfg.reach_override = rho;
    cfg.kernel = KernelDescriptor{GaussianKernel{rho / 4}};

    // constant field: restricted output should be nearly constant
    ScalarField ones{std::vector<double>(sphere.count(), 1.0)};
    const auto res = tie_convolve(sphere, ones, cfg);
    double mean = 0;
    for (double v : res.restricted.values) mean += v;
    mean /= static_cast<double>(res.restricted.values.size());
    double var = 0;
    for (double v : res.restricted.values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(res.restricted.values.size());
    const double cv = std::sqrt(var) / std::abs(mean);
    c.require(cv <= 0.05, "restricted coefficient of variation above 5%");

    // linearity in f at fixed reach and kernel
    {
        TieConfig lin = cfg;
        lin.resolution = 32;
        ScalarField f1, f2, combo;
        std::mt19937_64 rng(3);
        for (std::size_t i = 0; i < sphere.count(); ++i) {
            f1.values.push_back(shapes::unit_double(rng));
            f2.values.push_back(shapes::unit_double(rng));
            combo.values.push_back(1.5 * f1.values.back() - 2.0 * f2.values.back());
        }
        const auto r1 = tie_convolve(sphere, f1, lin);
        const auto r2 = tie_convolve(sphere, f2, lin);
        const auto rc = tie_convolve(sphere, combo, lin);
        std::vector<double> expect(rc.grid_out.values.size());
        for (std::size_t i = 0; i < expect.size(); ++i)
            expect[i] = 1.5 * r1.grid_out.values[i] - 2.0 * r2.grid_out.values[i];
        c.require(shapes::rel_l2_error(rc.grid_out.values, expect) <= 1e-9,
                  "tie_convolve linearity above 1e-9");
    }

    // delta-kernel round trip within the interpolation bound
    {
        TieConfig delta = cfg;
        delta.kernel = KernelDescriptor{DeltaKernel{}};
        const auto rd = tie_convolve(sphere, ones, delta);
        const double h = rd.grid_out.spacing(0);
        const double eps = 10.0 * std::pow(2.0 * std::sqrt(3.0) * h / rho, 3);
        bool ok = true;
        for (double v : rd.restricted.values)
            if (std::abs(v - 1.0) > 2.0 * eps) ok = false;
        c.require(ok, "delta-kernel round trip outside the interpolation bound");
    }
}

void criterion_growth_dichotomy(Criterion& c) {
    const auto lattice = ball_growth_lattice(2, 30);
    bool closed_form = true;
    for (int m = 0; m <= 30; ++m)
        if (lattice.counts[static_cast<std::size_t>(m)] != 2 * m * m + 2 * m + 1)
            closed_form = false;
    c.require(closed_form, "lattice counts differ from 2m^2+2m+1");
    const auto lc = classify_growth(lattice);
    c.require(lc.kind == GrowthKind::Polynomial && lc.parameter >= 1.9 && lc.parameter <= 2.1,
              "lattice classification not polynomial of degree ~2");

    const auto surface = ball_growth_surface_group(2, 8);
    c.require(surface.counts[1] == 9, "surface group N(1) != 9");
    c.require(is_submultiplicative(surface), "surface group submultiplicativity fails");
    for (std::size_t m = 2; m <= 7; ++m)
        c.require(static_cast<double>(surface.counts[m + 1]) >=
                      1.5 * static_cast<double>(surface.counts[m]),
                  "surface group ratio N(m+1)/N(m) below 1.5 at m=" + std::to_string(m));
    const auto sc = classify_growth(surface);
    c.require(sc.kind == GrowthKind::Exponential, "surface group does not classify exponential");
}

void criterion_entropy_contrast(Criterion& c) {
    const std::vector<double> x{0.0, 0.0}, y{0.5, 0.0};
    const auto torus_series = geodesic_growth_flat_torus(2, 1.0, x, y, 30.0);
    const double h_flat = entropy_estimate(torus_series);
    c.require(h_flat >= -0.1 && h_flat <= 0.1, "flat torus entropy outside [-0.1, 0.1]");

    const auto orbit_series = orbit_growth_hyperbolic(8.0);
    const double h_hyp = entropy_estimate(orbit_series);
    c.require(h_hyp >= 0.7 && h_hyp <= 1.3, "hyperbolic entropy outside [0.7, 1.3]");

    const OctagonGroup group;
    c.require(group.relator_origin_error() <= 1e-6, "Fuchsian relator moves the origin > 1e-6");
}

void criterion_formats(Criterion& c) {
    // TIEG round trip, bit identical
    for (const auto& shape : {std::vector<int>{17}, {9, 5}, {6, 4, 3}}) {
        auto g = shapes::random_grid(shape, 3.25, 31 + static_cast<std::uint64_t>(shape.size()));
        g.origin.assign(shape.size(), -1.0 / 3.0);
        const auto path = fs::temp_directory_path() / "acceptance_rt.tieg";
        write_tieg(g, path.string());
        const auto r = read_tieg(path.string());
        const bool bits_equal =
            r.values.size() == g.values.size() &&
            std::memcmp(r.values.data(), g.values.data(), g.values.size() * sizeof(double)) == 0;
        c.require(bits_equal && r.side == g.side && r.origin == g.origin &&
                      r.resolution == g.resolution,
                  "TIEG round trip not bit-identical");
        fs::remove(path);
    }

    // parsers accept the bundled fixtures ...
    c.require(run_cli("reach --input " + kFixtures + "/tetra.off --k 3") == 0,
              "tetra.off rejected");
    c.require(run_cli("reach --input " + kFixtures + "/icosahedron.obj --k 3") == 0,
              "icosahedron.obj rejected");
    c.require(run_cli("reach --input " + kFixtures + "/circle2000.xyz --manifold-dim 1") == 0,
              "circle2000.xyz rejected");
    // ... and reject the malformed ones with nonzero exit
    c.require(run_cli("reach --input " + kFixtures + "/bad_header.off") != 0,
              "bad_header.off accepted");
    c.require(run_cli("reach --input " + kFixtures + "/bad_index.off") != 0,
              "bad_index.off accepted");
    c.require(run_cli("reach --input " + kFixtures + "/bad_columns.xyz") != 0,
              "bad_columns.xyz accepted");
    c.require(run_cli("reach --input " + kFixtures + "/bad_count.xyz") != 0,
              "bad_count.xyz accepted");
    c.require(run_cli("reach --input " + kFixtures + "/bad_token.csv --format csv") != 0,
              "bad_token.csv accepted");
}

}  // namespace

int main() {
    std::printf("tieconv acceptance suite\n");
    run_criterion(1, "convolution theorem (20 random grids)", 10.0, criterion_convolution_theorem);
    run_criterion(2, "translation equivariance (50 triples)", 0.0, criterion_equivariance);
    run_criterion(3, "reach oracles (circle/sphere/torus)", 60.0, criterion_reach_oracles);
    run_criterion(4, "tube extension on the sphere", 0.0, criterion_extension);
    run_criterion(5, "end-to-end TIE convolution", 120.0, criterion_end_to_end);
    run_criterion(6, "growth dichotomy (lattice vs surface group)", 300.0,
                  criterion_growth_dichotomy);
    run_criterion(7, "entropy contrast (flat vs hyperbolic)", 300.0, criterion_entropy_contrast);
    run_criterion(8, "format round-trips and fixture handling", 0.0, criterion_formats);

    if (failures == 0)
        std::printf("all acceptance criteria passed\n");
    else
        std::printf("%d acceptance criteria FAILED\n", failures);
    return failures;
}
