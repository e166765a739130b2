#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "shapes.hpp"
#include "tieconv/pipeline.hpp"
#include "tieconv/reach.hpp"

using namespace tieconv;

namespace {

ScalarField constant_field(std::size_t n, double v) {
    return ScalarField{std::vector<double>(n, v)};
}

}  // namespace

TEST_CASE("restrict_to_samples exactness") {
    SUBCASE("constant grids restrict exactly") {
        auto g = shapes::random_grid({8, 8}, 4.0, 1);
        std::fill(g.values.begin(), g.values.end(), 2.75);
        g.origin = {-2.0, -2.0};
        const auto circ = shapes::circle(50);
        const auto f = restrict_to_samples(g, circ);
        for (double v : f.values) CHECK(v == 2.75);
    }
    SUBCASE("samples at grid sites pick the site value exactly") {
        auto g = shapes::random_grid({8}, 8.0, 2);
        g.origin = {0.0};
        EmbeddedSamples s;
        s.dim = 1;
        s.points = {3.0, 5.0};
        const auto f = restrict_to_samples(g, s);
        CHECK(f.values[0] == g.values[3]);
        CHECK(f.values[1] == g.values[5]);
    }
    SUBCASE("linear interpolation between sites") {
        TorusGrid g;
        g.dim = 1;
        g.resolution = {4};
        g.side = 4.0;
        g.origin = {0.0};
        g.values = {0.0, 1.0, 2.0, 3.0};
        EmbeddedSamples s;
        s.dim = 1;
        s.points = {1.25, 3.75};  // the second interpolates across the wrap
        const auto f = restrict_to_samples(g, s);
        CHECK(f.values[0] == doctest::Approx(1.25).epsilon(1e-15));
        CHECK(f.values[1] == doctest::Approx(3.0 * 0.25 + 0.0 * 0.75).epsilon(1e-15));
    }
    SUBCASE("dimension mismatch") {
        const auto g = shapes::random_grid({8}, 1.0, 3);
        CHECK_THROWS_WITH_AS(static_cast<void>(restrict_to_samples(g, shapes::circle(4))),
                             doctest::Contains("dimension mismatch"), std::runtime_error);
    }
}

TEST_CASE("restrict of an extension stays near the field") {
    const auto circ = shapes::circle(600);
    const double rho = 1.0;
    const auto grid = build_torus_grid(circ, 128, rho);  // h = 1/32
    const auto ext = extend_field(circ, constant_field(600, 1.0), grid, rho,
                                  BumpKind::QuinticSmoothstep);
    const auto back = restrict_to_samples(ext, circ);
    // interpolation bound: corners sit within sqrt(d) h of the sample
    const double h = grid.spacing(0);
    const double eps = 10.0 * std::pow(2.0 * std::sqrt(2.0) * h / rho, 3);
    for (double v : back.values) CHECK(std::abs(v - 1.0) <= 2.0 * eps);
}

TEST_CASE("tie_convolve zero field gives zero everywhere") {
    const auto circ = frames_from_normals(shapes::circle(200));
    TieConfig cfg;
    cfg.resolution = 32;
    cfg.kernel = KernelDescriptor{GaussianKernel{0.2}};
    const auto res = tie_convolve(circ, constant_field(200, 0.0), cfg);
    for (double v : res.grid_out.values) CHECK(v == 0.0);
    for (double v : res.restricted.values) CHECK(v == 0.0);
}

TEST_CASE("tie_convolve delta kernel round trip") {
    const auto circ = frames_from_normals(shapes::circle(400));
    TieConfig cfg;
    cfg.resolution = 64;
    cfg.kernel = KernelDescriptor{DeltaKernel{}};
    const auto res = tie_convolve(circ, constant_field(400, 1.0), cfg);

    CHECK(res.reach_used == doctest::Approx(1.0).epsilon(0.01));
    CHECK(res.side_used == doctest::Approx(4.0).epsilon(0.01));
    CHECK(res.diagnostics.tube_cell_count > 0);
    CHECK(res.diagnostics.resolution_margin >= 1.0);

    const double h = res.grid_out.spacing(0);
    const double eps = 10.0 * std::pow(2.0 * std::sqrt(2.0) * h / res.reach_used, 3);
    for (double v : res.restricted.values) CHECK(std::abs(v - 1.0) <= 2.0 * eps);
}

TEST_CASE("tie_convolve is linear in the field") {
    const auto circ = frames_from_normals(shapes::circle(150));
    ScalarField f1, f2, combo;
    std::mt19937_64 rng(4);
    for (std::size_t i = 0; i < circ.count(); ++i) {
        f1.values.push_back(shapes::unit_double(rng));
        f2.values.push_back(shapes::unit_double(rng));
        combo.values.push_back(2.0 * f1.values.back() - 3.0 * f2.values.back());
    }
    TieConfig cfg;
    cfg.resolution = 32;
    cfg.reach_override = 1.0;  // fixed reach: linearity is exact up to roundoff
    cfg.kernel = KernelDescriptor{GaussianKernel{0.25}};

    const auto r1 = tie_convolve(circ, f1, cfg);
    const auto r2 = tie_convolve(circ, f2, cfg);
    const auto rc = tie_convolve(circ, combo, cfg);
    std::vector<double> expect(rc.grid_out.values.size());
    for (std::size_t i = 0; i < expect.size(); ++i)
        expect[i] = 2.0 * r1.grid_out.values[i] - 3.0 * r2.grid_out.values[i];
    CHECK(shapes::rel_l2_error(rc.grid_out.values, expect) < 1e-9);
}

TEST_CASE("tie_convolve spectral and direct paths agree") {
    const auto circ = frames_from_normals(shapes::circle(80));
    TieConfig cfg;
    cfg.resolution = 16;
    cfg.reach_override = 1.0;
    cfg.kernel = KernelDescriptor{BoxKernel{0.3}};
    auto direct = cfg;
    direct.method = ConvMethod::Direct;
    const auto a = tie_convolve(circ, constant_field(80, 1.0), cfg);
    const auto b = tie_convolve(circ, constant_field(80, 1.0), direct);
    CHECK(shapes::rel_l2_error(a.grid_out.values, b.grid_out.values) < 1e-9);
}

TEST_CASE("tie_convolve kernel symmetry for even kernels") {
    const auto circ = frames_from_normals(shapes::circle(100));
    ScalarField f;
    std::mt19937_64 rng(8);
    for (std::size_t i = 0; i < circ.count(); ++i) f.values.push_back(shapes::unit_double(rng));

    TieConfig cfg;
    cfg.resolution = 32;
    cfg.reach_override = 1.0;
    cfg.kernel = KernelDescriptor{GaussianKernel{0.2}};
    const auto res = tie_convolve(circ, f, cfg);

    // commutativity: k-extension convolved with f-extension gives the same grid
    const auto grid = build_torus_grid(circ, 32, 1.0);
    const auto fbar = extend_field(circ, f, grid, 1.0, BumpKind::QuinticSmoothstep);
    const auto kbar = make_kernel({grid.dim, grid.resolution, grid.side},
                                  GaussianKernel{0.2});
    const auto swapped = convolve_spectral(kbar, fbar);
    CHECK(shapes::rel_l2_error(res.grid_out.values, swapped.values) < 1e-12);
}

TEST_CASE("tie_convolve manifold kernel route") {
    const auto circ = frames_from_normals(shapes::circle(120));
    ScalarField kfield = constant_field(120, 0.5);
    TieConfig cfg;
    cfg.resolution = 32;
    cfg.reach_override = 1.0;
    cfg.kernel = kfield;
    const auto res = tie_convolve(circ, constant_field(120, 1.0), cfg);
    CHECK(res.grid_out.values.size() == 32 * 32);

    // mismatched kernel field length
    cfg.kernel = constant_field(60, 0.5);
    CHECK_THROWS_WITH_AS(static_cast<void>(tie_convolve(circ, constant_field(120, 1.0), cfg)),
                         doctest::Contains("kernel/manifold"), std::runtime_error);
}

TEST_CASE("tie_convolve tube-mass normalization") {
    const auto circ = frames_from_normals(shapes::circle(100));
    TieConfig cfg;
    cfg.resolution = 32;
    cfg.reach_override = 1.0;
    cfg.kernel = constant_field(100, 1.0);  // manifold kernel, mass = tube mass
    cfg.normalize_tube_mass = true;
    const auto res = tie_convolve(circ, constant_field(100, 1.0), cfg);
    // normalized output equals plain output divided by the kernel mass
    auto plain_cfg = cfg;
    plain_cfg.normalize_tube_mass = false;
    const auto plain = tie_convolve(circ, constant_field(100, 1.0), plain_cfg);
    const auto grid = build_torus_grid(circ, 32, 1.0);
    const auto kbar = extend_field(circ, constant_field(100, 1.0), grid, 1.0,
                                   BumpKind::QuinticSmoothstep);
    double mass = 0;
    for (double v : kbar.values) mass += v;
    for (std::size_t i = 0; i < res.grid_out.values.size(); ++i)
        CHECK(res.grid_out.values[i] ==
              doctest::Approx(plain.grid_out.values[i] / mass).epsilon(1e-12));
}

TEST_CASE("tie_convolve toric translation covariance") {
    // moving the samples by an exact multiple of the spacing on a fixed grid
    // translates the output grid
    const auto circ = frames_from_normals(shapes::circle(200));
    const double rho = 1.0;
    const auto base_grid = build_torus_grid(circ, 32, rho);
    const double h = base_grid.spacing(0);

    TieConfig cfg;
    cfg.resolution = 32;
    cfg.reach_override = rho;
    cfg.kernel = KernelDescriptor{GaussianKernel{0.25}};
    cfg.grid_frame = GridFrame{base_grid.side, base_grid.origin};

    EmbeddedSamples moved = circ;
    const int shift_cells = 3;
    for (std::size_t i = 0; i < moved.count(); ++i)
        moved.points[2 * i] += shift_cells * h;

    ScalarField f;
    std::mt19937_64 rng(12);
    for (std::size_t i = 0; i < circ.count(); ++i) f.values.push_back(shapes::unit_double(rng));

    const auto a = tie_convolve(circ, f, cfg);
    const auto b = tie_convolve(moved, f, cfg);
    const auto shifted = translate(a.grid_out, {shift_cells, 0});
    CHECK(shapes::rel_l2_error(b.grid_out.values, shifted.values) < 1e-12);
}

TEST_CASE("tie_convolve determinism") {
    const auto sphere = frames_from_normals(shapes::fibonacci_sphere(300));
    TieConfig cfg;
    cfg.resolution = 24;
    cfg.kernel = KernelDescriptor{GaussianKernel{0.15}};
    ScalarField f;
    std::mt19937_64 rng(5);
    for (std::size_t i = 0; i < sphere.count(); ++i) f.values.push_back(shapes::unit_double(rng));

    const auto a = tie_convolve(sphere, f, cfg);
    const auto b = tie_convolve(sphere, f, cfg);
    CHECK(a.reach_used == b.reach_used);
    CHECK(a.side_used == b.side_used);
    CHECK(std::memcmp(a.grid_out.values.data(), b.grid_out.values.data(),
                      a.grid_out.values.size() * sizeof(double)) == 0);
    CHECK(std::memcmp(a.restricted.values.data(), b.restricted.values.data(),
                      a.restricted.values.size() * sizeof(double)) == 0);
}
