// Synthetic sample generators shared by the test suites.
#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "tieconv/geometry.hpp"
#include "tieconv/torus.hpp"

namespace shapes {

inline double unit_double(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// n equispaced points on the circle of radius r, with outward normals.
inline tieconv::EmbeddedSamples circle(std::size_t n, double r = 1.0) {
    tieconv::EmbeddedSamples s;
    s.dim = 2;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = 2 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
        s.points.push_back(r * std::cos(t));
        s.points.push_back(r * std::sin(t));
        s.normals.push_back(std::cos(t));
        s.normals.push_back(std::sin(t));
    }
    return s;
}

/// Fibonacci lattice on the unit sphere (quasi-uniform), radial normals.
inline tieconv::EmbeddedSamples fibonacci_sphere(std::size_t n, double r = 1.0) {
    tieconv::EmbeddedSamples s;
    s.dim = 3;
    const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        const double phi = 2 * std::numbers::pi * static_cast<double>(i) * golden;
        const double rho = std::sqrt(1.0 - z * z);
        const double nx = rho * std::cos(phi), ny = rho * std::sin(phi);
        s.points.push_back(r * nx);
        s.points.push_back(r * ny);
        s.points.push_back(r * z);
        s.normals.push_back(nx);
        s.normals.push_back(ny);
        s.normals.push_back(z);
    }
    return s;
}

/// Regular (nu x nv) angular grid on the torus of revolution, outward normals.
inline tieconv::EmbeddedSamples torus_of_revolution(double R, double r, std::size_t nu,
                                                    std::size_t nv) {
    tieconv::EmbeddedSamples s;
    s.dim = 3;
    for (std::size_t i = 0; i < nu; ++i) {
        const double u = 2 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(nu);
        for (std::size_t j = 0; j < nv; ++j) {
            const double v = 2 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(nv);
            const double cu = std::cos(u), su = std::sin(u);
            const double cv = std::cos(v), sv = std::sin(v);
            s.points.push_back((R + r * cv) * cu);
            s.points.push_back((R + r * cv) * su);
            s.points.push_back(r * sv);
            s.normals.push_back(cv * cu);
            s.normals.push_back(cv * su);
            s.normals.push_back(sv);
        }
    }
    return s;
}

/// Random grid with values uniform in [-1, 1).
inline tieconv::TorusGrid random_grid(const std::vector<int>& resolution, double side,
                                      std::uint64_t seed) {
    tieconv::TorusGrid g;
    g.dim = static_cast<int>(resolution.size());
    g.resolution = resolution;
    g.side = side;
    g.origin.assign(resolution.size(), 0.0);
    g.values.resize(g.cell_count());
    std::mt19937_64 rng(seed);
    for (double& v : g.values) v = 2.0 * unit_double(rng) - 1.0;
    return g;
}

inline double rel_l2_error(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        num += d * d;
        den += b[i] * b[i];
    }
    return den > 0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace shapes
