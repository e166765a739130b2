#include "tieconv/conv.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "tieconv/parallel.hpp"

namespace tieconv {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

// FFTW planning is not thread-safe; execution of a ready plan is.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

void run_fftw(const std::vector<std::complex<double>>& in, std::vector<std::complex<double>>& out,
              const std::vector<int>& resolution, int sign) {
    out.resize(in.size());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        plan = fftw_plan_dft(
            static_cast<int>(resolution.size()), resolution.data(),
            reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in.data())),
            reinterpret_cast<fftw_complex*>(out.data()), sign, FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
    }
    if (!plan) fail("FFTW plan creation failed");
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_destroy_plan(plan);
    }
}

void check_shape(const TorusGrid& f, const TorusGrid& k) {
    if (!f.same_shape(k)) fail("grid shape mismatch (dim/resolution/side must agree)");
}

std::vector<std::size_t> row_strides(const std::vector<int>& resolution) {
    std::vector<std::size_t> stride(resolution.size(), 1);
    for (int a = static_cast<int>(resolution.size()) - 2; a >= 0; --a)
        stride[static_cast<std::size_t>(a)] =
            stride[static_cast<std::size_t>(a + 1)] *
            static_cast<std::size_t>(resolution[static_cast<std::size_t>(a + 1)]);
    return stride;
}

void advance(std::vector<int>& idx, const std::vector<int>& resolution) {
    for (int a = static_cast<int>(resolution.size()) - 1; a >= 0; --a) {
        if (++idx[static_cast<std::size_t>(a)] < resolution[static_cast<std::size_t>(a)]) return;
        idx[static_cast<std::size_t>(a)] = 0;
    }
}

// Flat table of multi-indices: entry c*d + a is axis-a index of flat cell c.
std::vector<int> multi_index_table(const std::vector<int>& resolution, std::size_t cells) {
    const std::size_t d = resolution.size();
    std::vector<int> table(cells * d);
    std::vector<int> idx(d, 0);
    for (std::size_t c = 0; c < cells; ++c) {
        for (std::size_t a = 0; a < d; ++a) table[c * d + a] = idx[a];
        advance(idx, resolution);
    }
    return table;
}

}  // namespace

SpectralGrid dft(const TorusGrid& grid) {
    grid.validate();
    std::vector<std::complex<double>> in(grid.values.begin(), grid.values.end());
    SpectralGrid spec;
    spec.dim = grid.dim;
    spec.resolution = grid.resolution;
    spec.side = grid.side;
    spec.origin = grid.origin;
    run_fftw(in, spec.coefficients, grid.resolution, FFTW_FORWARD);
    return spec;
}

TorusGrid idft(const SpectralGrid& spec) {
    TorusGrid grid;
    grid.dim = spec.dim;
    grid.resolution = spec.resolution;
    grid.side = spec.side;
    grid.origin = spec.origin;
    if (grid.origin.empty()) grid.origin.assign(static_cast<std::size_t>(spec.dim), 0.0);
    std::vector<std::complex<double>> out;
    run_fftw(spec.coefficients, out, spec.resolution, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(spec.cell_count());
    grid.values.resize(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) grid.values[i] = out[i].real() * scale;
    return grid;
}

SpectralGrid dft_direct(const TorusGrid& grid) {
    grid.validate();
    SpectralGrid spec;
    spec.dim = grid.dim;
    spec.resolution = grid.resolution;
    spec.side = grid.side;
    spec.origin = grid.origin;
    const std::size_t cells = grid.cell_count();
    spec.coefficients.assign(cells, {0.0, 0.0});
    const std::size_t d = static_cast<std::size_t>(grid.dim);
    const std::vector<int> midx = multi_index_table(grid.resolution, cells);

    parallel_chunks(cells, [&](std::size_t begin, std::size_t end) {
        for (std::size_t xi = begin; xi < end; ++xi) {
            std::complex<double> acc{0.0, 0.0};
            for (std::size_t x = 0; x < cells; ++x) {
                double phase = 0;
                for (std::size_t a = 0; a < d; ++a)
                    phase += static_cast<double>(midx[xi * d + a]) *
                             static_cast<double>(midx[x * d + a]) / grid.resolution[a];
                acc += grid.values[x] * std::polar(1.0, -2.0 * std::numbers::pi * phase);
            }
            spec.coefficients[xi] = acc;
        }
    });
    return spec;
}

TorusGrid idft_direct(const SpectralGrid& spec) {
    TorusGrid grid;
    grid.dim = spec.dim;
    grid.resolution = spec.resolution;
    grid.side = spec.side;
    grid.origin = spec.origin;
    if (grid.origin.empty()) grid.origin.assign(static_cast<std::size_t>(spec.dim), 0.0);
    const std::size_t cells = spec.cell_count();
    grid.values.assign(cells, 0.0);
    const std::size_t d = static_cast<std::size_t>(spec.dim);
    const std::vector<int> midx = multi_index_table(spec.resolution, cells);

    const double scale = 1.0 / static_cast<double>(cells);
    parallel_chunks(cells, [&](std::size_t begin, std::size_t end) {
        for (std::size_t x = begin; x < end; ++x) {
            std::complex<double> acc{0.0, 0.0};
            for (std::size_t xi = 0; xi < cells; ++xi) {
                double phase = 0;
                for (std::size_t a = 0; a < d; ++a)
                    phase += static_cast<double>(midx[xi * d + a]) *
                             static_cast<double>(midx[x * d + a]) / spec.resolution[a];
                acc += spec.coefficients[xi] * std::polar(1.0, 2.0 * std::numbers::pi * phase);
            }
            grid.values[x] = acc.real() * scale;
        }
    });
    return grid;
}

TorusGrid convolve_direct(const TorusGrid& f, const TorusGrid& k) {
    f.validate();
    k.validate();
    check_shape(f, k);
    const std::size_t cells = f.cell_count();
    const auto stride = row_strides(f.resolution);
    const std::size_t d = static_cast<std::size_t>(f.dim);
    const std::vector<int> midx = multi_index_table(f.resolution, cells);

    TorusGrid out = f;
    parallel_chunks(cells, [&](std::size_t begin, std::size_t end) {
        for (std::size_t x = begin; x < end; ++x) {
            double acc = 0;
            for (std::size_t y = 0; y < cells; ++y) {
                std::size_t kflat = 0;
                for (std::size_t a = 0; a < d; ++a) {
                    const int N = f.resolution[a];
                    int diff = midx[x * d + a] - midx[y * d + a];
                    if (diff < 0) diff += N;
                    kflat += static_cast<std::size_t>(diff) * stride[a];
                }
                acc += f.values[y] * k.values[kflat];
            }
            out.values[x] = acc;
        }
    });
    return out;
}

TorusGrid convolve_spectral(const TorusGrid& f, const TorusGrid& k) {
    f.validate();
    k.validate();
    check_shape(f, k);
    SpectralGrid F = dft(f);
    const SpectralGrid K = dft(k);
    for (std::size_t i = 0; i < F.coefficients.size(); ++i) F.coefficients[i] *= K.coefficients[i];
    TorusGrid out = idft(F);
    out.origin = f.origin;
    return out;
}

TorusGrid translate(const TorusGrid& grid, const std::vector<int>& shift) {
    grid.validate();
    if (static_cast<int>(shift.size()) != grid.dim)
        fail("translate: shift dimension mismatch");
    const std::size_t cells = grid.cell_count();
    const auto stride = row_strides(grid.resolution);

    TorusGrid out = grid;
    std::vector<int> idx(static_cast<std::size_t>(grid.dim), 0);
    for (std::size_t y = 0; y < cells; ++y) {
        std::size_t src = 0;
        for (int a = 0; a < grid.dim; ++a) {
            const int N = grid.resolution[static_cast<std::size_t>(a)];
            int j = (idx[static_cast<std::size_t>(a)] - shift[static_cast<std::size_t>(a)]) % N;
            if (j < 0) j += N;
            src += static_cast<std::size_t>(j) * stride[static_cast<std::size_t>(a)];
        }
        out.values[y] = grid.values[src];
        advance(idx, grid.resolution);
    }
    return out;
}

double modulation_check(const TorusGrid& grid, const std::vector<int>& shift) {
    const SpectralGrid lhs = dft(translate(grid, shift));
    const SpectralGrid rhs = dft(grid);
    std::vector<int> idx(static_cast<std::size_t>(grid.dim), 0);
    double worst = 0;
    for (std::size_t c = 0; c < lhs.coefficients.size(); ++c) {
        double phase = 0;
        for (int a = 0; a < grid.dim; ++a)
            phase += static_cast<double>(idx[static_cast<std::size_t>(a)]) *
                     static_cast<double>(shift[static_cast<std::size_t>(a)]) /
                     grid.resolution[static_cast<std::size_t>(a)];
        const std::complex<double> expect =
            std::polar(1.0, -2.0 * std::numbers::pi * phase) * rhs.coefficients[c];
        worst = std::max(worst, std::abs(lhs.coefficients[c] - expect));
        advance(idx, grid.resolution);
    }
    return worst;
}

GridNorms norms(const TorusGrid& grid) {
    grid.validate();
    GridNorms out;
    double l1 = 0, l2 = 0;
    for (double v : grid.values) {
        l1 += std::abs(v);
        l2 += v * v;
        out.linf = std::max(out.linf, std::abs(v));
    }
    const double cells = static_cast<double>(grid.cell_count());
    out.l1_mean = l1 / cells;
    out.l2_mean = std::sqrt(l2 / cells);
    return out;
}

}  // namespace tieconv
