#pragma once

#include <complex>
#include <vector>

#include "tieconv/torus.hpp"

namespace tieconv {

/// Complex Fourier coefficients indexed by frequency tuples, same row-major
/// layout and cardinality as the originating grid. side/origin are carried
/// along so the inverse transform can rebuild a full grid.
struct SpectralGrid {
    int dim = 0;
    std::vector<int> resolution;
    double side = 0;
    std::vector<double> origin;
    std::vector<std::complex<double>> coefficients;

    std::size_t cell_count() const {
        std::size_t n = 1;
        for (int r : resolution) n *= static_cast<std::size_t>(r);
        return n;
    }
};

/// Unnormalized forward transform F(xi) = sum_x f(x) exp(-2 pi i xi.x / N),
/// via FFTW (any resolution). Convention pair: the inverse carries the 1/|G|.
SpectralGrid dft(const TorusGrid& grid);
TorusGrid idft(const SpectralGrid& spec);

/// Direct O(|G|^2) evaluators of the same sums; the reference oracle for the
/// fast path.
SpectralGrid dft_direct(const TorusGrid& grid);
TorusGrid idft_direct(const SpectralGrid& spec);

/// Plain-sum circular convolution (f*k)(x) = sum_y f(y) k(x - y mod N).
TorusGrid convolve_direct(const TorusGrid& f, const TorusGrid& k);

/// idft(dft(f) . dft(k)); equals convolve_direct up to roundoff.
TorusGrid convolve_spectral(const TorusGrid& f, const TorusGrid& k);

/// output(y) = input(y - v mod N); shift components are arbitrary integers.
TorusGrid translate(const TorusGrid& grid, const std::vector<int>& shift);

/// Diagnostic for the translation/modulation duality: max over xi of
/// |dft(translate(f, v))(xi) - exp(-2 pi i xi.v / N) dft(f)(xi)|.
double modulation_check(const TorusGrid& grid, const std::vector<int>& shift);

/// Haar-mean norms: l1_mean = sum|f| / |G|, l2_mean = sqrt(sum f^2 / |G|),
/// linf = max|f|.
struct GridNorms {
    double l1_mean = 0, l2_mean = 0, linf = 0;
};
GridNorms norms(const TorusGrid& grid);

}  // namespace tieconv
