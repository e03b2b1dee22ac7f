#pragma once

#include <complex>
#include <vector>

#include "paratime/grid.hpp"

namespace paratime::detail {

// Thin thread-safe wrapper over FFTW complex transforms. Forward is the
// unnormalized sum_j f_j e^{-2pi i jk/n}; inverse carries the 1/n factor.
// Plans are cached per length behind a mutex; execution runs on caller
// buffers and is safe from concurrent stages.

void dft_line(std::complex<double>* data, std::size_t n, bool inverse);

/// Full-field forward DFT (per-axis transforms, row-major layout).
std::vector<std::complex<double>> forward_dft(const std::vector<double>& field,
                                              const Grid& grid);
/// Inverse DFT, real part of the result.
std::vector<double> inverse_dft_real(std::vector<std::complex<double>> spectrum,
                                     const Grid& grid);

/// Signed integer frequency of DFT bin k: k for k <= n/2-1, else k-n.
long signed_freq(std::size_t k, std::size_t n);
/// Continuum wavevector component 2*pi*signed_freq/extent for bin k on an axis.
double wavenumber(const Grid& grid, int axis, std::size_t k);
/// True when bin k is the unmatched Nyquist bin (even n only).
bool is_nyquist(std::size_t k, std::size_t n);

}  // namespace paratime::detail
