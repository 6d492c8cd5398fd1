#pragma once

#include <complex>
#include <vector>

namespace comtrap::detail {

/// Cached in-place complex FFTs (FFTW backend). Plans are created once per
/// (dim, n) and shared; creation is serialized, execution is thread-safe on
/// distinct arrays.
void fft_forward(int dim, int n, std::complex<double>* data);
/// Inverse transform including the 1/size normalization.
void fft_inverse(int dim, int n, std::complex<double>* data);

inline void fft_forward(int dim, int n, std::vector<std::complex<double>>& v) {
    fft_forward(dim, n, v.data());
}
inline void fft_inverse(int dim, int n, std::vector<std::complex<double>>& v) {
    fft_inverse(dim, n, v.data());
}

/// k value for FFT bin j of an n-point axis with spacing dx.
double fft_wavenumber(int j, int n, double dx);

}  // namespace comtrap::detail
