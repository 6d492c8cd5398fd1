#include "fft_internal.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>

namespace comtrap::detail {

namespace {

std::mutex plan_mutex;

fftw_plan get_plan(int dim, int n, int sign) {
    static std::map<std::tuple<int, int, int>, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(plan_mutex);
    const auto key = std::make_tuple(dim, n, sign);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    const std::size_t size = dim == 1 ? static_cast<std::size_t>(n)
                                      : static_cast<std::size_t>(n) * n;
    fftw_complex* buf = fftw_alloc_complex(size);
    fftw_plan plan = dim == 1
                         ? fftw_plan_dft_1d(n, buf, buf, sign,
                                            FFTW_ESTIMATE | FFTW_UNALIGNED)
                         : fftw_plan_dft_2d(n, n, buf, buf, sign,
                                            FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    cache.emplace(key, plan);
    return plan;
}

}  // namespace

void fft_forward(int dim, int n, std::complex<double>* data) {
    fftw_plan plan = get_plan(dim, n, FFTW_FORWARD);
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(data),
                     reinterpret_cast<fftw_complex*>(data));
}

void fft_inverse(int dim, int n, std::complex<double>* data) {
    fftw_plan plan = get_plan(dim, n, FFTW_BACKWARD);
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(data),
                     reinterpret_cast<fftw_complex*>(data));
    const std::size_t size = dim == 1 ? static_cast<std::size_t>(n)
                                      : static_cast<std::size_t>(n) * n;
    const double scale = 1.0 / static_cast<double>(size);
    for (std::size_t i = 0; i < size; ++i) data[i] *= scale;
}

double fft_wavenumber(int j, int n, double dx) {
    const int jj = j <= n / 2 ? j : j - n;
    return 2.0 * M_PI * jj / (n * dx);
}

}  // namespace comtrap::detail
