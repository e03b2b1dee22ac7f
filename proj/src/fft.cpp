#include "paratime/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace paratime::detail {

namespace {

// FFTW's planner is not thread-safe; plan creation is serialized and plans
// are reused via the new-array execute interface, which is thread-safe as
// long as each call owns its buffers.
class PlanCache {
 public:
  fftw_plan get(std::size_t n, bool inverse) {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto key = std::make_pair(n, inverse);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::vector<fftw_complex> scratch(n);
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), scratch.data(), scratch.data(),
                                      inverse ? FFTW_BACKWARD : FFTW_FORWARD,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<std::size_t, bool>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

}  // namespace

void dft_line(std::complex<double>* data, std::size_t n, bool inverse) {
  fftw_plan plan = cache().get(n, inverse);
  auto* raw = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plan, raw, raw);
  if (inverse) {
    const double s = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) data[i] *= s;
  }
}

namespace {

void transform_field(std::vector<std::complex<double>>& spec, const Grid& grid,
                     bool inverse) {
  using cplx = std::complex<double>;
  if (grid.dim() == 1) {
    dft_line(spec.data(), grid.points(0), inverse);
    return;
  }
  const std::size_t ny = grid.points(0), nx = grid.points(1);
  for (std::size_t jy = 0; jy < ny; ++jy) dft_line(spec.data() + jy * nx, nx, inverse);
  std::vector<cplx> col(ny);
  for (std::size_t jx = 0; jx < nx; ++jx) {
    for (std::size_t jy = 0; jy < ny; ++jy) col[jy] = spec[jy * nx + jx];
    dft_line(col.data(), ny, inverse);
    for (std::size_t jy = 0; jy < ny; ++jy) spec[jy * nx + jx] = col[jy];
  }
}

}  // namespace

std::vector<std::complex<double>> forward_dft(const std::vector<double>& field,
                                              const Grid& grid) {
  std::vector<std::complex<double>> spec(field.begin(), field.end());
  transform_field(spec, grid, false);
  return spec;
}

std::vector<double> inverse_dft_real(std::vector<std::complex<double>> spectrum,
                                     const Grid& grid) {
  transform_field(spectrum, grid, true);
  std::vector<double> out(spectrum.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = spectrum[i].real();
  return out;
}

long signed_freq(std::size_t k, std::size_t n) {
  return k <= (n - 1) / 2 ? static_cast<long>(k)
                          : static_cast<long>(k) - static_cast<long>(n);
}

double wavenumber(const Grid& grid, int axis, std::size_t k) {
  const std::size_t n = grid.points(axis);
  return 2.0 * M_PI * static_cast<double>(signed_freq(k, n)) / grid.extent(axis);
}

bool is_nyquist(std::size_t k, std::size_t n) { return n % 2 == 0 && k == n / 2; }

}  // namespace paratime::detail
