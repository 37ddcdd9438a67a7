#include "physfac/spectrum.hpp"

#include <complex>
#include <mutex>

#include <fftw3.h>

#include "physfac/error.hpp"

namespace physfac {

namespace {

// FFTW planning is not re-entrant; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t bytes) : ptr(fftw_malloc(bytes)) {
    if (!ptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  void* ptr;
};

class Plan {
 public:
  explicit Plan(fftw_plan p) : plan_(p) {
    if (!plan_) throw std::runtime_error("FFTW failed to create a plan");
  }
  ~Plan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  void execute() const { fftw_execute(plan_); }

 private:
  fftw_plan plan_;
};

Plan make_r2c(std::size_t n, double* in, fftw_complex* out) {
  std::lock_guard lock(planner_mutex());
  return Plan(fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE));
}

Plan make_c2r(std::size_t n, fftw_complex* in, double* out) {
  std::lock_guard lock(planner_mutex());
  return Plan(fftw_plan_dft_c2r_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE));
}

}  // namespace

std::size_t padded_fft_length(std::size_t n, int pad_factor) {
  if (pad_factor < 1) throw PreconditionError("FFT pad factor must be >= 1");
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p * static_cast<std::size_t>(pad_factor);
}

PowerSpectrum power_spectrum(std::span<const double> x, double fs, int pad_factor) {
  if (x.empty()) throw PreconditionError("cannot take the spectrum of an empty signal");
  if (!(fs > 0.0)) throw PreconditionError("sampling rate must be positive");
  const std::size_t n = padded_fft_length(x.size(), pad_factor);
  const std::size_t bins = n / 2 + 1;

  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());

  FftwBuffer in_buf(sizeof(double) * n);
  FftwBuffer out_buf(sizeof(fftw_complex) * bins);
  auto* in = static_cast<double*>(in_buf.ptr);
  auto* out = static_cast<fftw_complex*>(out_buf.ptr);
  const Plan plan = make_r2c(n, in, out);

  for (std::size_t i = 0; i < n; ++i) in[i] = i < x.size() ? x[i] - mean : 0.0;
  plan.execute();

  PowerSpectrum ps;
  ps.padded_length = n;
  ps.bin_hz = fs / static_cast<double>(n);
  ps.power.resize(bins);
  for (std::size_t k = 0; k < bins; ++k) ps.power[k] = out[k][0] * out[k][0] + out[k][1] * out[k][1];
  return ps;
}

std::vector<double> spectral_bandpass(std::span<const double> x, double fs, double lo_hz,
                                      double hi_hz) {
  if (x.empty()) throw PreconditionError("cannot filter an empty signal");
  if (!(fs > 0.0) || !(lo_hz >= 0.0) || !(hi_hz > lo_hz)) {
    throw PreconditionError("invalid bandpass limits");
  }
  const std::size_t n = x.size();
  const std::size_t bins = n / 2 + 1;
  FftwBuffer real_buf(sizeof(double) * n);
  FftwBuffer spec_buf(sizeof(fftw_complex) * bins);
  auto* real = static_cast<double*>(real_buf.ptr);
  auto* spec = static_cast<fftw_complex*>(spec_buf.ptr);
  const Plan forward = make_r2c(n, real, spec);
  const Plan inverse = make_c2r(n, spec, real);

  for (std::size_t i = 0; i < n; ++i) real[i] = x[i];
  forward.execute();
  for (std::size_t k = 0; k < bins; ++k) {
    const double f = static_cast<double>(k) * fs / static_cast<double>(n);
    if (f < lo_hz || f > hi_hz) spec[k][0] = spec[k][1] = 0.0;
  }
  inverse.execute();

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = real[i] / static_cast<double>(n);
  return out;
}

}  // namespace physfac
