// SPDX-License-Identifier: Apache-2.0

#include "ersim/fft.hpp"

#include <algorithm>
#include <mutex>
#include <stdexcept>

#include <fftw3.h>

namespace ersim
{

namespace
{

// Only fftw_execute* is thread safe; planning and destruction are serialized.
std::mutex &PlannerMutex()
{
  static std::mutex m;
  return m;
}

}  // namespace

Fft::Fft(std::size_t n) : n_(n)
{
  if (n == 0)
  {
    throw std::invalid_argument("FFT length must be positive");
  }
  std::lock_guard lock(PlannerMutex());
  auto *buf = fftw_alloc_complex(n);
  buffer_ = buf;
  forward_ = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_FORWARD,
                              FFTW_ESTIMATE | FFTW_UNALIGNED);
  backward_ = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_BACKWARD,
                               FFTW_ESTIMATE | FFTW_UNALIGNED);
}

Fft::~Fft()
{
  std::lock_guard lock(PlannerMutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_));
  fftw_destroy_plan(static_cast<fftw_plan>(backward_));
  fftw_free(buffer_);
}

void Fft::Forward(std::span<std::complex<double>> data) const
{
  if (data.size() != n_)
  {
    throw std::invalid_argument("FFT length mismatch");
  }
  auto *p = reinterpret_cast<fftw_complex *>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(forward_), p, p);
}

void Fft::Backward(std::span<std::complex<double>> data) const
{
  if (data.size() != n_)
  {
    throw std::invalid_argument("FFT length mismatch");
  }
  auto *p = reinterpret_cast<fftw_complex *>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(backward_), p, p);
}

}  // namespace ersim
