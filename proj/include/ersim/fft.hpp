// SPDX-License-Identifier: Apache-2.0

#ifndef ERSIM_FFT_HPP
#define ERSIM_FFT_HPP

#include <complex>
#include <cstddef>
#include <span>

namespace ersim
{

//
// In-place complex FFT of fixed length backed by FFTW. Plans use FFTW_ESTIMATE so results
// are reproducible from run to run, and FFTW_UNALIGNED so any std::vector storage can be
// transformed. Neither direction is normalized.
//
class Fft
{
public:
  explicit Fft(std::size_t n);
  ~Fft();

  Fft(const Fft &) = delete;
  Fft &operator=(const Fft &) = delete;

  std::size_t size() const { return n_; }

  void Forward(std::span<std::complex<double>> data) const;
  void Backward(std::span<std::complex<double>> data) const;

private:
  std::size_t n_;
  void *buffer_ = nullptr;
  void *forward_ = nullptr;
  void *backward_ = nullptr;
};

}  // namespace ersim

#endif  // ERSIM_FFT_HPP
