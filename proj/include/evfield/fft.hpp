#pragma once

#include <complex>
#include <memory>
#include <span>

namespace evfield {

using Complex = std::complex<double>;

//---------------------------------------------------------------------------//
/*!
 * In-place 2-D complex FFT on a row-major (ny x nx) array.
 *
 * Plans are built with FFTW_ESTIMATE so the same input gives bit-identical
 * output on every run. backward() includes the 1/(nx*ny) normalisation.
 * Instances are not shareable between threads; planning is serialised
 * internally.
 */
class Fft2D
{
  public:
    Fft2D(int nx, int ny);
    ~Fft2D();
    Fft2D(Fft2D&&) noexcept;
    Fft2D& operator=(Fft2D&&) noexcept;
    Fft2D(const Fft2D&) = delete;
    Fft2D& operator=(const Fft2D&) = delete;

    [[nodiscard]] int nx() const;
    [[nodiscard]] int ny() const;

    void forward(std::span<Complex> data);
    void backward(std::span<Complex> data);

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

//! Signed discrete frequency of index i on an n-point grid with spacing d.
inline double fft_frequency(int i, int n, double d)
{
    const int k = i <= (n - 1) / 2 ? i : i - n;
    return static_cast<double>(k) / (static_cast<double>(n) * d);
}

} // namespace evfield
