#include "evfield/fft.hpp"

#include <algorithm>
#include <cstring>
#include <mutex>

#include <fftw3.h>

#include "evfield/error.hpp"

namespace evfield {
namespace {

std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

} // namespace

struct Fft2D::Impl
{
    int nx = 0;
    int ny = 0;
    fftw_complex* buffer = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;

    [[nodiscard]] std::size_t count() const { return static_cast<std::size_t>(nx) * ny; }

    ~Impl()
    {
        std::lock_guard lock(planner_mutex());
        if (fwd)
        {
            fftw_destroy_plan(fwd);
        }
        if (bwd)
        {
            fftw_destroy_plan(bwd);
        }
        fftw_free(buffer);
    }

    void run(fftw_plan plan, std::span<Complex> data)
    {
        if (data.size() != count())
        {
            throw DataError("FFT input size does not match the plan");
        }
        static_assert(sizeof(fftw_complex) == sizeof(Complex));
        std::memcpy(static_cast<void*>(buffer), static_cast<const void*>(data.data()), data.size_bytes());
        fftw_execute(plan);
        std::memcpy(static_cast<void*>(data.data()), static_cast<const void*>(buffer), data.size_bytes());
    }
};

Fft2D::Fft2D(int nx, int ny) : impl_(std::make_unique<Impl>())
{
    if (nx < 1 || ny < 1)
    {
        throw DomainError("FFT dimensions must be positive");
    }
    impl_->nx = nx;
    impl_->ny = ny;
    std::lock_guard lock(planner_mutex());
    impl_->buffer = fftw_alloc_complex(impl_->count());
    if (!impl_->buffer)
    {
        throw std::bad_alloc();
    }
    impl_->fwd = fftw_plan_dft_2d(ny, nx, impl_->buffer, impl_->buffer, FFTW_FORWARD, FFTW_ESTIMATE);
    impl_->bwd = fftw_plan_dft_2d(ny, nx, impl_->buffer, impl_->buffer, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!impl_->fwd || !impl_->bwd)
    {
        throw std::runtime_error("FFTW planning failed");
    }
}

Fft2D::~Fft2D() = default;
Fft2D::Fft2D(Fft2D&&) noexcept = default;
Fft2D& Fft2D::operator=(Fft2D&&) noexcept = default;

int Fft2D::nx() const { return impl_->nx; }
int Fft2D::ny() const { return impl_->ny; }

void Fft2D::forward(std::span<Complex> data) { impl_->run(impl_->fwd, data); }

void Fft2D::backward(std::span<Complex> data)
{
    impl_->run(impl_->bwd, data);
    const double scale = 1.0 / static_cast<double>(impl_->count());
    for (Complex& c : data)
    {
        c *= scale;
    }
}

} // namespace evfield
