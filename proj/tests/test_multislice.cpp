#include <doctest.h>

#include <cmath>
#include <numbers>

#include "evfield/error.hpp"
#include "evfield/multislice.hpp"
#include "evfield/physics.hpp"
#include "evfield/rng.hpp"

using namespace evfield;
using namespace evfield::multislice;

namespace {

const Length lambda300 = physics::beam_kinematics(Voltage(300000.0)).wavelength;

WaveField gaussian(int n, double px, double w0)
{
    auto f = WaveField::plane_wave(n, n, Length(px), lambda300);
    for (int r = 0; r < n; ++r)
    {
        for (int c = 0; c < n; ++c)
        {
            const double x = (c - n / 2) * px;
            const double y = (r - n / 2) * px;
            f(r, c) = std::exp(-(x * x + y * y) / (w0 * w0));
        }
    }
    return f;
}

WaveField random_field(int nx, int ny, std::uint64_t seed)
{
    rng::PhiloxStream s(seed, 0, 0, 0);
    auto f = WaveField::plane_wave(nx, ny, Length(0.1), lambda300);
    for (auto& a : f.amplitude)
    {
        a = Complex(s.uniform() - 0.5, s.uniform() - 0.5);
    }
    return f;
}

//! Intensity-weighted second moment along x.
double second_moment_x(const WaveField& f)
{
    double sum = 0;
    double mx = 0;
    for (int r = 0; r < f.ny; ++r)
    {
        for (int c = 0; c < f.nx; ++c)
        {
            const double i = std::norm(f(r, c));
            sum += i;
            mx += i * c;
        }
    }
    mx /= sum;
    double m2 = 0;
    for (int r = 0; r < f.ny; ++r)
    {
        for (int c = 0; c < f.nx; ++c)
        {
            const double d = (c - mx) * f.pixel_size.value();
            m2 += std::norm(f(r, c)) * d * d;
        }
    }
    return m2 / sum;
}

double max_abs_diff(const WaveField& a, const WaveField& b)
{
    double worst = 0;
    for (std::size_t i = 0; i < a.amplitude.size(); ++i)
    {
        worst = std::max(worst, std::abs(a.amplitude[i] - b.amplitude[i]));
    }
    return worst;
}

//! Exit wave of the default control slab.
WaveField control_exit_wave(const ControlConfig& cfg)
{
    const auto beam = physics::beam_kinematics(cfg.voltage);
    SlabPhantom slab;
    slab.inner_potential = cfg.inner_potential;
    slab.thickness = cfg.thickness;
    slab.n_slices = cfg.n_slices;
    slab.edge_col = cfg.nx / 2;
    slab.edge_width = cfg.edge_width;
    slab.interaction_constant = physics::interaction_constant(beam);
    return multislice_exit_wave(WaveField::plane_wave(cfg.nx, cfg.ny, cfg.sim_pixel_size, beam.wavelength), slab);
}

} // namespace

TEST_CASE("Fresnel propagator")
{
    const auto id = fresnel_propagator(16, 8, Length(0.1), lambda300, Length(0.0));
    for (const Complex& k : id)
    {
        CHECK(k == Complex(1.0, 0.0));
    }
    const auto a = fresnel_propagator(64, 32, Length(0.05), lambda300, Length(37.0));
    const auto b = fresnel_propagator(64, 32, Length(0.05), lambda300, Length(-12.5));
    const auto ab = fresnel_propagator(64, 32, Length(0.05), lambda300, Length(24.5));
    double worst = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        CHECK(std::abs(std::abs(a[i]) - 1.0) < 1e-14);
        worst = std::max(worst, std::abs(a[i] * b[i] - ab[i]));
    }
    CHECK(worst < 1e-12);

    // kernel value at one frequency
    const double kx = 3.0 / (64 * 0.05);
    const Complex expected = std::polar(1.0, -std::numbers::pi * lambda300.value() * 37.0 * kx * kx);
    CHECK(std::abs(a[3] - expected) < 1e-12);

    CHECK_THROWS_AS(fresnel_propagator(16, 16, Length(0.0), lambda300, Length(1.0)), DomainError);
    CHECK_THROWS_AS(fresnel_propagator(12, 16, Length(0.1), lambda300, Length(1.0)), DomainError);
}

TEST_CASE("Gaussian beam spreads as the analytic Fresnel solution")
{
    const double w0 = 1.0;
    const double z_r = std::numbers::pi * w0 * w0 / lambda300.value();
    for (double z : {500.0, 2000.0, -1500.0})
    {
        auto f = gaussian(256, 0.05, w0);
        propagate(f, Length(z));
        // intensity exp(-2 x^2 / w^2) has <x^2> = w^2 / 4
        const double w = std::sqrt(4.0 * second_moment_x(f));
        const double expected = w0 * std::sqrt(1.0 + (z / z_r) * (z / z_r));
        CHECK(std::abs(w - expected) / expected < 1e-6);
    }
}

TEST_CASE("free-space propagation is unitary")
{
    for (std::uint64_t seed = 1; seed <= 10; ++seed)
    {
        auto f = random_field(64, 32, seed);
        const double before = f.total_intensity();
        propagate(f, Length(150.0 * static_cast<double>(seed)));
        CHECK(std::abs(f.total_intensity() - before) / before < 1e-10);
    }
}

TEST_CASE("Parseval between real and reciprocal space")
{
    auto f = random_field(32, 16, 4);
    double real = 0;
    for (const Complex& a : f.amplitude)
    {
        real += std::norm(a);
    }
    std::vector<Complex> spectrum = f.amplitude;
    Fft2D fft(32, 16);
    fft.forward(spectrum);
    double recip = 0;
    for (const Complex& a : spectrum)
    {
        recip += std::norm(a);
    }
    CHECK(std::abs(recip / spectrum.size() - real) / real < 1e-10);
    fft.backward(spectrum);
    for (std::size_t i = 0; i < spectrum.size(); ++i)
    {
        CHECK(std::abs(spectrum[i] - f.amplitude[i]) < 1e-12);
    }
}

TEST_CASE("zero potential: slices compose to one free-space step")
{
    // negligible amplitude at the periodic border, so the band limit removes nothing
    const WaveField in = gaussian(128, 0.05, 0.5);
    SlabPhantom empty;
    empty.inner_potential = 0.0;
    empty.thickness = Length(300.0);
    empty.n_slices = 12;
    empty.edge_col = 64;
    empty.interaction_constant = 0.0065;
    const WaveField out = multislice_exit_wave(in, empty);

    WaveField direct = in;
    propagate(direct, Length(300.0));
    CHECK(max_abs_diff(out, direct) < 1e-10);
}

TEST_CASE("uniform slab is a pure phase object")
{
    const double sigma = physics::interaction_constant(physics::beam_kinematics(Voltage(300000.0)));
    SlabPhantom slab;
    slab.inner_potential = 17.0;
    slab.thickness = Length(20.0);
    slab.n_slices = 10;
    slab.edge_col = 1 << 20; // no edge
    slab.interaction_constant = sigma;

    const auto plane = WaveField::plane_wave(32, 16, Length(0.1), lambda300);
    const auto out = multislice_exit_wave(plane, slab);
    const Complex expected = std::polar(1.0, sigma * 17.0 * 20.0);
    double worst = 0;
    for (const Complex& a : out.amplitude)
    {
        worst = std::max(worst, std::abs(a - expected));
    }
    CHECK(worst < 1e-10);

    // slice convergence on a localized field
    const WaveField g = gaussian(128, 0.05, 0.8);
    const auto coarse = multislice_exit_wave(g, slab);
    SlabPhantom fine = slab;
    fine.n_slices = 20;
    const auto refined = multislice_exit_wave(g, fine);
    double sum2 = 0;
    for (std::size_t i = 0; i < coarse.amplitude.size(); ++i)
    {
        sum2 += std::norm(coarse.amplitude[i] - refined.amplitude[i]);
    }
    CHECK(std::sqrt(sum2 / coarse.amplitude.size()) < 1e-6);
}

TEST_CASE("incompatible grids and invalid slabs")
{
    auto bad = WaveField::plane_wave(16, 16, Length(0.1), lambda300);
    bad.amplitude.pop_back();
    SlabPhantom slab;
    slab.edge_col = 8;
    CHECK_THROWS_AS(multislice_exit_wave(bad, slab), DataError);
    CHECK_THROWS_AS(WaveField::plane_wave(24, 16, Length(0.1), lambda300), DomainError);

    const auto ok = WaveField::plane_wave(16, 16, Length(0.1), lambda300);
    slab.n_slices = 0;
    CHECK_THROWS_AS(multislice_exit_wave(ok, slab), DomainError);
    slab.n_slices = 2;
    slab.thickness = Length(0.0);
    CHECK_THROWS_AS(multislice_exit_wave(ok, slab), DomainError);
}

TEST_CASE("defocus")
{
    const WaveField exit = random_field(64, 8, 9);
    const auto focus = apply_defocus(exit, Length(0.0));
    for (std::size_t i = 0; i < exit.amplitude.size(); ++i)
    {
        CHECK(focus.data[i] == std::norm(exit.amplitude[i]));
    }

    WaveField there = exit;
    propagate(there, Length(-80.0));
    const auto back = apply_defocus(there, Length(-80.0));
    double worst = 0;
    for (std::size_t i = 0; i < exit.amplitude.size(); ++i)
    {
        worst = std::max(worst, std::abs(back.data[i] - std::norm(exit.amplitude[i])));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("first Fresnel fringe spacing follows sqrt(lambda * df)")
{
    const ControlConfig cfg;
    const WaveField exit = control_exit_wave(cfg);
    const double df = 100.0;
    const auto image = apply_defocus(exit, Length(df));
    const double spacing = first_fringe_spacing(image, cfg.nx / 2, cfg.sim_pixel_size).value();
    const double expected = std::sqrt(lambda300.value() * df);
    CHECK(std::abs(spacing - expected) / expected < 0.2);
}

TEST_CASE("edge metrics")
{
    SUBCASE("flat image")
    {
        Grid<double> flat(64, 4);
        std::ranges::fill(flat.data, 2.0);
        const auto m = edge_metrics(flat, 32, Length(0.5));
        CHECK(m.fringe_amplitude == 0.0);
        CHECK(m.tail_extent.value() == 0.0);
    }
    SUBCASE("exponential tail, x_i = 10 nm")
    {
        const int edge = 256;
        Grid<double> g(1024, 4);
        for (int r = 0; r < 4; ++r)
        {
            for (int c = 0; c < 1024; ++c)
            {
                g(r, c) = c < edge ? 1.0 : std::exp(-(c - edge) * 0.5 / 10.0);
            }
        }
        const double tail = edge_metrics(g, edge, Length(0.5)).tail_extent.value();
        CHECK(tail >= 40.0);
        CHECK(tail <= 50.0);
    }
    SUBCASE("edge outside the image")
    {
        Grid<double> g(64, 4);
        CHECK_THROWS_AS(edge_metrics(g, 0, Length(0.5)), DomainError);
        CHECK_THROWS_AS(edge_metrics(g, 64, Length(0.5)), DomainError);
    }
}

TEST_CASE("elastic control: no tail and minimum fringes at zero defocus")
{
    const ControlConfig cfg;
    const auto r = run_control(cfg);
    CHECK(r.scan.size() == 17);
    CHECK(r.best_focus().defocus.value() == 0.0);
    CHECK(r.at_focus.tail_extent.value() <= 2.0 * r.detector_pixel_size.value());
    CHECK(r.detector_pixel_size.value() == doctest::Approx(0.5));
    CHECK(r.detector_image.width == cfg.nx / cfg.detector_binning);
    for (const auto& row : r.scan)
    {
        if (row.defocus.value() != 0.0)
        {
            CHECK(row.fringe_amplitude > r.at_focus.fringe_amplitude);
        }
    }

    // independent of the beam energy
    for (double kv : {80.0, 200.0})
    {
        ControlConfig other;
        other.voltage = Voltage(kv * 1000.0);
        other.defocus_scan = {Length(0.0)};
        const auto o = run_control(other);
        CHECK(o.at_focus.tail_extent.value() <= 2.0 * o.detector_pixel_size.value());
    }
}

TEST_CASE("binning")
{
    Grid<double> g(8, 2);
    for (std::size_t i = 0; i < g.data.size(); ++i)
    {
        g.data[i] = static_cast<double>(i);
    }
    const auto b = bin_columns(g, 4);
    CHECK(b.width == 2);
    CHECK(b(0, 0) == 1.5);
    CHECK(b(1, 1) == 13.5);
    CHECK_THROWS_AS(bin_columns(g, 3), DomainError);
}

TEST_CASE("Pendelloesung arithmetic")
{
    const double t = pendelloesung_thickness(Length(48.0), 6.0).value();
    CHECK(t == 288.0);
    CHECK(std::abs(t - 290.0) / 290.0 < 0.01);
    CHECK(pendelloesung_thickness(Length(37.5), 1.0).value() == 37.5);
    CHECK_THROWS_AS(pendelloesung_thickness(Length(0.0), 6.0), DomainError);
    CHECK_THROWS_AS(pendelloesung_thickness(Length(48.0), -1.0), DomainError);

    for (double z : {0.0, 48.0, 96.0})
    {
        CHECK(two_beam_intensity(Length(z), Length(48.0)) < 1e-28);
    }
    CHECK(two_beam_intensity(Length(24.0), Length(48.0)) == doctest::Approx(1.0));
    CHECK(two_beam_intensity(Length(10.0), Length(48.0))
          == doctest::Approx(two_beam_intensity(Length(58.0), Length(48.0))).epsilon(1e-12));
    CHECK_THROWS_AS(two_beam_intensity(Length(1.0), Length(0.0)), DomainError);
}
