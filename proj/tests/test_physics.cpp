#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "evfield/error.hpp"
#include "evfield/physics.hpp"
#include "si_oracle.hpp"

using namespace evfield;
using namespace evfield::physics;
using namespace evfield::literals;

namespace {

const BeamState beam300 = beam_kinematics(Voltage(300000.0));

double rel(double a, double b)
{
    return std::abs(a - b) / std::abs(b);
}

} // namespace

TEST_CASE("beam kinematics at 300 kV")
{
    CHECK(beam300.kinetic_energy.value() == doctest::Approx(300000.0));
    CHECK(rel(beam300.wavelength.value(), double(si::wavelength_nm(300000.0L))) < 1e-9);
    CHECK(rel(beam300.beta, double(si::beta(300000.0L))) < 1e-9);
    CHECK(beam300.wavelength.value() == doctest::Approx(1.9687e-3).epsilon(2.5e-4));
    CHECK(beam300.beta == doctest::Approx(0.7765).epsilon(1e-3));
    CHECK(beam300.beta >= 0.776);
    CHECK(beam300.beta <= 0.777);
    // pc and lambda are consistent
    CHECK(rel(beam300.wavelength.value() * beam300.momentum_c.value(), h_c.value()) < 1e-14);
}

TEST_CASE("beam kinematics at 100 kV and the low-voltage limit")
{
    const auto b = beam_kinematics(Voltage(100000.0));
    CHECK(rel(b.wavelength.value(), double(si::wavelength_nm(100000.0L))) < 1e-9);
    CHECK(b.wavelength.value() == doctest::Approx(3.7014e-3).epsilon(1e-4));

    const auto b1 = beam_kinematics(Voltage(1.0));
    const auto b10 = beam_kinematics(Voltage(10.0));
    CHECK(b1.beta < b10.beta);
    CHECK(b1.wavelength > b10.wavelength);
    // non-relativistic limit: lambda ~ 1/sqrt(E)
    CHECK(b1.wavelength.value() / b10.wavelength.value() == doctest::Approx(std::sqrt(10.0)).epsilon(1e-5));
}

TEST_CASE("beam kinematics rejects non-positive voltage")
{
    CHECK_THROWS_AS(beam_kinematics(Voltage(0.0)), DomainError);
    CHECK_THROWS_AS(beam_kinematics(Voltage(-5.0)), DomainError);
}

TEST_CASE("electron wavelength matches the SI oracle over a wide range")
{
    for (double e : {1.0, 100.0, 1e4, 2e5, 1e6})
    {
        CHECK(rel(electron_wavelength(Energy(e)).value(), double(si::wavelength_nm(e))) < 1e-9);
    }
}

TEST_CASE("wavelength shift")
{
    const double exact1 = double(si::wavelength_nm(300000.0L - 1.0L) - si::wavelength_nm(300000.0L));
    const double d1 = wavelength_shift(beam300, 1.0_eV).value();
    CHECK(rel(d1, exact1) < 1e-8);
    CHECK(d1 == doctest::Approx(4.026e-9).epsilon(1e-3));

    // first-order oracle lambda * (dE / beta) / pc
    const double first_order = beam300.wavelength.value() / beam300.beta / beam300.momentum_c.value();
    CHECK(rel(d1, first_order) < 5e-6);

    // local linearity: second-order Taylor term bounds the deviation
    const double d2 = wavelength_shift(beam300, 2.0_eV).value();
    CHECK(std::abs(d2 / (2.0 * d1) - 1.0) < 5e-6);

    CHECK(wavelength_shift(beam300, 0.0_eV).value() == 0.0);
    CHECK(wavelength_shift(beam300, 100.0_eV).value() > 0.0);
    CHECK_THROWS_AS(wavelength_shift(beam300, Energy(300000.0)), DomainError);
    CHECK_THROWS_AS(wavelength_shift(beam300, Energy(4e5)), DomainError);
    CHECK_THROWS_AS(wavelength_shift(beam300, Energy(-1.0)), DomainError);
}

TEST_CASE("self-coherence length")
{
    const CoherenceQuery q{1.0_eV, 0.5_rad, LambdaConvention::ElectronDispersion};
    const double ls = self_coherence_length(beam300, q).value();
    const double lambda = beam300.wavelength.value();
    const double dl = wavelength_shift(beam300, 1.0_eV).value();
    CHECK(rel(ls, 0.5 * lambda * (lambda + dl) / (2.0 * std::numbers::pi * dl)) < 1e-12);
    CHECK(ls == doctest::Approx(76.6).epsilon(1e-3));

    CHECK(self_coherence_length(beam300, {1.0_eV, 0.0_rad}).value() == 0.0);
    const double doubled = self_coherence_length(beam300, {1.0_eV, 1.0_rad}).value();
    CHECK(doubled == 2.0 * ls);

    CHECK_THROWS_AS(self_coherence_length(beam300, {0.0_eV, 0.5_rad}), DomainError);
}

TEST_CASE("self-coherence length, virtual-photon convention")
{
    const double lambda = beam300.wavelength.value();
    const double dl = h_c.value() / 10.0;
    const double expected = 0.5 * lambda * (lambda + dl) / (2.0 * std::numbers::pi * dl);
    const double ls = self_coherence_length(beam300, {10.0_eV, 0.5_rad, LambdaConvention::VirtualPhoton}).value();
    CHECK(rel(ls, expected) < 1e-12);
}

TEST_CASE("l_s * dE / dphi identity over [0.5, 100] eV")
{
    // hbar * v = beta * hbar c for the electron-dispersion convention
    const double hv = beam300.beta * hbar_c.value();
    double lo = 1e300;
    double hi = 0;
    for (int i = 0; i <= 200; ++i)
    {
        const double de = 0.5 * std::pow(200.0, i / 200.0);
        const double v = self_coherence_length(beam300, {Energy(de), 0.5_rad}).value() * de / 0.5;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK((hi - lo) / lo < 1e-4);
    CHECK(lo == doctest::Approx(153.2).epsilon(1e-3));
    CHECK(lo == doctest::Approx(hv).epsilon(1e-3));
}

TEST_CASE("coherence time")
{
    CHECK(coherence_time(Length(197.3269804)).value() == doctest::Approx(6.582119569e-16).epsilon(1e-9));
    CHECK(coherence_time(0.0_nm).value() == 0.0);
    CHECK(coherence_time(Length(20.0)).value() == doctest::Approx(2.0 * coherence_time(Length(10.0)).value()));
    CHECK_THROWS_AS(coherence_time(Length(-1.0)), DomainError);
}

TEST_CASE("evanescent length")
{
    CHECK(evanescent_length(1.0_eV, hbar_c).value() == doctest::Approx(197.327).epsilon(1e-6));
    CHECK(evanescent_length(40.0_eV, 106.0_eVnm).value() == doctest::Approx(2.65).epsilon(1e-14));
    CHECK(evanescent_length(2.0_eV, 106.0_eVnm).value() == 0.5 * evanescent_length(1.0_eV, 106.0_eVnm).value());
    for (double de : {0.3, 0.9, 7.0, 33.3})
    {
        CHECK(evanescent_length(Energy(de), 106.0_eVnm).value() * de == doctest::Approx(106.0).epsilon(1e-15));
    }
    CHECK_THROWS_AS(evanescent_length(0.0_eV, hbar_c), DomainError);
    CHECK_THROWS_AS(evanescent_length(1.0_eV, EnergyLength(0.0)), DomainError);
}

TEST_CASE("Goos-Haenchen shift")
{
    const double pi = std::numbers::pi;
    const Length lambda_photon = h_c / 1.0_eV;
    CHECK(goos_hanchen_shift(lambda_photon, Phase(pi / 2), 5.0).value() == doctest::Approx(197.33).epsilon(1e-4));
    CHECK(goos_hanchen_shift(Length(3.0), Phase(pi / 2), 2.0).value() == doctest::Approx(3.0 / pi).epsilon(1e-14));

    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> dist(1e-3, 1e4);
    for (int i = 0; i < 10; ++i)
    {
        const double l = dist(gen);
        CHECK(rel(goos_hanchen_shift(Length(l), Phase(pi / 2), 5.0).value(), l / (2 * pi)) < 1e-12);
    }

    // general angle against a direct complex evaluation
    const double phi = 0.7;
    const std::complex<double> root = std::sqrt(std::complex<double>(std::sin(phi) * std::sin(phi) - 3.0, 0.0));
    const double expected = std::abs(2.0 / pi * std::sin(phi) / root);
    CHECK(goos_hanchen_shift(Length(2.0), Phase(phi), 3.0).value() == doctest::Approx(expected).epsilon(1e-13));
    CHECK(goos_hanchen_shift(Length(4.0), Phase(phi), 3.0).value()
          == doctest::Approx(2.0 * goos_hanchen_shift(Length(2.0), Phase(phi), 3.0).value()).epsilon(1e-15));

    CHECK_THROWS_AS(goos_hanchen_shift(Length(1.0), Phase(pi / 2), 1.0), DomainError);
    CHECK_THROWS_AS(goos_hanchen_shift(Length(1.0), Phase(0.0), 5.0), DomainError);
    CHECK_THROWS_AS(goos_hanchen_shift(Length(1.0), Phase(2.0), 5.0), DomainError);
}

TEST_CASE("tunneling depth")
{
    CHECK(tunneling_depth(1.0_eV).value() == doctest::Approx(0.19518).epsilon(1e-4));
    CHECK(rel(tunneling_depth(1.0_eV).value(), double(si::tunneling_depth_nm(1.0L))) < 1e-8);
    CHECK(tunneling_depth(4.0_eV).value() == doctest::Approx(0.5 * tunneling_depth(1.0_eV).value()).epsilon(1e-15));
    const double k = tunneling_depth(1.0_eV).value();
    double prev = 1e300;
    for (double de = 0.5; de < 1000.0; de *= 1.3)
    {
        const double lt = tunneling_depth(Energy(de)).value();
        CHECK(rel(lt * std::sqrt(de), k) < 1e-12);
        CHECK(lt < prev);
        prev = lt;
    }
    CHECK_THROWS_AS(tunneling_depth(0.0_eV), DomainError);
}

TEST_CASE("phase time constant and Heisenberg time")
{
    CHECK(phase_time_constant(1.0_eV).value() == doctest::Approx(6.582120e-16).epsilon(1e-6));
    CHECK(phase_time_constant(2.0_eV).value() == 0.5 * phase_time_constant(1.0_eV).value());
    CHECK(heisenberg_time(1.0_eV).value() == doctest::Approx(3.29106e-16).epsilon(1e-5));
    double prev = 1.0;
    for (double de : {0.5, 0.9, 2.5, 5.0, 10.0, 20.0, 40.0, 100.0})
    {
        CHECK(rel(phase_time_constant(Energy(de)).value() * de, constants.hbar) < 1e-12);
        CHECK(heisenberg_time(Energy(de)).value() / phase_time_constant(Energy(de)).value() == 0.5);
        CHECK(heisenberg_time(Energy(de)).value() < prev);
        prev = heisenberg_time(Energy(de)).value();
    }
    CHECK_THROWS_AS(phase_time_constant(0.0_eV), DomainError);
    CHECK_THROWS_AS(heisenberg_time(Energy(-1.0)), DomainError);
}

TEST_CASE("interaction constant")
{
    CHECK(rel(interaction_constant(beam300), double(si::interaction_constant(300000.0L))) < 1e-8);
    CHECK(interaction_constant(beam300) == doctest::Approx(6.526e-3).epsilon(1e-3));
}

TEST_CASE("model curve table")
{
    const std::vector<Energy> grid{0.9_eV, 2.5_eV, 5.0_eV, 10.0_eV, 20.0_eV, 40.0_eV};
    const auto t = model_curve_table(beam300, grid, 0.5_rad, 106.0_eVnm);
    REQUIRE(t.size() == 6);
    for (std::size_t i = 0; i < t.size(); ++i)
    {
        for (double v : {t.l_s[i].value(), t.l_e[i].value(), t.l_t[i].value(), t.x_i_fit[i].value(), t.x_ic[i].value(),
                         t.t_heisenberg[i].value()})
        {
            CHECK(std::isfinite(v));
            CHECK(v > 0.0);
        }
        CHECK(t.x_ic[i].value() == hbar_c.value() / grid[i].value());
        CHECK(t.x_i_fit[i] <= t.x_ic[i]);
        if (i > 0)
        {
            CHECK(t.l_s[i] < t.l_s[i - 1]);
            CHECK(t.l_e[i] < t.l_e[i - 1]);
            CHECK(t.l_t[i] < t.l_t[i - 1]);
            CHECK(t.x_i_fit[i] < t.x_i_fit[i - 1]);
            CHECK(t.x_ic[i] < t.x_ic[i - 1]);
            CHECK(t.t_heisenberg[i] < t.t_heisenberg[i - 1]);
        }
    }
}

TEST_CASE("model curve table, single point matches the individual operations")
{
    const std::vector<Energy> grid{1.0_eV};
    const auto t = model_curve_table(beam300, grid, 0.5_rad, 106.0_eVnm);
    REQUIRE(t.size() == 1);
    CHECK(t.l_s[0] == self_coherence_length(beam300, {1.0_eV, 0.5_rad}));
    CHECK(t.l_e[0].value() == doctest::Approx(197.327).epsilon(5e-6));
    CHECK(t.l_t[0] == tunneling_depth(1.0_eV));
    CHECK(t.x_i_fit[0].value() == doctest::Approx(106.0).epsilon(1e-15));
    CHECK(t.t_heisenberg[0] == heisenberg_time(1.0_eV));
}

TEST_CASE("model curve table rejects bad grids")
{
    CHECK_THROWS_AS(model_curve_table(beam300, std::vector<Energy>{}, 0.5_rad, 106.0_eVnm), DomainError);
    CHECK_THROWS_AS(model_curve_table(beam300, std::vector<Energy>{2.0_eV, 1.0_eV}, 0.5_rad, 106.0_eVnm), DomainError);
    CHECK_THROWS_AS(model_curve_table(beam300, std::vector<Energy>{0.0_eV, 1.0_eV}, 0.5_rad, 106.0_eVnm), DomainError);
}
