#include "evfield/physics.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "evfield/error.hpp"

namespace evfield::physics {
namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

void require_positive(double v, const char* what)
{
    if (!(v > 0.0) || !std::isfinite(v))
    {
        throw DomainError(std::string(what) + " must be positive and finite");
    }
}

double momentum_c(double kinetic)
{
    return std::sqrt(kinetic * kinetic + 2.0 * kinetic * constants.electron_rest_energy);
}

} // namespace

Length electron_wavelength(Energy kinetic_energy)
{
    require_positive(kinetic_energy.value(), "kinetic energy");
    return Length(constants.h_c / momentum_c(kinetic_energy.value()));
}

BeamState beam_kinematics(Voltage accel_voltage)
{
    require_positive(accel_voltage.value(), "accelerating voltage");
    const double e = accel_voltage.value();
    const double pc = momentum_c(e);

    BeamState beam;
    beam.accel_voltage = accel_voltage;
    beam.kinetic_energy = Energy(e);
    beam.momentum_c = Energy(pc);
    beam.wavelength = Length(constants.h_c / pc);
    beam.beta = pc / (e + constants.electron_rest_energy);
    return beam;
}

Length wavelength_shift(const BeamState& beam, Energy delta_e)
{
    const double de = delta_e.value();
    const double e0 = beam.kinetic_energy.value();
    if (de < 0.0 || !std::isfinite(de))
    {
        throw DomainError("energy loss must be non-negative");
    }
    if (de >= e0)
    {
        throw DomainError("energy loss must be smaller than the kinetic energy");
    }
    if (de == 0.0)
    {
        return Length(0.0);
    }
    // lambda1 - lambda0 = hc (pc0 - pc1) / (pc0 pc1), with the momentum
    // difference written without cancellation:
    // pc0^2 - pc1^2 = dE (E0 + E1 + 2 mc^2).
    const double e1 = e0 - de;
    const double pc0 = beam.momentum_c.value();
    const double pc1 = momentum_c(e1);
    const double dpc = de * (e0 + e1 + 2.0 * constants.electron_rest_energy) / (pc0 + pc1);
    return Length(constants.h_c * dpc / (pc0 * pc1));
}

Length self_coherence_length(const BeamState& beam, const CoherenceQuery& q)
{
    require_positive(q.delta_e.value(), "energy loss");
    if (q.delta_phi.value() < 0.0)
    {
        throw DomainError("phase difference must be non-negative");
    }
    const double lambda = beam.wavelength.value();
    const double dlambda = q.convention == LambdaConvention::ElectronDispersion
                               ? wavelength_shift(beam, q.delta_e).value()
                               : constants.h_c / q.delta_e.value();
    if (dlambda == 0.0)
    {
        throw DomainError("self-coherence length diverges for zero wavelength shift");
    }
    return Length(q.delta_phi.value() * lambda * (lambda + dlambda) / (two_pi * dlambda));
}

Time coherence_time(Length l_s)
{
    if (l_s.value() < 0.0 || !std::isfinite(l_s.value()))
    {
        throw DomainError("coherence length must be non-negative");
    }
    return Time(l_s.value() / constants.light_speed);
}

Length evanescent_length(Energy delta_e, EnergyLength kappa)
{
    require_positive(delta_e.value(), "energy loss");
    require_positive(kappa.value(), "hbar*v");
    return kappa / delta_e;
}

Length goos_hanchen_shift(Length lambda, Phase phi, double n_squared)
{
    require_positive(lambda.value(), "wavelength");
    const double angle = phi.value();
    if (!(angle > 0.0) || angle > std::numbers::pi / 2)
    {
        throw DomainError("incidence angle must lie in (0, pi/2]");
    }
    const double s = std::sin(angle);
    const double radicand = s * s - n_squared;
    if (radicand == 0.0)
    {
        throw DomainError("Goos-Haenchen shift is singular at sin^2(phi) = n^2");
    }
    const std::complex<double> root = std::sqrt(std::complex<double>(radicand, 0.0));
    return Length(lambda.value() / std::numbers::pi * std::abs(s / root));
}

Length tunneling_depth(Energy delta_e)
{
    require_positive(delta_e.value(), "energy loss");
    return Length(constants.hbar_c
                  / std::sqrt(2.0 * constants.electron_rest_energy * delta_e.value()));
}

Time phase_time_constant(Energy delta_e)
{
    require_positive(delta_e.value(), "energy loss");
    return Time(constants.hbar / delta_e.value());
}

Time heisenberg_time(Energy delta_e)
{
    require_positive(delta_e.value(), "energy loss");
    return Time(constants.hbar / (2.0 * delta_e.value()));
}

double interaction_constant(const BeamState& beam)
{
    const double e = beam.kinetic_energy.value();
    const double mc2 = constants.electron_rest_energy;
    return two_pi / (beam.wavelength.value() * e) * (mc2 + e) / (2.0 * mc2 + e);
}

ModelCurveSet model_curve_table(const BeamState& beam,
                                std::span<const Energy> grid,
                                Phase delta_phi,
                                EnergyLength kappa_fit,
                                LambdaConvention convention)
{
    if (grid.empty())
    {
        throw DomainError("energy-loss grid is empty");
    }
    for (std::size_t i = 1; i < grid.size(); ++i)
    {
        if (!(grid[i - 1] < grid[i]))
        {
            throw DomainError("energy-loss grid must be strictly ascending");
        }
    }

    ModelCurveSet out;
    out.grid.assign(grid.begin(), grid.end());
    for (Energy de : grid)
    {
        out.l_s.push_back(self_coherence_length(beam, {de, delta_phi, convention}));
        // Virtual-photon wavelength, normal incidence, n^2 = 5 (GaN).
        out.l_e.push_back(goos_hanchen_shift(h_c / de, Phase(std::numbers::pi / 2), 5.0));
        out.l_t.push_back(tunneling_depth(de));
        out.x_i_fit.push_back(evanescent_length(de, kappa_fit));
        out.x_ic.push_back(evanescent_length(de, hbar_c));
        out.t_heisenberg.push_back(heisenberg_time(de));
    }

    if (convention == LambdaConvention::ElectronDispersion && delta_phi.value() > 0.0)
    {
        for (std::size_t i = 1; i < out.size(); ++i)
        {
            if (!(out.l_s[i] < out.l_s[i - 1]))
            {
                throw DomainError("self-coherence column is not decreasing on the grid");
            }
        }
    }
    return out;
}

} // namespace evfield::physics
