#pragma once

#include <numbers>
#include <span>
#include <vector>

#include "evfield/units.hpp"

namespace evfield::physics {

//---------------------------------------------------------------------------//
/*!
 * CODATA 2018 constants in the repo unit system.
 *
 * Constant              | Unit     | Value
 * --------------------- | -------- | --------------
 * hbar_c                | eV*nm    | 197.3269804
 * h_c                   | eV*nm    | 2*pi*hbar_c
 * electron_rest_energy  | eV       | 510998.95
 * hbar                  | eV*s     | 6.582119569e-16
 * light_speed           | nm/s     | 2.99792458e17
 */
struct PhysicalConstants
{
    double hbar_c = 197.3269804;
    double h_c = 2.0 * std::numbers::pi * 197.3269804;
    double electron_rest_energy = 510998.95;
    double hbar = 6.582119569e-16;
    double light_speed = 2.99792458e17;
};

inline constexpr PhysicalConstants constants{};

inline constexpr EnergyLength hbar_c{constants.hbar_c};
inline constexpr EnergyLength h_c{constants.h_c};
inline constexpr Energy electron_rest_energy{constants.electron_rest_energy};

//! Relativistic beam parameters for a given accelerating voltage.
struct BeamState
{
    Voltage accel_voltage;
    Energy kinetic_energy;
    Length wavelength;
    double beta = 0; //!< v/c
    Energy momentum_c; //!< pc
};

enum class LambdaConvention
{
    ElectronDispersion, //!< dlambda = lambda(E - dE) - lambda(E)
    VirtualPhoton,      //!< dlambda = hc / dE
};

struct CoherenceQuery
{
    Energy delta_e;
    Phase delta_phi;
    LambdaConvention convention = LambdaConvention::ElectronDispersion;
};

//! Decay and coherence lengths tabulated on an energy-loss grid.
struct ModelCurveSet
{
    std::vector<Energy> grid;
    std::vector<Length> l_s;
    std::vector<Length> l_e;
    std::vector<Length> l_t;
    std::vector<Length> x_i_fit;
    std::vector<Length> x_ic;
    std::vector<Time> t_heisenberg;

    [[nodiscard]] std::size_t size() const { return grid.size(); }
};

BeamState beam_kinematics(Voltage accel_voltage);

//! De Broglie wavelength at kinetic energy E (pc = sqrt(E^2 + 2 E mc^2)).
Length electron_wavelength(Energy kinetic_energy);

Length wavelength_shift(const BeamState& beam, Energy delta_e);

/*!
 * Self-coherence length from the phase difference of two partial waves,
 * l_s = dphi / (2 pi / lambda - 2 pi / (lambda + dlambda)).
 *
 * The phase is taken as-is; with dphi = 1 this is lambda^2 / (2 pi dlambda),
 * not the ensemble criterion lambda^2 / dlambda.
 */
Length self_coherence_length(const BeamState& beam, const CoherenceQuery& q);

Time coherence_time(Length l_s);

//! kappa / dE. kappa = hbar*c gives the light-speed decay, kappa = hbar*v the fitted one.
Length evanescent_length(Energy delta_e, EnergyLength kappa);

/*!
 * Magnitude of the Goos-Haenchen displacement
 * |D| = |(lambda/pi) sin(phi) / sqrt(sin(phi)^2 - n^2)|.
 *
 * For sin^2 < n^2 the root is imaginary and the magnitude of the complex
 * expression is returned.
 */
Length goos_hanchen_shift(Length lambda, Phase phi, double n_squared);

//! Tunneling depth hbar / sqrt(2 m dE).
Length tunneling_depth(Energy delta_e);

//! hbar / dE
Time phase_time_constant(Energy delta_e);

//! hbar / (2 dE)
Time heisenberg_time(Energy delta_e);

//! Relativistic interaction constant sigma in rad/(V*nm).
double interaction_constant(const BeamState& beam);

ModelCurveSet model_curve_table(const BeamState& beam,
                                std::span<const Energy> grid,
                                Phase delta_phi,
                                EnergyLength kappa_fit,
                                LambdaConvention convention = LambdaConvention::ElectronDispersion);

} // namespace evfield::physics
