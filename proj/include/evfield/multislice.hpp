#pragma once

#include <vector>

#include "evfield/fft.hpp"
#include "evfield/grid.hpp"
#include "evfield/units.hpp"

namespace evfield::multislice {

//! Complex wavefunction on an (ny x nx) row-major grid; sizes are powers of two.
struct WaveField
{
    int nx = 0;
    int ny = 0;
    Length pixel_size;
    Length wavelength;
    std::vector<Complex> amplitude;

    static WaveField plane_wave(int nx, int ny, Length pixel_size, Length wavelength);

    Complex& operator()(int row, int col) { return amplitude[static_cast<std::size_t>(row) * nx + col]; }
    const Complex& operator()(int row, int col) const { return amplitude[static_cast<std::size_t>(row) * nx + col]; }

    //! sum |psi|^2 * px^2
    [[nodiscard]] double total_intensity() const;
    [[nodiscard]] Grid<double> intensity() const;
    void validate() const;
};

//---------------------------------------------------------------------------//
/*!
 * Uniform slab with a vacuum edge, periodic in x.
 *
 * The sample occupies x in [0, edge_col * px); the vacuum runs from the edge to
 * the right border and wraps onto the slab's left face. \c edge_width > 0
 * softens both faces with an erf profile. edge_col >= nx fills the whole
 * field (no edge).
 */
struct SlabPhantom
{
    double inner_potential = 17.0; //!< V
    Length thickness{20.0};
    int n_slices = 10;
    int edge_col = 0;
    double interaction_constant = 0; //!< rad / (V * nm)
    Length edge_width{0.0};

    void validate() const;
    //! Potential profile across x in V.
    [[nodiscard]] std::vector<double> potential(int nx, Length pixel_size) const;
};

//! exp(-i pi lambda dz |k|^2) on the discrete frequency grid.
std::vector<Complex> fresnel_propagator(int nx, int ny, Length pixel_size, Length wavelength, Length dz);

//! Free-space propagation by dz (no band limit).
void propagate(WaveField& field, Length dz);

/*!
 * Phase-grating / Fresnel-propagator multi-slice through the slab.
 *
 * Each slice applies t(x) = exp(i sigma V(x) dz), a 2/3-Nyquist band limit and
 * propagation over dz = thickness / n_slices.
 */
WaveField multislice_exit_wave(const WaveField& incident, const SlabPhantom& slab);

//! |psi|^2 after propagating by -defocus.
Grid<double> apply_defocus(const WaveField& exit, Length defocus);

//! Mean over blocks of \p factor columns (detector integration).
Grid<double> bin_columns(const Grid<double>& image, int factor);

struct EdgeMetrics
{
    double fringe_amplitude = 0; //!< peak-to-peak within 20 px of the edge, over bulk mean
    Length tail_extent;          //!< vacuum distance deviating > 1% of bulk from far vacuum
};

EdgeMetrics edge_metrics(const Grid<double>& image, int edge_col, Length pixel_size);

//! Distance between the two first intensity maxima on the bright side of the edge.
Length first_fringe_spacing(const Grid<double>& image, int edge_col, Length pixel_size);

//! period * number of oscillations
Length pendelloesung_thickness(Length period, double n_oscillations);

//! Two-beam diffracted intensity sin^2(pi t / xi_g).
double two_beam_intensity(Length thickness, Length extinction_distance);

//---------------------------------------------------------------------------//
// Elastic control run
//---------------------------------------------------------------------------//

struct ControlConfig
{
    Voltage voltage{300000.0};
    Length sim_pixel_size{0.0625};
    int nx = 8192;
    int ny = 8;
    Length thickness{20.0};
    int n_slices = 10;
    double inner_potential = 17.0;
    Length edge_width{0.2};
    int detector_binning = 8;
    std::vector<Length> defocus_scan;

    static std::vector<Length> default_scan(); //!< -200..200 nm in 25 nm steps
};

struct DefocusScanRow
{
    Length defocus;
    double fringe_amplitude = 0;
    Length tail_extent;
};

struct ControlResult
{
    std::vector<DefocusScanRow> scan;
    EdgeMetrics at_focus;         //!< fringe on the simulation grid, tail on the detector grid
    Grid<double> detector_image;  //!< binned amplitude image at zero defocus
    Length detector_pixel_size;
    int detector_edge_col = 0;
    int sim_edge_col = 0;

    //! Scan row with the smallest fringe amplitude.
    [[nodiscard]] const DefocusScanRow& best_focus() const;
};

ControlResult run_control(const ControlConfig& config);

} // namespace evfield::multislice
