#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "evfield/grid.hpp"
#include "evfield/parallel.hpp"
#include "evfield/units.hpp"

namespace evfield::synth {

enum class DecayModel
{
    Exponential,   //!< intensity ~ exp(-x / x_i)
    SqrtTunneling, //!< intensity ~ exp(-x / l_t), l_t following the 1/sqrt(dE) law
};

struct DecayProfile
{
    DecayModel model = DecayModel::Exponential;
    Length length{10.0};
};

//! Rigid integer displacement of one frame's content (rows, columns).
struct FrameShift
{
    int dy = 0;
    int dx = 0;
    friend bool operator==(const FrameShift&, const FrameShift&) = default;
};

//---------------------------------------------------------------------------//
/*!
 * Sample/vacuum interface phantom.
 *
 * Columns left of \c interface_col are sample; the interface runs parallel to
 * the columns. Means are electron counts per pixel per frame.
 */
struct ScenePhantom
{
    int width_px = 512;
    int height_px = 2048;
    Length pixel_size{0.5};
    int interface_col = 32;
    double mu_background = 0.01;
    double mu_bulk = 0.05;
    double mu_interface = 0.2;
    DecayProfile decay;
    Energy delta_e{10.0};
    //! Content displacement of frame i (missing entries mean no shift).
    std::vector<FrameShift> frame_shifts;

    void validate() const;

    //! Expected excess over background at distance x into the vacuum.
    [[nodiscard]] double vacuum_excess(Length x) const;
    //! Expected scattered-minus-incident count in column \p col (unshifted).
    [[nodiscard]] double model_mean(int col) const;
    [[nodiscard]] FrameShift shift_for(int frame) const;
};

enum class StackKind : std::uint8_t
{
    Incident = 0,
    Scattered = 1,
    Difference = 2,
    Simulated = 3,
};

struct Geometry
{
    int width = 0;
    int height = 0;
    Length pixel_size{0.0};
    Energy delta_e{0.0};
    friend bool operator==(const Geometry&, const Geometry&) = default;
};

struct Frame
{
    Grid<std::int32_t> counts;
    int index = 0;
    std::uint64_t seed = 0;
};

struct FrameStack
{
    Geometry geometry;
    StackKind kind = StackKind::Incident;
    std::vector<Frame> frames;
    std::optional<ScenePhantom> phantom;

    [[nodiscard]] std::size_t size() const { return frames.size(); }
    [[nodiscard]] bool empty() const { return frames.empty(); }
};

FrameStack generate_stack(const ScenePhantom& phantom,
                          int n_frames,
                          StackKind kind,
                          std::uint64_t seed,
                          const ExecutionOptions& exec = {});

/*!
 * Incident and scattered stacks generated and subtracted frame by frame.
 *
 * Bit-identical to difference_stack(generate_stack(.., Scattered, seed),
 * generate_stack(.., Incident, seed)) without holding both inputs.
 */
FrameStack generate_difference_stack(const ScenePhantom& phantom,
                                     int n_frames,
                                     std::uint64_t seed,
                                     const ExecutionOptions& exec = {});

FrameStack difference_stack(const FrameStack& scattered, const FrameStack& incident);

//! Frames of \p b appended after \p a (re-indexed); geometry and kind must match.
FrameStack concatenate(const FrameStack& a, const FrameStack& b);

//! Leading \p count frames.
FrameStack leading_frames(const FrameStack& stack, std::size_t count);

//---------------------------------------------------------------------------//
// Loss-spectrum weighting of the interface intensity
//---------------------------------------------------------------------------//

//! Lorentzian peak; width is the full width at half maximum.
struct SpectrumPeak
{
    Energy center;
    Energy width;
    double amplitude = 0;
};

struct LossSpectrum
{
    double zero_loss_amplitude = 0;
    Energy zero_loss_fwhm{0.6};
    std::vector<SpectrumPeak> peaks;
};

//! Zero-loss peak, a weak interband feature and the 19.4 eV bulk plasmon.
LossSpectrum gan_like_spectrum();

double spectral_weight(Energy delta_e, const LossSpectrum& spectrum);

} // namespace evfield::synth
