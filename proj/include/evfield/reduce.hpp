#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "evfield/grid.hpp"
#include "evfield/synth.hpp"
#include "evfield/units.hpp"

namespace evfield::reduce {

//---------------------------------------------------------------------------//
// Alignment and averaging
//---------------------------------------------------------------------------//

struct AlignResult
{
    synth::FrameStack stack;
    //! Correction applied to each frame: aligned(r, c) = frame(r - dy, c - dx).
    std::vector<synth::FrameShift> shifts;
    //! Frames whose alignment was skipped (degenerate frame or reference).
    std::vector<bool> skipped;

    [[nodiscard]] bool any_skipped() const;
};

/*!
 * Rigid integer registration against the running average of the frames
 * already aligned. Frame 0 is the reference; vacated pixels are zero-filled.
 */
AlignResult align_stack(const synth::FrameStack& stack, int max_shift);

//! Per-pixel arithmetic mean (exact integer accumulation).
Grid<double> average_stack(const synth::FrameStack& stack);

//---------------------------------------------------------------------------//
// Profiles and decay fits
//---------------------------------------------------------------------------//

//! Half-open row interval [begin, end).
struct RowRange
{
    int begin = 0;
    int end = 0;
};

struct LineProfile
{
    std::vector<double> x;     //!< nm from the interface, ascending
    std::vector<double> y;     //!< mean counts
    std::vector<double> sigma; //!< standard error of y over rows
    int rows_averaged = 0;
    int frames_averaged = 0;
    //! Some sigma is exactly zero (uniform rows); unit weights take over in fits.
    bool zero_sigma = false;

    [[nodiscard]] std::size_t size() const { return x.size(); }
};

LineProfile extract_profile(const Grid<double>& mean_frame,
                            int interface_col,
                            RowRange rows,
                            Length pixel_size,
                            int frames_averaged = 0);

struct FitWindow
{
    Length x_min;
    Length x_max;
};

struct DecayFit
{
    double i0 = 0;
    Length x_i;
    double baseline = 0;
    Length sigma_x_i;
    double sigma_i0 = 0;
    double sigma_baseline = 0;
    double chi2_reduced = 0;
    FitWindow window;
    int points = 0;
    int iterations = 0;
    bool unit_weights = false;
};

//! Raised when the decay fit fails; carries the last iterate.
class FitError : public std::runtime_error
{
  public:
    FitError(const std::string& what, DecayFit last) : std::runtime_error(what), last_(last) {}
    [[nodiscard]] const DecayFit& last_iterate() const { return last_; }

  private:
    DecayFit last_;
};

struct FitOptions
{
    int max_iterations = 200;
    double tolerance = 1e-10; //!< relative parameter change
};

/*!
 * Window starting one pixel into the vacuum and ending before the first
 * point below max(3 * baseline sigma, 1e-4 counts/px), where the baseline
 * sigma is the median standard error over the last quarter of the profile.
 */
FitWindow default_window(const LineProfile& profile, Length pixel_size);

//! Same threshold applied to a fitted model instead of the noisy data.
FitWindow model_window(const LineProfile& profile, const DecayFit& fit, Length pixel_size);

/*!
 * Weighted Levenberg-Marquardt fit of y = i0 exp(-x / x_i) + baseline.
 *
 * Weights are 1/sigma^2. If every sigma in the window is zero, unit weights
 * are used; isolated zero sigmas take the smallest positive sigma. Start
 * values come from a log-linear regression on baseline-subtracted data.
 * Accepted steps never increase the weighted residual. Parameter
 * uncertainties are the diagonal of (J^T W J)^-1 at the optimum.
 */
DecayFit fit_exponential(const LineProfile& profile, FitWindow window, const FitOptions& options = {});

//---------------------------------------------------------------------------//
// Whole-stack pipeline
//---------------------------------------------------------------------------//

struct PipelineOptions
{
    int interface_col = 32;
    //! Rows averaged along the interface, centred in the frame.
    int rows = 1000;
    std::optional<RowRange> row_range;
    int max_shift = 0;
    std::optional<FitWindow> window;
    FitOptions fit;
};

struct StackAnalysis
{
    DecayFit fit;
    LineProfile profile;
    std::vector<synth::FrameShift> shifts;
    bool alignment_skipped = false;
};

/*!
 * align -> average -> extract_profile -> fit_exponential.
 *
 * Without an explicit window the fit runs twice: on default_window, then on
 * model_window of that first fit.
 */
StackAnalysis analyze_stack(const synth::FrameStack& stack, const PipelineOptions& options);

struct DoseReport
{
    Length x_i_full;
    Length x_i_sub;
    Length sigma_full;
    Length sigma_sub;
    Length combined_sigma;
    std::size_t frames_full = 0;
    std::size_t frames_sub = 0;
    bool consistent = false;
};

//! Pipeline on the full stack and on its leading fraction of frames.
DoseReport dose_independence_check(const synth::FrameStack& stack,
                                   double fraction,
                                   const PipelineOptions& options);

} // namespace evfield::reduce
