#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evfield/lawfit.hpp"
#include "evfield/multislice.hpp"
#include "evfield/physics.hpp"
#include "evfield/reduce.hpp"
#include "evfield/synth.hpp"

namespace evfield::cli {

inline constexpr int config_schema_version = 1;
//! Version of the JSON documents written by the commands.
inline constexpr int output_schema_version = 1;

struct PhantomConfig
{
    int width = 512;
    int height = 2048;
    double pixel_size = 0.5; //!< nm
    int interface_col = 32;
    double mu_background = 0.01;
    double mu_bulk = 0.05;
    double mu_interface = 0.2;
    synth::DecayModel law = synth::DecayModel::Exponential;
    double true_hbar_v = 106.0;   //!< eV*nm, exponential law
    double sqrt_prefactor = 50.0; //!< nm*eV^0.5, tunneling law
    //! Scale mu_interface by the loss spectrum relative to its plasmon peak.
    bool spectral_scaling = false;
};

//---------------------------------------------------------------------------//
/*!
 * Everything that determines the bytes of a reproduce run.
 *
 * Output directory and thread count are command-line only; results do not
 * depend on them.
 */
struct ExperimentConfig
{
    int schema_version = config_schema_version;
    double voltage_kv = 300.0;
    std::vector<double> energies{0.9, 2.5, 5.0, 10.0, 20.0, 40.0};
    PhantomConfig phantom;
    int frames = 100;
    int rows = 1000;
    int max_shift = 0;
    std::optional<reduce::FitWindow> fit_window;
    double discriminate_threshold = 5.0;
    double delta_phi = 0.5; //!< rad
    double curve_min = 0.5;
    double curve_max = 1000.0;
    int curve_points_per_decade = 10;
    bool control = true;
    std::uint64_t seed = 42;

    void validate() const;
};

//! Missing keys keep defaults; unknown keys and schema mismatches throw DataError.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

//! FNV-1a 64 over the canonical JSON dump, 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

//! Phantom for one grid energy (decay length from the configured law).
synth::ScenePhantom phantom_for(const ExperimentConfig& config, double delta_e);

//! Log-spaced curve grid merged with the measurement energies.
std::vector<Energy> curve_grid(const ExperimentConfig& config);

reduce::PipelineOptions pipeline_options(const ExperimentConfig& config);

//---------------------------------------------------------------------------//
// Run report
//---------------------------------------------------------------------------//

struct EnergyResult
{
    double delta_e = 0;
    double truth = 0; //!< phantom decay length, nm
    reduce::DecayFit fit;
};

struct ControlSummary
{
    double tail_extent_px = 0;
    double fringe_amplitude = 0;
    double best_focus = 0; //!< nm
    std::vector<multislice::DefocusScanRow> scan;
    double norm_error = 0; //!< relative change of the total intensity in free space
};

struct RunReport
{
    std::string config_hash;
    std::uint64_t seed = 0;
    double voltage_kv = 0;
    double delta_phi = 0;
    std::vector<EnergyResult> energies;
    lawfit::LawFitResult law;
    physics::ModelCurveSet curves;
    std::optional<ControlSummary> control;
};

struct Timing
{
    std::vector<std::pair<std::string, double>> stages; //!< seconds
    double total = 0;
};

lawfit::DecaySeries series_of(const RunReport& report);

RunReport run_reproduce(const ExperimentConfig& config, const ExecutionOptions& exec, Timing* timing = nullptr);

ControlSummary run_control_summary(const multislice::ControlConfig& config);
ControlSummary summarize_control(const multislice::ControlResult& result, const multislice::ControlConfig& config);

//---------------------------------------------------------------------------//
// Serialization
//---------------------------------------------------------------------------//

nlohmann::json to_json(const reduce::DecayFit& fit);
nlohmann::json to_json(const lawfit::LawFitResult& result);
nlohmann::json to_json(const ControlSummary& control);
nlohmann::json to_json(const RunReport& report);
nlohmann::json to_json(const Timing& timing);

std::string curves_csv(const physics::ModelCurveSet& curves, const std::string& hash);
std::string series_csv(const lawfit::DecaySeries& series, const std::string& hash);
std::string profile_csv(const reduce::LineProfile& profile, const std::string& hash);
std::string scan_csv(const std::vector<multislice::DefocusScanRow>& scan, const std::string& hash);

//! Reads dE_eV,xi_nm,sigma_nm[,condition]; '#' lines are skipped.
lawfit::DecaySeries parse_series_csv(const std::string& text);
lawfit::DecaySeries load_series(const std::filesystem::path& path);

//! x_i vs dE with error bars and the fitted reciprocal curve.
std::string render_fig4a(const lawfit::DecaySeries& series, const lawfit::LawFitResult& law);
//! Log-log lengths vs 1/dE with model curves and measured points.
std::string render_fig4b(const lawfit::DecaySeries& series, const physics::ModelCurveSet& curves);

void write_text(const std::filesystem::path& path, const std::string& text);

//---------------------------------------------------------------------------//

//! 0 success, 1 domain/data error, 2 bad arguments.
int run_command(int argc, const char* const* argv);

} // namespace evfield::cli
