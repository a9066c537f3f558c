#include <chrono>
#include <cmath>

#include "evfield/cli.hpp"
#include "evfield/error.hpp"

namespace evfield::cli {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// splitmix64 finalizer
std::uint64_t mix(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

lawfit::DecaySeries series_of(const RunReport& report)
{
    lawfit::DecaySeries s;
    for (const EnergyResult& e : report.energies)
    {
        s.points.push_back({Energy(e.delta_e), e.fit.x_i, e.fit.sigma_x_i, {}});
    }
    return s;
}

ControlSummary run_control_summary(const multislice::ControlConfig& config)
{
    return summarize_control(multislice::run_control(config), config);
}

ControlSummary summarize_control(const multislice::ControlResult& r, const multislice::ControlConfig& config)
{
    ControlSummary s;
    s.tail_extent_px = r.at_focus.tail_extent / r.detector_pixel_size;
    s.fringe_amplitude = r.at_focus.fringe_amplitude;
    s.best_focus = r.best_focus().defocus.value();
    s.scan = r.scan;

    // Free-space norm check on a localized field of the control grid.
    const auto beam = physics::beam_kinematics(config.voltage);
    auto field = multislice::WaveField::plane_wave(config.nx, config.ny, config.sim_pixel_size, beam.wavelength);
    for (int r0 = 0; r0 < field.ny; ++r0)
    {
        for (int c = 0; c < field.nx; ++c)
        {
            const double u = (c - field.nx / 2) / 40.0;
            field(r0, c) = std::polar(std::exp(-0.5 * u * u), 0.3 * c + 0.7 * r0);
        }
    }
    const double before = field.total_intensity();
    multislice::propagate(field, Length(200.0));
    s.norm_error = std::abs(field.total_intensity() - before) / before;
    return s;
}

RunReport run_reproduce(const ExperimentConfig& config, const ExecutionOptions& exec, Timing* timing)
{
    config.validate();
    const auto t_start = Clock::now();
    RunReport report;
    report.config_hash = config_hash(config);
    report.seed = config.seed;
    report.voltage_kv = config.voltage_kv;
    report.delta_phi = config.delta_phi;

    double t_generate = 0;
    double t_reduce = 0;
    const reduce::PipelineOptions options = pipeline_options(config);
    for (std::size_t i = 0; i < config.energies.size(); ++i)
    {
        const double de = config.energies[i];
        const synth::ScenePhantom phantom = phantom_for(config, de);
        auto t0 = Clock::now();
        const synth::FrameStack stack = synth::generate_difference_stack(phantom, config.frames, mix(config.seed ^ mix(i)), exec);
        t_generate += seconds_since(t0);
        t0 = Clock::now();
        const reduce::StackAnalysis analysis = reduce::analyze_stack(stack, options);
        t_reduce += seconds_since(t0);
        report.energies.push_back({de, phantom.decay.length.value(), analysis.fit});
    }

    auto t0 = Clock::now();
    report.law = lawfit::discriminate(series_of(report), {config.discriminate_threshold});
    const double t_law = seconds_since(t0);

    t0 = Clock::now();
    const auto beam = physics::beam_kinematics(Voltage(config.voltage_kv * 1000.0));
    const auto grid = curve_grid(config);
    report.curves = physics::model_curve_table(beam, grid, Phase(config.delta_phi), EnergyLength(config.phantom.true_hbar_v));
    const double t_curves = seconds_since(t0);

    double t_control = 0;
    if (config.control)
    {
        t0 = Clock::now();
        multislice::ControlConfig cc;
        cc.voltage = Voltage(config.voltage_kv * 1000.0);
        report.control = run_control_summary(cc);
        t_control = seconds_since(t0);
    }

    if (timing)
    {
        timing->stages = {{"generate", t_generate}, {"reduce", t_reduce}, {"lawfit", t_law},
                          {"curves", t_curves},     {"control", t_control}};
        timing->total = seconds_since(t_start);
    }
    return report;
}

} // namespace evfield::cli
