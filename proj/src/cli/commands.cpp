#include <iostream>

#include <CLI11.hpp>

#include "evfield/cli.hpp"
#include "evfield/error.hpp"
#include "evfield/stack_io.hpp"

namespace evfield::cli {
namespace {

namespace fs = std::filesystem;

struct Common
{
    std::string command_line;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out = ".";
    unsigned threads = 0;
};

ExperimentConfig resolve_config(const Common& c)
{
    ExperimentConfig config = c.config_path.empty() ? ExperimentConfig{} : load_config(c.config_path);
    if (c.seed)
    {
        config.seed = *c.seed;
    }
    config.validate();
    return config;
}

fs::path out_dir(const Common& c)
{
    fs::path dir(c.out);
    fs::create_directories(dir);
    return dir;
}

void add_common(CLI::App* sub, Common& c, bool with_config, bool with_seed)
{
    if (with_config)
    {
        sub->add_option("--config", c.config_path, "experiment config (JSON)")->check(CLI::ExistingFile);
    }
    if (with_seed)
    {
        sub->add_option("--seed", c.seed, "random seed (overrides the config)");
    }
    sub->add_option("--out", c.out, "output directory");
    sub->add_option("--threads", c.threads, "worker threads (0: all cores)");
}

int cmd_curves(const Common& c)
{
    const ExperimentConfig config = resolve_config(c);
    const auto beam = physics::beam_kinematics(Voltage(config.voltage_kv * 1000.0));
    const auto grid = curve_grid(config);
    const auto curves = physics::model_curve_table(beam, grid, Phase(config.delta_phi),
                                                   EnergyLength(config.phantom.true_hbar_v));
    write_text(out_dir(c) / "curves.csv", curves_csv(curves, config_hash(config)));
    return 0;
}

struct SimulateArgs
{
    double energy = 10.0;
    std::string kind = "difference";
    std::optional<int> frames;
};

int cmd_simulate(const Common& c, const SimulateArgs& args)
{
    const ExperimentConfig config = resolve_config(c);
    const synth::ScenePhantom phantom = phantom_for(config, args.energy);
    const int frames = args.frames.value_or(config.frames);
    const ExecutionOptions exec{c.threads};
    synth::FrameStack stack;
    if (args.kind == "difference")
    {
        stack = synth::generate_difference_stack(phantom, frames, config.seed, exec);
    }
    else
    {
        const auto kind = args.kind == "incident" ? synth::StackKind::Incident : synth::StackKind::Scattered;
        stack = synth::generate_stack(phantom, frames, kind, config.seed, exec);
    }
    io::write_stack(out_dir(c) / "stack.evls", stack);
    return 0;
}

struct ReduceArgs
{
    std::string input;
    int interface_col = 32;
    int rows = 1000;
    int max_shift = 0;
    std::optional<double> x_min;
    std::optional<double> x_max;
};

int cmd_reduce(const Common& c, const ReduceArgs& args)
{
    const synth::FrameStack stack = io::read_stack(args.input);
    reduce::PipelineOptions options;
    options.interface_col = args.interface_col;
    options.rows = args.rows;
    options.max_shift = args.max_shift;
    if (args.x_min || args.x_max)
    {
        if (!args.x_min || !args.x_max)
        {
            throw DomainError("--x-min and --x-max must be given together");
        }
        options.window = reduce::FitWindow{Length(*args.x_min), Length(*args.x_max)};
    }
    const reduce::StackAnalysis a = reduce::analyze_stack(stack, options);
    nlohmann::json j = to_json(a.fit);
    j["schema_version"] = output_schema_version;
    j["input"] = fs::path(args.input).filename().string();
    j["command_line"] = c.command_line;
    j["frames"] = stack.size();
    j["alignment_skipped"] = a.alignment_skipped;
    const fs::path dir = out_dir(c);
    write_text(dir / "fit.json", j.dump(2) + "\n");
    write_text(dir / "profile.csv", profile_csv(a.profile, "none"));
    return 0;
}

struct FitLawArgs
{
    std::string input;
    double threshold = 5.0;
};

int cmd_fit_law(const Common& c, const FitLawArgs& args)
{
    const lawfit::DecaySeries series = load_series(args.input);
    const lawfit::LawFitResult r = lawfit::discriminate(series, {args.threshold});
    nlohmann::json j = to_json(r);
    j["schema_version"] = output_schema_version;
    j["input"] = fs::path(args.input).filename().string();
    j["command_line"] = c.command_line;
    j["points"] = series.size();
    write_text(out_dir(c) / "lawfit.json", j.dump(2) + "\n");
    return 0;
}

struct MultisliceArgs
{
    multislice::ControlConfig config;
    double voltage_kv = 300.0;
    double thickness = 20.0;
    double edge_width = 0.2;
};

int cmd_multislice(const Common& c, MultisliceArgs args)
{
    args.config.voltage = Voltage(args.voltage_kv * 1000.0);
    args.config.thickness = Length(args.thickness);
    args.config.edge_width = Length(args.edge_width);
    const multislice::ControlResult r = multislice::run_control(args.config);
    const ControlSummary s = summarize_control(r, args.config);
    const fs::path dir = out_dir(c);
    nlohmann::json j = to_json(s);
    j["schema_version"] = output_schema_version;
    j["command_line"] = c.command_line;
    write_text(dir / "control.json", j.dump(2) + "\n");
    write_text(dir / "defocus_scan.csv", scan_csv(r.scan, "none"));
    io::write_image(dir / "detector.evls", {r.detector_image, r.detector_pixel_size, Energy(0.0)});
    return 0;
}

int cmd_reproduce(const Common& c)
{
    const ExperimentConfig config = resolve_config(c);
    Timing timing;
    const RunReport report = run_reproduce(config, ExecutionOptions{c.threads}, &timing);
    const lawfit::DecaySeries series = series_of(report);
    const std::string fig4a = render_fig4a(series, report.law);
    const std::string fig4b = render_fig4b(series, report.curves);

    nlohmann::json law = to_json(report.law);
    law["schema_version"] = output_schema_version;
    law["config_hash"] = report.config_hash;
    nlohmann::json full = to_json(report);
    full["config"] = to_json(config);

    const fs::path dir = out_dir(c);
    write_text(dir / "curves.csv", curves_csv(report.curves, report.config_hash));
    write_text(dir / "series.csv", series_csv(series, report.config_hash));
    write_text(dir / "lawfit.json", law.dump(2) + "\n");
    write_text(dir / "report.json", full.dump(2) + "\n");
    write_text(dir / "fig4a.svg", "<!-- config_hash=" + report.config_hash + " -->\n" + fig4a);
    write_text(dir / "fig4b.svg", "<!-- config_hash=" + report.config_hash + " -->\n" + fig4b);
    if (report.control)
    {
        write_text(dir / "defocus_scan.csv", scan_csv(report.control->scan, report.config_hash));
    }
    write_text(dir / "timing.json", to_json(timing).dump(2) + "\n");

    std::cerr << "hbar_v = " << report.law.hbar_v.value() << " +- " << report.law.sigma_hbar_v.value()
              << " eV nm, v/c = " << report.law.v_over_c << ", preferred " << lawfit::to_string(report.law.preferred_model)
              << ", " << timing.total << " s\n";
    return 0;
}

} // namespace

int run_command(int argc, const char* const* argv)
{
    CLI::App app{"Evanescent-field decay analysis: simulation, reduction and law fitting"};
    app.name("evfield");
    app.require_subcommand(1);

    Common common;
    for (int i = 0; i < argc; ++i)
    {
        common.command_line += (i ? " " : "") + std::string(argv[i]);
    }
    SimulateArgs simulate;
    ReduceArgs reduce_args;
    FitLawArgs fit_law;
    MultisliceArgs ms;

    auto* curves = app.add_subcommand("curves", "tabulate model lengths to curves.csv");
    add_common(curves, common, true, false);

    auto* sim = app.add_subcommand("simulate", "generate a synthetic stack to stack.evls");
    add_common(sim, common, true, true);
    sim->add_option("--energy", simulate.energy, "energy loss in eV")->check(CLI::PositiveNumber);
    sim->add_option("--kind", simulate.kind, "difference, incident or scattered")
        ->check(CLI::IsMember({"difference", "incident", "scattered"}));
    sim->add_option("--frames", simulate.frames, "frame count (overrides the config)");

    auto* red = app.add_subcommand("reduce", "fit the decay of a stack to fit.json and profile.csv");
    add_common(red, common, false, false);
    red->add_option("--input", reduce_args.input, "stack file")->required()->check(CLI::ExistingFile);
    red->add_option("--interface-col", reduce_args.interface_col, "interface column");
    red->add_option("--rows", reduce_args.rows, "rows averaged along the interface");
    red->add_option("--max-shift", reduce_args.max_shift, "alignment search radius in px (0: off)");
    red->add_option("--x-min", reduce_args.x_min, "fit window start (nm)");
    red->add_option("--x-max", reduce_args.x_max, "fit window end (nm)");

    auto* law = app.add_subcommand("fit-law", "fit a decay series to lawfit.json");
    add_common(law, common, false, false);
    law->add_option("--input", fit_law.input, "series CSV")->required()->check(CLI::ExistingFile);
    law->add_option("--threshold", fit_law.threshold, "RSS ratio needed to prefer a law");

    auto* msl = app.add_subcommand("multislice", "elastic slab control run and defocus scan");
    add_common(msl, common, false, false);
    msl->add_option("--voltage-kv", ms.voltage_kv, "accelerating voltage in kV")->check(CLI::PositiveNumber);
    msl->add_option("--thickness", ms.thickness, "slab thickness in nm")->check(CLI::PositiveNumber);
    msl->add_option("--slices", ms.config.n_slices, "number of slices");
    msl->add_option("--nx", ms.config.nx, "grid width (power of two)");
    msl->add_option("--edge-width", ms.edge_width, "edge softening in nm");

    auto* rep = app.add_subcommand("reproduce", "full series pipeline with report and figures");
    add_common(rep, common, true, true);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e, std::cerr, std::cerr);
        return code == 0 ? 0 : 2;
    }

    try
    {
        if (curves->parsed())
        {
            return cmd_curves(common);
        }
        if (sim->parsed())
        {
            return cmd_simulate(common, simulate);
        }
        if (red->parsed())
        {
            return cmd_reduce(common, reduce_args);
        }
        if (law->parsed())
        {
            return cmd_fit_law(common, fit_law);
        }
        if (msl->parsed())
        {
            return cmd_multislice(common, ms);
        }
        return cmd_reproduce(common);
    }
    catch (const reduce::FitError& e)
    {
        std::cerr << "evfield: fit failed: " << e.what() << '\n';
    }
    catch (const std::exception& e)
    {
        std::cerr << "evfield: " << e.what() << '\n';
    }
    return 1;
}

} // namespace evfield::cli
