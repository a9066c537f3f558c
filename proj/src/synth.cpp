#include "evfield/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "evfield/error.hpp"
#include "evfield/rng.hpp"

namespace evfield::synth {
namespace {

void require_nonnegative(double v, const char* what)
{
    if (!(v >= 0.0) || !std::isfinite(v))
    {
        throw DomainError(std::string(what) + " must be finite and non-negative");
    }
}

//! Per-column sampler tables for one frame, honouring its column shift.
std::vector<rng::PoissonSampler> column_samplers(const ScenePhantom& p, StackKind kind, int dx)
{
    std::vector<rng::PoissonSampler> out;
    out.reserve(static_cast<std::size_t>(p.width_px));
    for (int col = 0; col < p.width_px; ++col)
    {
        const int src = std::clamp(col - dx, 0, p.width_px - 1);
        const double mu = kind == StackKind::Incident ? p.mu_background
                                                      : p.mu_background + p.model_mean(src);
        out.emplace_back(mu);
    }
    return out;
}

void fill_row(std::span<std::int32_t> row,
              const std::vector<rng::PoissonSampler>& samplers,
              rng::PhiloxStream& stream)
{
    for (std::size_t col = 0; col < row.size(); ++col)
    {
        row[col] = static_cast<std::int32_t>(samplers[col](stream));
    }
}

Geometry geometry_of(const ScenePhantom& p)
{
    return {p.width_px, p.height_px, p.pixel_size, p.delta_e};
}

void check_request(const ScenePhantom& phantom, int n_frames)
{
    phantom.validate();
    if (n_frames < 1)
    {
        throw DomainError("a stack needs at least one frame");
    }
}

} // namespace

void ScenePhantom::validate() const
{
    if (width_px < 2 || height_px < 1)
    {
        throw DomainError("phantom dimensions are too small");
    }
    if (!(pixel_size.value() > 0.0))
    {
        throw DomainError("pixel size must be positive");
    }
    if (interface_col <= 0 || interface_col >= width_px)
    {
        throw DomainError("interface column must lie strictly inside the frame");
    }
    require_nonnegative(mu_background, "background mean");
    require_nonnegative(mu_bulk, "bulk mean");
    require_nonnegative(mu_interface, "interface mean");
    if (!(decay.length.value() > 0.0))
    {
        throw DomainError("decay length must be positive");
    }
    const double worst = mu_background + std::max(mu_bulk, mu_interface);
    if (worst > rng::PoissonSampler::max_mean)
    {
        throw DomainError("phantom means exceed 2^31 counts per pixel");
    }
}

double ScenePhantom::vacuum_excess(Length x) const
{
    // Both models share the exponential form in x; they differ in how the
    // decay length scales with the energy loss.
    return mu_interface * std::exp(-x.value() / decay.length.value());
}

double ScenePhantom::model_mean(int col) const
{
    if (col < interface_col)
    {
        return mu_bulk;
    }
    return vacuum_excess(pixel_size * static_cast<double>(col - interface_col));
}

FrameShift ScenePhantom::shift_for(int frame) const
{
    if (frame >= 0 && static_cast<std::size_t>(frame) < frame_shifts.size())
    {
        return frame_shifts[static_cast<std::size_t>(frame)];
    }
    return {};
}

FrameStack generate_stack(const ScenePhantom& phantom,
                          int n_frames,
                          StackKind kind,
                          std::uint64_t seed,
                          const ExecutionOptions& exec)
{
    check_request(phantom, n_frames);
    if (kind != StackKind::Incident && kind != StackKind::Scattered)
    {
        throw DomainError("only incident or scattered stacks can be generated directly");
    }

    FrameStack stack;
    stack.geometry = geometry_of(phantom);
    stack.kind = kind;
    stack.phantom = phantom;
    stack.frames.resize(static_cast<std::size_t>(n_frames));

    parallel_for(stack.frames.size(), exec, [&](std::size_t f) {
        const int index = static_cast<int>(f);
        const FrameShift shift = phantom.shift_for(index);
        const auto samplers = column_samplers(phantom, kind, shift.dx);
        Frame& frame = stack.frames[f];
        frame.index = index;
        frame.seed = seed;
        frame.counts = Grid<std::int32_t>(phantom.width_px, phantom.height_px);
        for (int r = 0; r < phantom.height_px; ++r)
        {
            rng::PhiloxStream stream(seed, static_cast<std::uint32_t>(kind),
                                     static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(r));
            fill_row(frame.counts.row(r), samplers, stream);
        }
        // Row shifts move content along the interface; the phantom is
        // row-invariant, so only the realisation is displaced.
        if (shift.dy != 0)
        {
            Grid<std::int32_t> moved(phantom.width_px, phantom.height_px);
            for (int r = 0; r < phantom.height_px; ++r)
            {
                const int src = std::clamp(r - shift.dy, 0, phantom.height_px - 1);
                std::ranges::copy(frame.counts.row(src), moved.row(r).begin());
            }
            frame.counts = std::move(moved);
        }
    });
    return stack;
}

FrameStack generate_difference_stack(const ScenePhantom& phantom,
                                     int n_frames,
                                     std::uint64_t seed,
                                     const ExecutionOptions& exec)
{
    check_request(phantom, n_frames);
    if (!phantom.frame_shifts.empty())
    {
        // Shifted frames go through the two-stack path so both inputs see
        // the same displacement logic.
        return difference_stack(generate_stack(phantom, n_frames, StackKind::Scattered, seed, exec),
                                generate_stack(phantom, n_frames, StackKind::Incident, seed, exec));
    }

    FrameStack stack;
    stack.geometry = geometry_of(phantom);
    stack.kind = StackKind::Difference;
    stack.phantom = phantom;
    stack.frames.resize(static_cast<std::size_t>(n_frames));

    const auto incident = column_samplers(phantom, StackKind::Incident, 0);
    const auto scattered = column_samplers(phantom, StackKind::Scattered, 0);

    parallel_for(stack.frames.size(), exec, [&](std::size_t f) {
        const auto index = static_cast<std::uint32_t>(f);
        Frame& frame = stack.frames[f];
        frame.index = static_cast<int>(f);
        frame.seed = seed;
        frame.counts = Grid<std::int32_t>(phantom.width_px, phantom.height_px);
        std::vector<std::int32_t> background(static_cast<std::size_t>(phantom.width_px));
        for (int r = 0; r < phantom.height_px; ++r)
        {
            const auto block = static_cast<std::uint32_t>(r);
            rng::PhiloxStream s_scat(seed, static_cast<std::uint32_t>(StackKind::Scattered), index, block);
            rng::PhiloxStream s_inc(seed, static_cast<std::uint32_t>(StackKind::Incident), index, block);
            auto row = frame.counts.row(r);
            fill_row(row, scattered, s_scat);
            fill_row(background, incident, s_inc);
            for (std::size_t c = 0; c < row.size(); ++c)
            {
                row[c] -= background[c];
            }
        }
    });
    return stack;
}

FrameStack difference_stack(const FrameStack& scattered, const FrameStack& incident)
{
    if (scattered.geometry.width != incident.geometry.width
        || scattered.geometry.height != incident.geometry.height)
    {
        throw DataError("difference_stack: frame dimensions differ");
    }
    if (scattered.size() != incident.size())
    {
        throw DataError("difference_stack: frame counts differ");
    }
    FrameStack out;
    out.geometry = scattered.geometry;
    out.kind = StackKind::Difference;
    out.phantom = scattered.phantom;
    out.frames.reserve(scattered.size());
    for (std::size_t f = 0; f < scattered.size(); ++f)
    {
        Frame d = scattered.frames[f];
        const auto& sub = incident.frames[f].counts.data;
        for (std::size_t i = 0; i < d.counts.data.size(); ++i)
        {
            d.counts.data[i] -= sub[i];
        }
        out.frames.push_back(std::move(d));
    }
    return out;
}

FrameStack concatenate(const FrameStack& a, const FrameStack& b)
{
    if (a.geometry.width != b.geometry.width || a.geometry.height != b.geometry.height)
    {
        throw DataError("concatenate: frame dimensions differ");
    }
    if (a.kind != b.kind)
    {
        throw DataError("concatenate: stack kinds differ");
    }
    FrameStack out = a;
    for (const Frame& f : b.frames)
    {
        Frame copy = f;
        copy.index = static_cast<int>(out.frames.size());
        out.frames.push_back(std::move(copy));
    }
    return out;
}

FrameStack leading_frames(const FrameStack& stack, std::size_t count)
{
    if (count == 0 || count > stack.size())
    {
        throw DataError("leading_frames: invalid frame count");
    }
    FrameStack out;
    out.geometry = stack.geometry;
    out.kind = stack.kind;
    out.phantom = stack.phantom;
    out.frames.assign(stack.frames.begin(), stack.frames.begin() + static_cast<std::ptrdiff_t>(count));
    return out;
}

LossSpectrum gan_like_spectrum()
{
    LossSpectrum s;
    s.zero_loss_amplitude = 50.0;
    s.zero_loss_fwhm = Energy(0.6);
    s.peaks = {
        {Energy(7.0), Energy(4.0), 0.15},
        {Energy(19.4), Energy(8.0), 1.0},
    };
    return s;
}

double spectral_weight(Energy delta_e, const LossSpectrum& spectrum)
{
    if (delta_e.value() < 0.0)
    {
        throw DomainError("energy loss must be non-negative");
    }
    if (spectrum.zero_loss_amplitude < 0.0 || spectrum.zero_loss_fwhm.value() <= 0.0)
    {
        throw DomainError("zero-loss peak needs non-negative amplitude and positive width");
    }
    const double e = delta_e.value();
    const double sigma = spectrum.zero_loss_fwhm.value() / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
    double w = spectrum.zero_loss_amplitude * std::exp(-0.5 * (e / sigma) * (e / sigma));
    for (const SpectrumPeak& p : spectrum.peaks)
    {
        if (p.width.value() <= 0.0 || p.amplitude < 0.0)
        {
            throw DomainError("spectrum peaks need positive width and non-negative amplitude");
        }
        const double t = (e - p.center.value()) / (0.5 * p.width.value());
        w += p.amplitude / (1.0 + t * t);
    }
    return w;
}

} // namespace evfield::synth
