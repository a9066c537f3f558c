#include "evfield/multislice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "evfield/error.hpp"
#include "evfield/physics.hpp"

namespace evfield::multislice {
namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

void check_grid(int nx, int ny, Length pixel_size)
{
    if (!power_of_two(nx) || !power_of_two(ny))
    {
        throw DomainError("wave field dimensions must be powers of two");
    }
    if (!(pixel_size.value() > 0.0))
    {
        throw DomainError("pixel size must be positive");
    }
}

std::vector<double> row_mean(const Grid<double>& image)
{
    std::vector<double> out(static_cast<std::size_t>(image.width), 0.0);
    for (int r = 0; r < image.height; ++r)
    {
        const auto row = image.row(r);
        for (int c = 0; c < image.width; ++c)
        {
            out[static_cast<std::size_t>(c)] += row[static_cast<std::size_t>(c)];
        }
    }
    for (double& v : out)
    {
        v /= image.height;
    }
    return out;
}

double mean_over(const std::vector<double>& v, int begin, int end)
{
    begin = std::clamp(begin, 0, static_cast<int>(v.size()));
    end = std::clamp(end, begin, static_cast<int>(v.size()));
    if (end == begin)
    {
        return v.empty() ? 0.0 : v[static_cast<std::size_t>(std::min(begin, static_cast<int>(v.size()) - 1))];
    }
    double s = 0.0;
    for (int i = begin; i < end; ++i)
    {
        s += v[static_cast<std::size_t>(i)];
    }
    return s / (end - begin);
}

std::vector<bool> band_limit_mask(int nx, int ny, Length pixel_size)
{
    const double k_max = (2.0 / 3.0) * 0.5 / pixel_size.value();
    std::vector<bool> mask(static_cast<std::size_t>(nx) * ny);
    for (int r = 0; r < ny; ++r)
    {
        const double ky = fft_frequency(r, ny, pixel_size.value());
        for (int c = 0; c < nx; ++c)
        {
            const double kx = fft_frequency(c, nx, pixel_size.value());
            mask[static_cast<std::size_t>(r) * nx + c] = kx * kx + ky * ky <= k_max * k_max;
        }
    }
    return mask;
}

} // namespace

WaveField WaveField::plane_wave(int nx, int ny, Length pixel_size, Length wavelength)
{
    check_grid(nx, ny, pixel_size);
    WaveField w;
    w.nx = nx;
    w.ny = ny;
    w.pixel_size = pixel_size;
    w.wavelength = wavelength;
    w.amplitude.assign(static_cast<std::size_t>(nx) * ny, Complex(1.0, 0.0));
    return w;
}

double WaveField::total_intensity() const
{
    double s = 0.0;
    for (const Complex& c : amplitude)
    {
        s += std::norm(c);
    }
    return s * pixel_size.value() * pixel_size.value();
}

Grid<double> WaveField::intensity() const
{
    Grid<double> out(nx, ny);
    for (std::size_t i = 0; i < amplitude.size(); ++i)
    {
        out.data[i] = std::norm(amplitude[i]);
    }
    return out;
}

void WaveField::validate() const
{
    check_grid(nx, ny, pixel_size);
    if (!(wavelength.value() > 0.0))
    {
        throw DomainError("wavelength must be positive");
    }
    if (amplitude.size() != static_cast<std::size_t>(nx) * ny)
    {
        throw DataError("wave field storage does not match its dimensions");
    }
}

void SlabPhantom::validate() const
{
    if (n_slices < 1)
    {
        throw DomainError("slab needs at least one slice");
    }
    if (!(thickness.value() > 0.0))
    {
        throw DomainError("slab thickness must be positive");
    }
    if (edge_col < 0 || edge_width.value() < 0.0)
    {
        throw DomainError("slab edge column and width must be non-negative");
    }
}

std::vector<double> SlabPhantom::potential(int nx, Length pixel_size) const
{
    std::vector<double> v(static_cast<std::size_t>(nx), 0.0);
    if (edge_col >= nx)
    {
        std::ranges::fill(v, inner_potential);
        return v;
    }
    const double px = pixel_size.value();
    const double length = nx * px;
    const double x_edge = edge_col * px;
    const double w = edge_width.value();
    for (int c = 0; c < nx; ++c)
    {
        const double x = c * px;
        // Signed distance outside the slab (negative inside), periodic in x.
        const double d = x < x_edge ? -std::min(x_edge - x, x + px) : std::min(x - x_edge, length - x - px);
        if (w > 0.0)
        {
            v[static_cast<std::size_t>(c)] = inner_potential * 0.5 * std::erfc(d / w);
        }
        else
        {
            v[static_cast<std::size_t>(c)] = d < 0.0 ? inner_potential : 0.0;
        }
    }
    return v;
}

std::vector<Complex> fresnel_propagator(int nx, int ny, Length pixel_size, Length wavelength, Length dz)
{
    if (pixel_size.value() == 0.0)
    {
        throw DomainError("pixel size must be non-zero");
    }
    check_grid(nx, ny, pixel_size);
    std::vector<Complex> kernel(static_cast<std::size_t>(nx) * ny);
    const double factor = -std::numbers::pi * wavelength.value() * dz.value();
    for (int r = 0; r < ny; ++r)
    {
        const double ky = fft_frequency(r, ny, pixel_size.value());
        for (int c = 0; c < nx; ++c)
        {
            const double kx = fft_frequency(c, nx, pixel_size.value());
            kernel[static_cast<std::size_t>(r) * nx + c] = std::polar(1.0, factor * (kx * kx + ky * ky));
        }
    }
    return kernel;
}

void propagate(WaveField& field, Length dz)
{
    field.validate();
    if (dz.value() == 0.0)
    {
        return;
    }
    const auto kernel = fresnel_propagator(field.nx, field.ny, field.pixel_size, field.wavelength, dz);
    Fft2D fft(field.nx, field.ny);
    fft.forward(field.amplitude);
    for (std::size_t i = 0; i < kernel.size(); ++i)
    {
        field.amplitude[i] *= kernel[i];
    }
    fft.backward(field.amplitude);
}

WaveField multislice_exit_wave(const WaveField& incident, const SlabPhantom& slab)
{
    incident.validate();
    slab.validate();

    const Length dz = slab.thickness / static_cast<double>(slab.n_slices);
    const auto potential = slab.potential(incident.nx, incident.pixel_size);
    std::vector<Complex> transmission(potential.size());
    for (std::size_t c = 0; c < potential.size(); ++c)
    {
        transmission[c] = std::polar(1.0, slab.interaction_constant * potential[c] * dz.value());
    }
    auto kernel = fresnel_propagator(incident.nx, incident.ny, incident.pixel_size, incident.wavelength, dz);
    const auto mask = band_limit_mask(incident.nx, incident.ny, incident.pixel_size);
    for (std::size_t i = 0; i < kernel.size(); ++i)
    {
        if (!mask[i])
        {
            kernel[i] = 0.0;
        }
    }

    WaveField psi = incident;
    Fft2D fft(psi.nx, psi.ny);
    for (int s = 0; s < slab.n_slices; ++s)
    {
        for (int r = 0; r < psi.ny; ++r)
        {
            for (int c = 0; c < psi.nx; ++c)
            {
                psi(r, c) *= transmission[static_cast<std::size_t>(c)];
            }
        }
        fft.forward(psi.amplitude);
        for (std::size_t i = 0; i < kernel.size(); ++i)
        {
            psi.amplitude[i] *= kernel[i];
        }
        fft.backward(psi.amplitude);
    }
    return psi;
}

Grid<double> apply_defocus(const WaveField& exit, Length defocus)
{
    WaveField w = exit;
    propagate(w, -defocus);
    return w.intensity();
}

Grid<double> bin_columns(const Grid<double>& image, int factor)
{
    if (factor < 1 || image.width % factor != 0)
    {
        throw DomainError("binning factor must divide the image width");
    }
    Grid<double> out(image.width / factor, image.height);
    for (int r = 0; r < image.height; ++r)
    {
        for (int c = 0; c < out.width; ++c)
        {
            double s = 0.0;
            for (int k = 0; k < factor; ++k)
            {
                s += image(r, c * factor + k);
            }
            out(r, c) = s / factor;
        }
    }
    return out;
}

EdgeMetrics edge_metrics(const Grid<double>& image, int edge_col, Length pixel_size)
{
    if (edge_col <= 0 || edge_col >= image.width)
    {
        throw DomainError("edge column must lie inside the image");
    }
    const auto profile = row_mean(image);
    const auto [lo, hi] = std::ranges::minmax(profile);
    if (lo == hi)
    {
        return {};
    }

    const double bulk = std::abs(edge_col >= 4 ? mean_over(profile, edge_col / 4, 3 * edge_col / 4)
                                               : mean_over(profile, 0, edge_col));
    const int span = image.width - edge_col;
    const double vacuum = mean_over(profile, edge_col + 3 * span / 8, edge_col + 5 * span / 8);

    EdgeMetrics m;
    const int f0 = std::max(0, edge_col - 20);
    const int f1 = std::min(image.width, edge_col + 21);
    const auto [wlo, whi] = std::minmax_element(profile.begin() + f0, profile.begin() + f1);
    m.fringe_amplitude = bulk > 0.0 ? (*whi - *wlo) / bulk : 0.0;

    int last = -1;
    for (int c = edge_col; c < edge_col + span / 2; ++c)
    {
        if (std::abs(profile[static_cast<std::size_t>(c)] - vacuum) > 0.01 * bulk)
        {
            last = c;
        }
    }
    m.tail_extent = last < 0 ? Length(0.0) : pixel_size * static_cast<double>(last - edge_col + 1);
    return m;
}

Length first_fringe_spacing(const Grid<double>& image, int edge_col, Length pixel_size)
{
    const auto profile = row_mean(image);
    const int n = static_cast<int>(profile.size());
    const int lo = std::max(1, edge_col - 40);
    const int hi = std::min(n - 2, edge_col + 40);
    if (lo >= hi)
    {
        throw DomainError("edge too close to the image border");
    }
    const int peak = static_cast<int>(std::max_element(profile.begin() + lo, profile.begin() + hi + 1) - profile.begin());
    const int dir = peak >= edge_col ? 1 : -1;
    bool passed_minimum = false;
    for (int i = peak + dir; i > 0 && i < n - 1; i += dir)
    {
        const double prev = profile[static_cast<std::size_t>(i - dir)];
        const double here = profile[static_cast<std::size_t>(i)];
        const double next = profile[static_cast<std::size_t>(i + dir)];
        if (!passed_minimum && here < prev && here <= next)
        {
            passed_minimum = true;
        }
        else if (passed_minimum && here > prev && here >= next)
        {
            return pixel_size * static_cast<double>(std::abs(i - peak));
        }
    }
    throw DomainError("no second fringe maximum found");
}

Length pendelloesung_thickness(Length period, double n_oscillations)
{
    if (!(period.value() > 0.0) || !(n_oscillations > 0.0))
    {
        throw DomainError("Pendelloesung period and oscillation count must be positive");
    }
    return period * n_oscillations;
}

double two_beam_intensity(Length thickness, Length extinction_distance)
{
    if (!(extinction_distance.value() > 0.0))
    {
        throw DomainError("extinction distance must be positive");
    }
    const double s = std::sin(std::numbers::pi * (thickness / extinction_distance));
    return s * s;
}

std::vector<Length> ControlConfig::default_scan()
{
    std::vector<Length> out;
    for (int df = -200; df <= 200; df += 25)
    {
        out.emplace_back(static_cast<double>(df));
    }
    return out;
}

const DefocusScanRow& ControlResult::best_focus() const
{
    if (scan.empty())
    {
        throw DataError("empty defocus scan");
    }
    return *std::ranges::min_element(scan, {}, &DefocusScanRow::fringe_amplitude);
}

ControlResult run_control(const ControlConfig& config)
{
    if (config.detector_binning < 1 || (config.nx / 2) % config.detector_binning != 0)
    {
        throw DomainError("detector binning must divide the half field width");
    }
    const auto beam = physics::beam_kinematics(config.voltage);
    WaveField incident = WaveField::plane_wave(config.nx, config.ny, config.sim_pixel_size, beam.wavelength);

    SlabPhantom slab;
    slab.inner_potential = config.inner_potential;
    slab.thickness = config.thickness;
    slab.n_slices = config.n_slices;
    slab.edge_col = config.nx / 2;
    slab.edge_width = config.edge_width;
    slab.interaction_constant = physics::interaction_constant(beam);

    const WaveField exit = multislice_exit_wave(incident, slab);

    ControlResult out;
    out.sim_edge_col = slab.edge_col;
    out.detector_edge_col = slab.edge_col / config.detector_binning;
    out.detector_pixel_size = config.sim_pixel_size * static_cast<double>(config.detector_binning);

    auto evaluate = [&](Length defocus, Grid<double>* keep) {
        const Grid<double> image = apply_defocus(exit, defocus);
        const Grid<double> detector = bin_columns(image, config.detector_binning);
        DefocusScanRow row;
        row.defocus = defocus;
        row.fringe_amplitude = edge_metrics(image, out.sim_edge_col, config.sim_pixel_size).fringe_amplitude;
        row.tail_extent = edge_metrics(detector, out.detector_edge_col, out.detector_pixel_size).tail_extent;
        if (keep)
        {
            *keep = detector;
        }
        return row;
    };

    const auto scan = config.defocus_scan.empty() ? ControlConfig::default_scan() : config.defocus_scan;
    for (Length df : scan)
    {
        out.scan.push_back(evaluate(df, nullptr));
    }
    const DefocusScanRow focus = evaluate(Length(0.0), &out.detector_image);
    out.at_focus = {focus.fringe_amplitude, focus.tail_extent};
    return out;
}

} // namespace evfield::multislice
