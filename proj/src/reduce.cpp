#include "evfield/reduce.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "evfield/error.hpp"
#include "evfield/fft.hpp"

namespace evfield::reduce {
namespace {

using synth::Frame;
using synth::FrameShift;
using synth::FrameStack;

//! Zero-mean spectrum of a real grid; false if the grid is constant.
bool spectrum_of(std::span<const double> values, Fft2D& fft, std::vector<Complex>& out)
{
    const auto [lo, hi] = std::ranges::minmax(values);
    if (lo == hi)
    {
        return false;
    }
    out.assign(values.begin(), values.end());
    fft.forward(out);
    out[0] = 0.0;
    return true;
}

Grid<std::int32_t> shifted(const Grid<std::int32_t>& src, FrameShift s)
{
    Grid<std::int32_t> out(src.width, src.height, 0);
    for (int r = 0; r < src.height; ++r)
    {
        const int sr = r - s.dy;
        if (sr < 0 || sr >= src.height)
        {
            continue;
        }
        for (int c = 0; c < src.width; ++c)
        {
            const int sc = c - s.dx;
            if (sc >= 0 && sc < src.width)
            {
                out(r, c) = src(sr, sc);
            }
        }
    }
    return out;
}

//! Candidate shifts ordered by L1 norm so ties resolve toward no motion.
std::vector<FrameShift> candidate_shifts(int max_shift)
{
    std::vector<FrameShift> out;
    for (int dy = -max_shift; dy <= max_shift; ++dy)
    {
        for (int dx = -max_shift; dx <= max_shift; ++dx)
        {
            out.push_back({dy, dx});
        }
    }
    std::ranges::stable_sort(out, {}, [](FrameShift s) { return std::abs(s.dy) + std::abs(s.dx); });
    return out;
}

int wrap(int i, int n) { return ((i % n) + n) % n; }

} // namespace

bool AlignResult::any_skipped() const
{
    return std::ranges::any_of(skipped, [](bool b) { return b; });
}

AlignResult align_stack(const FrameStack& stack, int max_shift)
{
    if (stack.empty())
    {
        throw DataError("align_stack: empty stack");
    }
    if (max_shift < 0)
    {
        throw DomainError("align_stack: max_shift must be non-negative");
    }
    AlignResult result;
    result.shifts.assign(stack.size(), {});
    result.skipped.assign(stack.size(), false);
    if (max_shift == 0 || stack.size() == 1)
    {
        result.stack = stack;
        return result;
    }

    const int nx = stack.geometry.width;
    const int ny = stack.geometry.height;
    max_shift = std::min({max_shift, (nx - 1) / 2, (ny - 1) / 2});
    const auto candidates = candidate_shifts(max_shift);

    result.stack.geometry = stack.geometry;
    result.stack.kind = stack.kind;
    result.stack.phantom = stack.phantom;
    result.stack.frames.reserve(stack.size());

    Fft2D fft(nx, ny);
    std::vector<double> reference(stack.frames[0].counts.data.begin(), stack.frames[0].counts.data.end());
    std::vector<double> current(reference.size());
    std::vector<Complex> ref_spec, cur_spec;
    result.stack.frames.push_back(stack.frames[0]);

    for (std::size_t f = 1; f < stack.size(); ++f)
    {
        const Frame& frame = stack.frames[f];
        std::ranges::copy(frame.counts.data, current.begin());
        FrameShift best{};
        const bool usable = spectrum_of(reference, fft, ref_spec)
                            && spectrum_of(current, fft, cur_spec);
        if (!usable)
        {
            result.skipped[f] = true;
        }
        else
        {
            // c(s) = sum_q frame(q) ref(q + s) = IFFT(conj(F) R)(s)
            for (std::size_t i = 0; i < cur_spec.size(); ++i)
            {
                cur_spec[i] = std::conj(cur_spec[i]) * ref_spec[i];
            }
            fft.backward(cur_spec);
            double best_score = -std::numeric_limits<double>::infinity();
            for (FrameShift s : candidates)
            {
                const double score = cur_spec[static_cast<std::size_t>(wrap(s.dy, ny)) * nx + wrap(s.dx, nx)].real();
                if (score > best_score)
                {
                    best_score = score;
                    best = s;
                }
            }
        }

        Frame aligned = frame;
        if (best.dx != 0 || best.dy != 0)
        {
            aligned.counts = shifted(frame.counts, best);
        }
        for (std::size_t i = 0; i < reference.size(); ++i)
        {
            reference[i] += aligned.counts.data[i];
        }
        result.shifts[f] = best;
        result.stack.frames.push_back(std::move(aligned));
    }
    return result;
}

Grid<double> average_stack(const FrameStack& stack)
{
    if (stack.empty())
    {
        throw DataError("average_stack: empty stack");
    }
    const std::size_t n = stack.frames[0].counts.size();
    std::vector<std::int64_t> sum(n, 0);
    for (const Frame& f : stack.frames)
    {
        if (f.counts.size() != n)
        {
            throw DataError("average_stack: frames differ in size");
        }
        for (std::size_t i = 0; i < n; ++i)
        {
            sum[i] += f.counts.data[i];
        }
    }
    Grid<double> mean(stack.frames[0].counts.width, stack.frames[0].counts.height);
    const auto count = static_cast<double>(stack.size());
    for (std::size_t i = 0; i < n; ++i)
    {
        mean.data[i] = static_cast<double>(sum[i]) / count;
    }
    return mean;
}

LineProfile extract_profile(const Grid<double>& mean_frame,
                            int interface_col,
                            RowRange rows,
                            Length pixel_size,
                            int frames_averaged)
{
    if (rows.end - rows.begin < 1)
    {
        throw DataError("extract_profile: empty row range");
    }
    if (rows.end - rows.begin < 2 || rows.begin < 0 || rows.end > mean_frame.height)
    {
        throw DomainError("extract_profile: row range must hold 2..height rows inside the frame");
    }
    if (interface_col < 0 || interface_col >= mean_frame.width)
    {
        throw DomainError("extract_profile: interface column outside the frame");
    }
    if (!(pixel_size.value() > 0.0))
    {
        throw DomainError("extract_profile: pixel size must be positive");
    }

    const int n_rows = rows.end - rows.begin;
    LineProfile p;
    p.rows_averaged = n_rows;
    p.frames_averaged = frames_averaged;
    for (int c = interface_col; c < mean_frame.width; ++c)
    {
        double sum = 0.0;
        for (int r = rows.begin; r < rows.end; ++r)
        {
            sum += mean_frame(r, c);
        }
        const double mean = sum / n_rows;
        double ss = 0.0;
        for (int r = rows.begin; r < rows.end; ++r)
        {
            const double d = mean_frame(r, c) - mean;
            ss += d * d;
        }
        const double se = std::sqrt(ss / (n_rows - 1) / n_rows);
        p.x.push_back(pixel_size.value() * (c - interface_col));
        p.y.push_back(mean);
        p.sigma.push_back(se);
        p.zero_sigma = p.zero_sigma || se == 0.0;
    }
    return p;
}

namespace {

double window_threshold(const LineProfile& profile)
{
    if (profile.size() < 2)
    {
        throw DataError("default_window: profile too short");
    }
    const std::size_t tail_begin = profile.size() - std::max<std::size_t>(1, profile.size() / 4);
    std::vector<double> tail(profile.sigma.begin() + static_cast<std::ptrdiff_t>(tail_begin), profile.sigma.end());
    std::ranges::nth_element(tail, tail.begin() + static_cast<std::ptrdiff_t>(tail.size() / 2));
    return std::max(3.0 * tail[tail.size() / 2], 1e-4);
}

//! From one pixel into the vacuum up to the last point before level(i) drops under the threshold.
template <class Level>
FitWindow window_until(const LineProfile& profile, Length pixel_size, double threshold, Level level)
{
    const double x_min = pixel_size.value();
    std::size_t first = 0;
    while (first < profile.size() && profile.x[first] < x_min)
    {
        ++first;
    }
    if (first >= profile.size())
    {
        throw DataError("default_window: profile ends before the first vacuum pixel");
    }
    std::size_t last = first;
    while (last + 1 < profile.size() && level(last + 1) >= threshold)
    {
        ++last;
    }
    // Keep the minimum point count for a three-parameter fit with slack.
    last = std::max(last, std::min(profile.size() - 1, first + 4));
    return {Length(profile.x[first]), Length(profile.x[last])};
}

} // namespace

FitWindow default_window(const LineProfile& profile, Length pixel_size)
{
    return window_until(profile, pixel_size, window_threshold(profile),
                        [&](std::size_t i) { return profile.y[i]; });
}

FitWindow model_window(const LineProfile& profile, const DecayFit& fit, Length pixel_size)
{
    return window_until(profile, pixel_size, window_threshold(profile), [&](std::size_t i) {
        return fit.i0 * std::exp(-profile.x[i] / fit.x_i.value()) + fit.baseline;
    });
}

DecayFit fit_exponential(const LineProfile& profile, FitWindow window, const FitOptions& options)
{
    std::vector<double> xs, ys, sig;
    for (std::size_t i = 0; i < profile.size(); ++i)
    {
        if (profile.x[i] >= window.x_min.value() && profile.x[i] <= window.x_max.value())
        {
            xs.push_back(profile.x[i]);
            ys.push_back(profile.y[i]);
            sig.push_back(profile.sigma[i]);
        }
    }
    const std::size_t n = xs.size();
    DecayFit fit;
    fit.window = window;
    fit.points = static_cast<int>(n);
    if (n < 5)
    {
        throw FitError("fit_exponential: fewer than 5 points in window", fit);
    }

    // Weights
    double min_pos = std::numeric_limits<double>::infinity();
    for (double s : sig)
    {
        if (s > 0.0)
        {
            min_pos = std::min(min_pos, s);
        }
    }
    std::vector<double> w(n, 1.0);
    fit.unit_weights = !std::isfinite(min_pos);
    if (!fit.unit_weights)
    {
        for (std::size_t i = 0; i < n; ++i)
        {
            const double s = sig[i] > 0.0 ? sig[i] : min_pos;
            w[i] = 1.0 / (s * s);
        }
    }

    // Start values: baseline from the trailing fifth, then log-linear.
    const std::size_t tail = std::max<std::size_t>(1, n / 5);
    const double b0 = std::accumulate(ys.end() - static_cast<std::ptrdiff_t>(tail), ys.end(), 0.0)
                      / static_cast<double>(tail);
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    int above = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        const double d = ys[i] - b0;
        if (d <= 0.0)
        {
            continue;
        }
        ++above;
        const double lw = w[i] * d * d; // var(ln y) ~ sigma^2 / y^2
        const double ly = std::log(d);
        sw += lw;
        sx += lw * xs[i];
        sy += lw * ly;
        sxx += lw * xs[i] * xs[i];
        sxy += lw * xs[i] * ly;
    }
    if (above < 5)
    {
        throw FitError("fit_exponential: fewer than 5 points above the baseline estimate", fit);
    }
    const double det = sw * sxx - sx * sx;
    const double slope = det != 0.0 ? (sw * sxy - sx * sy) / det : 0.0;
    Eigen::Vector3d p;
    if (slope < 0.0)
    {
        p = {std::exp((sy - slope * sx) / sw), -1.0 / slope, b0};
    }
    else
    {
        p = {ys.front() - b0, xs.back() - xs.front(), b0};
    }

    const double y_scale = std::max(std::abs(*std::ranges::max_element(ys)), std::abs(*std::ranges::min_element(ys)));
    auto chi2_of = [&](const Eigen::Vector3d& q) {
        double c = 0.0;
        for (std::size_t i = 0; i < n; ++i)
        {
            const double r = ys[i] - (q[0] * std::exp(-xs[i] / q[1]) + q[2]);
            c += w[i] * r * r;
        }
        return c;
    };
    auto normal_equations = [&](const Eigen::Vector3d& q, Eigen::Matrix3d& a, Eigen::Vector3d& g) {
        a.setZero();
        g.setZero();
        for (std::size_t i = 0; i < n; ++i)
        {
            const double e = std::exp(-xs[i] / q[1]);
            const Eigen::Vector3d j(e, q[0] * e * xs[i] / (q[1] * q[1]), 1.0);
            const double r = ys[i] - (q[0] * e + q[2]);
            a.noalias() += w[i] * j * j.transpose();
            g.noalias() += w[i] * r * j;
        }
    };

    double chi2 = chi2_of(p);
    double lambda = 1e-3;
    bool converged = false;
    Eigen::Matrix3d a;
    Eigen::Vector3d g;
    int it = 0;
    for (; it < options.max_iterations && !converged; ++it)
    {
        normal_equations(p, a, g);
        Eigen::Matrix3d damped = a;
        for (int k = 0; k < 3; ++k)
        {
            damped(k, k) += lambda * a(k, k);
        }
        const Eigen::Vector3d step = damped.ldlt().solve(g);
        const Eigen::Vector3d scale(std::abs(p[0]), std::abs(p[1]), std::max(std::abs(p[2]), y_scale));
        const bool tiny = (step.array().abs() <= options.tolerance * scale.array()).all();

        const Eigen::Vector3d trial = p + step;
        const double chi2_trial = trial[1] > 0.0 && step.allFinite() ? chi2_of(trial)
                                                                      : std::numeric_limits<double>::infinity();
        if (chi2_trial <= chi2)
        {
            p = trial;
            chi2 = chi2_trial;
            lambda = std::max(lambda * 0.1, 1e-12);
        }
        else
        {
            lambda *= 10.0;
        }
        converged = tiny || lambda > 1e16;
    }

    normal_equations(p, a, g);
    const Eigen::Matrix3d cov = a.inverse();
    fit.i0 = p[0];
    fit.x_i = Length(p[1]);
    fit.baseline = p[2];
    fit.sigma_i0 = std::sqrt(std::max(cov(0, 0), 0.0));
    fit.sigma_x_i = Length(std::sqrt(std::max(cov(1, 1), 0.0)));
    fit.sigma_baseline = std::sqrt(std::max(cov(2, 2), 0.0));
    fit.chi2_reduced = chi2 / static_cast<double>(n - 3);
    fit.iterations = it;
    if (!converged)
    {
        throw FitError("fit_exponential: no convergence within the iteration limit", fit);
    }
    if (!(fit.x_i.value() > 0.0))
    {
        throw FitError("fit_exponential: non-positive decay length (model mismatch)", fit);
    }
    return fit;
}

StackAnalysis analyze_stack(const FrameStack& stack, const PipelineOptions& options)
{
    if (stack.empty())
    {
        throw DataError("analyze_stack: empty stack");
    }
    StackAnalysis out;
    Grid<double> mean;
    if (options.max_shift > 0)
    {
        AlignResult aligned = align_stack(stack, options.max_shift);
        out.shifts = std::move(aligned.shifts);
        out.alignment_skipped = aligned.any_skipped();
        mean = average_stack(aligned.stack);
    }
    else
    {
        out.shifts.assign(stack.size(), {});
        mean = average_stack(stack);
    }

    RowRange rows;
    if (options.row_range)
    {
        rows = *options.row_range;
    }
    else
    {
        const int n = std::min(options.rows, mean.height);
        rows = {(mean.height - n) / 2, (mean.height - n) / 2 + n};
    }
    out.profile = extract_profile(mean, options.interface_col, rows, stack.geometry.pixel_size,
                                  static_cast<int>(stack.size()));
    if (options.window)
    {
        out.fit = fit_exponential(out.profile, *options.window, options.fit);
        return out;
    }
    const DecayFit first = fit_exponential(out.profile, default_window(out.profile, stack.geometry.pixel_size),
                                           options.fit);
    out.fit = fit_exponential(out.profile, model_window(out.profile, first, stack.geometry.pixel_size), options.fit);
    return out;
}

DoseReport dose_independence_check(const FrameStack& stack, double fraction, const PipelineOptions& options)
{
    if (!(fraction > 0.0) || fraction > 1.0)
    {
        throw DomainError("dose_independence_check: fraction must lie in (0, 1]");
    }
    const auto n_sub = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(stack.size()) + 1e-9));
    if (n_sub < 1)
    {
        throw DataError("dose_independence_check: subsample has no frames");
    }
    const StackAnalysis full = analyze_stack(stack, options);
    StackAnalysis sub;
    try
    {
        sub = analyze_stack(leading_frames(stack, n_sub), options);
    }
    catch (const FitError& e)
    {
        throw DataError(std::string("dose_independence_check: subsample too small to fit: ") + e.what());
    }

    DoseReport r;
    r.frames_full = stack.size();
    r.frames_sub = n_sub;
    r.x_i_full = full.fit.x_i;
    r.x_i_sub = sub.fit.x_i;
    r.sigma_full = full.fit.sigma_x_i;
    r.sigma_sub = sub.fit.sigma_x_i;
    r.combined_sigma = Length(std::hypot(r.sigma_full.value(), r.sigma_sub.value()));
    r.consistent = std::abs((r.x_i_full - r.x_i_sub).value()) < 3.0 * r.combined_sigma.value();
    return r;
}

} // namespace evfield::reduce
