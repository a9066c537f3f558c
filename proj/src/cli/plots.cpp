#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>

#include "evfield/cli.hpp"
#include "evfield/error.hpp"

namespace evfield::cli {
namespace {

constexpr double width = 640;
constexpr double height = 480;
constexpr double left = 80;
constexpr double right = 30;
constexpr double top = 40;
constexpr double bottom = 60;

std::string f2(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string label(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

//! Maps data coordinates (optionally log10) onto the plot area.
struct Axes
{
    double x0, x1, y0, y1;
    bool log_x = false;
    bool log_y = false;

    [[nodiscard]] double px(double x) const
    {
        const double t = log_x ? (std::log10(x) - std::log10(x0)) / (std::log10(x1) - std::log10(x0))
                               : (x - x0) / (x1 - x0);
        return left + t * (width - left - right);
    }
    [[nodiscard]] double py(double y) const
    {
        const double t = log_y ? (std::log10(y) - std::log10(y0)) / (std::log10(y1) - std::log10(y0))
                               : (y - y0) / (y1 - y0);
        return height - bottom - t * (height - top - bottom);
    }
};

std::string open_svg(const std::string& title)
{
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + f2(width) + "\" height=\"" + f2(height)
           + "\" viewBox=\"0 0 " + f2(width) + ' ' + f2(height) + "\">\n"
           + "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
           + "<text x=\"" + f2(width / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" + title + "</text>\n";
}

std::string frame(const Axes& a, const std::string& xlabel, const std::string& ylabel)
{
    const double xl = a.px(a.x0);
    const double xr = a.px(a.x1);
    const double yb = a.py(a.y0);
    const double yt = a.py(a.y1);
    std::string s = "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n";
    s += "<rect x=\"" + f2(xl) + "\" y=\"" + f2(yt) + "\" width=\"" + f2(xr - xl) + "\" height=\"" + f2(yb - yt) + "\"/>\n";
    s += "</g>\n";
    s += "<text x=\"" + f2((xl + xr) / 2) + "\" y=\"" + f2(height - 15) + "\" text-anchor=\"middle\" font-size=\"14\">"
         + xlabel + "</text>\n";
    s += "<text x=\"20\" y=\"" + f2((yb + yt) / 2) + "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 20 "
         + f2((yb + yt) / 2) + ")\">" + ylabel + "</text>\n";
    return s;
}

std::string x_tick(const Axes& a, double v)
{
    const double x = a.px(v);
    const double y = a.py(a.y0);
    return "<line class=\"tick\" x1=\"" + f2(x) + "\" y1=\"" + f2(y) + "\" x2=\"" + f2(x) + "\" y2=\"" + f2(y + 5)
           + "\" stroke=\"black\"/>\n<text x=\"" + f2(x) + "\" y=\"" + f2(y + 20)
           + "\" text-anchor=\"middle\" font-size=\"12\">" + label(v) + "</text>\n";
}

std::string y_tick(const Axes& a, double v)
{
    const double x = a.px(a.x0);
    const double y = a.py(v);
    return "<line class=\"tick\" x1=\"" + f2(x - 5) + "\" y1=\"" + f2(y) + "\" x2=\"" + f2(x) + "\" y2=\"" + f2(y)
           + "\" stroke=\"black\"/>\n<text x=\"" + f2(x - 8) + "\" y=\"" + f2(y + 4)
           + "\" text-anchor=\"end\" font-size=\"12\">" + label(v) + "</text>\n";
}

double nice_step(double span)
{
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0})
    {
        if (m * mag >= raw)
        {
            return m * mag;
        }
    }
    return 10.0 * mag;
}

std::string polyline(const Axes& a,
                     const std::vector<double>& xs,
                     const std::vector<double>& ys,
                     const std::string& cls,
                     const std::string& style)
{
    std::string pts;
    for (std::size_t i = 0; i < xs.size(); ++i)
    {
        if (ys[i] <= 0.0 && a.log_y)
        {
            continue;
        }
        if (!pts.empty())
        {
            pts += ' ';
        }
        pts += f2(a.px(xs[i])) + ',' + f2(a.py(ys[i]));
    }
    return "<polyline class=\"" + cls + "\" fill=\"none\" " + style + " points=\"" + pts + "\"/>\n";
}

std::string legend_entry(int index, const std::string& text, const std::string& style)
{
    const double y = top + 20 + 18 * index;
    const double x = width - right - 170;
    return "<line x1=\"" + f2(x) + "\" y1=\"" + f2(y) + "\" x2=\"" + f2(x + 25) + "\" y2=\"" + f2(y) + "\" " + style
           + "/>\n<text x=\"" + f2(x + 32) + "\" y=\"" + f2(y + 4) + "\" font-size=\"12\">" + text + "</text>\n";
}

void require_points(const lawfit::DecaySeries& series)
{
    if (series.points.empty())
    {
        throw DataError("cannot plot an empty series");
    }
}

} // namespace

std::string render_fig4a(const lawfit::DecaySeries& series, const lawfit::LawFitResult& law)
{
    require_points(series);
    double e_max = 0;
    double y_max = 0;
    double e_min = series.points.front().delta_e.value();
    for (const auto& p : series.points)
    {
        e_max = std::max(e_max, p.delta_e.value());
        e_min = std::min(e_min, p.delta_e.value());
        y_max = std::max(y_max, p.x_i.value() + p.sigma.value());
    }
    const double x_step = nice_step(e_max * 1.1);
    const double y_step = nice_step(y_max * 1.1);
    Axes a{0.0, std::ceil(e_max * 1.1 / x_step) * x_step, 0.0, std::ceil(y_max * 1.1 / y_step) * y_step};

    std::string s = open_svg("Decay length vs energy loss");
    s += frame(a, "energy loss (eV)", "decay length x_i (nm)");
    for (double v = 0; v <= a.x1 + 1e-9; v += x_step)
    {
        s += x_tick(a, v);
    }
    for (double v = 0; v <= a.y1 + 1e-9; v += y_step)
    {
        s += y_tick(a, v);
    }

    const double hv = law.hbar_v.value();
    if (hv > 0.0)
    {
        std::vector<double> xs;
        std::vector<double> ys;
        const double lo = std::max(hv / a.y1, e_min * 0.5);
        for (int i = 0; i <= 200; ++i)
        {
            const double e = lo + (a.x1 - lo) * i / 200.0;
            xs.push_back(e);
            ys.push_back(hv / e);
        }
        s += polyline(a, xs, ys, "fit", "stroke=\"black\" stroke-width=\"2\"");
        s += legend_entry(0, "fit hbar*v = " + label(std::round(hv * 100) / 100) + " eV nm",
                          "stroke=\"black\" stroke-width=\"2\"");
    }

    s += "<g class=\"points\">\n";
    for (const auto& p : series.points)
    {
        const double x = a.px(p.delta_e.value());
        const double ylo = a.py(std::max(0.0, p.x_i.value() - p.sigma.value()));
        const double yhi = a.py(p.x_i.value() + p.sigma.value());
        s += "<line class=\"errorbar\" x1=\"" + f2(x) + "\" y1=\"" + f2(ylo) + "\" x2=\"" + f2(x) + "\" y2=\""
             + f2(yhi) + "\" stroke=\"black\"/>\n";
        s += "<circle class=\"data\" cx=\"" + f2(x) + "\" cy=\"" + f2(a.py(p.x_i.value()))
             + "\" r=\"4\" fill=\"white\" stroke=\"black\"/>\n";
    }
    s += "</g>\n</svg>\n";
    return s;
}

std::string render_fig4b(const lawfit::DecaySeries& series, const physics::ModelCurveSet& curves)
{
    require_points(series);
    if (curves.size() == 0)
    {
        throw DataError("cannot plot empty model curves");
    }

    std::vector<double> inv;
    for (const Energy& e : curves.grid)
    {
        inv.push_back(1.0 / e.value());
    }
    struct Curve
    {
        const std::vector<Length>* values;
        const char* cls;
        const char* name;
        const char* style;
    };
    const Curve list[] = {
        {&curves.l_s, "l_s", "l_s self-coherence", "stroke=\"black\" stroke-width=\"3\""},
        {&curves.l_e, "l_e", "l_e Goos-Haenchen", "stroke=\"#1f77b4\" stroke-width=\"1.5\""},
        {&curves.l_t, "l_t", "l_t tunneling", "stroke=\"#d62728\" stroke-width=\"1.5\""},
        {&curves.x_i_fit, "x_i_fit", "x_i fit", "stroke=\"#2ca02c\" stroke-width=\"1.5\""},
        {&curves.x_ic, "x_ic", "x_ic light speed", "stroke=\"gray\" stroke-width=\"1.5\" stroke-dasharray=\"6 3\""},
    };

    double lo = std::numeric_limits<double>::infinity();
    double hi = 0;
    for (const Curve& c : list)
    {
        for (const Length& v : *c.values)
        {
            if (v.value() > 0.0)
            {
                lo = std::min(lo, v.value());
                hi = std::max(hi, v.value());
            }
        }
    }
    for (const auto& p : series.points)
    {
        lo = std::min(lo, p.x_i.value());
        hi = std::max(hi, p.x_i.value());
    }
    const auto [inv_lo, inv_hi] = std::ranges::minmax(inv);
    Axes a{std::pow(10.0, std::floor(std::log10(inv_lo))),
           std::pow(10.0, std::ceil(std::log10(inv_hi))),
           std::pow(10.0, std::floor(std::log10(lo))),
           std::pow(10.0, std::ceil(std::log10(hi))),
           true,
           true};

    std::string s = open_svg("Coherence and decay lengths vs reciprocal energy loss");
    s += frame(a, "1 / energy loss (1/eV)", "length (nm)");
    for (double v = a.x0; v <= a.x1 * 1.0001; v *= 10.0)
    {
        s += x_tick(a, v);
    }
    for (double v = a.y0; v <= a.y1 * 1.0001; v *= 10.0)
    {
        s += y_tick(a, v);
    }

    int entry = 0;
    for (const Curve& c : list)
    {
        std::vector<double> ys;
        for (const Length& v : *c.values)
        {
            ys.push_back(v.value());
        }
        s += polyline(a, inv, ys, c.cls, c.style);
        s += legend_entry(entry++, c.name, c.style);
    }

    s += "<g class=\"points\">\n";
    for (const auto& p : series.points)
    {
        s += "<circle class=\"data\" cx=\"" + f2(a.px(1.0 / p.delta_e.value())) + "\" cy=\"" + f2(a.py(p.x_i.value()))
             + "\" r=\"4\" fill=\"white\" stroke=\"black\"/>\n";
    }
    s += "</g>\n</svg>\n";
    return s;
}

} // namespace evfield::cli
