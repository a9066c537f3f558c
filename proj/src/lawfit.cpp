#include "evfield/lawfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "evfield/error.hpp"
#include "evfield/physics.hpp"

namespace evfield::lawfit {
namespace {

//! Points ordered by energy so every sum is order-independent.
std::vector<SeriesPoint> sorted(const DecaySeries& series)
{
    std::vector<SeriesPoint> pts = series.points;
    std::ranges::sort(pts, {}, [](const SeriesPoint& p) { return p.delta_e.value(); });
    return pts;
}

struct OriginFit
{
    double slope = 0;
    double sigma = 0;
    double rss = 0;
};

//! Weighted x = slope * u through the origin.
template <class Regressor>
OriginFit fit_through_origin(const std::vector<SeriesPoint>& pts, Regressor regressor)
{
    double suu = 0.0, sux = 0.0;
    for (const SeriesPoint& p : pts)
    {
        const double w = 1.0 / (p.sigma.value() * p.sigma.value());
        const double u = regressor(p.delta_e.value());
        suu += w * u * u;
        sux += w * u * p.x_i.value();
    }
    OriginFit f;
    f.slope = sux / suu;
    f.sigma = 1.0 / std::sqrt(suu);
    for (const SeriesPoint& p : pts)
    {
        const double r = (p.x_i.value() - f.slope * regressor(p.delta_e.value())) / p.sigma.value();
        f.rss += r * r;
    }
    return f;
}

} // namespace

void DecaySeries::validate() const
{
    for (const SeriesPoint& p : points)
    {
        if (!(p.delta_e.value() > 0.0) || !(p.sigma.value() > 0.0) || !std::isfinite(p.x_i.value()))
        {
            throw DomainError("series points need positive energy and sigma");
        }
    }
    std::vector<double> e;
    for (const SeriesPoint& p : points)
    {
        e.push_back(p.delta_e.value());
    }
    std::ranges::sort(e);
    if (std::ranges::adjacent_find(e) != e.end())
    {
        throw DomainError("series energies must be distinct");
    }
}

ReciprocalFit fit_reciprocal(const DecaySeries& series, bool with_intercept)
{
    if (series.size() < 3)
    {
        throw DomainError("fit_reciprocal needs at least 3 points");
    }
    series.validate();
    const auto pts = sorted(series);
    const auto inverse = [](double e) { return 1.0 / e; };

    ReciprocalFit out;
    out.with_intercept = with_intercept;
    double dof = static_cast<double>(pts.size()) - 1.0;
    if (!with_intercept)
    {
        const OriginFit f = fit_through_origin(pts, inverse);
        out.hbar_v = EnergyLength(f.slope);
        out.sigma_hbar_v = EnergyLength(f.sigma);
        out.chi2_reduced = f.rss / dof;
    }
    else
    {
        double sw = 0, su = 0, sx = 0, suu = 0, sux = 0;
        for (const SeriesPoint& p : pts)
        {
            const double w = 1.0 / (p.sigma.value() * p.sigma.value());
            const double u = inverse(p.delta_e.value());
            sw += w;
            su += w * u;
            sx += w * p.x_i.value();
            suu += w * u * u;
            sux += w * u * p.x_i.value();
        }
        const double det = sw * suu - su * su;
        const double slope = (sw * sux - su * sx) / det;
        const double icept = (suu * sx - su * sux) / det;
        double rss = 0.0;
        for (const SeriesPoint& p : pts)
        {
            const double r = (p.x_i.value() - icept - slope * inverse(p.delta_e.value())) / p.sigma.value();
            rss += r * r;
        }
        dof -= 1.0;
        out.hbar_v = EnergyLength(slope);
        out.sigma_hbar_v = EnergyLength(std::sqrt(sw / det));
        out.intercept = Length(icept);
        out.sigma_intercept = Length(std::sqrt(suu / det));
        out.chi2_reduced = rss / dof;
    }
    if (!(out.hbar_v.value() > 0.0))
    {
        throw DomainError("fit_reciprocal: non-positive hbar*v");
    }
    out.a = 1.0 / out.hbar_v.value();
    out.v_over_c = out.hbar_v.value() / physics::constants.hbar_c;
    return out;
}

std::map<std::string, ReciprocalFit> fit_reciprocal_by_condition(const DecaySeries& series)
{
    std::map<std::string, DecaySeries> groups;
    for (const SeriesPoint& p : series.points)
    {
        groups[p.condition].points.push_back(p);
    }
    std::map<std::string, ReciprocalFit> out;
    for (const auto& [label, group] : groups)
    {
        out.emplace(label, fit_reciprocal(group));
    }
    return out;
}

PowerLawFit fit_powerlaw(const DecaySeries& series)
{
    if (series.size() < 3)
    {
        throw DomainError("fit_powerlaw needs at least 3 points");
    }
    series.validate();
    double sw = 0, sl = 0, sy = 0, sll = 0, sly = 0;
    for (const SeriesPoint& p : sorted(series))
    {
        if (!(p.x_i.value() > 0.0))
        {
            throw DomainError("fit_powerlaw needs positive decay lengths");
        }
        const double s = p.sigma.value() / p.x_i.value();
        const double w = 1.0 / (s * s);
        const double l = std::log(p.delta_e.value());
        const double y = std::log(p.x_i.value());
        sw += w;
        sl += w * l;
        sy += w * y;
        sll += w * l * l;
        sly += w * l * y;
    }
    const double det = sw * sll - sl * sl;
    const double slope = (sw * sly - sl * sy) / det;
    const double icept = (sll * sy - sl * sly) / det;
    PowerLawFit out;
    out.exponent = -slope;
    out.prefactor = std::exp(icept);
    out.sigma_exponent = std::sqrt(sw / det);
    return out;
}

LawFitResult discriminate(const DecaySeries& series, const DiscriminateOptions& options)
{
    if (series.size() < 4)
    {
        throw DomainError("discriminate needs at least 4 points");
    }
    const ReciprocalFit recip = fit_reciprocal(series);
    const auto pts = sorted(series);
    const OriginFit inv = fit_through_origin(pts, [](double e) { return 1.0 / e; });
    const OriginFit root = fit_through_origin(pts, [](double e) { return 1.0 / std::sqrt(e); });

    LawFitResult out;
    out.a = recip.a;
    out.hbar_v = recip.hbar_v;
    out.v_over_c = recip.v_over_c;
    out.sigma_hbar_v = recip.sigma_hbar_v;
    out.chi2_reduced = recip.chi2_reduced;
    out.powerlaw = fit_powerlaw(series);
    out.sqrt_prefactor = root.slope;
    out.rss_reciprocal = inv.rss;
    out.rss_sqrt = root.rss;
    if (inv.rss > 0.0)
    {
        out.rss_ratio = root.rss / inv.rss;
    }
    else
    {
        out.rss_ratio = root.rss > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    }
    if (out.rss_ratio > options.threshold)
    {
        out.preferred_model = PreferredModel::Reciprocal;
    }
    else if (out.rss_ratio < 1.0 / options.threshold)
    {
        out.preferred_model = PreferredModel::Sqrt;
    }
    else
    {
        out.preferred_model = PreferredModel::Undecided;
    }
    return out;
}

const char* to_string(PreferredModel m)
{
    switch (m)
    {
    case PreferredModel::Reciprocal: return "RECIPROCAL";
    case PreferredModel::Sqrt: return "SQRT";
    case PreferredModel::Undecided: return "UNDECIDED";
    }
    return "UNDECIDED";
}

} // namespace evfield::lawfit
