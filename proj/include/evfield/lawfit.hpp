#pragma once

#include <map>
#include <string>
#include <vector>

#include "evfield/units.hpp"

namespace evfield::lawfit {

struct SeriesPoint
{
    Energy delta_e;
    Length x_i;
    Length sigma;
    std::string condition; //!< illumination condition label; may be empty
};

//! Decay lengths measured over an energy-loss series.
struct DecaySeries
{
    std::vector<SeriesPoint> points;

    //! Distinct positive energies, positive sigmas.
    void validate() const;
    [[nodiscard]] std::size_t size() const { return points.size(); }
};

//! x_i = hbar_v / dE, regression through the origin.
struct ReciprocalFit
{
    double a = 0; //!< 1 / hbar_v in (eV*nm)^-1
    EnergyLength hbar_v;
    double v_over_c = 0;
    EnergyLength sigma_hbar_v;
    double chi2_reduced = 0;
    //! Diagnostic intercept mode only.
    bool with_intercept = false;
    Length intercept;
    Length sigma_intercept;
};

//! ln x_i = ln C - p ln dE
struct PowerLawFit
{
    double prefactor = 0; //!< nm * eV^p
    double exponent = 0;
    double sigma_exponent = 0;
};

enum class PreferredModel
{
    Reciprocal,
    Sqrt,
    Undecided,
};

struct DiscriminateOptions
{
    double threshold = 5.0; //!< RSS ratio needed to prefer a law
};

struct LawFitResult
{
    double a = 0;
    EnergyLength hbar_v;
    double v_over_c = 0;
    EnergyLength sigma_hbar_v;
    double chi2_reduced = 0;
    PowerLawFit powerlaw;
    double sqrt_prefactor = 0; //!< kappa' in x_i = kappa' / sqrt(dE), nm * eV^0.5
    double rss_reciprocal = 0;
    double rss_sqrt = 0;
    double rss_ratio = 0; //!< rss_sqrt / rss_reciprocal
    PreferredModel preferred_model = PreferredModel::Undecided;
};

ReciprocalFit fit_reciprocal(const DecaySeries& series, bool with_intercept = false);

//! One reciprocal fit per condition label.
std::map<std::string, ReciprocalFit> fit_reciprocal_by_condition(const DecaySeries& series);

PowerLawFit fit_powerlaw(const DecaySeries& series);

LawFitResult discriminate(const DecaySeries& series, const DiscriminateOptions& options = {});

const char* to_string(PreferredModel m);

} // namespace evfield::lawfit
