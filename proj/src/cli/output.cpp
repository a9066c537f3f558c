#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "evfield/cli.hpp"
#include "evfield/error.hpp"

namespace evfield::cli {
namespace {

using nlohmann::json;

std::string sci(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return buf;
}

//! JSON has no infinities; they are written as null.
json number(double v)
{
    return std::isfinite(v) ? json(v) : json(nullptr);
}

std::string header_comment(const std::string& hash)
{
    return "# config_hash=" + hash + "\n";
}

std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, sep))
    {
        out.push_back(field);
    }
    if (!line.empty() && line.back() == sep)
    {
        out.emplace_back();
    }
    return out;
}

std::string trim(std::string s)
{
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, int line)
{
    try
    {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size())
        {
            throw std::invalid_argument(s);
        }
        return v;
    }
    catch (const std::exception&)
    {
        throw DataError("series line " + std::to_string(line) + ": '" + s + "' is not a number");
    }
}

} // namespace

json to_json(const reduce::DecayFit& f)
{
    return {
        {"i0", f.i0},
        {"x_i", f.x_i.value()},
        {"baseline", f.baseline},
        {"sigma_x_i", f.sigma_x_i.value()},
        {"sigma_i0", f.sigma_i0},
        {"sigma_baseline", f.sigma_baseline},
        {"chi2_reduced", f.chi2_reduced},
        {"window", {f.window.x_min.value(), f.window.x_max.value()}},
        {"points", f.points},
        {"iterations", f.iterations},
        {"unit_weights", f.unit_weights},
    };
}

json to_json(const lawfit::LawFitResult& r)
{
    return {
        {"a", r.a},
        {"hbar_v", r.hbar_v.value()},
        {"v_over_c", r.v_over_c},
        {"sigma_hbar_v", r.sigma_hbar_v.value()},
        {"chi2_reduced", r.chi2_reduced},
        {"powerlaw",
         {{"prefactor", r.powerlaw.prefactor},
          {"exponent", r.powerlaw.exponent},
          {"sigma_exponent", r.powerlaw.sigma_exponent}}},
        {"sqrt_prefactor", r.sqrt_prefactor},
        {"rss_reciprocal", r.rss_reciprocal},
        {"rss_sqrt", r.rss_sqrt},
        {"rss_ratio", number(r.rss_ratio)},
        {"preferred_model", lawfit::to_string(r.preferred_model)},
    };
}

json to_json(const ControlSummary& c)
{
    json scan = json::array();
    for (const auto& row : c.scan)
    {
        scan.push_back({{"defocus", row.defocus.value()},
                        {"fringe_amplitude", row.fringe_amplitude},
                        {"tail_extent", row.tail_extent.value()}});
    }
    return {
        {"tail_extent_px", c.tail_extent_px},
        {"fringe_amplitude", c.fringe_amplitude},
        {"best_focus", c.best_focus},
        {"norm_error", c.norm_error},
        {"scan", scan},
    };
}

json to_json(const RunReport& r)
{
    json energies = json::array();
    for (const auto& e : r.energies)
    {
        energies.push_back({{"delta_e", e.delta_e}, {"truth", e.truth}, {"fit", to_json(e.fit)}});
    }
    json curves = json::array();
    for (std::size_t i = 0; i < r.curves.size(); ++i)
    {
        curves.push_back({{"delta_e", r.curves.grid[i].value()},
                          {"l_s", r.curves.l_s[i].value()},
                          {"l_e", r.curves.l_e[i].value()},
                          {"l_t", r.curves.l_t[i].value()},
                          {"x_i_fit", r.curves.x_i_fit[i].value()},
                          {"x_ic", r.curves.x_ic[i].value()},
                          {"t_heisenberg", r.curves.t_heisenberg[i].value()}});
    }
    json j = {
        {"schema_version", output_schema_version},
        {"config_hash", r.config_hash},
        {"seed", r.seed},
        {"voltage_kv", r.voltage_kv},
        {"delta_phi", r.delta_phi},
        {"energies", energies},
        {"lawfit", to_json(r.law)},
        {"curves", curves},
        {"control", nullptr},
    };
    if (r.control)
    {
        j["control"] = to_json(*r.control);
    }
    return j;
}

json to_json(const Timing& t)
{
    json stages = json::object();
    for (const auto& [name, s] : t.stages)
    {
        stages[name] = s;
    }
    return {{"stages", stages}, {"total", t.total}};
}

std::string curves_csv(const physics::ModelCurveSet& c, const std::string& hash)
{
    std::string out = header_comment(hash);
    out += "dE_eV,l_s_nm,l_e_nm,l_t_nm,x_i_fit_nm,x_ic_nm,t_heisenberg_s\n";
    for (std::size_t i = 0; i < c.size(); ++i)
    {
        out += sci(c.grid[i].value()) + ',' + sci(c.l_s[i].value()) + ',' + sci(c.l_e[i].value()) + ','
               + sci(c.l_t[i].value()) + ',' + sci(c.x_i_fit[i].value()) + ',' + sci(c.x_ic[i].value()) + ','
               + sci(c.t_heisenberg[i].value()) + '\n';
    }
    return out;
}

std::string series_csv(const lawfit::DecaySeries& s, const std::string& hash)
{
    const bool labelled = std::ranges::any_of(s.points, [](const auto& p) { return !p.condition.empty(); });
    std::string out = header_comment(hash);
    out += labelled ? "dE_eV,xi_nm,sigma_nm,condition\n" : "dE_eV,xi_nm,sigma_nm\n";
    for (const auto& p : s.points)
    {
        out += sci(p.delta_e.value()) + ',' + sci(p.x_i.value()) + ',' + sci(p.sigma.value());
        if (labelled)
        {
            out += ',' + p.condition;
        }
        out += '\n';
    }
    return out;
}

std::string profile_csv(const reduce::LineProfile& p, const std::string& hash)
{
    std::string out = header_comment(hash);
    out += "x_nm,y_counts,sigma\n";
    for (std::size_t i = 0; i < p.size(); ++i)
    {
        out += sci(p.x[i]) + ',' + sci(p.y[i]) + ',' + sci(p.sigma[i]) + '\n';
    }
    return out;
}

std::string scan_csv(const std::vector<multislice::DefocusScanRow>& scan, const std::string& hash)
{
    std::string out = header_comment(hash);
    out += "defocus_nm,fringe_amplitude,tail_extent_nm\n";
    for (const auto& r : scan)
    {
        out += sci(r.defocus.value()) + ',' + sci(r.fringe_amplitude) + ',' + sci(r.tail_extent.value()) + '\n';
    }
    return out;
}

lawfit::DecaySeries parse_series_csv(const std::string& text)
{
    lawfit::DecaySeries series;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    bool have_header = false;
    std::size_t columns = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        line = trim(line);
        if (line.empty() || line.front() == '#')
        {
            continue;
        }
        auto fields = split(line, ',');
        for (auto& f : fields)
        {
            f = trim(f);
        }
        if (!have_header)
        {
            if (fields.size() < 3 || fields[0] != "dE_eV" || fields[1] != "xi_nm" || fields[2] != "sigma_nm"
                || (fields.size() == 4 && fields[3] != "condition") || fields.size() > 4)
            {
                throw DataError("series header must be dE_eV,xi_nm,sigma_nm[,condition]");
            }
            columns = fields.size();
            have_header = true;
            continue;
        }
        if (fields.size() != columns)
        {
            throw DataError("series line " + std::to_string(line_no) + " has " + std::to_string(fields.size())
                            + " fields, expected " + std::to_string(columns));
        }
        lawfit::SeriesPoint p{Energy(parse_double(fields[0], line_no)), Length(parse_double(fields[1], line_no)),
                              Length(parse_double(fields[2], line_no)), columns == 4 ? fields[3] : std::string()};
        series.points.push_back(p);
    }
    if (!have_header)
    {
        throw DataError("series file has no header");
    }
    return series;
}

lawfit::DecaySeries load_series(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw DataError("cannot open series " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_series_csv(text.str());
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    out.close();
    if (!out)
    {
        throw DataError("cannot write " + path.string());
    }
}

} // namespace evfield::cli
