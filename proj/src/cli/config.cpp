#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "evfield/cli.hpp"
#include "evfield/error.hpp"

namespace evfield::cli {
namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where)
{
    if (!j.is_object())
    {
        throw DataError(where + " must be a JSON object");
    }
    for (const auto& item : j.items())
    {
        if (!allowed.contains(item.key()))
        {
            throw DataError("unknown key '" + item.key() + "' in " + where);
        }
    }
}

template <class T>
void read_key(const json& j, const char* key, T& out)
{
    if (!j.contains(key))
    {
        return;
    }
    try
    {
        out = j.at(key).get<T>();
    }
    catch (const json::exception& e)
    {
        throw DataError(std::string("bad value for '") + key + "': " + e.what());
    }
}

const char* law_name(synth::DecayModel m)
{
    return m == synth::DecayModel::Exponential ? "exponential" : "sqrt";
}

synth::DecayModel parse_law(const std::string& s)
{
    if (s == "exponential")
    {
        return synth::DecayModel::Exponential;
    }
    if (s == "sqrt")
    {
        return synth::DecayModel::SqrtTunneling;
    }
    throw DataError("unknown decay law '" + s + "' (expected exponential or sqrt)");
}

PhantomConfig phantom_from_json(const json& j)
{
    reject_unknown(j,
                   {"width", "height", "pixel_size", "interface_col", "mu_background", "mu_bulk", "mu_interface",
                    "law", "true_hbar_v", "sqrt_prefactor", "spectral_scaling"},
                   "phantom");
    PhantomConfig p;
    read_key(j, "width", p.width);
    read_key(j, "height", p.height);
    read_key(j, "pixel_size", p.pixel_size);
    read_key(j, "interface_col", p.interface_col);
    read_key(j, "mu_background", p.mu_background);
    read_key(j, "mu_bulk", p.mu_bulk);
    read_key(j, "mu_interface", p.mu_interface);
    std::string law = law_name(p.law);
    read_key(j, "law", law);
    p.law = parse_law(law);
    read_key(j, "true_hbar_v", p.true_hbar_v);
    read_key(j, "sqrt_prefactor", p.sqrt_prefactor);
    read_key(j, "spectral_scaling", p.spectral_scaling);
    return p;
}

std::uint64_t fnv1a(const std::string& s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s)
    {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace

void ExperimentConfig::validate() const
{
    if (schema_version != config_schema_version)
    {
        throw DataError("unsupported config schema_version " + std::to_string(schema_version));
    }
    if (!(voltage_kv > 0.0))
    {
        throw DomainError("voltage_kv must be positive");
    }
    if (energies.empty())
    {
        throw DomainError("energies must not be empty");
    }
    std::vector<double> sorted = energies;
    std::ranges::sort(sorted);
    if (!(sorted.front() > 0.0) || std::ranges::adjacent_find(sorted) != sorted.end())
    {
        throw DomainError("energies must be distinct and positive");
    }
    if (frames < 1 || rows < 2 || max_shift < 0)
    {
        throw DomainError("frames >= 1, rows >= 2 and max_shift >= 0 are required");
    }
    if (!(discriminate_threshold >= 1.0))
    {
        throw DomainError("discriminate_threshold must be at least 1");
    }
    if (!(curve_min > 0.0) || !(curve_max > curve_min) || curve_points_per_decade < 1)
    {
        throw DomainError("curve grid needs 0 < curve_min < curve_max and points per decade >= 1");
    }
    if (delta_phi < 0.0)
    {
        throw DomainError("delta_phi must be non-negative");
    }
    if (!(phantom.true_hbar_v > 0.0) || !(phantom.sqrt_prefactor > 0.0))
    {
        throw DomainError("decay-law constants must be positive");
    }
    if (fit_window && !(fit_window->x_max > fit_window->x_min))
    {
        throw DomainError("fit_window needs x_max > x_min");
    }
    phantom_for(*this, energies.front()).validate();
}

ExperimentConfig config_from_json(const json& j)
{
    reject_unknown(j,
                   {"schema_version", "voltage_kv", "energies", "phantom", "frames", "rows", "max_shift", "fit_window",
                    "discriminate_threshold", "delta_phi", "curve_min", "curve_max", "curve_points_per_decade",
                    "control", "seed"},
                   "config");
    ExperimentConfig c;
    if (!j.contains("schema_version"))
    {
        throw DataError("config is missing schema_version");
    }
    read_key(j, "schema_version", c.schema_version);
    read_key(j, "voltage_kv", c.voltage_kv);
    read_key(j, "energies", c.energies);
    if (j.contains("phantom"))
    {
        c.phantom = phantom_from_json(j.at("phantom"));
    }
    read_key(j, "frames", c.frames);
    read_key(j, "rows", c.rows);
    read_key(j, "max_shift", c.max_shift);
    if (j.contains("fit_window") && !j.at("fit_window").is_null())
    {
        const json& w = j.at("fit_window");
        reject_unknown(w, {"x_min", "x_max"}, "fit_window");
        double lo = 0;
        double hi = 0;
        read_key(w, "x_min", lo);
        read_key(w, "x_max", hi);
        c.fit_window = reduce::FitWindow{Length(lo), Length(hi)};
    }
    read_key(j, "discriminate_threshold", c.discriminate_threshold);
    read_key(j, "delta_phi", c.delta_phi);
    read_key(j, "curve_min", c.curve_min);
    read_key(j, "curve_max", c.curve_max);
    read_key(j, "curve_points_per_decade", c.curve_points_per_decade);
    read_key(j, "control", c.control);
    read_key(j, "seed", c.seed);
    c.validate();
    return c;
}

json to_json(const ExperimentConfig& c)
{
    json p = {
        {"width", c.phantom.width},
        {"height", c.phantom.height},
        {"pixel_size", c.phantom.pixel_size},
        {"interface_col", c.phantom.interface_col},
        {"mu_background", c.phantom.mu_background},
        {"mu_bulk", c.phantom.mu_bulk},
        {"mu_interface", c.phantom.mu_interface},
        {"law", law_name(c.phantom.law)},
        {"true_hbar_v", c.phantom.true_hbar_v},
        {"sqrt_prefactor", c.phantom.sqrt_prefactor},
        {"spectral_scaling", c.phantom.spectral_scaling},
    };
    json j = {
        {"schema_version", c.schema_version},
        {"voltage_kv", c.voltage_kv},
        {"energies", c.energies},
        {"phantom", p},
        {"frames", c.frames},
        {"rows", c.rows},
        {"max_shift", c.max_shift},
        {"fit_window", nullptr},
        {"discriminate_threshold", c.discriminate_threshold},
        {"delta_phi", c.delta_phi},
        {"curve_min", c.curve_min},
        {"curve_max", c.curve_max},
        {"curve_points_per_decade", c.curve_points_per_decade},
        {"control", c.control},
        {"seed", c.seed},
    };
    if (c.fit_window)
    {
        j["fit_window"] = {{"x_min", c.fit_window->x_min.value()}, {"x_max", c.fit_window->x_max.value()}};
    }
    return j;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw DataError("cannot open config " + path.string());
    }
    json j;
    try
    {
        j = json::parse(in);
    }
    catch (const json::parse_error& e)
    {
        throw DataError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

std::string config_hash(const ExperimentConfig& config)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(to_json(config).dump())));
    return buf;
}

synth::ScenePhantom phantom_for(const ExperimentConfig& config, double delta_e)
{
    const PhantomConfig& p = config.phantom;
    synth::ScenePhantom s;
    s.width_px = p.width;
    s.height_px = p.height;
    s.pixel_size = Length(p.pixel_size);
    s.interface_col = p.interface_col;
    s.mu_background = p.mu_background;
    s.mu_bulk = p.mu_bulk;
    s.mu_interface = p.mu_interface;
    s.delta_e = Energy(delta_e);
    s.decay.model = p.law;
    s.decay.length = Length(p.law == synth::DecayModel::Exponential ? p.true_hbar_v / delta_e
                                                                      : p.sqrt_prefactor / std::sqrt(delta_e));
    if (p.spectral_scaling)
    {
        const auto spectrum = synth::gan_like_spectrum();
        s.mu_interface *= synth::spectral_weight(Energy(delta_e), spectrum)
                          / synth::spectral_weight(Energy(19.4), spectrum);
    }
    return s;
}

std::vector<Energy> curve_grid(const ExperimentConfig& config)
{
    const int ppd = config.curve_points_per_decade;
    const int k0 = static_cast<int>(std::ceil(std::log10(config.curve_min) * ppd - 1e-9));
    const int k1 = static_cast<int>(std::floor(std::log10(config.curve_max) * ppd + 1e-9));
    std::vector<double> values;
    for (int k = k0; k <= k1; ++k)
    {
        values.push_back(std::pow(10.0, static_cast<double>(k) / ppd));
    }
    values.insert(values.end(), config.energies.begin(), config.energies.end());
    std::ranges::sort(values);
    std::vector<Energy> out;
    for (double v : values)
    {
        if (out.empty() || std::abs(v - out.back().value()) > 1e-9 * v)
        {
            out.emplace_back(v);
        }
    }
    return out;
}

reduce::PipelineOptions pipeline_options(const ExperimentConfig& config)
{
    reduce::PipelineOptions o;
    o.interface_col = config.phantom.interface_col;
    o.rows = config.rows;
    o.max_shift = config.max_shift;
    o.window = config.fit_window;
    return o;
}

} // namespace evfield::cli
