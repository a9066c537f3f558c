#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "evfield/cli.hpp"
#include "evfield/error.hpp"

using namespace evfield;
using namespace evfield::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / "evfield_test_cli" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run(std::vector<std::string> args)
{
    args.insert(args.begin(), "evfield");
    std::vector<const char*> argv;
    for (const auto& a : args)
    {
        argv.push_back(a.c_str());
    }
    return run_command(static_cast<int>(argv.size()), argv.data());
}

std::size_t count(const std::string& text, const std::string& needle)
{
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1))
    {
        ++n;
    }
    return n;
}

//! Small, fast reproduce configuration.
nlohmann::json small_config()
{
    return {
        {"schema_version", 1},
        {"frames", 4},
        {"rows", 200},
        {"phantom", {{"height", 256}}},
        {"control", false},
    };
}

fs::path write_config(const fs::path& dir, const nlohmann::json& j)
{
    const fs::path p = dir / "config.json";
    write_text(p, j.dump());
    return p;
}

//! Splits a CSV data row.
std::vector<double> row_values(const std::string& line)
{
    std::vector<double> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ','))
    {
        out.push_back(std::stod(field));
    }
    return out;
}

} // namespace

TEST_CASE("config round trip and hash")
{
    ExperimentConfig c;
    c.seed = 7;
    c.energies = {1.0, 3.0, 9.0};
    c.fit_window = reduce::FitWindow{Length(0.5), Length(30.0)};
    c.phantom.law = synth::DecayModel::SqrtTunneling;
    const auto j = to_json(c);
    const auto back = config_from_json(j);
    CHECK(to_json(back) == j);
    CHECK(config_hash(back) == config_hash(c));
    CHECK(config_hash(c).size() == 16);

    ExperimentConfig d = c;
    d.seed = 8;
    CHECK(config_hash(d) != config_hash(c));

    // defaults survive a minimal document
    const auto minimal = config_from_json({{"schema_version", 1}});
    CHECK(to_json(minimal) == to_json(ExperimentConfig{}));
}

TEST_CASE("config rejects unknown keys and bad documents")
{
    CHECK_THROWS_AS(config_from_json({{"schema_version", 1}, {"frame", 3}}), DataError);
    CHECK_THROWS_AS(config_from_json({{"schema_version", 1}, {"phantom", {{"mu", 1.0}}}}), DataError);
    CHECK_THROWS_AS(config_from_json({{"frames", 3}}), DataError);
    CHECK_THROWS_AS(config_from_json({{"schema_version", 2}}), DataError);
    CHECK_THROWS_AS(config_from_json({{"schema_version", 1}, {"frames", "many"}}), DataError);
    CHECK_THROWS_AS(config_from_json({{"schema_version", 1}, {"phantom", {{"law", "cubic"}}}}), DataError);
    CHECK_THROWS_AS(config_from_json({{"schema_version", 1}, {"energies", {1.0, 1.0}}}), DomainError);
    CHECK_THROWS_AS(config_from_json({{"schema_version", 1}, {"frames", 0}}), DomainError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::array()), DataError);
}

TEST_CASE("curve grid")
{
    const ExperimentConfig c;
    const auto g = curve_grid(c);
    CHECK(g.front().value() == doctest::Approx(0.5).epsilon(0.3));
    CHECK(g.back().value() == doctest::Approx(1000.0));
    CHECK(std::ranges::is_sorted(g));
    CHECK(std::ranges::adjacent_find(g) == g.end());
    for (double e : c.energies)
    {
        CHECK(std::ranges::any_of(g, [e](Energy v) { return v.value() == e; }));
    }
    CHECK(std::ranges::any_of(g, [](Energy v) { return v.value() == 1.0; }));
}

TEST_CASE("curves command writes the declared table")
{
    const fs::path dir = scratch("curves");
    REQUIRE(run({"curves", "--out", dir.string()}) == 0);
    std::istringstream in(slurp(dir / "curves.csv"));
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("# config_hash=", 0) == 0);
    std::getline(in, line);
    CHECK(line == "dE_eV,l_s_nm,l_e_nm,l_t_nm,x_i_fit_nm,x_ic_nm,t_heisenberg_s");
    bool found = false;
    while (std::getline(in, line))
    {
        CHECK(line.find('e') != std::string::npos);
        const auto v = row_values(line);
        REQUIRE(v.size() == 7);
        if (v[0] == 1.0)
        {
            found = true;
            CHECK(std::abs(v[2] - 197.327) < 0.001);
            CHECK(std::abs(v[3] - 0.19518) < 0.0001);
            CHECK(v[4] == 106.0);
            CHECK(v[5] == doctest::Approx(197.327).epsilon(1e-6));
            CHECK(v[6] == doctest::Approx(3.29106e-16).epsilon(1e-5));
            // figure ordering at 1 / dE = 1
            CHECK(v[3] < v[4]);
            CHECK(v[4] < v[5]);
        }
    }
    CHECK(found);
    CHECK(line.empty());
}

TEST_CASE("series CSV parsing")
{
    lawfit::DecaySeries s;
    s.points = {{Energy(0.9), Length(117.0), Length(0.5), {}}, {Energy(2.5), Length(42.4), Length(0.1), {}}};
    const auto back = parse_series_csv(series_csv(s, "abc"));
    REQUIRE(back.size() == 2);
    CHECK(back.points[1].x_i.value() == doctest::Approx(42.4).epsilon(1e-6));

    s.points[0].condition = "A";
    s.points[1].condition = "B";
    const auto labelled = parse_series_csv(series_csv(s, "abc"));
    CHECK(labelled.points[1].condition == "B");

    CHECK_THROWS_AS(parse_series_csv("dE,xi\n1,2\n"), DataError);
    CHECK_THROWS_AS(parse_series_csv("dE_eV,xi_nm,sigma_nm\n1,2\n"), DataError);
    CHECK_THROWS_AS(parse_series_csv("dE_eV,xi_nm,sigma_nm\n1,2,x\n"), DataError);
    CHECK_THROWS_AS(parse_series_csv("# only a comment\n"), DataError);
}

TEST_CASE("figures")
{
    lawfit::DecaySeries s;
    for (double de : {0.9, 2.5, 5.0, 10.0, 20.0, 40.0})
    {
        s.points.push_back({Energy(de), Length(106.0 / de), Length(1.06 / de), {}});
    }
    const auto law = lawfit::discriminate(s);
    const std::string a = render_fig4a(s, law);
    CHECK(count(a, "<circle class=\"data\"") == 6);
    CHECK(count(a, "class=\"errorbar\"") == 6);
    CHECK(count(a, "class=\"fit\"") == 1);
    CHECK(a == render_fig4a(s, law));

    const auto beam = physics::beam_kinematics(Voltage(300000.0));
    const auto curves = physics::model_curve_table(beam, curve_grid(ExperimentConfig{}), Phase(0.5), EnergyLength(106.0));
    const std::string b = render_fig4b(s, curves);
    CHECK(count(b, "<circle class=\"data\"") == 6);
    for (const char* cls : {"l_s", "l_e", "l_t", "x_i_fit", "x_ic"})
    {
        CHECK(count(b, std::string("<polyline class=\"") + cls + "\"") == 1);
    }

    const lawfit::DecaySeries empty;
    CHECK_THROWS_AS(render_fig4a(empty, law), DataError);
    CHECK_THROWS_AS(render_fig4b(empty, curves), DataError);
}

TEST_CASE("exit codes")
{
    CHECK(run({}) == 2);
    CHECK(run({"frobnicate"}) == 2);
    CHECK(run({"reproduce", "--no-such-flag"}) == 2);
    CHECK(run({"fit-law"}) == 2);
    CHECK(run({"--help"}) == 0);

    const fs::path dir = scratch("codes");
    const fs::path bad = dir / "bad.json";
    write_text(bad, R"({"schema_version": 1, "energies": [-1]})");
    CHECK(run({"curves", "--config", bad.string(), "--out", dir.string()}) == 1);
    write_text(bad, R"({"schema_version": 1, "typo": 1})");
    CHECK(run({"reproduce", "--config", bad.string(), "--out", dir.string()}) == 1);
    CHECK_FALSE(fs::exists(dir / "report.json"));
}

TEST_CASE("fit-law on the bundled exact series")
{
    const fs::path dir = scratch("fitlaw");
    REQUIRE(run({"fit-law", "--input", std::string(EVFIELD_DATA_DIR) + "/series_106.csv", "--out", dir.string()}) == 0);
    const auto j = nlohmann::json::parse(slurp(dir / "lawfit.json"));
    CHECK(j.at("hbar_v").get<double>() == doctest::Approx(106.0).epsilon(1e-12));
    CHECK(j.at("v_over_c").get<double>() == doctest::Approx(0.537).epsilon(1e-3));
    CHECK(j.at("preferred_model") == "RECIPROCAL");
    CHECK(j.at("schema_version") == 1);
}

TEST_CASE("simulate then reduce")
{
    const fs::path dir = scratch("simreduce");
    const fs::path cfg = write_config(dir, small_config());
    REQUIRE(run({"simulate", "--config", cfg.string(), "--energy", "10", "--frames", "6", "--out", dir.string()}) == 0);
    REQUIRE(fs::exists(dir / "stack.evls"));
    REQUIRE(run({"reduce", "--input", (dir / "stack.evls").string(), "--rows", "200", "--out", dir.string()}) == 0);
    const auto fit = nlohmann::json::parse(slurp(dir / "fit.json"));
    CHECK(fit.at("frames") == 6);
    CHECK(fit.at("x_i").get<double>() > 0.0);
    CHECK(fit.at("command_line").get<std::string>().find("reduce") != std::string::npos);
    for (const char* key : {"i0", "baseline", "sigma_x_i", "sigma_i0", "chi2_reduced", "window", "schema_version"})
    {
        CHECK(fit.contains(key));
    }
    const std::string profile = slurp(dir / "profile.csv");
    CHECK(profile.find("x_nm,y_counts,sigma\n") != std::string::npos);
}

TEST_CASE("multislice command")
{
    const fs::path dir = scratch("ms");
    REQUIRE(run({"multislice", "--nx", "2048", "--out", dir.string()}) == 0);
    const auto j = nlohmann::json::parse(slurp(dir / "control.json"));
    CHECK(j.at("best_focus").get<double>() == 0.0);
    CHECK(j.at("tail_extent_px").get<double>() <= 2.0);
    const std::string scan = slurp(dir / "defocus_scan.csv");
    CHECK(scan.find("defocus_nm,fringe_amplitude,tail_extent_nm\n") != std::string::npos);
    CHECK(fs::exists(dir / "detector.evls"));
}

TEST_CASE("reproduce manifest and determinism across runs and thread counts")
{
    const fs::path a = scratch("rep_a");
    const fs::path b = scratch("rep_b");
    const fs::path cfg = write_config(a, small_config());
    REQUIRE(run({"reproduce", "--config", cfg.string(), "--seed", "42", "--threads", "1", "--out", a.string()}) == 0);
    REQUIRE(run({"reproduce", "--config", cfg.string(), "--seed", "42", "--threads", "3", "--out", b.string()}) == 0);
    for (const char* f : {"curves.csv", "series.csv", "lawfit.json", "report.json", "fig4a.svg", "fig4b.svg"})
    {
        CAPTURE(f);
        REQUIRE(fs::exists(a / f));
        CHECK(slurp(a / f) == slurp(b / f));
    }
    const std::string series = slurp(a / "series.csv");
    const auto report = nlohmann::json::parse(slurp(a / "report.json"));
    CHECK(series.find(report.at("config_hash").get<std::string>()) != std::string::npos);
    CHECK(report.at("energies").size() == 6);
    CHECK(report.at("seed") == 42);
    CHECK(count(slurp(a / "fig4a.svg"), "<circle class=\"data\"") == 6);

    const fs::path c = scratch("rep_c");
    REQUIRE(run({"reproduce", "--config", cfg.string(), "--seed", "43", "--out", c.string()}) == 0);
    CHECK(slurp(a / "series.csv") != slurp(c / "series.csv"));
}
