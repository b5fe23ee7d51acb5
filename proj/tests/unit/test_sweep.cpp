#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tpa/sweep.hpp"

using namespace tpa;
using nlohmann::json;

namespace {

SweepConfig small_config()
{
    SweepConfig c;
    c.families = {{Family::coherent}, {Family::squeezed_vacuum}};
    c.params = {1.0, 4.0};
    c.epsilons = {0.0, 1e-3};
    c.measurements = {{MeasurementKind::qfi}, {MeasurementKind::photon_number}};
    return c;
}

std::string csv_of(const SweepResult& r)
{
    std::ostringstream s;
    write_csv(r, s);
    return s.str();
}

std::string json_of(const SweepResult& r)
{
    std::ostringstream s;
    write_json(r, s);
    return s.str();
}

struct FixedEpoch {
    FixedEpoch() { setenv("SOURCE_DATE_EPOCH", "1700000000", 1); }
    ~FixedEpoch() { unsetenv("SOURCE_DATE_EPOCH"); }
};

} // namespace

TEST_CASE("csv header and one row per cell in grid order")
{
    const SweepResult r = run_sweep(small_config(), 1);
    REQUIRE(r.records.size() == 16);
    const std::string csv = csv_of(r);
    CHECK(csv.substr(0, csv.find('\n')) == "family,param,mean_photon,epsilon,measurement,value,dim,status");
    int lines = 0;
    for (char c : csv) lines += c == '\n';
    CHECK(lines == 17);

    // family -> param -> epsilon -> measurement
    CHECK(r.records[0].family == "coherent");
    CHECK(r.records[0].measurement == "qfi");
    CHECK(r.records[1].measurement == "photon_number");
    CHECK(r.records[2].epsilon == 1e-3);
    CHECK(r.records[4].mean_photon == doctest::Approx(4.0));
    CHECK(r.records[8].family == "squeezed_vacuum");
    for (const auto& rec : r.records) {
        CHECK(rec.status == "ok");
        CHECK(std::isfinite(rec.value));
        CHECK(rec.dim > 0);
    }
    // coherent n=1 at ε=0: n³ + n²/2
    CHECK(r.records[0].value == doctest::Approx(1.5).epsilon(1e-6));
    CHECK(r.records[0].param == doctest::Approx(1.0));
}

TEST_CASE("json export, import and re-export is byte-identical")
{
    SweepConfig c = small_config();
    c.measurements.push_back(Measurement::quadrature_at(0.3));
    const SweepResult r = run_sweep(c, 1);
    const std::string first = json_of(r);
    std::istringstream in(first);
    const SweepResult back = read_json(in);
    CHECK(back.records == r.records);
    CHECK(back.provenance == r.provenance);
    CHECK(json_of(back) == first);

    const json j = json::parse(first);
    CHECK(j["provenance"]["engine_version"] == kEngineVersion);
    CHECK(j["records"][0].contains("diagnostics"));
}

TEST_CASE("export rejects empty results and unknown extensions")
{
    SweepResult empty;
    std::ostringstream s;
    CHECK_THROWS_AS(write_csv(empty, s), IoError);
    CHECK_THROWS_AS(write_json(empty, s), IoError);
    CHECK_THROWS_AS(export_result(empty, "out.csv"), IoError);

    const SweepResult r = run_sweep(small_config(), 1);
    CHECK_THROWS_AS(export_result(r, "out.txt"), IoError);
    CHECK_THROWS_AS(export_result(r, "/nonexistent-dir/x/out.csv"), IoError);

    const auto dir = std::filesystem::temp_directory_path();
    const auto path = (dir / "tpa_sweep_test.csv").string();
    export_result(r, path);
    std::ifstream f(path);
    std::string header;
    std::getline(f, header);
    CHECK(header == kCsvHeader);
    std::filesystem::remove(path);

    std::istringstream bad("{\"records\": []}");
    CHECK_THROWS_AS(read_json(bad), IoError);
    std::istringstream junk("not json");
    CHECK_THROWS_AS(read_json(junk), IoError);
}

TEST_CASE("identical config gives identical output, regardless of thread count")
{
    FixedEpoch epoch;
    SweepConfig c = small_config();
    c.measurements.push_back(Measurement::quadrature_at(0.0));
    const SweepResult a = run_sweep(c, 1);
    const SweepResult b = run_sweep(c, 3);
    CHECK(a.records == b.records);
    CHECK(json_of(a) == json_of(b));
    CHECK(a.provenance.timestamp == "2023-11-14T22:13:20Z");
}

TEST_CASE("failing cells are tagged in-band, not dropped")
{
    SweepConfig c;
    c.families = {{Family::coherent}};
    c.params = {1.0, 30.0};
    c.epsilons = {0.0};
    c.measurements = {{MeasurementKind::qfi}, {MeasurementKind::mean_photon_sensitivity}};
    c.options.dim = 12;
    const SweepResult r = run_sweep(c, 1);
    REQUIRE(r.records.size() == 4);
    CHECK(r.records[0].status == "ok");
    CHECK(r.records[2].status == "truncation_error");
    CHECK(r.records[2].value == 0.0);
    CHECK(r.records[3].status == "truncation_error");
    CHECK(r.records[2].mean_photon == doctest::Approx(30.0));

    // vacuum has no signal in ⟨n⟩
    SweepConfig v;
    v.families = {{Family::fock}};
    v.axis = ParamAxis::native;
    v.params = {0.0, 1.0};
    v.epsilons = {0.1};
    v.measurements = {{MeasurementKind::mean_photon_sensitivity}};
    const SweepResult rv = run_sweep(v, 1);
    CHECK(rv.records[0].status == "zero_signal_error");
    CHECK(rv.records[1].status == "zero_signal_error");
    for (const auto& rec : rv.records) CHECK(std::isfinite(rec.value));
}

TEST_CASE("config validation")
{
    SweepConfig c = small_config();
    CHECK_NOTHROW(c.validate());
    SweepConfig e = c;
    e.epsilons.clear();
    CHECK_THROWS_AS(e.validate(), ConfigError);
    e = c;
    e.epsilons = {-1e-3};
    CHECK_THROWS_AS(e.validate(), ConfigError);
    CHECK_THROWS_AS(run_sweep(e), ConfigError);
    e = c;
    e.params = {0.0};
    CHECK_THROWS_AS(e.validate(), ConfigError);
    e = c;
    e.families = {{Family::fock}};
    e.axis = ParamAxis::native;
    e.params = {1.5};
    CHECK_THROWS_AS(e.validate(), ConfigError);
    e = c;
    e.options.grid_points = 100;
    CHECK_THROWS_AS(e.validate(), ConfigError);

    CHECK_THROWS_AS(log_grid(0.0, 1.0, 5), ConfigError);
    CHECK_THROWS_AS(log_grid(-1.0, 1.0, 5), ConfigError);
    CHECK_THROWS_AS(parse_preset("fig9"), ConfigError);

    CHECK_THROWS_AS(sweep_config_from_json(json{{"preset", "fig2"}, {"colour", 3}}), ConfigError);
    CHECK_THROWS_AS(sweep_config_from_json(json{{"preset", "fig2"}, {"epsilons", {{"log", {0, 1, 5}}}}}),
                    ConfigError);
    CHECK_THROWS_AS(sweep_config_from_json(json{{"preset", "fig2"}, {"measurements", {"sideways"}}}), ConfigError);
    CHECK_THROWS_AS(sweep_config_from_json(json{{"families", {"coherent"}}}), ConfigError);
    CHECK_THROWS_AS(sweep_config_from_json(json::array()), ConfigError);
}

TEST_CASE("grids")
{
    const auto g = log_grid(1e-4, 10.0, 6);
    REQUIRE(g.size() == 6);
    CHECK(g.front() == 1e-4);
    CHECK(g.back() == 10.0);
    CHECK(g[2] == doctest::Approx(1e-2).epsilon(1e-12));
    const auto l = linear_grid(0.0, 1.0, 5);
    CHECK(l[1] == 0.25);
    CHECK(l.back() == 1.0);
}

TEST_CASE("config documents round-trip and presets can be overridden")
{
    const json doc = {{"preset", "fig3"},
                      {"epsilons", {{"log", {1e-3, 1.0, 4}}}},
                      {"dim", 48},
                      {"output", "x.json"}};
    const SweepConfig c = sweep_config_from_json(doc);
    CHECK(c.preset == Preset::fig3);
    CHECK(c.epsilons.size() == 4);
    CHECK(c.options.dim == 48);
    CHECK(c.axis == ParamAxis::native);
    CHECK(c.measurements.size() == 3);

    const SweepConfig back = sweep_config_from_json(to_json(c));
    CHECK(to_json(back) == to_json(c));
    CHECK(config_hash(back) == config_hash(c));
    CHECK(config_hash(c).size() == 16);

    SweepConfig d = c;
    d.output = "elsewhere.csv";
    CHECK(config_hash(d) == config_hash(c));
    d.epsilons[0] = 2e-3;
    CHECK(config_hash(d) != config_hash(c));

    const json plain = {{"families", {{{"family", "squeezed"}, {"phase", 0.5}}}},
                        {"params", {{"linear", {1, 2, 3}}}},
                        {"epsilons", {0, 0.1}},
                        {"measurements", {"quadrature(pi/2)", "exponent:photon_number"}},
                        {"loss", "single_photon"}};
    const SweepConfig p = sweep_config_from_json(plain);
    CHECK(p.families[0].family == Family::squeezed_vacuum);
    CHECK(p.families[0].phase == 0.5);
    CHECK(p.params == std::vector<double>{1.0, 1.5, 2.0});
    CHECK(p.measurements[1].kind == MeasurementKind::exponent);
    CHECK(p.options.loss == LossKind::single_photon);
    CHECK_FALSE(p.options.dim.has_value());
}

TEST_CASE("every preset is a valid grid")
{
    for (Preset p : {Preset::fig2, Preset::fig3, Preset::fig4, Preset::fig5, Preset::appendix_qfi}) {
        const SweepConfig c = preset_config(p);
        CHECK_NOTHROW(c.validate());
        CHECK(parse_preset(preset_name(p)) == p);
        CHECK(c.output.empty());
    }
    const SweepConfig f2 = preset_config(Preset::fig2);
    CHECK(f2.epsilons == std::vector<double>{1e-6});
    CHECK(f2.params.front() == 0.5);
    CHECK(f2.params.back() == 50.0);
    const SweepConfig f4 = preset_config(Preset::fig4);
    CHECK(f4.params.size() == 25);
    CHECK(f4.epsilons.size() == 25);
    CHECK(f4.epsilons.front() == 1e-6);
    CHECK(f4.epsilons.back() == 1.0);
}

TEST_CASE("auto dimension: reported dim passes the tail gate and dim+16 changes the value by < 0.5%")
{
    SweepConfig c;
    c.families = {{Family::coherent}, {Family::squeezed_vacuum}};
    c.params = {2.0, 6.0};
    c.epsilons = {1e-3, 0.1};
    c.measurements = {{MeasurementKind::qfi}, {MeasurementKind::photon_number}, Measurement::quadrature_at(0.0)};
    const SweepResult r = run_sweep(c, 1);
    for (const auto& rec : r.records) {
        REQUIRE(rec.status == "ok");
        const StateSpec spec = StateSpec::with_mean_photon(parse_family(rec.family), rec.mean_photon);
        const FockBasis basis(rec.dim, kDefaultTailTol);
        const DensityMatrix rho = make_state(spec, basis);
        CHECK(rho.population(rec.dim - 1) + rho.population(rec.dim - 2) <= kDefaultTailTol);

        EvalOptions bigger;
        bigger.dim = rec.dim + 16;
        const double v = evaluate(spec, Absorbance(rec.epsilon), Measurement::parse(rec.measurement), bigger).value;
        INFO(rec.family, " n=", rec.mean_photon, " eps=", rec.epsilon, " ", rec.measurement);
        CHECK(std::abs(v - rec.value) < 5e-3 * std::abs(rec.value));
    }
}
