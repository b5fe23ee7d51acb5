#include "tpa/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

namespace tpa {

using nlohmann::json;

namespace {

std::string axis_name(ParamAxis axis)
{
    return axis == ParamAxis::mean_photon ? "mean_photon" : "native";
}

ParamAxis parse_axis(const std::string& s)
{
    if (s == "mean_photon") return ParamAxis::mean_photon;
    if (s == "native") return ParamAxis::native;
    throw ConfigError("unknown axis '" + s + "' (expected mean_photon or native)");
}

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// A grid is either a literal list or {"log": [lo, hi, n]} / {"linear": [lo, hi, n]}.
std::vector<double> read_grid(const json& j, const std::string& key)
{
    if (j.is_array()) {
        std::vector<double> out;
        for (const auto& v : j) {
            if (!v.is_number()) throw ConfigError("'" + key + "' must hold numbers");
            out.push_back(v.get<double>());
        }
        return out;
    }
    if (j.is_object() && j.size() == 1) {
        const auto& [kind, spec] = *j.items().begin();
        if (!spec.is_array() || spec.size() != 3 || !spec[0].is_number() || !spec[1].is_number() ||
            !spec[2].is_number_integer()) {
            throw ConfigError("'" + key + "." + kind + "' must be [lo, hi, n] with integer n");
        }
        const double lo = spec[0].get<double>(), hi = spec[1].get<double>();
        const int n = spec[2].get<int>();
        if (kind == "log") return log_grid(lo, hi, n);
        if (kind == "linear") return linear_grid(lo, hi, n);
        throw ConfigError("'" + key + "' grid kind must be log or linear, got '" + kind + "'");
    }
    throw ConfigError("'" + key + "' must be a list or {\"log\"|\"linear\": [lo, hi, n]}");
}

StateSpec cell_spec(const FamilyTemplate& t, ParamAxis axis, double p)
{
    if (axis == ParamAxis::mean_photon) return StateSpec::with_mean_photon(t.family, p, t.phase);
    switch (t.family) {
    case Family::coherent: return StateSpec::coherent(std::polar(p, t.phase));
    case Family::squeezed_vacuum: return StateSpec::squeezed_vacuum(p, t.phase);
    case Family::fock: return StateSpec::fock(static_cast<int>(std::lround(p)));
    }
    throw ConfigError("unknown family");
}

SweepRecord run_cell(const SweepConfig& c, std::size_t fi, std::size_t pi, std::size_t ei, std::size_t mi)
{
    const FamilyTemplate& t = c.families[fi];
    const Measurement& m = c.measurements[mi];
    SweepRecord rec;
    rec.family = family_name(t.family);
    rec.epsilon = c.epsilons[ei];
    rec.measurement = m.name();
    // Kept if the state itself cannot be built.
    if (c.axis == ParamAxis::native) rec.param = c.params[pi];
    else rec.mean_photon = c.params[pi];
    try {
        const StateSpec spec = cell_spec(t, c.axis, c.params[pi]);
        rec.param = spec.primary_param();
        rec.mean_photon = spec.mean_photon();
        const FisherRecord r = evaluate(spec, Absorbance(c.epsilons[ei]), m, c.options);
        rec.dim = r.dim;
        if (!std::isfinite(r.value)) {
            rec.status = "nonfinite_error";
            return rec;
        }
        rec.value = r.value;
        for (const auto& [k, v] : r.diagnostics) {
            if (std::isfinite(v)) rec.diagnostics[k] = v;
        }
    } catch (const Error& e) {
        rec.value = 0.0;
        rec.status = e.gate() + "_error";
        rec.diagnostics.clear();
    } catch (const std::exception&) {
        rec.value = 0.0;
        rec.status = "internal_error";
        rec.diagnostics.clear();
    }
    return rec;
}

std::string iso_timestamp()
{
    std::time_t t = std::time(nullptr);
    if (const char* sde = std::getenv("SOURCE_DATE_EPOCH")) {
        char* end = nullptr;
        const long long v = std::strtoll(sde, &end, 10);
        if (end != sde && *end == '\0') t = static_cast<std::time_t>(v);
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json record_json(const SweepRecord& r)
{
    json d = json::object();
    for (const auto& [k, v] : r.diagnostics) d[k] = v;
    return {{"family", r.family},   {"param", r.param}, {"mean_photon", r.mean_photon},
            {"epsilon", r.epsilon}, {"measurement", r.measurement}, {"value", r.value},
            {"dim", r.dim},         {"status", r.status}, {"diagnostics", d}};
}

template <class T> T field(const json& j, const char* key)
{
    if (!j.contains(key)) throw IoError(std::string("record is missing '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw IoError(std::string("record field '") + key + "' has the wrong type");
    }
}

} // namespace

std::string preset_name(Preset p)
{
    switch (p) {
    case Preset::fig2: return "fig2";
    case Preset::fig3: return "fig3";
    case Preset::fig4: return "fig4";
    case Preset::fig5: return "fig5";
    case Preset::appendix_qfi: return "appendix_qfi";
    }
    return "?";
}

Preset parse_preset(const std::string& name)
{
    for (Preset p : {Preset::fig2, Preset::fig3, Preset::fig4, Preset::fig5, Preset::appendix_qfi}) {
        if (preset_name(p) == name) return p;
    }
    throw ConfigError("unknown preset '" + name + "' (expected fig2, fig3, fig4, fig5 or appendix_qfi)");
}

std::vector<double> log_grid(double lo, double hi, int n)
{
    if (!(lo > 0.0) || !(hi > 0.0) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw ConfigError("log grid needs positive finite endpoints");
    }
    if (n < 1 || (n == 1 && lo != hi)) throw ConfigError("log grid needs n >= 2 (or n = 1 with lo = hi)");
    if (n == 1) return {lo};
    std::vector<double> out(n);
    const double a = std::log10(lo), b = std::log10(hi);
    for (int i = 0; i < n; ++i) out[i] = std::pow(10.0, a + (b - a) * i / (n - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

std::vector<double> linear_grid(double lo, double hi, int n)
{
    if (!std::isfinite(lo) || !std::isfinite(hi)) throw ConfigError("linear grid needs finite endpoints");
    if (n < 1 || (n == 1 && lo != hi)) throw ConfigError("linear grid needs n >= 2 (or n = 1 with lo = hi)");
    if (n == 1) return {lo};
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = lo + (hi - lo) * i / (n - 1);
    out.back() = hi;
    return out;
}

void SweepConfig::validate() const
{
    if (families.empty()) throw ConfigError("no families to sweep");
    if (params.empty()) throw ConfigError("empty parameter grid");
    if (epsilons.empty()) throw ConfigError("empty absorbance grid");
    if (measurements.empty()) throw ConfigError("no measurements");
    for (double e : epsilons) {
        if (!(e >= 0.0) || !std::isfinite(e)) throw ConfigError("absorbance values must be finite and >= 0, got " + fmt(e));
    }
    for (double p : params) {
        if (!std::isfinite(p)) throw ConfigError("parameter values must be finite");
        if (axis == ParamAxis::mean_photon && !(p > 0.0)) {
            throw ConfigError("mean photon numbers must be > 0, got " + fmt(p));
        }
        if (axis == ParamAxis::native && p < 0.0) throw ConfigError("native parameters must be >= 0, got " + fmt(p));
    }
    for (const auto& f : families) {
        if (!std::isfinite(f.phase)) throw ConfigError("family phase must be finite");
        if (f.family != Family::fock) continue;
        for (double p : params) {
            if (std::abs(p - std::round(p)) > 1e-12) throw ConfigError("Fock photon counts must be whole numbers, got " + fmt(p));
        }
    }
    if (options.dim && *options.dim < kMinDim) throw ConfigError("dim must be >= " + std::to_string(kMinDim));
    if (!(options.tail_tol > 0.0 && options.tail_tol < 1.0)) throw ConfigError("tail_tol must lie in (0, 1)");
    if (!(options.cutoff > 0.0)) throw ConfigError("cutoff must be > 0");
    if (!(options.floor >= 0.0 && options.floor < 1.0)) throw ConfigError("floor must lie in [0, 1)");
    if (options.grid_points < 101 || options.grid_points % 2 == 0) throw ConfigError("grid_points must be odd and >= 101");
    if (options.wigner_points < 101 || options.wigner_points % 2 == 0) throw ConfigError("wigner_points must be odd and >= 101");
    if (!(options.grid_half_width_sd >= 8.0)) throw ConfigError("grid_half_width_sd must be >= 8");
}

SweepConfig preset_config(Preset p)
{
    SweepConfig c;
    c.preset = p;
    const Measurement q = Measurement::quadrature_at(0.0);
    switch (p) {
    case Preset::fig2:
        c.families = {{Family::coherent}, {Family::squeezed_vacuum}};
        c.params = log_grid(0.5, 50.0, 13);
        c.epsilons = {1e-6};
        c.measurements = {{MeasurementKind::photon_number}, q};
        break;
    case Preset::fig3:
        c.families = {{Family::squeezed_vacuum}};
        c.axis = ParamAxis::native;
        c.params = {1.0, 1.5};
        c.epsilons = log_grid(1e-4, 10.0, 21);
        c.measurements = {q, Measurement::quadrature_at(std::numbers::pi / 2), {MeasurementKind::negativity}};
        break;
    case Preset::fig4:
        c.families = {{Family::squeezed_vacuum}, {Family::coherent}};
        c.params = log_grid(0.5, 50.0, 25);
        c.epsilons = log_grid(1e-6, 1.0, 25);
        c.measurements = {Measurement::exponent_of(q)};
        break;
    case Preset::fig5:
        c.families = {{Family::squeezed_vacuum}, {Family::coherent}};
        c.params = log_grid(0.5, 50.0, 25);
        c.epsilons = log_grid(1e-6, 1.0, 25);
        c.measurements = {q};
        break;
    case Preset::appendix_qfi: {
        const double s = std::sinh(1.0);
        c.families = {{Family::squeezed_vacuum}, {Family::coherent}};
        c.params = {s * s};
        c.epsilons = log_grid(1e-4, 10.0, 21);
        c.measurements = {{MeasurementKind::qfi}, {MeasurementKind::photon_number}};
        break;
    }
    }
    return c;
}

SweepConfig sweep_config_from_json(const json& j)
{
    if (!j.is_object()) throw ConfigError("sweep config must be a key/value object");
    static const char* known[] = {"preset", "families", "axis", "params", "epsilons", "measurements",
                                  "dim", "tail_tol", "cutoff", "floor", "grid_points", "grid_half_width_sd",
                                  "wigner_points", "loss", "output"};
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw ConfigError("unknown config key '" + key + "'");
    }

    SweepConfig c;
    try {
        if (j.contains("preset") && !j["preset"].is_null()) c = preset_config(parse_preset(j["preset"].get<std::string>()));
        if (j.contains("families")) {
            c.families.clear();
            for (const auto& f : j["families"]) {
                FamilyTemplate t{};
                if (f.is_string()) {
                    t.family = parse_family(f.get<std::string>());
                } else {
                    for (const auto& [key, _] : f.items()) {
                        if (key != "family" && key != "phase") throw ConfigError("unknown family key '" + key + "'");
                    }
                    t.family = parse_family(f.at("family").get<std::string>());
                    t.phase = f.value("phase", 0.0);
                }
                c.families.push_back(t);
            }
        }
        if (j.contains("axis")) c.axis = parse_axis(j["axis"].get<std::string>());
        if (j.contains("params")) c.params = read_grid(j["params"], "params");
        if (j.contains("epsilons")) c.epsilons = read_grid(j["epsilons"], "epsilons");
        if (j.contains("measurements")) {
            c.measurements.clear();
            for (const auto& m : j["measurements"]) c.measurements.push_back(Measurement::parse(m.get<std::string>()));
        }
        if (j.contains("dim")) {
            const auto& d = j["dim"];
            if (d.is_string() && d.get<std::string>() == "auto") c.options.dim.reset();
            else if (d.is_number_integer()) c.options.dim = d.get<int>();
            else throw ConfigError("'dim' must be \"auto\" or an integer");
        }
        if (j.contains("tail_tol")) c.options.tail_tol = j["tail_tol"].get<double>();
        if (j.contains("cutoff")) c.options.cutoff = j["cutoff"].get<double>();
        if (j.contains("floor")) c.options.floor = j["floor"].get<double>();
        if (j.contains("grid_points")) c.options.grid_points = j["grid_points"].get<int>();
        if (j.contains("grid_half_width_sd")) c.options.grid_half_width_sd = j["grid_half_width_sd"].get<double>();
        if (j.contains("wigner_points")) c.options.wigner_points = j["wigner_points"].get<int>();
        if (j.contains("loss")) c.options.loss = parse_loss(j["loss"].get<std::string>());
        if (j.contains("output")) c.output = j["output"].get<std::string>();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed sweep config: ") + e.what());
    }
    c.validate();
    return c;
}

json to_json(const SweepConfig& c)
{
    json j;
    if (c.preset) j["preset"] = preset_name(*c.preset);
    json fams = json::array();
    for (const auto& f : c.families) fams.push_back({{"family", family_name(f.family)}, {"phase", f.phase}});
    j["families"] = fams;
    j["axis"] = axis_name(c.axis);
    j["params"] = c.params;
    j["epsilons"] = c.epsilons;
    json ms = json::array();
    for (const auto& m : c.measurements) ms.push_back(m.name());
    j["measurements"] = ms;
    if (c.options.dim) j["dim"] = *c.options.dim;
    else j["dim"] = "auto";
    j["tail_tol"] = c.options.tail_tol;
    j["cutoff"] = c.options.cutoff;
    j["floor"] = c.options.floor;
    j["grid_points"] = c.options.grid_points;
    j["grid_half_width_sd"] = c.options.grid_half_width_sd;
    j["wigner_points"] = c.options.wigner_points;
    j["loss"] = loss_name(c.options.loss);
    j["output"] = c.output;
    return j;
}

std::string config_hash(const SweepConfig& config)
{
    json j = to_json(config);
    j.erase("output");
    j.erase("preset");
    const std::string text = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

unsigned default_thread_count()
{
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("TPA_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return hw;
}

SweepResult run_sweep(const SweepConfig& config, unsigned threads)
{
    config.validate();
    const std::size_t nf = config.families.size(), np = config.params.size(), ne = config.epsilons.size(),
                      nm = config.measurements.size();
    const std::size_t total = nf * np * ne * nm;
    std::vector<SweepRecord> records(total);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < total; i = next++) {
            const std::size_t mi = i % nm, ei = (i / nm) % ne, pi = (i / (nm * ne)) % np, fi = i / (nm * ne * np);
            records[i] = run_cell(config, fi, pi, ei, mi);
        }
    };
    if (threads == 0) threads = default_thread_count();
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, total));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return {{config_hash(config), kEngineVersion, iso_timestamp()}, std::move(records)};
}

void write_csv(const SweepResult& result, std::ostream& out)
{
    if (result.records.empty()) throw IoError("refusing to export an empty sweep result");
    out << kCsvHeader << '\n';
    for (const auto& r : result.records) {
        out << r.family << ',' << fmt(r.param) << ',' << fmt(r.mean_photon) << ',' << fmt(r.epsilon) << ','
            << r.measurement << ',' << fmt(r.value) << ',' << r.dim << ',' << r.status << '\n';
    }
    out.flush();
    if (!out) throw IoError("failed writing CSV");
}

json to_json(const SweepResult& result)
{
    json recs = json::array();
    for (const auto& r : result.records) recs.push_back(record_json(r));
    return {{"provenance",
             {{"config_hash", result.provenance.config_hash},
              {"engine_version", result.provenance.engine_version},
              {"timestamp", result.provenance.timestamp}}},
            {"records", recs}};
}

void write_json(const SweepResult& result, std::ostream& out)
{
    if (result.records.empty()) throw IoError("refusing to export an empty sweep result");
    out << to_json(result).dump(2) << '\n';
    out.flush();
    if (!out) throw IoError("failed writing JSON");
}

SweepResult sweep_result_from_json(const json& j)
{
    if (!j.is_object() || !j.contains("provenance") || !j.contains("records") || !j["records"].is_array()) {
        throw IoError("sweep JSON needs 'provenance' and a 'records' list");
    }
    SweepResult out;
    const json& p = j["provenance"];
    out.provenance.config_hash = field<std::string>(p, "config_hash");
    out.provenance.engine_version = field<std::string>(p, "engine_version");
    out.provenance.timestamp = field<std::string>(p, "timestamp");
    for (const auto& r : j["records"]) {
        SweepRecord rec;
        rec.family = field<std::string>(r, "family");
        rec.param = field<double>(r, "param");
        rec.mean_photon = field<double>(r, "mean_photon");
        rec.epsilon = field<double>(r, "epsilon");
        rec.measurement = field<std::string>(r, "measurement");
        rec.value = field<double>(r, "value");
        rec.dim = field<int>(r, "dim");
        rec.status = field<std::string>(r, "status");
        if (r.contains("diagnostics")) {
            for (const auto& [k, v] : r["diagnostics"].items()) {
                if (!v.is_number()) throw IoError("diagnostic '" + k + "' is not a number");
                rec.diagnostics[k] = v.get<double>();
            }
        }
        out.records.push_back(std::move(rec));
    }
    return out;
}

SweepResult read_json(std::istream& in)
{
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError(std::string("cannot parse sweep JSON: ") + e.what());
    }
    return sweep_result_from_json(j);
}

void export_result(const SweepResult& result, const std::string& path)
{
    const auto ends_with = [&](const char* ext) {
        const std::string e(ext);
        return path.size() >= e.size() && path.compare(path.size() - e.size(), e.size(), e) == 0;
    };
    const bool csv = ends_with(".csv");
    if (!csv && !ends_with(".json")) throw IoError("output path '" + path + "' must end in .csv or .json");
    if (result.records.empty()) throw IoError("refusing to export an empty sweep result");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    if (csv) write_csv(result, f);
    else write_json(result, f);
}

} // namespace tpa
