#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tpa/closed_forms.hpp"
#include "tpa/fisher.hpp"
#include "tpa/phase_space.hpp"
#include "tpa/sweep.hpp"

namespace tpa {

namespace {

using ojson = nlohmann::ordered_json;

struct UsageError {
    std::string flag;
    std::string problem;
    std::string fix;
};

std::string fmt12(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string cell_text(const ojson& v, bool full = false)
{
    if (v.is_number_float() && full) return v.dump();
    if (v.is_number_float()) return fmt12(v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

// --- shared flags -------------------------------------------------------------

struct StateFlags {
    std::string state;
    std::optional<double> alpha, r, mean_photon;
    std::optional<int> n;
    double phi = 0.0;
    std::string dim = "auto";
    double tail_tol = kDefaultTailTol;
};

struct OutputFlags {
    std::string format = "table";
    std::string out;
};

void add_state_flags(CLI::App* sub, StateFlags& s)
{
    sub->add_option("--state", s.state, "input family: coherent, squeezed or fock")
        ->required()
        ->check(CLI::IsMember({"coherent", "squeezed", "squeezed_vacuum", "fock"}));
    sub->add_option("--alpha", s.alpha, "coherent amplitude |alpha| (sqrt of photons); phase from --phi");
    sub->add_option("--r", s.r, "squeezing parameter r (nepers, >= 0)");
    sub->add_option("--n", s.n, "Fock photon count (integer)");
    sub->add_option("--mean-photon", s.mean_photon, "mean photon number <n> instead of --alpha/--r (photons)");
    sub->add_option("--phi", s.phi, "phase of alpha (coherent) or of the squeezing zeta (squeezed), rad");
    sub->add_option("--dim", s.dim, "Fock truncation D, or auto (levels)");
    sub->add_option("--tail-tol", s.tail_tol, "max population allowed in the top two Fock levels (probability)");
}

void add_output_flags(CLI::App* sub, OutputFlags& o, bool csv = true)
{
    std::vector<std::string> fmts = {"table", "json"};
    if (csv) fmts.push_back("csv");
    sub->add_option("--format", o.format, csv ? "output format: table, json or csv" : "output format: table or json")
        ->check(CLI::IsMember(fmts));
    sub->add_option("--out", o.out, "write to this file instead of stdout (path)");
}

StateSpec build_state(const StateFlags& s)
{
    const std::string fam = s.state == "squeezed" ? "squeezed_vacuum" : s.state;
    const auto reject = [&](bool present, const char* flag) {
        if (present) throw UsageError{flag, std::string("does not apply to --state ") + s.state,
                                      std::string("drop ") + flag + " or choose a family that uses it"};
    };
    if (fam == "coherent") {
        reject(s.r.has_value(), "--r");
        reject(s.n.has_value(), "--n");
        if (s.alpha.has_value() == s.mean_photon.has_value()) {
            throw UsageError{"--alpha", "coherent input needs exactly one of --alpha and --mean-photon",
                             "pass e.g. --alpha 2"};
        }
        if (s.alpha) {
            if (*s.alpha < 0.0) throw UsageError{"--alpha", "must be >= 0", "give |alpha| and put the phase in --phi"};
            return StateSpec::coherent(std::polar(*s.alpha, s.phi));
        }
        return StateSpec::with_mean_photon(Family::coherent, *s.mean_photon, s.phi);
    }
    if (fam == "squeezed_vacuum") {
        reject(s.alpha.has_value(), "--alpha");
        reject(s.n.has_value(), "--n");
        if (s.r.has_value() == s.mean_photon.has_value()) {
            throw UsageError{"--r", "squeezed input needs exactly one of --r and --mean-photon", "pass e.g. --r 1"};
        }
        if (s.r) {
            if (*s.r < 0.0) throw UsageError{"--r", "must be >= 0", "use --phi for the squeezing direction"};
            return StateSpec::squeezed_vacuum(*s.r, s.phi);
        }
        return StateSpec::with_mean_photon(Family::squeezed_vacuum, *s.mean_photon, s.phi);
    }
    reject(s.alpha.has_value(), "--alpha");
    reject(s.r.has_value(), "--r");
    reject(s.mean_photon.has_value(), "--mean-photon");
    if (!s.n) throw UsageError{"--n", "Fock input needs a photon count", "pass e.g. --n 2"};
    if (*s.n < 0) throw UsageError{"--n", "must be >= 0", "pass a non-negative photon count"};
    return StateSpec::fock(*s.n);
}

std::optional<int> parse_dim(const std::string& text)
{
    if (text == "auto") return std::nullopt;
    std::size_t used = 0;
    int d = 0;
    try {
        d = std::stoi(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() || text.empty()) throw UsageError{"--dim", "'" + text + "' is not an integer", "pass --dim auto or e.g. --dim 64"};
    if (d < kMinDim) throw UsageError{"--dim", "must be >= " + std::to_string(kMinDim), "pass a larger --dim or auto"};
    return d;
}

Absorbance read_epsilon(double eps)
{
    if (!(eps >= 0.0) || !std::isfinite(eps)) throw UsageError{"--epsilon", "must be finite and >= 0", "pass e.g. --epsilon 1e-3"};
    return Absorbance(eps);
}

EvalOptions base_options(const StateFlags& s)
{
    if (!(s.tail_tol > 0.0 && s.tail_tol < 1.0)) throw UsageError{"--tail-tol", "must lie in (0, 1)", "pass e.g. --tail-tol 1e-6"};
    EvalOptions o;
    o.dim = parse_dim(s.dim);
    o.tail_tol = s.tail_tol;
    return o;
}

LossKind read_loss(const std::string& s) { return parse_loss(s); }

Measurement read_measure(const std::string& measure, const std::string& theta)
{
    try {
        if (measure == "quadrature") return Measurement::parse("quadrature(" + theta + ")");
        return Measurement::parse(measure);
    } catch (const InvalidSpec& e) {
        throw UsageError{"--measure", e.what(), "pass e.g. --measure quadrature --theta 0, or --measure photon_number"};
    }
}

// --- output -------------------------------------------------------------------

void emit_fields(const ojson& fields, const OutputFlags& o, std::ostream& out)
{
    std::ofstream file;
    std::ostream* os = &out;
    if (!o.out.empty()) {
        file.open(o.out, std::ios::binary);
        if (!file) throw IoError("cannot open '" + o.out + "' for writing");
        os = &file;
    }
    if (o.format == "json") {
        *os << fields.dump(2) << '\n';
    } else if (o.format == "csv") {
        bool first = true;
        for (const auto& [k, v] : fields.items()) {
            if (v.is_structured()) continue;
            *os << (first ? "" : ",") << k;
            first = false;
        }
        *os << '\n';
        first = true;
        for (const auto& [k, v] : fields.items()) {
            if (v.is_structured()) continue;
            *os << (first ? "" : ",") << cell_text(v, true);
            first = false;
        }
        *os << '\n';
    } else {
        std::size_t width = 0;
        std::vector<std::pair<std::string, std::string>> rows;
        for (const auto& [k, v] : fields.items()) {
            if (v.is_array()) {
                for (std::size_t i = 0; i < v.size(); ++i) rows.emplace_back(k + "[" + std::to_string(i) + "]", cell_text(v[i]));
            } else {
                rows.emplace_back(k, cell_text(v));
            }
        }
        for (const auto& [k, v] : rows) width = std::max(width, k.size());
        for (const auto& [k, v] : rows) *os << k << std::string(width + 2 - k.size(), ' ') << v << '\n';
    }
    os->flush();
    if (!*os) throw IoError("failed writing output");
}

ojson state_fields(const StateSpec& spec)
{
    ojson j;
    j["family"] = family_name(spec.family());
    j["param"] = spec.primary_param();
    j["mean_photon"] = spec.mean_photon();
    return j;
}

ojson record_fields(const FisherRecord& rec)
{
    ojson j = state_fields(rec.spec);
    j["epsilon"] = rec.epsilon.value();
    j["measurement"] = rec.measurement.name();
    j["value"] = rec.value;
    j["dim"] = rec.dim;
    for (const auto& [k, v] : rec.diagnostics) j[k] = v;
    return j;
}

// --- subcommands --------------------------------------------------------------

struct Common {
    StateFlags state;
    OutputFlags output;
    double epsilon = 0.0;
    std::string loss = "tpa";
};

void add_common(CLI::App* sub, Common& c)
{
    add_state_flags(sub, c.state);
    sub->add_option("--epsilon", c.epsilon, "absorbance eps = gamma_TPA * t (dimensionless, >= 0)");
    sub->add_option("--loss", c.loss, "loss channel: tpa (L = a^2/sqrt2) or single_photon (L = a)")
        ->check(CLI::IsMember({"tpa", "single_photon"}));
    add_output_flags(sub, c.output);
}

EvalOptions common_options(const Common& c)
{
    EvalOptions o = base_options(c.state);
    o.loss = read_loss(c.loss);
    return o;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Two-photon absorption metrology: Fisher information, phase space and parameter sweeps", "tpa"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", std::string(kEngineVersion));

    // evolve
    Common ev;
    int show_pops = 0;
    auto* evolve = app.add_subcommand("evolve", "propagate the input state to absorbance eps and report photon statistics");
    add_common(evolve, ev);
    evolve->add_option("--populations", show_pops, "number of Fock populations P_n to list (levels)");

    // qfi
    Common qf;
    double cutoff = kDefaultSldCutoff;
    auto* qfi = app.add_subcommand("qfi", "quantum Fisher information about eps");
    add_common(qfi, qf);
    qfi->add_option("--cutoff", cutoff, "eigenvalue-sum cutoff for the SLD (probability)");

    // cfi
    Common cf;
    std::string measure = "photon_number", theta = "0";
    double floor = kDefaultProbabilityFloor, half_width = 10.0;
    int grid_points = 2001;
    auto* cfi = app.add_subcommand("cfi", "classical Fisher information of one measurement");
    add_common(cfi, cf);
    cfi->add_option("--measure", measure,
                    "photon_number, quadrature, mean_photon_sensitivity (gives Delta eps^2), or quadrature(<theta>)");
    cfi->add_option("--theta", theta, "homodyne angle, rad; accepts pi forms such as pi/2 (0 = q)");
    cfi->add_option("--floor", floor, "ignore outcomes below this fraction of the peak probability");
    cfi->add_option("--grid-points", grid_points, "homodyne grid samples (odd, >= 101)");
    cfi->add_option("--grid-sd", half_width, "homodyne grid half-width in standard deviations of P(x)");

    // wigner
    Common wg;
    int wpoints = 201;
    std::optional<double> extent;
    auto* wig = app.add_subcommand("wigner", "Wigner function on a square grid, with its negativity volume");
    add_common(wig, wg);
    wig->add_option("--points", wpoints, "grid samples per axis (odd, >= 101)");
    wig->add_option("--extent", extent, "half-width of the square grid in q and p (dimensionless; default 4+7*sqrt(2<n>+1))");
    std::string field_out;
    wig->add_option("--field", field_out, "also write W(q,p) to this path: .csv (q,p,W) or .bin");

    // analytic
    Common an;
    std::optional<double> density, length;
    double g = 1.0;
    auto* ana = app.add_subcommand("analytic", "closed-form eps -> 0 results for the input state");
    add_common(ana, an);
    ana->add_option("--g", g, "second-harmonic coupling g (units of the SHG rate)");
    ana->add_option("--density", density, "absorber number density, for the cross section (1/volume)");
    ana->add_option("--length", length, "interaction length, for the cross section (length)");

    // exponent
    Common ex;
    std::string inner = "quadrature", etheta = "0";
    auto* expo = app.add_subcommand("exponent", "local scaling exponent d log F / d log <n> at the input state");
    add_common(expo, ex);
    expo->add_option("--measure", inner, "Fisher information to differentiate: qfi, photon_number or quadrature");
    expo->add_option("--theta", etheta, "homodyne angle for quadrature, rad");

    // sweep
    std::string preset, config_path, sweep_out, sweep_format;
    unsigned threads = 0;
    auto* swp = app.add_subcommand("sweep", "evaluate a grid of (state, eps, measurement) cells");
    auto* preset_opt = swp->add_option("--preset", preset, "fig2, fig3, fig4, fig5 or appendix_qfi")
                           ->check(CLI::IsMember({"fig2", "fig3", "fig4", "fig5", "appendix_qfi"}));
    auto* config_opt = swp->add_option("--config", config_path, "JSON sweep config (path)");
    preset_opt->excludes(config_opt);
    swp->add_option("--out", sweep_out, "output file; .csv or .json (path). Default: the config's output, else stdout");
    swp->add_option("--format", sweep_format, "table, csv or json; default from the --out extension")
        ->check(CLI::IsMember({"table", "csv", "json"}));
    swp->add_option("--threads", threads, "worker threads (0: TPA_THREADS or all cores)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << kEngineVersion << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        const auto subs = app.get_subcommands();
        const std::string where = subs.empty() ? "tpa --help" : "tpa " + subs.front()->get_name() + " --help";
        err << "usage error: " << e.what() << "\nfix: see '" << where << "' for the accepted flags\n";
        return 2;
    }

    try {
        if (evolve->parsed()) {
            const StateSpec spec = build_state(ev.state);
            const EvalOptions opt = common_options(ev);
            const Absorbance eps = read_epsilon(ev.epsilon);
            const FockBasis basis = basis_for(spec, opt);
            DensityMatrix rho = make_state(spec, basis);
            if (eps.value() > 0.0) rho = propagate(LossGenerator(opt.loss, basis), rho, eps);
            if (show_pops < 0) throw UsageError{"--populations", "must be >= 0", "pass a count such as 10"};
            ojson j = state_fields(spec);
            j["epsilon"] = eps.value();
            j["loss"] = ev.loss;
            j["dim"] = basis.dim();
            j["trace"] = rho.trace();
            j["mean_photon_out"] = rho.mean_photon();
            j["photon_variance_out"] = rho.photon_variance();
            j["photon_flux"] = photon_flux(LossGenerator(opt.loss, basis), rho);
            if (show_pops > 0) {
                ojson pops = ojson::array();
                for (int n = 0; n < std::min(show_pops, basis.dim()); ++n) pops.push_back(rho.population(n));
                j["populations"] = pops;
            }
            emit_fields(j, ev.output, out);
            return 0;
        }
        if (qfi->parsed()) {
            const StateSpec spec = build_state(qf.state);
            EvalOptions opt = common_options(qf);
            if (!(cutoff > 0.0)) throw UsageError{"--cutoff", "must be > 0", "pass e.g. --cutoff 1e-10"};
            opt.cutoff = cutoff;
            emit_fields(record_fields(evaluate(spec, read_epsilon(qf.epsilon), {MeasurementKind::qfi}, opt)), qf.output, out);
            return 0;
        }
        if (cfi->parsed()) {
            const StateSpec spec = build_state(cf.state);
            EvalOptions opt = common_options(cf);
            if (!(floor >= 0.0 && floor < 1.0)) throw UsageError{"--floor", "must lie in [0, 1)", "pass e.g. --floor 1e-14"};
            if (grid_points < 101 || grid_points % 2 == 0) throw UsageError{"--grid-points", "must be odd and >= 101", "pass e.g. --grid-points 2001"};
            if (!(half_width >= 8.0)) throw UsageError{"--grid-sd", "must be >= 8", "pass e.g. --grid-sd 10"};
            opt.floor = floor;
            opt.grid_points = grid_points;
            opt.grid_half_width_sd = half_width;
            const Measurement m = read_measure(measure, theta);
            if (m.kind == MeasurementKind::qfi || m.kind == MeasurementKind::negativity || m.kind == MeasurementKind::exponent) {
                throw UsageError{"--measure", "'" + m.name() + "' is not a measurement", "use the qfi, wigner or exponent subcommand"};
            }
            emit_fields(record_fields(evaluate(spec, read_epsilon(cf.epsilon), m, opt)), cf.output, out);
            return 0;
        }
        if (wig->parsed()) {
            const StateSpec spec = build_state(wg.state);
            EvalOptions opt = common_options(wg);
            opt.tail_tol = std::min(opt.tail_tol, kPhaseSpaceTailTol);
            if (wpoints < 101 || wpoints % 2 == 0) throw UsageError{"--points", "must be odd and >= 101", "pass e.g. --points 201"};
            if (extent && !(*extent > 0.0)) throw UsageError{"--extent", "must be > 0", "omit it for the default"};
            const Absorbance eps = read_epsilon(wg.epsilon);
            const FockBasis basis = basis_for(spec, opt);
            DensityMatrix rho = make_state(spec, basis);
            if (eps.value() > 0.0) rho = propagate(LossGenerator(opt.loss, basis), rho, eps);
            const QuadratureGrid grid = extent ? QuadratureGrid(-*extent, *extent, wpoints)
                                               : default_phase_space_grid(spec.mean_photon(), wpoints);
            const PhaseSpaceField f = wigner(rho, grid, grid);
            ojson j = state_fields(spec);
            j["epsilon"] = eps.value();
            j["dim"] = basis.dim();
            j["grid_half_width"] = grid.max();
            j["grid_points"] = grid.points();
            j["negativity"] = negativity_volume(f);
            j["wigner_min"] = f.values.minCoeff();
            j["wigner_max"] = f.values.maxCoeff();
            if (!field_out.empty()) {
                const bool bin = field_out.size() >= 4 && field_out.compare(field_out.size() - 4, 4, ".bin") == 0;
                std::ofstream fo(field_out, std::ios::binary);
                if (!fo) throw IoError("cannot open '" + field_out + "' for writing");
                if (bin) write_binary(f, fo);
                else write_csv(f, fo);
                if (!fo) throw IoError("failed writing '" + field_out + "'");
            }
            emit_fields(j, wg.output, out);
            return 0;
        }
        if (ana->parsed()) {
            const StateSpec spec = build_state(an.state);
            const Absorbance eps = read_epsilon(an.epsilon);
            if (spec.family() == Family::fock) {
                throw UnsupportedFamily("closed forms exist for coherent and squeezed_vacuum input only");
            }
            ojson j = state_fields(spec);
            const double n = spec.mean_photon();
            if (spec.family() == Family::coherent) {
                j["qfi"] = qfi_coherent_exact(n);
                j["cfi_quadrature_aligned"] = cfi_quad_coherent(n, CoherentAxis::aligned);
                j["cfi_quadrature_orthogonal"] = cfi_quad_coherent(n, CoherentAxis::orthogonal);
                j["dvar_mean_photon"] = dvar_photon_coherent(n);
            } else {
                const double r = spec.as<SqueezedParams>().r;
                j["cfi_quadrature_squeezed"] = cfi_quad_squeezed(r, SqueezedAxis::squeezed_q);
                j["cfi_quadrature_antisqueezed"] = cfi_quad_squeezed(r, SqueezedAxis::antisqueezed_p);
                j["dvar_mean_photon"] = dvar_photon_squeezed(n);
            }
            j["shg_qfi"] = shg_qfi(spec, g);
            j["epsilon"] = eps.value();
            j["mean_photon_first_order"] = mean_photon_first_order(spec, eps);
            if (density.has_value() != length.has_value()) {
                throw UsageError{density ? "--length" : "--density", "the cross section needs both --density and --length",
                                 "pass both, or neither"};
            }
            if (density) j["cross_section"] = cross_section({eps.value(), *density, *length});
            emit_fields(j, an.output, out);
            return 0;
        }
        if (expo->parsed()) {
            const StateSpec spec = build_state(ex.state);
            const EvalOptions opt = common_options(ex);
            const Measurement base = read_measure(inner, etheta);
            if (base.kind == MeasurementKind::negativity || base.kind == MeasurementKind::exponent) {
                throw UsageError{"--measure", "'" + base.name() + "' has no scaling exponent", "use qfi, photon_number or quadrature"};
            }
            emit_fields(record_fields(evaluate(spec, read_epsilon(ex.epsilon), Measurement::exponent_of(base), opt)),
                        ex.output, out);
            return 0;
        }
        if (swp->parsed()) {
            SweepConfig config;
            if (!preset.empty()) {
                config = preset_config(parse_preset(preset));
                config.output.clear();
            } else if (!config_path.empty()) {
                std::ifstream in(config_path);
                if (!in) throw UsageError{"--config", "cannot read '" + config_path + "'", "check the path"};
                nlohmann::json doc;
                try {
                    in >> doc;
                } catch (const nlohmann::json::exception& e) {
                    throw UsageError{"--config", std::string("not valid JSON: ") + e.what(), "fix the config file syntax"};
                }
                config = sweep_config_from_json(doc);
            } else {
                throw UsageError{"--preset", "sweep needs --preset or --config", "pass e.g. --preset fig2"};
            }
            const std::string path = sweep_out.empty() ? config.output : sweep_out;
            std::string format = sweep_format;
            if (format.empty()) {
                const auto ext = path.rfind('.') == std::string::npos ? std::string() : path.substr(path.rfind('.'));
                if (path.empty()) format = "table";
                else if (ext == ".csv" || ext == ".json") format = ext.substr(1);
                else throw UsageError{"--out", "cannot infer a format from '" + path + "'", "use a .csv or .json path, or pass --format"};
            }
            if (format == "table" && !path.empty()) {
                throw UsageError{"--format", "table output goes to stdout only", "use --format csv or json with --out"};
            }
            const SweepResult result = run_sweep(config, threads);

            std::ofstream file;
            std::ostream* os = &out;
            if (!path.empty()) {
                file.open(path, std::ios::binary);
                if (!file) throw IoError("cannot open '" + path + "' for writing");
                os = &file;
            }
            if (format == "csv") {
                write_csv(result, *os);
            } else if (format == "json") {
                write_json(result, *os);
            } else {
                *os << kCsvHeader << '\n';
                for (const auto& r : result.records) {
                    *os << r.family << ' ' << fmt12(r.param) << ' ' << fmt12(r.mean_photon) << ' ' << fmt12(r.epsilon)
                        << ' ' << r.measurement << ' ' << fmt12(r.value) << ' ' << r.dim << ' ' << r.status << '\n';
                }
            }
            std::size_t failed = 0;
            for (const auto& r : result.records) failed += r.status != "ok";
            if (!path.empty()) {
                out << "wrote " << result.records.size() << " records (" << failed << " failed) to " << path << '\n';
            }
            return 0;
        }
    } catch (const UsageError& u) {
        err << "usage error: " << u.flag << ": " << u.problem << "\nfix: " << u.fix << '\n';
        return 2;
    } catch (const ConfigError& e) {
        err << "usage error: " << e.what() << "\nfix: correct the sweep config\n";
        return 2;
    } catch (const InvalidSpec& e) {
        err << "usage error: " << e.what() << "\nfix: check the state and absorbance flags\n";
        return 2;
    } catch (const Error& e) {
        err << "error [" << e.gate() << "]: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error [internal]: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace tpa
