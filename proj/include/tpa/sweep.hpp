#pragma once

// Declarative parameter grids over (state, ε, measurement), evaluated cell
// by cell, exported as CSV or JSON.

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tpa/fisher.hpp"

namespace tpa {

inline constexpr const char* kEngineVersion = "0.1.0";
inline constexpr const char* kCsvHeader = "family,param,mean_photon,epsilon,measurement,value,dim,status";

enum class Preset { fig2, fig3, fig4, fig5, appendix_qfi };

std::string preset_name(Preset p);
Preset parse_preset(const std::string& name);

/// One swept family. `phase` is arg α for coherent states and φ for squeezed
/// vacuum; Fock states ignore it.
struct FamilyTemplate {
    Family family;
    double phase = 0.0;
};

/// Whether `params` are mean photon numbers or the family's own parameter
/// (|α|, r, n).
enum class ParamAxis { mean_photon, native };

struct SweepConfig {
    std::vector<FamilyTemplate> families;
    ParamAxis axis = ParamAxis::mean_photon;
    std::vector<double> params;
    std::vector<double> epsilons;
    std::vector<Measurement> measurements;
    EvalOptions options;
    std::string output;
    std::optional<Preset> preset;

    /// Throws ConfigError on empty grids, negative ε, non-positive photon
    /// numbers or Fock counts that are not whole numbers.
    void validate() const;
};

SweepConfig preset_config(Preset p);

/// n points from lo to hi inclusive, log-spaced (lo, hi > 0).
std::vector<double> log_grid(double lo, double hi, int n);
std::vector<double> linear_grid(double lo, double hi, int n);

/// Reads the structured config document. Keys: preset, families
/// [{family, phase}], axis ("mean_photon"|"native"), params, epsilons
/// (each a list or {"log"|"linear": [lo, hi, n]}), measurements, dim
/// ("auto"|int), tail_tol, cutoff, floor, grid_points, grid_half_width_sd,
/// wigner_points, loss ("tpa"|"single_photon"), output. With a preset, the
/// remaining keys override its fields. Unknown keys are a ConfigError.
SweepConfig sweep_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SweepConfig& config);

/// FNV-1a 64 of the canonical JSON form, as 16 hex digits.
std::string config_hash(const SweepConfig& config);

struct SweepRecord {
    std::string family;
    double param = 0.0;
    double mean_photon = 0.0;
    double epsilon = 0.0;
    std::string measurement;
    double value = 0.0;
    int dim = 0;
    std::string status = "ok"; // or "<gate>_error"
    std::map<std::string, double> diagnostics;

    bool operator==(const SweepRecord&) const = default;
};

struct Provenance {
    std::string config_hash;
    std::string engine_version = kEngineVersion;
    std::string timestamp; // ISO 8601 UTC

    bool operator==(const Provenance&) const = default;
};

struct SweepResult {
    Provenance provenance;
    std::vector<SweepRecord> records;
};

/// Evaluates every (family, param, ε, measurement) cell, in that nesting
/// order. Cells that fail a numerical gate carry value 0 and status
/// "<gate>_error"; they are never dropped. Work is spread over
/// `threads` workers (0: TPA_THREADS or the hardware concurrency).
/// SOURCE_DATE_EPOCH, when set, fixes the provenance timestamp.
SweepResult run_sweep(const SweepConfig& config, unsigned threads = 0);

unsigned default_thread_count();

/// Throw IoError on an empty result or a failing stream.
void write_csv(const SweepResult& result, std::ostream& out);
void write_json(const SweepResult& result, std::ostream& out);
nlohmann::json to_json(const SweepResult& result);
SweepResult sweep_result_from_json(const nlohmann::json& j);
SweepResult read_json(std::istream& in);

/// Writes by extension (.csv or .json).
void export_result(const SweepResult& result, const std::string& path);

} // namespace tpa
