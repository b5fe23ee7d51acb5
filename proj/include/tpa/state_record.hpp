#pragma once

// Flat key/value form of a StateSpec plus its basis choice, as used in
// config files and on the command line.

#include <optional>

#include "json.hpp"
#include "tpa/fock.hpp"

namespace tpa {

struct StateRecord {
    StateSpec spec = StateSpec::fock(0);
    std::optional<int> dim; // empty: auto_basis
    double tail_tol = kDefaultTailTol;

    FockBasis basis() const;
};

/// Keys: family, alpha_re, alpha_im, r, phi, n, dim, tail_tol. Only the keys
/// of the record's own family are written.
nlohmann::json to_json(const StateRecord& record);
/// Rejects unknown keys and parameters that belong to another family.
StateRecord state_record_from_json(const nlohmann::json& j);

} // namespace tpa
