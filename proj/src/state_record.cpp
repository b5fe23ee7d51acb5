#include "tpa/state_record.hpp"

#include <set>

namespace tpa {

FockBasis StateRecord::basis() const
{
    return dim ? FockBasis(*dim, tail_tol) : auto_basis(spec, tail_tol);
}

nlohmann::json to_json(const StateRecord& record)
{
    nlohmann::json j;
    j["family"] = family_name(record.spec.family());
    switch (record.spec.family()) {
    case Family::coherent: {
        const Complex a = record.spec.as<CoherentParams>().alpha;
        j["alpha_re"] = a.real();
        j["alpha_im"] = a.imag();
        break;
    }
    case Family::squeezed_vacuum:
        j["r"] = record.spec.as<SqueezedParams>().r;
        j["phi"] = record.spec.as<SqueezedParams>().phi;
        break;
    case Family::fock:
        j["n"] = record.spec.as<FockParams>().n;
        break;
    }
    if (record.dim) j["dim"] = *record.dim;
    j["tail_tol"] = record.tail_tol;
    return j;
}

StateRecord state_record_from_json(const nlohmann::json& j)
{
    if (!j.is_object()) throw InvalidSpec("state record must be an object");
    static const std::set<std::string> known = {"family", "alpha_re", "alpha_im", "r",
                                                "phi",    "n",        "dim",      "tail_tol"};
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) throw InvalidSpec("unknown state record key '" + key + "'");
    }
    if (!j.contains("family")) throw InvalidSpec("state record lacks 'family'");
    const Family family = parse_family(j.at("family").get<std::string>());

    auto reject = [&](std::initializer_list<const char*> keys) {
        for (const char* k : keys) {
            if (j.contains(k)) {
                throw InvalidSpec(std::string("key '") + k + "' does not apply to family " +
                                  family_name(family));
            }
        }
    };

    StateRecord rec;
    try {
        switch (family) {
        case Family::coherent:
            reject({"r", "phi", "n"});
            rec.spec = StateSpec::coherent({j.value("alpha_re", 0.0), j.value("alpha_im", 0.0)});
            break;
        case Family::squeezed_vacuum:
            reject({"alpha_re", "alpha_im", "n"});
            if (!j.contains("r")) throw InvalidSpec("squeezed_vacuum record lacks 'r'");
            rec.spec = StateSpec::squeezed_vacuum(j.at("r").get<double>(), j.value("phi", 0.0));
            break;
        case Family::fock:
            reject({"alpha_re", "alpha_im", "r", "phi"});
            if (!j.contains("n")) throw InvalidSpec("fock record lacks 'n'");
            rec.spec = StateSpec::fock(j.at("n").get<int>());
            break;
        }
        if (j.contains("dim")) rec.dim = j.at("dim").get<int>();
        rec.tail_tol = j.value("tail_tol", kDefaultTailTol);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidSpec(std::string("malformed state record: ") + e.what());
    }
    // Validate dim/tail_tol now; auto dimensioning is resolved by basis().
    (void)FockBasis(rec.dim.value_or(kMinDim), rec.tail_tol);
    return rec;
}

} // namespace tpa
