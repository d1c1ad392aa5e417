// JSON and CSV serialization for the computed artifacts: eigenpairs,
// truncation spectra, and vorticity fields.  JSON uses round-trip double
// formatting, so parse(serialize(x)) reproduces x exactly.

#pragma once

#include <complex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "alphaflow/dispersion.hpp"
#include "alphaflow/fields.hpp"
#include "alphaflow/oracle.hpp"

namespace alphaflow {

using nlohmann::json;

inline OrbitClass orbit_class_from_string(const std::string& s) {
    if (s == "0") return OrbitClass::Type0;
    if (s == "I0") return OrbitClass::TypeI0;
    if (s == "I+") return OrbitClass::TypeIPlus;
    if (s == "I-") return OrbitClass::TypeIMinus;
    if (s == "II") return OrbitClass::TypeII;
    throw std::invalid_argument("unknown orbit class: " + s);
}

inline json eigenpair_to_json(const Eigenpair& pair) {
    return json{{"lambda_star", pair.lambda_star},
                {"class", to_string(pair.klass)},
                {"n_lo", pair.n_lo},
                {"n_hi", pair.n_hi},
                {"residual", pair.residual},
                {"decay_rate", pair.decay_rate},
                {"w", pair.w},
                {"z", pair.z}};
}

inline Eigenpair eigenpair_from_json(const json& j) {
    Eigenpair pair;
    pair.lambda_star = j.at("lambda_star").get<double>();
    pair.klass = orbit_class_from_string(j.at("class").get<std::string>());
    pair.n_lo = j.at("n_lo").get<long long>();
    pair.n_hi = j.at("n_hi").get<long long>();
    pair.residual = j.at("residual").get<double>();
    pair.decay_rate = j.at("decay_rate").get<double>();
    pair.w = j.at("w").get<std::vector<double>>();
    pair.z = j.at("z").get<std::vector<double>>();
    return pair;
}

inline json spectrum_to_json(const SpectrumReport& report) {
    json eigs = json::array();
    for (const auto& ev : report.eigenvalues) eigs.push_back({{"re", ev.real()}, {"im", ev.imag()}});
    return json{{"eigenvalues", std::move(eigs)},
                {"max_real_part", report.max_real_part},
                {"band_radius", report.band_radius},
                {"symmetry_defect", report.symmetry_defect}};
}

inline SpectrumReport spectrum_from_json(const json& j) {
    SpectrumReport report;
    for (const auto& e : j.at("eigenvalues"))
        report.eigenvalues.emplace_back(e.at("re").get<double>(), e.at("im").get<double>());
    report.max_real_part = j.at("max_real_part").get<double>();
    report.band_radius = j.at("band_radius").get<double>();
    report.symmetry_defect = j.at("symmetry_defect").get<double>();
    return report;
}

inline std::string spectrum_to_csv(const SpectrumReport& report) {
    std::ostringstream out;
    out.precision(17);
    out << "re,im\n";
    for (const auto& ev : report.eigenvalues) out << ev.real() << ',' << ev.imag() << '\n';
    return out.str();
}

// The mode list serializes as [{k: [k1, k2], re, im}, ...]; radius and the
// reality flag ride along so the field reconstructs exactly.
inline json field_to_json(const VorticityField& field) {
    json modes = json::array();
    for (const auto& [k, v] : field.modes)
        modes.push_back({{"k", k}, {"re", v.real()}, {"im", v.imag()}});
    return json{{"radius", field.radius}, {"physical", field.physical}, {"modes", std::move(modes)}};
}

inline VorticityField field_from_json(const json& j) {
    VorticityField field(j.at("radius").get<double>(), j.at("physical").get<bool>());
    for (const auto& m : j.at("modes")) {
        const Vec2 k = m.at("k").get<Vec2>();
        field.modes[k] = {m.at("re").get<double>(), m.at("im").get<double>()};
    }
    return field;
}

inline std::string field_to_csv(const VorticityField& field) {
    std::ostringstream out;
    out.precision(17);
    out << "k1,k2,re,im\n";
    for (const auto& [k, v] : field.modes)
        out << k[0] << ',' << k[1] << ',' << v.real() << ',' << v.imag() << '\n';
    return out.str();
}

} // namespace alphaflow
