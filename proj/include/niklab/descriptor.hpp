#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "niklab/nikishin.hpp"

namespace niklab {

using json = nlohmann::json;

// Measure descriptor: { kind, interval, alpha, beta, sign, point_masses[] }.
inline json measure_to_json(const MeasurePtr& m) {
    if (m->kind() != Measure::Kind::WeightedInterval)
        throw Error("only interval-backed measures are serializable");
    json j;
    j["kind"] = "jacobi";
    j["interval"] = {m->interval().a, m->interval().b};
    j["alpha"] = m->jacobi_alpha();
    j["beta"] = m->jacobi_beta();
    j["sign"] = m->sign();
    j["point_masses"] = json::array();
    for (const auto& p : m->point_masses()) j["point_masses"].push_back({p.location, p.mass});
    return j;
}

inline MeasurePtr measure_from_json(const json& j) {
    if (!j.is_object() || j.value("kind", "") != "jacobi")
        throw ValidationError("measure descriptor must have kind 'jacobi'");
    if (!j.contains("interval") || !j["interval"].is_array() || j["interval"].size() != 2)
        throw ValidationError("measure descriptor needs interval: [a, b]");
    double a = j["interval"][0].get<double>();
    double b = j["interval"][1].get<double>();
    double alpha = j.value("alpha", 0.0);
    double beta = j.value("beta", 0.0);
    double sgn = j.value("sign", 1.0);
    std::vector<PointMass> pm;
    if (j.contains("point_masses"))
        for (const auto& e : j["point_masses"])
            pm.push_back(PointMass{e.at(0).get<double>(), e.at(1).get<double>()});
    try {
        return Measure::jacobi(Interval(a, b), alpha, beta, sgn, nullptr, std::move(pm));
    } catch (const Error& e) {
        throw ValidationError(e.what());
    }
}

// System descriptor: either { base, s1_tail, s2_tail } or { s1, s2 } with
// s1[0] and s2[0] equal; the shared base becomes one object in both chains.
inline MixedSystem system_from_json(const json& j) {
    MeasurePtr base;
    std::vector<MeasurePtr> g1, g2;
    if (j.contains("base")) {
        base = measure_from_json(j["base"]);
        g1.push_back(base);
        g2.push_back(base);
        for (const auto& e : j.value("s1_tail", json::array())) g1.push_back(measure_from_json(e));
        for (const auto& e : j.value("s2_tail", json::array())) g2.push_back(measure_from_json(e));
    } else if (j.contains("s1") && j.contains("s2")) {
        const auto& a1 = j["s1"];
        const auto& a2 = j["s2"];
        if (!a1.is_array() || !a2.is_array() || a1.empty() || a2.empty())
            throw ValidationError("s1 and s2 must be nonempty measure arrays");
        if (a1[0] != a2[0])
            throw ValidationError("sigma_0^1 and sigma_0^2 descriptors differ; the two chains "
                                  "must stem from the same basis measure");
        base = measure_from_json(a1[0]);
        g1.push_back(base);
        g2.push_back(base);
        for (std::size_t i = 1; i < a1.size(); ++i) g1.push_back(measure_from_json(a1[i]));
        for (std::size_t i = 1; i < a2.size(); ++i) g2.push_back(measure_from_json(a2[i]));
    } else {
        throw ValidationError("system descriptor needs either {base, s1_tail, s2_tail} or {s1, s2}");
    }
    try {
        return MixedSystem(NikishinSystem(std::move(g1)), NikishinSystem(std::move(g2)));
    } catch (const Error& e) {
        throw ValidationError(e.what());
    }
}

inline json system_to_json(const MixedSystem& mix) {
    json j;
    j["base"] = measure_to_json(mix.base());
    j["s1_tail"] = json::array();
    j["s2_tail"] = json::array();
    for (int p = 1; p <= mix.m1(); ++p) j["s1_tail"].push_back(measure_to_json(mix.S1().generator(p)));
    for (int p = 1; p <= mix.m2(); ++p) j["s2_tail"].push_back(measure_to_json(mix.S2().generator(p)));
    return j;
}

inline MixedSystem load_descriptor(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open system descriptor: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ParseError(std::string("descriptor parse failure: ") + e.what());
    }
    return system_from_json(j);
}

} // namespace niklab
