// Versioned JSON persistence for code specifications, with a stable content
// hash over the canonical serialization.
//
// Schema (version 1):
//   { "version": 1, "n": 512, "s": 9, "bit_reversed": true,
//     "info_set": [..0-based..], "t": 4, "field_poly": 19, "taus": [..],
//     "design": { "channel": "awgn:2.0", "trials": 100000, "seed": 1 } }
//
// A polar-only spec carries t = 0 and an empty taus array. bit_reversed=true
// means info_set uses decode-order indices (the library's internal
// convention); false means natural transform order, relabeled on load.
#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rspolar/concat.hpp"
#include "rspolar/polar.hpp"

namespace rspolar {

struct DesignInfo {
    std::string channel;
    long trials = 0;
    std::uint64_t seed = 0;
};

struct CodeSpecFile {
    int version = 1;
    PolarCode polar;
    int t = 0;                    // 0 = polar-only
    std::uint32_t field_poly = 0; // 0 = conventional default for t
    std::vector<int> taus;
    DesignInfo design;

    bool is_concat() const { return t != 0; }

    ConcatCode to_concat() const {
        if (!is_concat()) throw std::runtime_error("spec is polar-only, no outer codes");
        return ConcatCode(polar, Field::get(t, field_poly), taus);
    }

    static CodeSpecFile from_concat(const ConcatCode& code, DesignInfo design = {}) {
        CodeSpecFile f;
        f.polar = code.polar;
        f.t = code.t;
        f.field_poly = code.field->primitive_poly();
        f.taus = code.taus();
        f.design = std::move(design);
        return f;
    }

    static CodeSpecFile from_polar(const PolarCode& code, DesignInfo design = {}) {
        CodeSpecFile f;
        f.polar = code;
        f.design = std::move(design);
        return f;
    }
};

inline nlohmann::json spec_to_json(const CodeSpecFile& spec) {
    nlohmann::json j;
    j["version"] = spec.version;
    j["n"] = spec.polar.n;
    j["s"] = spec.polar.s;
    j["bit_reversed"] = true;
    j["info_set"] = spec.polar.info_set;
    j["t"] = spec.t;
    j["field_poly"] = spec.field_poly;
    j["taus"] = spec.taus;
    j["design"] = {{"channel", spec.design.channel},
                   {"trials", spec.design.trials},
                   {"seed", spec.design.seed}};
    return j;
}

// FNV-1a 64 over the canonical (key-sorted) dump.
inline std::string spec_hash(const CodeSpecFile& spec) {
    std::string dump = spec_to_json(spec).dump();
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

namespace detail {
[[noreturn]] inline void spec_error(const std::string& field, const std::string& why) {
    throw std::runtime_error("code spec: field '" + field + "': " + why);
}

template <typename T>
T spec_get(const nlohmann::json& j, const char* field) {
    if (!j.contains(field)) spec_error(field, "missing");
    try {
        return j.at(field).get<T>();
    } catch (const nlohmann::json::exception& e) {
        spec_error(field, e.what());
    }
}
} // namespace detail

inline CodeSpecFile spec_from_json(const nlohmann::json& j) {
    CodeSpecFile spec;
    spec.version = detail::spec_get<int>(j, "version");
    if (spec.version != 1) detail::spec_error("version", "unsupported version");
    int n = detail::spec_get<int>(j, "n");
    int s = detail::spec_get<int>(j, "s");
    if (s < 1 || s > 30 || n != (1 << s)) detail::spec_error("n", "n must equal 2^s");
    auto info = detail::spec_get<std::vector<int>>(j, "info_set");
    bool bit_reversed = detail::spec_get<bool>(j, "bit_reversed");
    if (!bit_reversed)
        for (int& idx : info) idx = bit_reverse(idx, s);
    std::sort(info.begin(), info.end());
    try {
        spec.polar = PolarCode(s, std::move(info));
    } catch (const std::invalid_argument& e) {
        detail::spec_error("info_set", e.what());
    }
    spec.t = detail::spec_get<int>(j, "t");
    spec.field_poly = detail::spec_get<std::uint32_t>(j, "field_poly");
    spec.taus = detail::spec_get<std::vector<int>>(j, "taus");
    if (spec.t != 0) {
        if (spec.t < 2 || spec.t > 12) detail::spec_error("t", "t must be in [2,12] (or 0 for polar-only)");
        if (spec.polar.k() % spec.t != 0) detail::spec_error("t", "t must divide k");
        if (static_cast<int>(spec.taus.size()) != spec.polar.k() / spec.t)
            detail::spec_error("taus", "need exactly k/t entries");
        const int m = (1 << spec.t) - 1;
        for (int tau : spec.taus)
            if (tau < 0 || 2 * tau >= m) detail::spec_error("taus", "each tau must satisfy 0 <= 2*tau < m");
        try {
            Field::get(spec.t, spec.field_poly);
        } catch (const std::invalid_argument& e) {
            detail::spec_error("field_poly", e.what());
        }
    } else if (!spec.taus.empty()) {
        detail::spec_error("taus", "must be empty for a polar-only spec");
    }
    if (j.contains("design")) {
        const auto& d = j.at("design");
        spec.design.channel = d.value("channel", std::string{});
        spec.design.trials = d.value("trials", 0L);
        spec.design.seed = d.value("seed", std::uint64_t{0});
    }
    return spec;
}

inline void save_spec(const CodeSpecFile& spec, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << spec_to_json(spec).dump(2) << '\n';
}

inline CodeSpecFile load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("code spec: parse error in '" + path + "': " + e.what());
    }
    return spec_from_json(j);
}

} // namespace rspolar
