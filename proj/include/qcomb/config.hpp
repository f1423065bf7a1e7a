#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qcomb/comb.hpp"
#include "qcomb/constants.hpp"
#include "qcomb/snr.hpp"

namespace qcomb {

using json = nlohmann::ordered_json;

/// Everything a CLI run needs. Values are SI at this boundary (W, s, m) and
/// squeezing gains are in dB; conversion to the linear internal conventions
/// happens exactly once, in `scenario_from_config` and the scan driver.
struct RunConfig {
    struct ProtocolSel {
        std::string receiver = "division";  // heterodyne | division
        std::string squeezing = "cross";    // none | intra | cross
    } protocol;

    struct Comb {
        int lines = 1001;
        double power_w = 0.015;
        double duration_s = 1.0;
        double wavelength_m = 1.563e-6;
    } comb;

    std::string constraint = "sample";  // sample | detector

    struct Squeezing {
        double gain_a_db = 15.0;
        double gain_b_db = 15.0;
    } squeezing;

    struct Sample {
        int line = 7;
        double kappa = 1.0;
        double theta = 0.0;
        double temperature_k = 0.0;        // 0 disables the thermal environment
        std::optional<double> thermal_occupation;  // explicit override of E
    } sample;

    /// Optional full per-line sample, keyed by line index on top of a
    /// transparent background; when present, `snr` reports this sample at the
    /// beat index sample.line instead of the single-line scenario.
    struct LineOverride {
        double kappa = 1.0;
        double theta = 0.0;
        double thermal = 0.0;
    };
    std::map<int, LineOverride> sample_lines;

    struct PowerSplit {
        double fraction = 0.5;  // A^2 / (A^2 + B^2)
        bool strong_lo = false;
        bool optimize = false;
    } power_split;

    struct Scan {
        std::vector<double> kappa;
        std::vector<double> gain_db;
        std::vector<int> lines;
        std::vector<double> fraction;
        std::vector<std::string> protocols;    // e.g. "heterodyne+intra"
        std::vector<std::string> constraints;  // sample | detector
    } scan;

    struct Output {
        std::string csv;
        std::string json_path;
    } output;

    uint64_t seed = 1;

    struct Oracle {
        int n_half = 6;
        int mc_samples = 10000;
        double tolerance_rel = 1e-9;
    } oracle;
};

namespace detail {

inline void check_keys(const json& j, const std::string& section,
                       std::initializer_list<const char*> allowed) {
    if (!j.is_object())
        throw std::invalid_argument("config: section '" + section + "' must be an object");
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok)
            throw std::invalid_argument("config: unknown key '" + section +
                                        (section.empty() ? "" : ".") + key + "'");
    }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<T>();
}

}  // namespace detail

inline ReceiverKind receiver_from_string(const std::string& s) {
    if (s == "heterodyne") return ReceiverKind::HeterodyneSubtraction;
    if (s == "division") return ReceiverKind::DivisionReceiver;
    throw std::invalid_argument("config: unknown receiver '" + s +
                                "' (expected heterodyne or division)");
}

inline SqueezingStructure structure_from_string(const std::string& s, ReceiverKind receiver) {
    if (s == "none" || s == "classical") return SqueezingStructure::Classical;
    if (s == "intra") return intra_structure(receiver);
    if (s == "cross") return SqueezingStructure::CrossLineEntangled;
    throw std::invalid_argument("config: unknown squeezing '" + s +
                                "' (expected none, intra or cross)");
}

inline ConstraintKind constraint_from_string(const std::string& s) {
    if (s == "sample") return ConstraintKind::SamplePower;
    if (s == "detector") return ConstraintKind::DetectorPower;
    throw std::invalid_argument("config: unknown constraint '" + s +
                                "' (expected sample or detector)");
}

/// Parse "receiver+squeezing" protocol labels used in scan configs.
inline Protocol protocol_from_label(const std::string& label) {
    const auto plus = label.find('+');
    if (plus == std::string::npos)
        throw std::invalid_argument("config: protocol label '" + label +
                                    "' must look like receiver+squeezing");
    const ReceiverKind receiver = receiver_from_string(label.substr(0, plus));
    return Protocol{receiver, structure_from_string(label.substr(plus + 1), receiver)};
}

inline RunConfig config_from_json(const json& j) {
    detail::check_keys(j, "", {"protocol", "comb", "constraint", "squeezing", "sample",
                               "sample_lines", "power_split", "scan", "output", "seed",
                               "oracle"});
    RunConfig c;
    if (j.contains("protocol")) {
        const json& p = j.at("protocol");
        detail::check_keys(p, "protocol", {"receiver", "squeezing"});
        c.protocol.receiver = detail::get_or<std::string>(p, "receiver", c.protocol.receiver);
        c.protocol.squeezing = detail::get_or<std::string>(p, "squeezing", c.protocol.squeezing);
    }
    if (j.contains("comb")) {
        const json& p = j.at("comb");
        detail::check_keys(p, "comb", {"lines", "power_w", "duration_s", "wavelength_m"});
        c.comb.lines = detail::get_or<int>(p, "lines", c.comb.lines);
        c.comb.power_w = detail::get_or<double>(p, "power_w", c.comb.power_w);
        c.comb.duration_s = detail::get_or<double>(p, "duration_s", c.comb.duration_s);
        c.comb.wavelength_m = detail::get_or<double>(p, "wavelength_m", c.comb.wavelength_m);
    }
    if (j.contains("constraint")) c.constraint = j.at("constraint").get<std::string>();
    if (j.contains("squeezing")) {
        const json& p = j.at("squeezing");
        detail::check_keys(p, "squeezing", {"gain_a_db", "gain_b_db"});
        c.squeezing.gain_a_db = detail::get_or<double>(p, "gain_a_db", c.squeezing.gain_a_db);
        c.squeezing.gain_b_db = detail::get_or<double>(p, "gain_b_db", c.squeezing.gain_b_db);
    }
    if (j.contains("sample")) {
        const json& p = j.at("sample");
        detail::check_keys(p, "sample",
                           {"line", "kappa", "theta", "temperature_k", "thermal_occupation"});
        c.sample.line = detail::get_or<int>(p, "line", c.sample.line);
        c.sample.kappa = detail::get_or<double>(p, "kappa", c.sample.kappa);
        c.sample.theta = detail::get_or<double>(p, "theta", c.sample.theta);
        c.sample.temperature_k = detail::get_or<double>(p, "temperature_k", c.sample.temperature_k);
        if (p.contains("thermal_occupation"))
            c.sample.thermal_occupation = p.at("thermal_occupation").get<double>();
    }
    if (j.contains("sample_lines")) {
        const json& p = j.at("sample_lines");
        if (!p.is_object())
            throw std::invalid_argument("config: sample_lines must map line indexes to objects");
        for (const auto& [key, value] : p.items()) {
            int line = 0;
            try {
                line = std::stoi(key);
            } catch (...) {
                throw std::invalid_argument("config: sample_lines key '" + key +
                                            "' is not a line index");
            }
            detail::check_keys(value, "sample_lines." + key, {"kappa", "theta", "thermal"});
            RunConfig::LineOverride over;
            over.kappa = detail::get_or<double>(value, "kappa", 1.0);
            over.theta = detail::get_or<double>(value, "theta", 0.0);
            over.thermal = detail::get_or<double>(value, "thermal", 0.0);
            c.sample_lines[line] = over;
        }
    }
    if (j.contains("power_split")) {
        const json& p = j.at("power_split");
        detail::check_keys(p, "power_split", {"fraction", "strong_lo", "optimize"});
        c.power_split.fraction = detail::get_or<double>(p, "fraction", c.power_split.fraction);
        c.power_split.strong_lo = detail::get_or<bool>(p, "strong_lo", c.power_split.strong_lo);
        c.power_split.optimize = detail::get_or<bool>(p, "optimize", c.power_split.optimize);
    }
    if (j.contains("scan")) {
        const json& p = j.at("scan");
        detail::check_keys(p, "scan",
                           {"kappa", "gain_db", "lines", "fraction", "protocols", "constraints"});
        c.scan.kappa = detail::get_or<std::vector<double>>(p, "kappa", {});
        c.scan.gain_db = detail::get_or<std::vector<double>>(p, "gain_db", {});
        c.scan.lines = detail::get_or<std::vector<int>>(p, "lines", {});
        c.scan.fraction = detail::get_or<std::vector<double>>(p, "fraction", {});
        c.scan.protocols = detail::get_or<std::vector<std::string>>(p, "protocols", {});
        c.scan.constraints = detail::get_or<std::vector<std::string>>(p, "constraints", {});
    }
    if (j.contains("output")) {
        const json& p = j.at("output");
        detail::check_keys(p, "output", {"csv", "json"});
        c.output.csv = detail::get_or<std::string>(p, "csv", "");
        c.output.json_path = detail::get_or<std::string>(p, "json", "");
    }
    if (j.contains("seed")) c.seed = j.at("seed").get<uint64_t>();
    if (j.contains("oracle")) {
        const json& p = j.at("oracle");
        detail::check_keys(p, "oracle", {"n_half", "mc_samples", "tolerance_rel"});
        c.oracle.n_half = detail::get_or<int>(p, "n_half", c.oracle.n_half);
        c.oracle.mc_samples = detail::get_or<int>(p, "mc_samples", c.oracle.mc_samples);
        c.oracle.tolerance_rel = detail::get_or<double>(p, "tolerance_rel", c.oracle.tolerance_rel);
    }
    return c;
}

/// Validate the cross-module invariants a run relies on; throws naming the
/// offending key.
inline void validate_config(const RunConfig& c) {
    receiver_from_string(c.protocol.receiver);
    structure_from_string(c.protocol.squeezing, receiver_from_string(c.protocol.receiver));
    constraint_from_string(c.constraint);
    if (c.comb.lines < 3 || c.comb.lines % 2 == 0)
        throw std::invalid_argument("config: comb.lines must be odd and >= 3");
    if (c.comb.power_w <= 0.0) throw std::invalid_argument("config: comb.power_w must be > 0");
    if (c.comb.duration_s <= 0.0)
        throw std::invalid_argument("config: comb.duration_s must be > 0");
    if (c.comb.wavelength_m <= 0.0)
        throw std::invalid_argument("config: comb.wavelength_m must be > 0");
    if (c.squeezing.gain_a_db < 0.0 || c.squeezing.gain_b_db < 0.0)
        throw std::invalid_argument("config: squeezing gains must be >= 0 dB");
    const int n_half = c.comb.lines / 2;
    if (c.sample.line == 0 || std::abs(c.sample.line) > n_half)
        throw std::invalid_argument("config: sample.line must satisfy 0 < |line| <= lines/2");
    if (c.sample.kappa < 0.0 || c.sample.kappa > 1.0)
        throw std::invalid_argument("config: sample.kappa must lie in [0, 1]");
    if (c.sample.temperature_k < 0.0)
        throw std::invalid_argument("config: sample.temperature_k must be >= 0");
    if (c.sample.thermal_occupation && *c.sample.thermal_occupation < 0.0)
        throw std::invalid_argument("config: sample.thermal_occupation must be >= 0");
    for (const auto& [line, over] : c.sample_lines) {
        if (std::abs(line) > n_half)
            throw std::invalid_argument("config: sample_lines index " + std::to_string(line) +
                                        " exceeds lines/2");
        if (over.kappa < 0.0 || over.kappa > 1.0)
            throw std::invalid_argument("config: sample_lines kappa must lie in [0, 1]");
        if (over.thermal < 0.0)
            throw std::invalid_argument("config: sample_lines thermal must be >= 0");
    }
    if (c.power_split.fraction <= 0.0 || c.power_split.fraction >= 1.0)
        throw std::invalid_argument("config: power_split.fraction must lie in (0, 1)");
    for (double k : c.scan.kappa)
        if (k < 0.0 || k > 1.0)
            throw std::invalid_argument("config: scan.kappa values must lie in [0, 1]");
    for (double g : c.scan.gain_db)
        if (g < 0.0) throw std::invalid_argument("config: scan.gain_db values must be >= 0");
    for (int m : c.scan.lines)
        if (m < 3 || m % 2 == 0)
            throw std::invalid_argument("config: scan.lines values must be odd and >= 3");
    for (double f : c.scan.fraction)
        if (f <= 0.0 || f >= 1.0)
            throw std::invalid_argument("config: scan.fraction values must lie in (0, 1)");
    for (const auto& p : c.scan.protocols) protocol_from_label(p);
    for (const auto& s : c.scan.constraints) constraint_from_string(s);
    if (c.oracle.n_half < 1 || c.oracle.n_half > 12)
        throw std::invalid_argument("config: oracle.n_half must lie in [1, 12]");
    if (c.oracle.mc_samples != 0 && c.oracle.mc_samples < 1000)
        throw std::invalid_argument("config: oracle.mc_samples must be 0 or >= 1000");
    if (c.oracle.tolerance_rel <= 0.0)
        throw std::invalid_argument("config: oracle.tolerance_rel must be > 0");
}

inline json config_to_json(const RunConfig& c) {
    json j;
    j["protocol"] = {{"receiver", c.protocol.receiver}, {"squeezing", c.protocol.squeezing}};
    j["comb"] = {{"lines", c.comb.lines},
                 {"power_w", c.comb.power_w},
                 {"duration_s", c.comb.duration_s},
                 {"wavelength_m", c.comb.wavelength_m}};
    j["constraint"] = c.constraint;
    j["squeezing"] = {{"gain_a_db", c.squeezing.gain_a_db}, {"gain_b_db", c.squeezing.gain_b_db}};
    j["sample"] = {{"line", c.sample.line},
                   {"kappa", c.sample.kappa},
                   {"theta", c.sample.theta},
                   {"temperature_k", c.sample.temperature_k}};
    if (c.sample.thermal_occupation)
        j["sample"]["thermal_occupation"] = *c.sample.thermal_occupation;
    if (!c.sample_lines.empty()) {
        json lines = json::object();
        for (const auto& [line, over] : c.sample_lines)
            lines[std::to_string(line)] = {
                {"kappa", over.kappa}, {"theta", over.theta}, {"thermal", over.thermal}};
        j["sample_lines"] = lines;
    }
    j["power_split"] = {{"fraction", c.power_split.fraction},
                        {"strong_lo", c.power_split.strong_lo},
                        {"optimize", c.power_split.optimize}};
    json scan;
    if (!c.scan.kappa.empty()) scan["kappa"] = c.scan.kappa;
    if (!c.scan.gain_db.empty()) scan["gain_db"] = c.scan.gain_db;
    if (!c.scan.lines.empty()) scan["lines"] = c.scan.lines;
    if (!c.scan.fraction.empty()) scan["fraction"] = c.scan.fraction;
    if (!c.scan.protocols.empty()) scan["protocols"] = c.scan.protocols;
    if (!c.scan.constraints.empty()) scan["constraints"] = c.scan.constraints;
    if (!scan.empty()) j["scan"] = scan;
    json output;
    if (!c.output.csv.empty()) output["csv"] = c.output.csv;
    if (!c.output.json_path.empty()) output["json"] = c.output.json_path;
    if (!output.empty()) j["output"] = output;
    j["seed"] = c.seed;
    j["oracle"] = {{"n_half", c.oracle.n_half},
                   {"mc_samples", c.oracle.mc_samples},
                   {"tolerance_rel", c.oracle.tolerance_rel}};
    return j;
}

/// Parse the flat INI flavor: [section] headers, key = value lines, values in
/// JSON syntax where they are not bare strings, comments with '#' or ';'.
inline json ini_to_json(std::istream& in) {
    json root = json::object();
    json* section = &root;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line.erase(comment);
        auto ltrim = line.find_first_not_of(" \t\r");
        if (ltrim == std::string::npos) continue;
        auto rtrim = line.find_last_not_of(" \t\r");
        line = line.substr(ltrim, rtrim - ltrim + 1);
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config: bad section header at line " +
                                            std::to_string(lineno));
            const std::string name = line.substr(1, line.size() - 2);
            root[name] = json::object();
            section = &root[name];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key = value at line " +
                                        std::to_string(lineno));
        std::string key = line.substr(0, eq);
        key.erase(key.find_last_not_of(" \t") + 1);
        std::string value = line.substr(eq + 1);
        value.erase(0, value.find_first_not_of(" \t"));
        json parsed = json::parse(value, nullptr, false);
        if (parsed.is_discarded()) parsed = value;  // bare string
        (*section)[key] = parsed;
    }
    return root;
}

inline RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    json j;
    if (first != std::string::npos && text[first] == '{') {
        j = json::parse(text);
    } else {
        std::istringstream ini(text);
        j = ini_to_json(ini);
    }
    RunConfig c = config_from_json(j);
    validate_config(c);
    return c;
}

/// Materialize the per-line overrides over a transparent background.
inline SampleSpec sample_from_overrides(const RunConfig& c) {
    const int n_half = c.comb.lines / 2;
    SampleSpec sample = SampleSpec::transparent(n_half);
    for (const auto& [line, over] : c.sample_lines) {
        sample.set_line(line, over.kappa, over.theta);
        sample.thermal[static_cast<size_t>(line + n_half)] = over.thermal;
    }
    return sample;
}

// ---------------------------------------------------------------------------
// Presets pinning the reference comb (M = 1001 lines, P = 15 mW exposure,
// lambda = 1563 nm, T = 1 s, 15 dB gains).
// ---------------------------------------------------------------------------

/// Quantum-over-classical advantage of all four protocols against the
/// single-line transmissivity, symmetric combs.
inline RunConfig fig2_config() {
    RunConfig c;
    c.constraint = "sample";
    c.power_split.fraction = 0.5;
    c.scan.kappa.resize(101);
    for (int i = 0; i <= 100; ++i) c.scan.kappa[static_cast<size_t>(i)] = i / 100.0;
    c.scan.protocols = {"heterodyne+intra", "heterodyne+cross", "division+intra",
                        "division+cross"};
    return c;
}

/// Absolute SNRs of the entangled-comb protocols and their classical
/// baselines under both power constraints, optimized splits (strong LO for
/// the sample-constrained heterodyne rows).
inline RunConfig fig3_config() {
    RunConfig c;
    c.power_split.fraction = 0.5;
    c.power_split.strong_lo = true;
    c.scan.kappa.resize(101);
    for (int i = 0; i <= 100; ++i) c.scan.kappa[static_cast<size_t>(i)] = i / 100.0;
    c.scan.protocols = {"heterodyne+cross", "division+cross"};
    c.scan.gain_db = {15.0, 0.0};
    c.scan.constraints = {"sample", "detector"};
    return c;
}

}  // namespace qcomb
