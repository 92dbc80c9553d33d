#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "isilab/errors.hpp"
#include "isilab/experiments.hpp"

namespace isilab {

// A parsed run request: the expanded configuration grid plus output options.
struct RunSpec {
    std::vector<ScenarioConfig> configs;
    std::vector<Detector> detectors;
    std::string output_dir;
    nlohmann::json resolved;  // normalized configuration, re-parseable
};

namespace detail {

inline const std::set<std::string>& known_config_keys() {
    static const std::set<std::string> keys{
        "case",       "gamma",      "snr_db",        "L",          "L_hat",
        "sigma2_tap", "delta",      "T",             "T_data",     "num_trials",
        "seed",       "epochs",     "learning_rate", "batch_size", "gmm_components",
        "detectors",  "output_dir"};
    return keys;
}

inline double config_number(const nlohmann::json& j, const std::string& key) {
    if (!j.at(key).is_number()) throw ConfigError(key + ": expected a number");
    return j.at(key).get<double>();
}

inline int config_int(const nlohmann::json& j, const std::string& key) {
    if (!j.at(key).is_number_integer()) throw ConfigError(key + ": expected an integer");
    return j.at(key).get<int>();
}

// Scalar or list of numbers -> list.
inline std::vector<double> config_number_list(const nlohmann::json& j, const std::string& key) {
    const auto& v = j.at(key);
    if (v.is_number()) return {v.get<double>()};
    if (v.is_array() && !v.empty()) {
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) throw ConfigError(key + ": expected numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }
    throw ConfigError(key + ": expected a number or nonempty list");
}

inline std::vector<int> config_int_list(const nlohmann::json& j, const std::string& key) {
    std::vector<int> out;
    for (double v : config_number_list(j, key)) {
        int i = static_cast<int>(v);
        if (static_cast<double>(i) != v) throw ConfigError(key + ": expected integers");
        out.push_back(i);
    }
    return out;
}

}  // namespace detail

inline RunSpec parse_config_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    for (const auto& [key, value] : j.items())
        if (!detail::known_config_keys().count(key)) throw ConfigError("unknown key: " + key);

    if (!j.contains("case")) throw ConfigError("case: required");
    const int case_id = detail::config_int(j, "case");
    if (case_id < 1 || case_id > 6) throw ConfigError("case: must be in 1..6");

    if (!j.contains("gamma")) throw ConfigError("gamma: required");
    const std::vector<double> gammas = detail::config_number_list(j, "gamma");

    ScenarioConfig base;
    base.case_id = case_id;
    base.snr_db = j.contains("snr_db") ? detail::config_number(j, "snr_db") : 5.0;
    base.memory = j.contains("L") ? detail::config_int(j, "L") : 4;
    base.frame_length = j.contains("T") ? detail::config_int(j, "T") : 10000;
    base.training_length = j.contains("T_data") ? detail::config_int(j, "T_data") : 10000;
    base.num_trials = j.contains("num_trials") ? detail::config_int(j, "num_trials") : 20;
    if (j.contains("seed")) {
        const auto& v = j.at("seed");
        if (v.is_number_unsigned())
            base.seed = v.get<std::uint64_t>();
        else if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
            base.seed = static_cast<std::uint64_t>(v.get<std::int64_t>());
        else
            throw ConfigError("seed: expected a nonnegative integer");
    }
    base.epochs = j.contains("epochs") ? detail::config_int(j, "epochs") : 100;
    base.learning_rate =
        j.contains("learning_rate") ? detail::config_number(j, "learning_rate") : 0.01;
    base.batch_size = j.contains("batch_size") ? detail::config_int(j, "batch_size") : 128;
    base.gmm_components =
        j.contains("gmm_components") ? detail::config_int(j, "gmm_components") : 0;

    // variant axes, with case compatibility checked up front
    const bool truncating_case = case_id == 1 || case_id == 6;
    if (j.contains("L_hat") && !truncating_case)
        throw ConfigError("L_hat: only valid for cases 1 and 6");
    std::vector<int> l_hats = j.contains("L_hat") ? detail::config_int_list(j, "L_hat")
                                                  : std::vector<int>{base.memory};

    if (j.contains("sigma2_tap") && (case_id == 1 || case_id == 2))
        throw ConfigError("sigma2_tap: only valid for cases 3-6");
    if (!j.contains("sigma2_tap") && (case_id == 3 || case_id == 4 || case_id == 5))
        throw ConfigError("sigma2_tap: required for cases 3-5");
    std::vector<double> sigma2s;
    if (j.contains("sigma2_tap"))
        sigma2s = detail::config_number_list(j, "sigma2_tap");
    else
        sigma2s = {case_id == 6 ? 0.05 : 0.0};

    if (j.contains("delta") && case_id != 2) throw ConfigError("delta: only valid for case 2");
    if (!j.contains("delta") && case_id == 2) throw ConfigError("delta: required for case 2");
    std::vector<double> deltas =
        j.contains("delta") ? detail::config_number_list(j, "delta") : std::vector<double>{0.0};
    for (double d : deltas)
        if (!(d >= 0.0 && d < 1.0)) throw ConfigError("delta: must lie in [0, 1)");

    RunSpec spec;
    if (j.contains("detectors")) {
        const auto& d = j.at("detectors");
        if (!d.is_array() || d.empty()) throw ConfigError("detectors: expected a nonempty list");
        bool conventional = false, bcjrnet = false;
        for (const auto& e : d) {
            const std::string name = e.is_string() ? e.get<std::string>() : "";
            if (name == "conventional")
                conventional = true;
            else if (name == "bcjrnet")
                bcjrnet = true;
            else
                throw ConfigError("detectors: unknown detector '" + name + "'");
        }
        if (conventional) spec.detectors.push_back(Detector::Conventional);
        if (bcjrnet) spec.detectors.push_back(Detector::BcjrNet);
    } else {
        spec.detectors = {Detector::Conventional, Detector::BcjrNet};
    }

    if (j.contains("output_dir")) {
        if (!j.at("output_dir").is_string()) throw ConfigError("output_dir: expected a string");
        spec.output_dir = j.at("output_dir").get<std::string>();
    } else if (const char* env = std::getenv("ISILAB_OUTPUT_DIR"); env && *env) {
        spec.output_dir = env;
    } else {
        spec.output_dir = "results";
    }

    // Cartesian grid over the list-valued axes
    for (double gamma : gammas)
        for (int l_hat : l_hats)
            for (double sigma2 : sigma2s)
                for (double delta : deltas) {
                    ScenarioConfig c = base;
                    c.gamma = gamma;
                    c.assumed_memory = l_hat;
                    c.tap_variance = sigma2;
                    c.calibration_delta = delta;
                    c.validate();
                    spec.configs.push_back(c);
                }

    nlohmann::json resolved;
    resolved["case"] = case_id;
    resolved["gamma"] = gammas;
    resolved["snr_db"] = base.snr_db;
    resolved["L"] = base.memory;
    if (truncating_case) resolved["L_hat"] = l_hats;
    if (case_id >= 3) resolved["sigma2_tap"] = sigma2s;
    if (case_id == 2) resolved["delta"] = deltas;
    resolved["T"] = base.frame_length;
    resolved["T_data"] = base.training_length;
    resolved["num_trials"] = base.num_trials;
    resolved["seed"] = base.seed;
    resolved["epochs"] = base.epochs;
    resolved["learning_rate"] = base.learning_rate;
    resolved["batch_size"] = base.batch_size;
    if (base.gmm_components > 0) resolved["gmm_components"] = base.gmm_components;
    resolved["detectors"] = nlohmann::json::array();
    for (Detector d : spec.detectors) resolved["detectors"].push_back(detector_name(d));
    resolved["output_dir"] = spec.output_dir;
    spec.resolved = std::move(resolved);
    return spec;
}

inline RunSpec parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config: " + path.string() + " is not valid JSON (" + e.what() + ")");
    }
    return parse_config_json(j);
}

}  // namespace isilab
