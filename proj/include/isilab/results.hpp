#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "isilab/errors.hpp"
#include "isilab/experiments.hpp"
#include "isilab/version.hpp"

namespace isilab {

enum class OutputFormat { Csv, Json };

struct RunManifest {
    std::string version = kToolVersion;
    nlohmann::json resolved_config;
    std::uint64_t seed = 0;
    double duration_seconds = 0.0;
    std::vector<TrialResult> results;
};

namespace detail {

inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// Which variant columns a case reports; the others stay empty.
inline bool case_reports_l_hat(int case_id) { return case_id == 1 || case_id == 6; }
inline bool case_reports_sigma2(int case_id) { return case_id >= 3; }
inline bool case_reports_delta(int case_id) { return case_id == 2; }

inline void sort_results(std::vector<TrialResult>& results) {
    std::stable_sort(results.begin(), results.end(),
                     [](const TrialResult& a, const TrialResult& b) {
                         return std::make_tuple(a.case_id, std::string(detector_name(a.detector)),
                                                a.gamma, a.assumed_memory, a.tap_variance,
                                                a.calibration_delta) <
                                std::make_tuple(b.case_id, std::string(detector_name(b.detector)),
                                                b.gamma, b.assumed_memory, b.tap_variance,
                                                b.calibration_delta);
                     });
}

}  // namespace detail

inline constexpr const char* kResultsCsvHeader =
    "case,detector,gamma,l_hat,sigma2_tap,delta,snr_db,symbols,errors,ser,ci95,seed";

// Rows sorted by (case, detector, gamma, variant); numeric fields use six
// significant digits; inapplicable variant columns are left empty.
inline std::string results_csv(std::vector<TrialResult> results) {
    detail::sort_results(results);
    std::string out = kResultsCsvHeader;
    out += '\n';
    for (const TrialResult& r : results) {
        out += std::to_string(r.case_id);
        out += ',';
        out += detector_name(r.detector);
        out += ',';
        out += detail::format_number(r.gamma);
        out += ',';
        if (detail::case_reports_l_hat(r.case_id)) out += std::to_string(r.assumed_memory);
        out += ',';
        if (detail::case_reports_sigma2(r.case_id)) out += detail::format_number(r.tap_variance);
        out += ',';
        if (detail::case_reports_delta(r.case_id))
            out += detail::format_number(r.calibration_delta);
        out += ',';
        out += detail::format_number(r.snr_db);
        out += ',';
        out += std::to_string(r.symbols);
        out += ',';
        out += std::to_string(r.errors);
        out += ',';
        out += detail::format_number(r.ser);
        out += ',';
        out += detail::format_number(r.ci95_halfwidth);
        out += ',';
        out += std::to_string(r.seed);
        out += '\n';
    }
    return out;
}

inline nlohmann::json result_to_json(const TrialResult& r) {
    nlohmann::json j;
    j["case"] = r.case_id;
    j["detector"] = detector_name(r.detector);
    j["gamma"] = r.gamma;
    if (detail::case_reports_l_hat(r.case_id)) j["l_hat"] = r.assumed_memory;
    if (detail::case_reports_sigma2(r.case_id)) j["sigma2_tap"] = r.tap_variance;
    if (detail::case_reports_delta(r.case_id)) j["delta"] = r.calibration_delta;
    j["snr_db"] = r.snr_db;
    j["symbols"] = r.symbols;
    j["errors"] = r.errors;
    j["ser"] = r.ser;
    j["ci95"] = r.ci95_halfwidth;
    j["seed"] = r.seed;
    return j;
}

inline nlohmann::json manifest_to_json(const RunManifest& manifest) {
    nlohmann::json j;
    j["version"] = manifest.version;
    j["seed"] = manifest.seed;
    j["duration_seconds"] = manifest.duration_seconds;
    j["config"] = manifest.resolved_config;
    std::vector<TrialResult> sorted = manifest.results;
    detail::sort_results(sorted);
    j["results"] = nlohmann::json::array();
    for (const TrialResult& r : sorted) j["results"].push_back(result_to_json(r));
    return j;
}

// Writes results.csv (or results.json) plus manifest.json into `dir`.
inline void write_results(const RunManifest& manifest, const std::filesystem::path& dir,
                          OutputFormat format) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("write_results: cannot create " + dir.string());

    const auto manifest_path = dir / "manifest.json";
    std::ofstream mout(manifest_path);
    if (!mout) throw ConfigError("write_results: cannot write " + manifest_path.string());
    mout << manifest_to_json(manifest).dump(1) << '\n';

    if (format == OutputFormat::Csv) {
        const auto csv_path = dir / "results.csv";
        std::ofstream out(csv_path);
        if (!out) throw ConfigError("write_results: cannot write " + csv_path.string());
        out << results_csv(manifest.results);
    } else {
        const auto json_path = dir / "results.json";
        std::ofstream out(json_path);
        if (!out) throw ConfigError("write_results: cannot write " + json_path.string());
        std::vector<TrialResult> sorted = manifest.results;
        detail::sort_results(sorted);
        nlohmann::json rows = nlohmann::json::array();
        for (const TrialResult& r : sorted) rows.push_back(result_to_json(r));
        out << rows.dump(1) << '\n';
    }
}

}  // namespace isilab
