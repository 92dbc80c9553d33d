// Command-line front end: runs scenario grids, trains and reuses detector
// providers, and cross-checks the detector against exhaustive enumeration.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "isilab/isilab.hpp"

namespace {

int default_threads() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

void apply_overrides(isilab::RunSpec& spec, const std::optional<std::uint64_t>& seed,
                     const std::string& output_dir) {
    if (seed) {
        for (auto& config : spec.configs) config.seed = *seed;
        spec.resolved["seed"] = *seed;
    }
    if (!output_dir.empty()) {
        spec.output_dir = output_dir;
        spec.resolved["output_dir"] = output_dir;
    }
}

std::string variant_label(const isilab::TrialResult& r) {
    std::string label;
    if (r.case_id == 1 || r.case_id == 6) label += " L_hat=" + std::to_string(r.assumed_memory);
    if (r.case_id >= 3) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), " sigma2=%g", r.tap_variance);
        label += buf;
    }
    if (r.case_id == 2) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), " delta=%g", r.calibration_delta);
        label += buf;
    }
    return label;
}

void print_results(const std::vector<isilab::TrialResult>& results) {
    for (const auto& r : results) {
        std::printf("case %d %-12s gamma=%-4g%s: ser=%.6g +/- %.2g (%lld/%lld)\n", r.case_id,
                    isilab::detector_name(r.detector), r.gamma, variant_label(r).c_str(), r.ser,
                    r.ci95_halfwidth, static_cast<long long>(r.errors),
                    static_cast<long long>(r.symbols));
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MAP symbol detection laboratory for ISI/AWGN channels"};
    app.require_subcommand(1);

    std::string config_path;
    std::string provider_path;
    std::string output_dir;
    std::string format = "csv";
    std::optional<std::uint64_t> seed;
    int threads = default_threads();

    auto add_common = [&](CLI::App* cmd, bool with_format) {
        cmd->add_option("--seed", seed, "Override the configuration seed");
        cmd->add_option("--threads", threads, "Worker threads for Monte-Carlo trials");
        cmd->add_option("--output-dir", output_dir, "Override the output directory");
        if (with_format)
            cmd->add_option("--format", format, "Results file format")
                ->check(CLI::IsMember({"csv", "json"}));
    };

    CLI::App* run_cmd = app.add_subcommand("run", "Run a scenario grid and write results");
    run_cmd->add_option("config", config_path, "JSON run configuration")->required();
    add_common(run_cmd, true);

    CLI::App* train_cmd =
        app.add_subcommand("train", "Train and serialize detector providers only");
    train_cmd->add_option("config", config_path, "JSON run configuration")->required();
    add_common(train_cmd, false);

    CLI::App* detect_cmd =
        app.add_subcommand("detect", "Detect with a previously trained provider");
    detect_cmd->add_option("config", config_path, "JSON run configuration (single point)")
        ->required();
    detect_cmd->add_option("--provider", provider_path, "Serialized provider artifact")
        ->required();
    add_common(detect_cmd, true);

    int oracle_length = 6;
    int oracle_memory = 2;
    int oracle_instances = 200;
    std::uint64_t oracle_seed = 20260808;
    CLI::App* oracle_cmd = app.add_subcommand(
        "oracle", "Cross-check the detector against exhaustive enumeration");
    oracle_cmd->add_option("T", oracle_length, "Frame length (small)")->required();
    oracle_cmd->add_option("L", oracle_memory, "Channel memory (small)")->required();
    oracle_cmd->add_option("--instances", oracle_instances, "Random instances to check");
    oracle_cmd->add_option("--seed", oracle_seed, "Instance seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(oracle_cmd)) {
            double deviation = isilab::oracle_max_deviation(oracle_instances, oracle_length,
                                                            oracle_memory, oracle_seed);
            std::printf("max posterior deviation over %d instances (T=%d, L=%d): %.3g\n",
                        oracle_instances, oracle_length, oracle_memory, deviation);
            if (deviation > 1e-9) {
                std::fprintf(stderr, "deviation exceeds 1e-9\n");
                return 1;
            }
            return 0;
        }

        isilab::RunSpec spec = isilab::parse_config(config_path);
        apply_overrides(spec, seed, output_dir);
        const std::filesystem::path out_dir = spec.output_dir;

        if (app.got_subcommand(train_cmd)) {
            const auto cache_dir = out_dir / "providers";
            for (const auto& config : spec.configs) {
                isilab::obtain_provider(config, cache_dir);
                std::printf("provider %s (gamma=%g, L_hat=%d)\n",
                            (cache_dir / isilab::provider_cache_name(config)).string().c_str(),
                            config.gamma, config.assumed_memory);
            }
            return 0;
        }

        const isilab::OutputFormat out_format =
            format == "json" ? isilab::OutputFormat::Json : isilab::OutputFormat::Csv;

        if (app.got_subcommand(detect_cmd)) {
            if (spec.configs.size() != 1)
                throw isilab::ConfigError(
                    "detect: configuration must resolve to a single grid point");
            auto provider = isilab::load_provider(provider_path);
            isilab::RunManifest manifest;
            manifest.resolved_config = spec.resolved;
            manifest.seed = spec.configs.front().seed;
            const auto start = std::chrono::steady_clock::now();
            manifest.results.push_back(
                isilab::run_bcjrnet(spec.configs.front(), provider, threads));
            manifest.duration_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            isilab::write_results(manifest, out_dir, out_format);
            print_results(manifest.results);
            return 0;
        }

        // run
        isilab::RunManifest manifest =
            isilab::run_grid(spec, threads, out_dir / "providers");
        isilab::write_results(manifest, out_dir, out_format);
        print_results(manifest.results);
        const char* results_file = out_format == isilab::OutputFormat::Csv ? "results.csv"
                                                                           : "results.json";
        std::printf("wrote %s in %.1fs\n", (out_dir / results_file).string().c_str(),
                    manifest.duration_seconds);
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
