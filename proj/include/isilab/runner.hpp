#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <string>

#include "isilab/config.hpp"
#include "isilab/experiments.hpp"
#include "isilab/neural.hpp"
#include "isilab/results.hpp"

namespace isilab {

inline std::string provider_cache_name(const ScenarioConfig& config) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx.json",
                  static_cast<unsigned long long>(config.training_fingerprint()));
    return buf;
}

// Loads a cached provider whose fingerprint matches the configuration, or
// trains one (and caches it when a cache directory is given).
inline NeuralLikelihoodProvider obtain_provider(const ScenarioConfig& config,
                                                const std::filesystem::path& cache_dir) {
    if (!cache_dir.empty()) {
        const auto path = cache_dir / provider_cache_name(config);
        if (std::filesystem::exists(path)) {
            NeuralLikelihoodProvider cached = load_provider(path);
            if (cached.training_fingerprint == config.training_fingerprint() &&
                cached.trellis.memory() == config.assumed_memory)
                return cached;
        }
    }
    NeuralLikelihoodProvider provider = train_provider(config);
    if (!cache_dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(cache_dir, ec);
        if (!ec) save_provider(provider, cache_dir / provider_cache_name(config));
    }
    return provider;
}

// Executes every (configuration, detector) pair of a run request. Thread
// count affects scheduling only; results are keyed on configuration seeds.
inline RunManifest run_grid(const RunSpec& spec, int threads,
                            const std::filesystem::path& provider_cache = {}) {
    const auto start = std::chrono::steady_clock::now();
    RunManifest manifest;
    manifest.resolved_config = spec.resolved;
    manifest.seed = spec.configs.empty() ? 0 : spec.configs.front().seed;
    for (const ScenarioConfig& config : spec.configs) {
        for (Detector detector : spec.detectors) {
            if (detector == Detector::Conventional) {
                manifest.results.push_back(run_conventional(config, threads));
            } else {
                NeuralLikelihoodProvider provider = obtain_provider(config, provider_cache);
                manifest.results.push_back(run_bcjrnet(config, provider, threads));
            }
        }
    }
    manifest.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return manifest;
}

}  // namespace isilab
