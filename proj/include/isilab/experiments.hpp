#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "isilab/bcjr.hpp"
#include "isilab/channel.hpp"
#include "isilab/errors.hpp"
#include "isilab/likelihood.hpp"
#include "isilab/neural.hpp"
#include "isilab/parallel.hpp"
#include "isilab/rng.hpp"
#include "isilab/trellis.hpp"

namespace isilab {

enum class Detector { Conventional, BcjrNet };

inline const char* detector_name(Detector d) {
    return d == Detector::Conventional ? "conventional" : "bcjrnet";
}

// One point of the study grid. The six cases pair a transmission channel with
// an estimated/training channel:
//   1  exp decay           | exp decay truncated to assumed_memory
//   2  exp decay           | exp decay with per-symbol calibrated gamma
//   3  exp decay           | per-symbol tap noise on the exp profile
//   4  per-symbol tap noise| exp decay (the mean profile)
//   5  per-symbol tap noise| independent per-symbol tap noise, same variance
//   6  per-symbol tap noise| independent tap noise truncated to assumed_memory
// Every generated profile is normalized row by row.
struct ScenarioConfig {
    int case_id = 0;
    double gamma = 1.0;
    double snr_db = 5.0;
    int memory = 4;             // true channel memory L
    int assumed_memory = 4;     // memory of the estimated/training channel
    double tap_variance = 0.0;  // per-tap Gaussian uncertainty (cases 3-6)
    double calibration_delta = 0.0;  // gamma error half-width (case 2)
    int frame_length = 10000;        // symbols per Monte-Carlo trial
    int training_length = 10000;     // labeled pairs for the learned detector
    int num_trials = 20;
    std::uint64_t seed = 1;
    int epochs = 100;
    double learning_rate = 0.01;
    int batch_size = 128;
    int gmm_components = 0;  // 0 = one component per channel state

    void validate() const {
        if (case_id < 1 || case_id > 6) throw ConfigError("case: must be in 1..6");
        if (!std::isfinite(gamma) || gamma < 0.0) throw ConfigError("gamma: must be >= 0");
        if (memory < 1 || memory > 20) throw ConfigError("L: must be in 1..20");
        if (assumed_memory < 1 || assumed_memory > memory)
            throw ConfigError("L_hat: must satisfy 1 <= L_hat <= L");
        if ((case_id >= 2 && case_id <= 5) && assumed_memory != memory)
            throw ConfigError("L_hat: only cases 1 and 6 may truncate the memory");
        if (case_id == 2) {
            if (!(calibration_delta >= 0.0 && calibration_delta < 1.0))
                throw ConfigError("delta: must lie in [0, 1)");
        } else if (calibration_delta != 0.0) {
            throw ConfigError("delta: only valid for case 2");
        }
        if (case_id >= 3) {
            if (!std::isfinite(tap_variance) || tap_variance < 0.0)
                throw ConfigError("sigma2_tap: must be >= 0");
        } else if (tap_variance != 0.0) {
            throw ConfigError("sigma2_tap: only valid for cases 3-6");
        }
        if (frame_length < memory) throw ConfigError("T: must be >= L");
        if (training_length < assumed_memory) throw ConfigError("T_data: must be >= L_hat");
        if (num_trials < 1) throw ConfigError("num_trials: must be >= 1");
        if (epochs < 1) throw ConfigError("epochs: must be >= 1");
        if (!(learning_rate > 0.0)) throw ConfigError("learning_rate: must be > 0");
        if (batch_size < 1) throw ConfigError("batch_size: must be >= 1");
        if (gmm_components < 0) throw ConfigError("gmm_components: must be >= 0");
        if (!std::isfinite(snr_db)) throw ConfigError("snr_db: must be finite");
    }

    int effective_gmm_components() const {
        return gmm_components > 0 ? gmm_components : (1 << assumed_memory);
    }

    // Hash of everything the trained artifact depends on.
    std::uint64_t training_fingerprint() const {
        auto h = rng::mix64(0x69736c61ULL);
        auto fold = [&h](std::uint64_t v) { h = rng::mix64(h ^ rng::mix64(v)); };
        fold(static_cast<std::uint64_t>(case_id));
        fold(std::bit_cast<std::uint64_t>(gamma));
        fold(std::bit_cast<std::uint64_t>(snr_db));
        fold(static_cast<std::uint64_t>(memory));
        fold(static_cast<std::uint64_t>(assumed_memory));
        fold(std::bit_cast<std::uint64_t>(tap_variance));
        fold(std::bit_cast<std::uint64_t>(calibration_delta));
        fold(static_cast<std::uint64_t>(training_length));
        fold(static_cast<std::uint64_t>(epochs));
        fold(std::bit_cast<std::uint64_t>(learning_rate));
        fold(static_cast<std::uint64_t>(batch_size));
        fold(static_cast<std::uint64_t>(effective_gmm_components()));
        fold(seed);
        return h;
    }
};

struct TrialResult {
    int case_id = 0;
    Detector detector = Detector::Conventional;
    double gamma = 0.0;
    int assumed_memory = 0;
    double tap_variance = 0.0;
    double calibration_delta = 0.0;
    double snr_db = 0.0;
    long long symbols = 0;
    long long errors = 0;
    double ser = 0.0;
    double ci95_halfwidth = 0.0;
    std::uint64_t seed = 0;
};

struct SerStats {
    long long errors = 0;
    long long symbols = 0;
    double ser = 0.0;
    double ci95_halfwidth = 0.0;
};

inline SerStats ser(std::span<const double> decisions, std::span<const double> truth) {
    if (decisions.size() != truth.size())
        throw InvalidParameter("ser: decision/truth length mismatch");
    if (decisions.empty()) throw InvalidParameter("ser: empty input");
    SerStats stats;
    stats.symbols = static_cast<long long>(decisions.size());
    for (std::size_t i = 0; i < decisions.size(); ++i) stats.errors += decisions[i] != truth[i];
    stats.ser = static_cast<double>(stats.errors) / static_cast<double>(stats.symbols);
    stats.ci95_halfwidth =
        1.96 * std::sqrt(stats.ser * (1.0 - stats.ser) / static_cast<double>(stats.symbols));
    return stats;
}

// Per-frame tap realizations for both sides of a scenario. A sampler draws
// fresh randomness from the stream it is handed, so transmission/estimation
// independence (case 5) falls out of stream separation.
struct ChannelPair {
    std::function<TapProfile(int, rng::Stream&)> transmission;
    std::function<TapProfile(int, rng::Stream&)> estimation;
};

namespace detail {

inline TapProfile calibrated_gamma_profile(double gamma, double delta, int memory, int length,
                                           rng::Stream& rng) {
    std::vector<double> taps(static_cast<std::size_t>(length) * memory);
    for (int t = 0; t < length; ++t) {
        const double g = draw_gamma(gamma, delta, rng);
        for (int l = 0; l < memory; ++l)
            taps[static_cast<std::size_t>(t) * memory + l] = std::exp(-g * l);
    }
    return normalize_taps(TapProfile(std::move(taps), memory, false));
}

}  // namespace detail

inline ChannelPair build_case(const ScenarioConfig& config) {
    config.validate();
    const TapProfile clean = normalize_taps(exp_decay_taps(config.gamma, config.memory));
    const TapProfile clean_assumed =
        normalize_taps(exp_decay_taps(config.gamma, config.assumed_memory));
    const TapProfile raw = exp_decay_taps(config.gamma, config.memory);
    const TapProfile raw_assumed = exp_decay_taps(config.gamma, config.assumed_memory);
    const double variance = config.tap_variance;

    auto constant = [](TapProfile p) {
        return [p = std::move(p)](int, rng::Stream&) { return p; };
    };
    auto perturbed = [variance](TapProfile base) {
        return [base = std::move(base), variance](int length, rng::Stream& rng) {
            return normalize_taps(perturb_taps(base, variance, length, rng));
        };
    };

    switch (config.case_id) {
        case 1:
            return {constant(clean), constant(clean_assumed)};
        case 2: {
            const double gamma = config.gamma, delta = config.calibration_delta;
            const int memory = config.memory;
            return {constant(clean), [gamma, delta, memory](int length, rng::Stream& rng) {
                        return detail::calibrated_gamma_profile(gamma, delta, memory, length, rng);
                    }};
        }
        case 3:
            return {constant(clean), perturbed(raw)};
        case 4:
            return {perturbed(raw), constant(clean)};
        case 5:
            return {perturbed(raw), perturbed(raw)};
        case 6:
            return {perturbed(raw), perturbed(raw_assumed)};
        default:
            throw ConfigError("case: must be in 1..6");  // unreachable after validate
    }
}

namespace streams {
// Purpose tags for deriving per-trial substreams. Frame generation is not
// keyed on the case id, so scenarios compared at equal seed see identical
// symbol and noise sequences.
inline constexpr std::uint64_t kSymbols = 1;
inline constexpr std::uint64_t kNoise = 2;
inline constexpr std::uint64_t kTransmissionTaps = 3;
inline constexpr std::uint64_t kEstimationTaps = 4;
inline constexpr std::uint64_t kTrainingSymbols = 5;
inline constexpr std::uint64_t kTrainingNoise = 6;
inline constexpr std::uint64_t kTrainingTaps = 7;
inline constexpr std::uint64_t kMlpInit = 8;
inline constexpr std::uint64_t kGmmInit = 9;
}  // namespace streams

namespace detail {

inline TrialResult make_result(const ScenarioConfig& config, Detector detector,
                               long long errors, long long symbols) {
    TrialResult r;
    r.case_id = config.case_id;
    r.detector = detector;
    r.gamma = config.gamma;
    r.assumed_memory = config.assumed_memory;
    r.tap_variance = config.tap_variance;
    r.calibration_delta = config.calibration_delta;
    r.snr_db = config.snr_db;
    r.symbols = symbols;
    r.errors = errors;
    r.ser = static_cast<double>(errors) / static_cast<double>(symbols);
    r.ci95_halfwidth = 1.96 * std::sqrt(r.ser * (1.0 - r.ser) / static_cast<double>(symbols));
    r.seed = config.seed;
    return r;
}

// Shared Monte-Carlo skeleton: draw a frame through the transmission channel,
// let `detect` turn its outputs into decisions, tally symbol errors.
template <typename DetectFn>
TrialResult run_trials(const ScenarioConfig& config, Detector tag, int threads,
                       const ChannelPair& channels, DetectFn&& detect) {
    const NoiseSpec noise = NoiseSpec::from_snr_db(config.snr_db);
    const int T = config.frame_length;
    std::vector<long long> per_trial(static_cast<std::size_t>(config.num_trials), 0);

    parallel_for(config.num_trials, threads, [&](int trial) {
        const auto id = static_cast<std::uint64_t>(trial);
        rng::Stream symbol_rng = rng::stream(config.seed, {streams::kSymbols, id});
        rng::Stream noise_rng = rng::stream(config.seed, {streams::kNoise, id});
        rng::Stream tx_rng = rng::stream(config.seed, {streams::kTransmissionTaps, id});
        rng::Stream est_rng = rng::stream(config.seed, {streams::kEstimationTaps, id});

        std::vector<double> inputs = bpsk_source(T, symbol_rng);
        Frame frame = transmit(inputs, channels.transmission(T, tx_rng), noise, noise_rng);
        std::vector<double> decisions = detect(frame, est_rng);
        SerStats stats = ser(decisions, inputs);
        per_trial[static_cast<std::size_t>(trial)] = stats.errors;
    });

    long long errors = 0;
    for (long long e : per_trial) errors += e;
    return make_result(config, tag, errors,
                       static_cast<long long>(config.num_trials) * T);
}

}  // namespace detail

// Conventional detector: model-based Gaussian likelihoods from the estimated
// channel, fresh estimation-side randomness per trial.
inline TrialResult run_conventional(const ScenarioConfig& config, int threads = 1) {
    config.validate();
    const ChannelPair channels = build_case(config);
    const Trellis trellis(config.assumed_memory);
    const NoiseSpec noise = NoiseSpec::from_snr_db(config.snr_db);
    return detail::run_trials(
        config, Detector::Conventional, threads, channels,
        [&](const Frame& frame, rng::Stream& est_rng) {
            TapProfile estimated = channels.estimation(frame.length(), est_rng);
            CsiLikelihoodProvider provider(std::move(estimated), noise.variance, trellis);
            return map_detect(build_table(frame.outputs, provider), trellis).decisions;
        });
}

// Trains the classifier and marginal density estimator on one frame drawn
// through the estimated/training channel.
inline NeuralLikelihoodProvider train_provider(const ScenarioConfig& config) {
    config.validate();
    const ChannelPair channels = build_case(config);
    const NoiseSpec noise = NoiseSpec::from_snr_db(config.snr_db);

    rng::Stream symbol_rng = rng::stream(config.seed, {streams::kTrainingSymbols});
    rng::Stream noise_rng = rng::stream(config.seed, {streams::kTrainingNoise});
    rng::Stream taps_rng = rng::stream(config.seed, {streams::kTrainingTaps});

    std::vector<double> inputs = bpsk_source(config.training_length, symbol_rng);
    Frame frame = transmit(inputs, channels.estimation(config.training_length, taps_rng),
                           noise, noise_rng);
    TrainingSet data = make_training_set(frame, config.assumed_memory);

    TrainConfig train_cfg;
    train_cfg.epochs = config.epochs;
    train_cfg.learning_rate = config.learning_rate;
    train_cfg.batch_size = config.batch_size;
    rng::Stream mlp_rng = rng::stream(config.seed, {streams::kMlpInit});
    TrainOutcome outcome = train_mlp(data, train_cfg, mlp_rng);

    rng::Stream gmm_rng = rng::stream(config.seed, {streams::kGmmInit});
    GmmFit fit = fit_gmm(data.inputs, config.effective_gmm_components(), gmm_rng);

    return NeuralLikelihoodProvider(std::move(outcome.params), std::move(fit.model),
                                    Trellis(config.assumed_memory), config.seed,
                                    config.training_fingerprint());
}

// Learned detector over fresh transmission-channel frames. The frames are
// stream-identical to run_conventional at equal seed, so the two detectors
// are compared on the same symbols.
inline TrialResult run_bcjrnet(const ScenarioConfig& config,
                               const NeuralLikelihoodProvider& provider, int threads = 1) {
    config.validate();
    if (provider.trellis.memory() != config.assumed_memory)
        throw InvalidParameter("run_bcjrnet: provider memory != configured assumed memory");
    const ChannelPair channels = build_case(config);
    return detail::run_trials(config, Detector::BcjrNet, threads, channels,
                              [&](const Frame& frame, rng::Stream&) {
                                  return map_detect(build_neural_table(frame.outputs, provider),
                                                    provider.trellis)
                                      .decisions;
                              });
}

inline TrialResult run_bcjrnet(const ScenarioConfig& config, int threads = 1) {
    return run_bcjrnet(config, train_provider(config), threads);
}

}  // namespace isilab
