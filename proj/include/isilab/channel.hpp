#pragma once

#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "isilab/errors.hpp"
#include "isilab/rng.hpp"

namespace isilab {

// Channel impulse response: one row of `memory` taps per time index.
// A single-row profile is time-invariant and is broadcast over every t.
class TapProfile {
public:
    TapProfile(std::vector<double> taps, int memory, bool normalized)
        : taps_(std::move(taps)), memory_(memory), normalized_(normalized) {
        if (memory_ < 1) throw InvalidParameter("TapProfile: memory must be >= 1");
        if (taps_.empty() || taps_.size() % static_cast<std::size_t>(memory_) != 0)
            throw InvalidParameter("TapProfile: tap count must be a positive multiple of memory");
        for (double h : taps_) {
            if (!std::isfinite(h)) throw InvalidParameter("TapProfile: non-finite tap");
        }
        rows_ = static_cast<int>(taps_.size()) / memory_;
    }

    int memory() const { return memory_; }
    int rows() const { return rows_; }
    bool normalized() const { return normalized_; }
    bool time_varying() const { return rows_ > 1; }

    // Taps in effect at (0-based) time index t; single-row profiles repeat.
    std::span<const double> row(int t) const {
        const int r = rows_ == 1 ? 0 : t;
        if (r < 0 || r >= rows_) throw InvalidParameter("TapProfile: time index out of range");
        return {taps_.data() + static_cast<std::size_t>(r) * memory_,
                static_cast<std::size_t>(memory_)};
    }

    const std::vector<double>& data() const { return taps_; }

private:
    std::vector<double> taps_;  // row-major, rows() x memory()
    int memory_;
    int rows_;
    bool normalized_;
};

// Time-invariant exponential decay, tap l = exp(-gamma*(l-1)). Unnormalized.
inline TapProfile exp_decay_taps(double gamma, int memory) {
    if (!std::isfinite(gamma) || gamma < 0.0)
        throw InvalidParameter("exp_decay_taps: gamma must be finite and >= 0");
    if (memory < 1) throw InvalidParameter("exp_decay_taps: memory must be >= 1");
    std::vector<double> taps(static_cast<std::size_t>(memory));
    for (int l = 0; l < memory; ++l) taps[static_cast<std::size_t>(l)] = std::exp(-gamma * l);
    return TapProfile(std::move(taps), memory, false);
}

// Scales every row to unit Euclidean norm.
inline TapProfile normalize_taps(const TapProfile& profile) {
    std::vector<double> out(profile.data());
    const int L = profile.memory();
    for (int r = 0; r < profile.rows(); ++r) {
        double* row = out.data() + static_cast<std::size_t>(r) * L;
        double norm2 = 0.0;
        for (int l = 0; l < L; ++l) norm2 += row[l] * row[l];
        if (norm2 <= 0.0)
            throw DegenerateChannel("normalize_taps: all-zero tap row at t=" + std::to_string(r));
        double inv = 1.0 / std::sqrt(norm2);
        for (int l = 0; l < L; ++l) row[l] *= inv;
    }
    return TapProfile(std::move(out), L, true);
}

// Adds i.i.d. Gaussian(0, variance) to every tap, one fresh draw per (t, l).
// Result has `length` rows and is unnormalized.
inline TapProfile perturb_taps(const TapProfile& base, double variance, int length,
                               rng::Stream& rng) {
    if (!std::isfinite(variance) || variance < 0.0)
        throw InvalidParameter("perturb_taps: variance must be finite and >= 0");
    if (length < 1) throw InvalidParameter("perturb_taps: length must be >= 1");
    const int L = base.memory();
    const double sigma = std::sqrt(variance);
    std::vector<double> out(static_cast<std::size_t>(length) * L);
    for (int t = 0; t < length; ++t) {
        auto b = base.row(t);
        for (int l = 0; l < L; ++l)
            out[static_cast<std::size_t>(t) * L + l] = b[l] + sigma * rng.next_gaussian();
    }
    return TapProfile(std::move(out), L, false);
}

// Decay constant with a uniform calibration error of half-width delta*gamma.
inline double draw_gamma(double gamma, double delta, rng::Stream& rng) {
    if (!std::isfinite(gamma)) throw InvalidParameter("draw_gamma: gamma must be finite");
    if (!(delta >= 0.0 && delta < 1.0))
        throw InvalidParameter("draw_gamma: delta must lie in [0, 1)");
    if (delta == 0.0) return gamma;
    return rng.next_uniform(gamma * (1.0 - delta), gamma * (1.0 + delta));
}

// i.i.d. equiprobable +/-1 symbols.
inline std::vector<double> bpsk_source(int length, rng::Stream& rng) {
    if (length < 1) throw InvalidParameter("bpsk_source: length must be >= 1");
    std::vector<double> symbols(static_cast<std::size_t>(length));
    for (double& x : symbols) x = rng.next_symbol();
    return symbols;
}

struct NoiseSpec {
    double snr_db = 5.0;
    double variance = 0.0;  // sigma_w^2

    // Unit-energy BPSK over a unit-norm channel: SNR(linear) = 1/sigma_w^2.
    static NoiseSpec from_snr_db(double snr_db) {
        if (!std::isfinite(snr_db)) throw InvalidParameter("NoiseSpec: snr_db must be finite");
        return {snr_db, std::pow(10.0, -snr_db / 10.0)};
    }
};

struct Frame {
    std::vector<double> inputs;
    std::vector<double> outputs;
    double noise_variance = 0.0;
    TapProfile tap_realization;

    int length() const { return static_cast<int>(inputs.size()); }
};

// y_t = sum_l h_{l,t} x_{t-l+1} + w_t, with x_t = 0 before the frame start.
// variance = 0 is allowed and gives a noiseless frame.
inline Frame transmit(const std::vector<double>& inputs, const TapProfile& profile,
                      const NoiseSpec& noise, rng::Stream& noise_rng) {
    const int T = static_cast<int>(inputs.size());
    const int L = profile.memory();
    if (T < 1) throw InvalidParameter("transmit: empty input frame");
    if (!profile.normalized()) throw ContractViolation("transmit: profile must be normalized");
    if (L > T) throw InvalidParameter("transmit: channel memory exceeds frame length");
    if (profile.time_varying() && profile.rows() < T)
        throw InvalidParameter("transmit: time-varying profile shorter than frame");
    if (!(noise.variance >= 0.0) || !std::isfinite(noise.variance))
        throw InvalidParameter("transmit: noise variance must be finite and >= 0");

    const double sigma = std::sqrt(noise.variance);
    std::vector<double> outputs(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) {
        auto h = profile.row(t);
        double y = 0.0;
        for (int l = 0; l < L && l <= t; ++l) y += h[l] * inputs[static_cast<std::size_t>(t - l)];
        if (sigma > 0.0) y += sigma * noise_rng.next_gaussian();
        outputs[static_cast<std::size_t>(t)] = y;
    }
    return Frame{inputs, std::move(outputs), noise.variance, profile};
}

}  // namespace isilab
