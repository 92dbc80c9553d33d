#pragma once

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "isilab/channel.hpp"
#include "isilab/errors.hpp"
#include "isilab/trellis.hpp"

namespace isilab {

// Per-time, per-state densities p(y_t | s_t) feeding the detector, whether
// model-based or learned. Values live in the linear domain; robustness comes
// from per-step message rescaling in the recursions, not log arithmetic.
struct LikelihoodTable {
    int length = 0;      // T
    int num_states = 0;  // width
    std::vector<double> values;  // row-major, length x num_states
    int underflow_rows = 0;      // rows flushed to uniform after total underflow

    LikelihoodTable() = default;
    LikelihoodTable(int length_, int num_states_)
        : length(length_), num_states(num_states_),
          values(static_cast<std::size_t>(length_) * num_states_, 0.0) {}

    double at(int t, StateIndex s) const {
        return values[static_cast<std::size_t>(t) * num_states + s];
    }
    double& at(int t, StateIndex s) {
        return values[static_cast<std::size_t>(t) * num_states + s];
    }
    std::span<const double> row(int t) const {
        return {values.data() + static_cast<std::size_t>(t) * num_states,
                static_cast<std::size_t>(num_states)};
    }
};

// N(y; mean, variance) density. The exponent is formed before exponentiating;
// deep underflow flushes to exactly 0.
inline double gaussian_likelihood(double y, double mean, double variance) {
    if (!(variance > 0.0)) throw InvalidParameter("gaussian_likelihood: variance must be > 0");
    const double d = y - mean;
    const double expo = -(d * d) / (2.0 * variance);
    return std::exp(expo) / std::sqrt(2.0 * 3.141592653589793238462643383279 * variance);
}

// Model-based likelihood source: Gaussian around the per-state means of an
// estimated (possibly mismatched, possibly per-symbol varying) tap profile.
struct CsiLikelihoodProvider {
    TapProfile estimated_taps;
    double noise_variance;
    Trellis trellis;

    CsiLikelihoodProvider(TapProfile taps, double variance, Trellis trellis_)
        : estimated_taps(std::move(taps)), noise_variance(variance),
          trellis(std::move(trellis_)) {
        if (estimated_taps.memory() != trellis.memory())
            throw InvalidParameter("CsiLikelihoodProvider: tap memory != trellis memory");
        if (!(noise_variance > 0.0))
            throw InvalidParameter("CsiLikelihoodProvider: noise variance must be > 0");
    }
};

// values(t, s) = N(y_t; mu(s, taps at t), sigma_w^2). Row t of a time-varying
// estimated profile is what lets per-symbol tap errors enter the detector.
inline LikelihoodTable build_table(std::span<const double> outputs,
                                   const CsiLikelihoodProvider& provider) {
    const int T = static_cast<int>(outputs.size());
    if (T < 1) throw InvalidParameter("build_table: empty output sequence");
    if (provider.estimated_taps.time_varying() && provider.estimated_taps.rows() < T)
        throw InvalidParameter("build_table: time-varying profile shorter than frame");

    const Trellis& trellis = provider.trellis;
    const int S = trellis.num_states();
    LikelihoodTable table(T, S);

    std::vector<double> means(static_cast<std::size_t>(S));
    const bool varying = provider.estimated_taps.time_varying();
    for (int t = 0; t < T; ++t) {
        if (t == 0 || varying) {
            auto taps = provider.estimated_taps.row(t);
            for (StateIndex s = 0; s < S; ++s)
                means[static_cast<std::size_t>(s)] = trellis.state_mean(s, taps);
        }
        bool any = false;
        for (StateIndex s = 0; s < S; ++s) {
            double v = gaussian_likelihood(outputs[static_cast<std::size_t>(t)],
                                           means[static_cast<std::size_t>(s)],
                                           provider.noise_variance);
            table.at(t, s) = v;
            any = any || v > 0.0;
        }
        if (!any) {
            // Unreachable at the operating SNR; guards extreme configurations.
            for (StateIndex s = 0; s < S; ++s) table.at(t, s) = 1.0;
            ++table.underflow_rows;
        }
    }
    return table;
}

}  // namespace isilab
