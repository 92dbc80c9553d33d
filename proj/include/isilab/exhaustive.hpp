#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "isilab/errors.hpp"

namespace isilab {

// Reference MAP posteriors by direct enumeration, independent of the trellis
// recursions: sums the channel factorization over every input sequence.
//
// The L-1 symbols preceding the frame are enumerated alongside x_1..x_T and
// marginalized under the same equiprobable prior, which is exactly the
// generative model the recursive detector solves with its uniform boundary
// messages. Cost is O(T * 2^(T+L-1)); intended for tiny instances only.
//
// `taps` is row-major with either one row (time-invariant) or T rows, matching
// TapProfile layout but taken raw so this path shares no channel/trellis code.
inline std::vector<std::array<double, 2>> exhaustive_posteriors(
    std::span<const double> outputs, std::span<const double> taps, int memory,
    double noise_variance) {
    const int T = static_cast<int>(outputs.size());
    const int L = memory;
    if (T < 1 || L < 1) throw InvalidParameter("exhaustive_posteriors: empty instance");
    if (T + L - 1 > 26) throw InvalidParameter("exhaustive_posteriors: instance too large");
    if (!(noise_variance > 0.0))
        throw InvalidParameter("exhaustive_posteriors: noise variance must be > 0");
    const int rows = static_cast<int>(taps.size()) / L;
    if (rows != 1 && rows < T)
        throw InvalidParameter("exhaustive_posteriors: bad tap matrix shape");

    const int total = T + L - 1;  // pre-frame window plus the frame itself
    const double inv2var = 1.0 / (2.0 * noise_variance);
    std::vector<std::array<double, 2>> marginal(static_cast<std::size_t>(T), {0.0, 0.0});
    std::vector<double> x(static_cast<std::size_t>(total));

    for (long long pattern = 0; pattern < (1LL << total); ++pattern) {
        // bit i of `pattern` is the symbol at sequence position i, where
        // positions 0..L-2 precede the frame and position L-1+t is x_{t+1}.
        for (int i = 0; i < total; ++i)
            x[static_cast<std::size_t>(i)] = ((pattern >> i) & 1) ? 1.0 : -1.0;
        double weight = 1.0;
        for (int t = 0; t < T; ++t) {
            const double* h = taps.data() + static_cast<std::size_t>(rows == 1 ? 0 : t) * L;
            double mean = 0.0;
            for (int l = 0; l < L; ++l) mean += h[l] * x[static_cast<std::size_t>(L - 1 + t - l)];
            const double d = outputs[static_cast<std::size_t>(t)] - mean;
            weight *= std::exp(-d * d * inv2var);
        }
        for (int t = 0; t < T; ++t) {
            int bit = static_cast<int>((pattern >> (L - 1 + t)) & 1);
            marginal[static_cast<std::size_t>(t)][bit] += weight;
        }
    }

    for (auto& m : marginal) {
        double sum = m[0] + m[1];
        if (!(sum > 0.0)) throw NumericalDegeneracy("exhaustive_posteriors: zero total mass");
        m[0] /= sum;
        m[1] /= sum;
    }
    return marginal;
}

}  // namespace isilab
