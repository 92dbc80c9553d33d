#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "isilab/bcjr.hpp"
#include "isilab/channel.hpp"
#include "isilab/exhaustive.hpp"
#include "isilab/likelihood.hpp"
#include "isilab/rng.hpp"
#include "isilab/trellis.hpp"

namespace isilab {

// Cross-checks the recursive detector against exhaustive enumeration on
// random small instances; returns the largest absolute posterior deviation.
// Instances alternate between exponential-decay and arbitrary random taps.
inline double oracle_max_deviation(int instances, int frame_length, int memory,
                                   std::uint64_t seed) {
    if (instances < 1 || frame_length < 1 || memory < 1)
        throw InvalidParameter("oracle_max_deviation: counts must be >= 1");
    if (memory > frame_length)
        throw InvalidParameter("oracle_max_deviation: memory exceeds frame length");

    const Trellis trellis(memory);
    const NoiseSpec noise = NoiseSpec::from_snr_db(5.0);
    double worst = 0.0;

    for (int k = 0; k < instances; ++k) {
        rng::Stream taps_rng = rng::stream(seed, {0x7461u, static_cast<std::uint64_t>(k)});
        rng::Stream frame_rng = rng::stream(seed, {0x6672u, static_cast<std::uint64_t>(k)});

        TapProfile profile = [&] {
            if (k % 2 == 0)
                return normalize_taps(exp_decay_taps(taps_rng.next_uniform(0.25, 2.5), memory));
            std::vector<double> raw(static_cast<std::size_t>(memory));
            for (double& h : raw) h = taps_rng.next_gaussian();
            return normalize_taps(TapProfile(std::move(raw), memory, false));
        }();

        std::vector<double> inputs = bpsk_source(frame_length, frame_rng);
        Frame frame = transmit(inputs, profile, noise, frame_rng);

        CsiLikelihoodProvider provider(profile, noise.variance, trellis);
        DetectionResult detected = map_detect(build_table(frame.outputs, provider), trellis);
        auto reference =
            exhaustive_posteriors(frame.outputs, profile.row(0), memory, noise.variance);

        for (int t = 0; t < frame_length; ++t)
            for (int bit = 0; bit < 2; ++bit)
                worst = std::max(worst, std::abs(detected.posteriors.at(t, bit) -
                                                 reference[static_cast<std::size_t>(t)][bit]));
    }
    return worst;
}

}  // namespace isilab
