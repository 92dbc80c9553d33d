#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "isilab/channel.hpp"
#include "isilab/likelihood.hpp"
#include "isilab/rng.hpp"
#include "isilab/trellis.hpp"

using namespace isilab;

TEST_CASE("gaussian_likelihood evaluates the density") {
    const double sigma2 = 0.31622776601683794;  // 5 dB
    SUBCASE("peak value at the mean") {
        CHECK(gaussian_likelihood(0.7, 0.7, sigma2) == doctest::Approx(0.7094308430318422));
    }
    SUBCASE("even in the deviation") {
        CHECK(gaussian_likelihood(1.0 + 0.7, 1.0, sigma2) ==
              doctest::Approx(gaussian_likelihood(1.0 - 0.7, 1.0, sigma2)));
    }
    SUBCASE("unit deviation at sigma2=0.5") {
        CHECK(gaussian_likelihood(1.0, 0.0, 0.5) == doctest::Approx(0.20755374871029736));
    }
    SUBCASE("deep tail underflows to zero without error") {
        CHECK(gaussian_likelihood(1e6, 0.0, 0.01) == 0.0);
    }
    SUBCASE("nonpositive variance is rejected") {
        CHECK_THROWS_AS(gaussian_likelihood(0.0, 0.0, 0.0), InvalidParameter);
        CHECK_THROWS_AS(gaussian_likelihood(0.0, 0.0, -1.0), InvalidParameter);
    }
}

TEST_CASE("build_table fills per-state densities from the estimated taps") {
    const double sigma2 = 0.31622776601683794;

    SUBCASE("memoryless identity channel peaks at the true state") {
        Trellis t(1);
        CsiLikelihoodProvider provider(normalize_taps(TapProfile({1.0}, 1, false)), sigma2, t);
        std::vector<double> y{1.0};
        auto table = build_table(y, provider);
        CHECK(table.at(0, 1) == doctest::Approx(0.7094308430318422));
        CHECK(table.at(0, 1) > table.at(0, 0));
    }
    SUBCASE("argmax state is the one whose mean is nearest y") {
        Trellis t(3);
        auto taps = normalize_taps(exp_decay_taps(0.7, 3));
        CsiLikelihoodProvider provider(taps, sigma2, t);
        rng::Stream s(21);
        std::vector<double> y(32);
        for (double& v : y) v = s.next_uniform(-2.0, 2.0);
        auto table = build_table(y, provider);
        for (int i = 0; i < 32; ++i) {
            int best = 0;
            double best_dist = 1e300;
            for (StateIndex st = 0; st < t.num_states(); ++st) {
                double d = std::abs(y[static_cast<std::size_t>(i)] - t.state_mean(st, taps.row(0)));
                if (d < best_dist) {
                    best_dist = d;
                    best = st;
                }
            }
            auto row = table.row(i);
            CHECK(std::max_element(row.begin(), row.end()) - row.begin() == best);
        }
    }
    SUBCASE("near-noiseless true state dominates") {
        Trellis t(2);
        auto taps = normalize_taps(TapProfile({1.0, 0.5}, 2, false));
        CsiLikelihoodProvider provider(taps, 1e-4, t);
        // steady-state output of the (+1,+1) window
        double y = t.state_mean(3, taps.row(0));
        std::vector<double> out{y, y, y};
        auto table = build_table(out, provider);
        for (StateIndex st = 0; st < 4; ++st)
            if (st != 3) CHECK(table.at(2, 3) > 1e6 * table.at(2, st));
    }
    SUBCASE("rows are densities, not normalized probabilities") {
        Trellis t(2);
        CsiLikelihoodProvider provider(normalize_taps(exp_decay_taps(1.0, 2)), sigma2, t);
        std::vector<double> y{0.3, -0.2};
        auto table = build_table(y, provider);
        double sum = 0.0;
        for (StateIndex st = 0; st < 4; ++st) sum += table.at(0, st);
        CHECK(sum != doctest::Approx(1.0).epsilon(1e-3));
    }
    SUBCASE("time-varying estimated taps enter row by row") {
        Trellis t(1);
        TapProfile varying({1.0, -1.0, 1.0}, 1, true);  // rows of unit norm
        CsiLikelihoodProvider provider(varying, sigma2, t);
        std::vector<double> y{1.0, 1.0, 1.0};
        auto table = build_table(y, provider);
        CHECK(table.at(0, 1) > table.at(0, 0));
        CHECK(table.at(1, 0) > table.at(1, 1));  // flipped tap swaps the means
        CHECK(table.at(2, 1) > table.at(2, 0));
    }
    SUBCASE("time-invariant profiles give permutation-consistent rows") {
        Trellis t(2);
        CsiLikelihoodProvider provider(normalize_taps(exp_decay_taps(0.9, 2)), sigma2, t);
        std::vector<double> y{0.7, -1.1, 0.3, 0.7};
        auto table = build_table(y, provider);
        std::vector<double> permuted{0.3, 0.7, 0.7, -1.1};
        auto ptable = build_table(permuted, provider);
        // identical outputs produce identical rows wherever they appear
        for (StateIndex st = 0; st < 4; ++st) {
            CHECK(table.at(0, st) == ptable.at(1, st));
            CHECK(table.at(0, st) == ptable.at(2, st));
            CHECK(table.at(1, st) == ptable.at(3, st));
            CHECK(table.at(2, st) == ptable.at(0, st));
        }
    }
    SUBCASE("provider invariants are enforced") {
        Trellis t(2);
        CHECK_THROWS_AS(
            CsiLikelihoodProvider(normalize_taps(TapProfile({1.0}, 1, false)), sigma2, t),
            InvalidParameter);
        CHECK_THROWS_AS(
            CsiLikelihoodProvider(normalize_taps(exp_decay_taps(1.0, 2)), 0.0, t),
            InvalidParameter);
    }
}
