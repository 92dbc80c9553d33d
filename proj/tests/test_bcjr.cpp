#include <doctest.h>

#include <cmath>
#include <vector>

#include "isilab/bcjr.hpp"
#include "isilab/channel.hpp"
#include "isilab/exhaustive.hpp"
#include "isilab/likelihood.hpp"
#include "isilab/oracle_check.hpp"
#include "isilab/rng.hpp"
#include "isilab/trellis.hpp"

using namespace isilab;

namespace {

LikelihoodTable table_from_rows(const std::vector<std::vector<double>>& rows) {
    LikelihoodTable t(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t s = 0; s < rows[i].size(); ++s)
            t.at(static_cast<int>(i), static_cast<int>(s)) = rows[i][s];
    return t;
}

}  // namespace

TEST_CASE("forward_pass basics") {
    SUBCASE("uniform table rows keep forward messages uniform") {
        Trellis t(1);
        auto table = table_from_rows({{0.4, 0.4}, {0.4, 0.4}, {0.4, 0.4}});
        auto alpha = forward_pass(table, t);
        for (double a : alpha) CHECK(a == doctest::Approx(0.5));
    }
    SUBCASE("single step is proportional to the table row") {
        Trellis t(1);
        auto table = table_from_rows({{0.2, 0.6}});
        auto alpha = forward_pass(table, t);
        CHECK(alpha[0] == doctest::Approx(0.25));
        CHECK(alpha[1] == doctest::Approx(0.75));
    }
    SUBCASE("rows are normalized") {
        Trellis t(2);
        rng::Stream s(5);
        std::vector<std::vector<double>> rows(6, std::vector<double>(4));
        for (auto& r : rows)
            for (double& v : r) v = s.next_uniform(0.01, 1.0);
        auto alpha = forward_pass(table_from_rows(rows), t);
        for (int i = 0; i < 6; ++i) {
            double sum = 0.0;
            for (int st = 0; st < 4; ++st) sum += alpha[static_cast<std::size_t>(i) * 4 + st];
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
    SUBCASE("empty table is rejected") {
        Trellis t(1);
        LikelihoodTable empty;
        CHECK_THROWS_AS(forward_pass(empty, t), InvalidParameter);
    }
}

TEST_CASE("hand-unrolled T=3, L=2 recursion matches") {
    // Independent scalar unrolling of the recursions, states indexed as the
    // trellis does: s = 2*bit(x_t) + bit(x_{t-1}).
    Trellis t(2);
    auto table = table_from_rows({{0.11, 0.52, 0.33, 0.24},
                                  {0.45, 0.16, 0.27, 0.38},
                                  {0.29, 0.41, 0.12, 0.53}});

    // forward, by hand: pred(s, b) = ((s & 1) << 1) | b
    double a0[4] = {0.25, 0.25, 0.25, 0.25};
    double a1[4], a2[4], a3[4];
    auto step = [](const double* prev, const double* like, double* out) {
        for (int s = 0; s < 4; ++s) {
            int p0 = ((s & 1) << 1) | 0, p1 = ((s & 1) << 1) | 1;
            out[s] = 0.5 * like[s] * (prev[p0] + prev[p1]);
        }
        double sum = out[0] + out[1] + out[2] + out[3];
        for (int s = 0; s < 4; ++s) out[s] /= sum;
    };
    double row0[4] = {0.11, 0.52, 0.33, 0.24};
    double row1[4] = {0.45, 0.16, 0.27, 0.38};
    double row2[4] = {0.29, 0.41, 0.12, 0.53};
    step(a0, row0, a1);
    step(a1, row1, a2);
    step(a2, row2, a3);

    auto alpha = forward_pass(table, t);
    for (int s = 0; s < 4; ++s) {
        CHECK(alpha[0 * 4 + static_cast<std::size_t>(s)] == doctest::Approx(a1[s]).epsilon(1e-12));
        CHECK(alpha[1 * 4 + static_cast<std::size_t>(s)] == doctest::Approx(a2[s]).epsilon(1e-12));
        CHECK(alpha[2 * 4 + static_cast<std::size_t>(s)] == doctest::Approx(a3[s]).epsilon(1e-12));
    }

    // backward, by hand: succ(s, b) = (b << 1) | (s >> 1)
    double b3[4] = {0.25, 0.25, 0.25, 0.25};
    double b2[4], b1[4];
    auto bstep = [](const double* next, const double* like_next, double* out) {
        for (int s = 0; s < 4; ++s) {
            int s0 = (0 << 1) | (s >> 1), s1 = (1 << 1) | (s >> 1);
            out[s] = 0.5 * (like_next[s0] * next[s0] + like_next[s1] * next[s1]);
        }
        double sum = out[0] + out[1] + out[2] + out[3];
        for (int s = 0; s < 4; ++s) out[s] /= sum;
    };
    bstep(b3, row2, b2);
    bstep(b2, row1, b1);

    auto beta = backward_pass(table, t);
    for (int s = 0; s < 4; ++s) {
        CHECK(beta[0 * 4 + static_cast<std::size_t>(s)] == doctest::Approx(b1[s]).epsilon(1e-12));
        CHECK(beta[1 * 4 + static_cast<std::size_t>(s)] == doctest::Approx(b2[s]).epsilon(1e-12));
        CHECK(beta[2 * 4 + static_cast<std::size_t>(s)] == doctest::Approx(0.25).epsilon(1e-12));
    }
}

TEST_CASE("time reversal on a memoryless trellis") {
    // beta_t excludes the observation at t, so the reversal identity pairs the
    // observation-inclusive product table(t,.)*beta_t with the forward message
    // of the time-reversed table.
    Trellis t(1);
    rng::Stream s(17);
    const int T = 8;
    std::vector<std::vector<double>> rows(T, std::vector<double>(2));
    for (auto& r : rows)
        for (double& v : r) v = s.next_uniform(0.05, 1.0);

    auto table = table_from_rows(rows);
    auto beta = backward_pass(table, t);

    std::vector<std::vector<double>> rev(rows.rbegin(), rows.rend());
    auto alpha_rev = forward_pass(table_from_rows(rev), t);

    for (int i = 0; i < T; ++i) {
        double g0 = table.at(i, 0) * beta[static_cast<std::size_t>(i) * 2 + 0];
        double g1 = table.at(i, 1) * beta[static_cast<std::size_t>(i) * 2 + 1];
        double sum = g0 + g1;
        const double* a = alpha_rev.data() + static_cast<std::size_t>(T - 1 - i) * 2;
        CHECK(g0 / sum == doctest::Approx(a[0]).epsilon(1e-12));
        CHECK(g1 / sum == doctest::Approx(a[1]).epsilon(1e-12));
    }
}

TEST_CASE("memoryless perfect-CSI MAP reduces to threshold detection") {
    Trellis t(1);
    auto taps = normalize_taps(TapProfile({1.0}, 1, false));
    NoiseSpec noise = NoiseSpec::from_snr_db(5.0);
    rng::Stream s(23);
    auto x = bpsk_source(2000, s);
    Frame f = transmit(x, taps, noise, s);
    CsiLikelihoodProvider provider(taps, noise.variance, t);
    auto result = map_detect(build_table(f.outputs, provider), t);
    for (int i = 0; i < 2000; ++i) {
        double want = f.outputs[static_cast<std::size_t>(i)] >= 0.0 ? 1.0 : -1.0;
        CHECK(result.decisions[static_cast<std::size_t>(i)] == want);
    }
}

TEST_CASE("uniform table gives indifferent posteriors with the documented tie-break") {
    Trellis t(2);
    auto table = table_from_rows({{1.0, 1.0, 1.0, 1.0}, {1.0, 1.0, 1.0, 1.0}});
    auto result = map_detect(table, t);
    for (int i = 0; i < 2; ++i) {
        CHECK(result.posteriors.at(i, 0) == doctest::Approx(0.5));
        CHECK(result.posteriors.at(i, 1) == doctest::Approx(0.5));
        CHECK(result.decisions[static_cast<std::size_t>(i)] == -1.0);
    }
}

TEST_CASE("posteriors match exhaustive enumeration") {
    SUBCASE("fixed T=6, L=2 instance") {
        const double sigma2 = 0.31622776601683794;
        Trellis t(2);
        auto taps = normalize_taps(TapProfile({1.0, 0.5}, 2, false));
        rng::Stream s(31);
        auto x = bpsk_source(6, s);
        Frame f = transmit(x, taps, NoiseSpec{5.0, sigma2}, s);
        CsiLikelihoodProvider provider(taps, sigma2, t);
        auto result = map_detect(build_table(f.outputs, provider), t);
        auto oracle = exhaustive_posteriors(f.outputs, taps.row(0), 2, sigma2);
        for (int i = 0; i < 6; ++i) {
            CHECK(std::abs(result.posteriors.at(i, 0) - oracle[static_cast<std::size_t>(i)][0]) <
                  1e-9);
            CHECK(std::abs(result.posteriors.at(i, 1) - oracle[static_cast<std::size_t>(i)][1]) <
                  1e-9);
        }
    }
    SUBCASE("random instances across shapes") {
        for (int L = 1; L <= 3; ++L)
            for (int T = L; T <= 8; T += 2)
                CHECK(oracle_max_deviation(8, T, L, 1234 + static_cast<std::uint64_t>(7 * L + T)) <
                      1e-9);
    }
}

TEST_CASE("posteriors are invariant to table row scaling") {
    Trellis t(2);
    rng::Stream s(37);
    const int T = 10;
    std::vector<std::vector<double>> rows(T, std::vector<double>(4));
    for (auto& r : rows)
        for (double& v : r) v = s.next_uniform(0.01, 2.0);
    auto base = map_detect(table_from_rows(rows), t);

    auto scaled_rows = rows;
    for (auto& r : scaled_rows) {
        double c = s.next_uniform(0.5, 100.0);
        for (double& v : r) v *= c;
    }
    auto scaled = map_detect(table_from_rows(scaled_rows), t);
    for (int i = 0; i < T; ++i)
        for (int b = 0; b < 2; ++b)
            CHECK(std::abs(base.posteriors.at(i, b) - scaled.posteriors.at(i, b)) < 1e-9);
}

TEST_CASE("negating a noiseless frame flips every decision") {
    Trellis t(3);
    auto taps = normalize_taps(exp_decay_taps(0.8, 3));
    rng::Stream s(41);
    auto x = bpsk_source(64, s);
    Frame f = transmit(x, taps, NoiseSpec{0.0, 0.0}, s);
    CsiLikelihoodProvider provider(taps, 0.31622776601683794, t);
    auto pos = map_detect(build_table(f.outputs, provider), t);

    std::vector<double> neg_y(f.outputs);
    for (double& v : neg_y) v = -v;
    auto neg = map_detect(build_table(neg_y, provider), t);
    for (int i = 0; i < 64; ++i)
        CHECK(pos.decisions[static_cast<std::size_t>(i)] ==
              -neg.decisions[static_cast<std::size_t>(i)]);
}
