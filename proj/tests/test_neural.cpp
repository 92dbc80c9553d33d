#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "isilab/bcjr.hpp"
#include "isilab/channel.hpp"
#include "isilab/likelihood.hpp"
#include "isilab/neural.hpp"
#include "isilab/rng.hpp"

using namespace isilab;

namespace {

// one matched-training provider on the identity channel, shared across cases
const NeuralLikelihoodProvider& identity_provider() {
    static const NeuralLikelihoodProvider provider = [] {
        const std::uint64_t seed = 404;
        rng::Stream sym = rng::stream(seed, {1});
        rng::Stream noise = rng::stream(seed, {2});
        auto taps = normalize_taps(TapProfile({1.0}, 1, false));
        NoiseSpec spec = NoiseSpec::from_snr_db(5.0);
        Frame f = transmit(bpsk_source(6000, sym), taps, spec, noise);
        TrainingSet data = make_training_set(f, 1);

        TrainConfig cfg;
        cfg.epochs = 40;
        rng::Stream train_rng = rng::stream(seed, {3});
        auto outcome = train_mlp(data, cfg, train_rng);
        rng::Stream gmm_rng = rng::stream(seed, {4});
        auto fit = fit_gmm(data.inputs, 2, gmm_rng);
        return NeuralLikelihoodProvider(outcome.params, fit.model, Trellis(1), seed, 0xfeedULL);
    }();
    return provider;
}

}  // namespace

TEST_CASE("make_training_set drops zero-padded windows and encodes labels") {
    auto taps = normalize_taps(exp_decay_taps(1.0, 3));
    rng::Stream s(5);
    auto x = bpsk_source(64, s);
    Frame f = transmit(x, taps, NoiseSpec{0.0, 0.0}, s);

    TrainingSet data = make_training_set(f, 3);
    CHECK(data.num_classes == 8);
    REQUIRE(data.size() == 62);  // first L-1 pairs discarded
    for (std::size_t i = 0; i < data.size(); ++i) {
        int t = static_cast<int>(i) + 2;
        std::vector<double> window{x[static_cast<std::size_t>(t)],
                                   x[static_cast<std::size_t>(t - 1)],
                                   x[static_cast<std::size_t>(t - 2)]};
        CHECK(data.labels[i] == Trellis::state_index(window));
        CHECK(data.inputs[i] == f.outputs[static_cast<std::size_t>(t)]);
    }

    // truncated-memory labels use only the most recent symbols
    TrainingSet short_mem = make_training_set(f, 1);
    CHECK(short_mem.num_classes == 2);
    CHECK(short_mem.size() == 64);
    for (std::size_t i = 0; i < short_mem.size(); ++i)
        CHECK(short_mem.labels[i] == (x[i] > 0.0 ? 1 : 0));
}

TEST_CASE("uniform classifier makes every state carry the marginal density") {
    GmmModel gmm{{1.0}, {0.0}, {1.0}};
    NeuralLikelihoodProvider provider(MlpParams(100, 50, 16), gmm, Trellis(4));
    for (double y : {-1.5, -0.2, 0.0, 0.9, 2.2}) {
        auto like = neural_likelihood(provider, y);
        double marginal = gmm_density(gmm, y);
        for (double v : like) CHECK(v == doctest::Approx(marginal).epsilon(1e-12));
    }
}

TEST_CASE("neural likelihood values are nonnegative on a dense grid") {
    const auto& provider = identity_provider();
    for (double y = -3.0; y <= 3.0; y += 0.01) {
        auto like = neural_likelihood(provider, y);
        for (double v : like) CHECK(v >= 0.0);
    }
}

TEST_CASE("matched training tracks the true likelihood on the identity channel") {
    const auto& provider = identity_provider();
    const double sigma2 = 0.31622776601683794;

    std::vector<double> learned, truth;
    for (double y = -3.0; y <= 3.0; y += 0.05) {
        auto like = neural_likelihood(provider, y);
        for (int s = 0; s < 2; ++s) {
            learned.push_back(like[static_cast<std::size_t>(s)]);
            truth.push_back(gaussian_likelihood(y, s == 0 ? -1.0 : 1.0, sigma2));
        }
    }
    double ml = 0.0, mt = 0.0;
    for (std::size_t i = 0; i < learned.size(); ++i) {
        ml += learned[i];
        mt += truth[i];
    }
    ml /= static_cast<double>(learned.size());
    mt /= static_cast<double>(truth.size());
    double num = 0.0, dl = 0.0, dt = 0.0;
    for (std::size_t i = 0; i < learned.size(); ++i) {
        num += (learned[i] - ml) * (truth[i] - mt);
        dl += (learned[i] - ml) * (learned[i] - ml);
        dt += (truth[i] - mt) * (truth[i] - mt);
    }
    double pearson = num / std::sqrt(dl * dt);
    CHECK(pearson > 0.99);
}

TEST_CASE("build_neural_table shape, determinism and detector agreement") {
    const auto& provider = identity_provider();
    auto taps = normalize_taps(TapProfile({1.0}, 1, false));
    NoiseSpec spec = NoiseSpec::from_snr_db(5.0);
    rng::Stream sym = rng::stream(505, {1});
    rng::Stream noise = rng::stream(505, {2});
    Frame f = transmit(bpsk_source(10000, sym), taps, spec, noise);

    auto table = build_neural_table(f.outputs, provider);
    CHECK(table.length == 10000);
    CHECK(table.num_states == 2);

    auto again = build_neural_table(f.outputs, provider);
    CHECK(table.values == again.values);

    Trellis trellis(1);
    auto neural = map_detect(table, trellis);
    CsiLikelihoodProvider csi(taps, spec.variance, trellis);
    auto conventional = map_detect(build_table(f.outputs, csi), trellis);
    int disagreements = 0;
    for (std::size_t i = 0; i < neural.decisions.size(); ++i)
        disagreements += neural.decisions[i] != conventional.decisions[i];
    CHECK(static_cast<double>(disagreements) / 10000.0 <= 0.005);
}

TEST_CASE("provider artifacts round-trip exactly") {
    const auto& provider = identity_provider();
    auto path = std::filesystem::temp_directory_path() / "isilab_provider_roundtrip.json";
    save_provider(provider, path);
    auto loaded = load_provider(path);
    std::filesystem::remove(path);

    CHECK(loaded.mlp.w1 == provider.mlp.w1);
    CHECK(loaded.mlp.b1 == provider.mlp.b1);
    CHECK(loaded.mlp.w2 == provider.mlp.w2);
    CHECK(loaded.mlp.b2 == provider.mlp.b2);
    CHECK(loaded.mlp.w3 == provider.mlp.w3);
    CHECK(loaded.mlp.b3 == provider.mlp.b3);
    CHECK(loaded.gmm.weights == provider.gmm.weights);
    CHECK(loaded.gmm.means == provider.gmm.means);
    CHECK(loaded.gmm.variances == provider.gmm.variances);
    CHECK(loaded.trellis.memory() == provider.trellis.memory());
    CHECK(loaded.seed == provider.seed);
    CHECK(loaded.training_fingerprint == provider.training_fingerprint);

    // identical parameters produce identical tables
    rng::Stream s(606);
    std::vector<double> y(200);
    for (double& v : y) v = s.next_uniform(-2.0, 2.0);
    CHECK(build_neural_table(y, loaded).values == build_neural_table(y, provider).values);
}

TEST_CASE("artifacts with invalid mixture parameters are rejected") {
    const auto& provider = identity_provider();
    auto j = provider_to_json(provider);
    auto bad = j;
    bad["gmm"]["variances"][0] = 0.0;
    CHECK_THROWS_AS(provider_from_json(bad), ConfigError);
    bad = j;
    bad["gmm"]["weights"][0] = -0.25;
    CHECK_THROWS_AS(provider_from_json(bad), ConfigError);
    bad = j;
    bad["format_version"] = 999;
    CHECK_THROWS_AS(provider_from_json(bad), ConfigError);
    bad = j;
    bad["mlp"]["w2"] = std::vector<double>{1.0, 2.0};
    CHECK_THROWS_AS(provider_from_json(bad), ConfigError);
}

TEST_CASE("provider construction rejects width mismatches") {
    GmmModel gmm{{1.0}, {0.0}, {1.0}};
    CHECK_THROWS_AS(NeuralLikelihoodProvider(MlpParams(10, 5, 4), gmm, Trellis(3)),
                    InvalidParameter);
}
