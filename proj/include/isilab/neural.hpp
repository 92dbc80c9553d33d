#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "isilab/channel.hpp"
#include "isilab/errors.hpp"
#include "isilab/gmm.hpp"
#include "isilab/likelihood.hpp"
#include "isilab/mlp.hpp"
#include "isilab/trellis.hpp"

namespace isilab {

// Learned likelihood source: classifier posterior x GMM marginal, inverted
// through Bayes' rule with the uniform state prior 1/2^L.
struct NeuralLikelihoodProvider {
    MlpParams mlp;
    GmmModel gmm;
    Trellis trellis;
    std::uint64_t seed = 0;
    std::uint64_t training_fingerprint = 0;

    NeuralLikelihoodProvider(MlpParams mlp_, GmmModel gmm_, Trellis trellis_,
                             std::uint64_t seed_ = 0, std::uint64_t fingerprint = 0)
        : mlp(std::move(mlp_)), gmm(std::move(gmm_)), trellis(std::move(trellis_)),
          seed(seed_), training_fingerprint(fingerprint) {
        if (mlp.classes != trellis.num_states())
            throw InvalidParameter("NeuralLikelihoodProvider: classifier width != state count");
    }
};

// Labeled pairs (y_t, state index of the last L symbols). The first L-1
// positions have zero-padded windows and no valid label, so they are dropped.
inline TrainingSet make_training_set(const Frame& frame, int assumed_memory) {
    const int T = frame.length();
    if (assumed_memory < 1 || assumed_memory > T)
        throw InvalidParameter("make_training_set: bad assumed memory");
    TrainingSet data;
    data.num_classes = 1 << assumed_memory;
    data.inputs.reserve(static_cast<std::size_t>(T - assumed_memory + 1));
    data.labels.reserve(static_cast<std::size_t>(T - assumed_memory + 1));
    for (int t = assumed_memory - 1; t < T; ++t) {
        int label = 0;
        for (int j = 0; j < assumed_memory; ++j)
            label |= (frame.inputs[static_cast<std::size_t>(t - j)] > 0.0 ? 1 : 0)
                     << (assumed_memory - 1 - j);
        data.inputs.push_back(frame.outputs[static_cast<std::size_t>(t)]);
        data.labels.push_back(label);
    }
    return data;
}

// p(y|s) = p(s|y) p(y) / (1/2^L), one entry per state.
inline std::vector<double> neural_likelihood(const NeuralLikelihoodProvider& provider, double y) {
    std::vector<double> likelihood = mlp_forward(provider.mlp, y);
    const double scale = gmm_density(provider.gmm, y) * provider.trellis.num_states();
    for (double& v : likelihood) v *= scale;
    return likelihood;
}

inline LikelihoodTable build_neural_table(std::span<const double> outputs,
                                          const NeuralLikelihoodProvider& provider) {
    const int T = static_cast<int>(outputs.size());
    if (T < 1) throw InvalidParameter("build_neural_table: empty output sequence");
    const int S = provider.trellis.num_states();
    LikelihoodTable table(T, S);
    detail::MlpWorkspace ws(provider.mlp);
    for (int t = 0; t < T; ++t) {
        const double y = outputs[static_cast<std::size_t>(t)];
        detail::forward_into(provider.mlp, y, ws);
        const double scale = gmm_density(provider.gmm, y) * S;
        bool any = false;
        for (StateIndex s = 0; s < S; ++s) {
            double v = ws.probs[static_cast<std::size_t>(s)] * scale;
            table.at(t, s) = v;
            any = any || v > 0.0;
        }
        if (!any) {
            for (StateIndex s = 0; s < S; ++s) table.at(t, s) = 1.0;
            ++table.underflow_rows;
        }
    }
    return table;
}

// --- provider artifact -------------------------------------------------
//
// Versioned JSON: layer shapes and weights, mixture parameters, the training
// seed, and a fingerprint of the training-relevant configuration so cached
// artifacts are only reused for the configuration that produced them.

inline constexpr int kProviderFormatVersion = 1;

inline nlohmann::json provider_to_json(const NeuralLikelihoodProvider& provider) {
    nlohmann::json j;
    j["format_version"] = kProviderFormatVersion;
    j["memory"] = provider.trellis.memory();
    j["seed"] = provider.seed;
    j["training_fingerprint"] = provider.training_fingerprint;
    j["mlp"] = {
        {"hidden1", provider.mlp.hidden1}, {"hidden2", provider.mlp.hidden2},
        {"classes", provider.mlp.classes}, {"w1", provider.mlp.w1}, {"b1", provider.mlp.b1},
        {"w2", provider.mlp.w2},           {"b2", provider.mlp.b2}, {"w3", provider.mlp.w3},
        {"b3", provider.mlp.b3}};
    j["gmm"] = {{"weights", provider.gmm.weights},
                {"means", provider.gmm.means},
                {"variances", provider.gmm.variances}};
    return j;
}

inline NeuralLikelihoodProvider provider_from_json(const nlohmann::json& j) {
    if (!j.contains("format_version") || j.at("format_version").get<int>() != kProviderFormatVersion)
        throw ConfigError("provider artifact: unsupported format version");
    const int memory = j.at("memory").get<int>();
    const auto& jm = j.at("mlp");
    MlpParams mlp(jm.at("hidden1").get<int>(), jm.at("hidden2").get<int>(),
                  jm.at("classes").get<int>());
    mlp.w1 = jm.at("w1").get<std::vector<double>>();
    mlp.b1 = jm.at("b1").get<std::vector<double>>();
    mlp.w2 = jm.at("w2").get<std::vector<double>>();
    mlp.b2 = jm.at("b2").get<std::vector<double>>();
    mlp.w3 = jm.at("w3").get<std::vector<double>>();
    mlp.b3 = jm.at("b3").get<std::vector<double>>();
    if (mlp.w1.size() != mlp.b1.size() || mlp.w2.size() != mlp.b1.size() * mlp.b2.size() ||
        mlp.w3.size() != mlp.b2.size() * mlp.b3.size() ||
        static_cast<int>(mlp.b3.size()) != mlp.classes)
        throw ConfigError("provider artifact: inconsistent layer shapes");
    const auto& jg = j.at("gmm");
    GmmModel gmm{jg.at("weights").get<std::vector<double>>(),
                 jg.at("means").get<std::vector<double>>(),
                 jg.at("variances").get<std::vector<double>>()};
    if (gmm.means.size() != gmm.weights.size() || gmm.variances.size() != gmm.weights.size() ||
        gmm.weights.empty())
        throw ConfigError("provider artifact: inconsistent mixture shapes");
    for (double w : gmm.weights)
        if (!(w >= 0.0) || !std::isfinite(w))
            throw ConfigError("provider artifact: bad mixture weight");
    for (double v : gmm.variances)
        if (!(v > 0.0) || !std::isfinite(v))
            throw ConfigError("provider artifact: bad mixture variance");
    return NeuralLikelihoodProvider(std::move(mlp), std::move(gmm), Trellis(memory),
                                    j.at("seed").get<std::uint64_t>(),
                                    j.at("training_fingerprint").get<std::uint64_t>());
}

inline void save_provider(const NeuralLikelihoodProvider& provider,
                          const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("save_provider: cannot open " + path.string());
    out << provider_to_json(provider).dump(1) << '\n';
}

inline NeuralLikelihoodProvider load_provider(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("load_provider: cannot open " + path.string());
    nlohmann::json j;
    in >> j;
    return provider_from_json(j);
}

}  // namespace isilab
