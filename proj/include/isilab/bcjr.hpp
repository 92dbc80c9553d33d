#pragma once

#include <string>
#include <utility>
#include <vector>

#include "isilab/errors.hpp"
#include "isilab/likelihood.hpp"
#include "isilab/trellis.hpp"

namespace isilab {

// Forward-backward MAP symbol detection over a likelihood table.
//
// Conventions:
//  - the transition factor is f(y_t, s_t, s_{t-1}) = (1/M) p(y_t|s_t) on valid
//    transitions and 0 otherwise;
//  - boundary messages are uniform: the window before the frame is unknown,
//    so alpha_0 spreads evenly over all states, and nothing is observed after
//    the frame, so beta_T is uniform as well;
//  - every message row is rescaled to sum 1. Decisions and normalized
//    posteriors are invariant to the rescaling.

// Per-symbol posteriors; column 0 holds p(x_t = -1 | y), column 1 p(x_t = +1 | y).
struct Posteriors {
    int length = 0;
    std::vector<double> values;  // length x 2, rows sum to 1

    Posteriors() = default;
    explicit Posteriors(int length_)
        : length(length_), values(static_cast<std::size_t>(length_) * 2, 0.0) {}

    double at(int t, int bit) const { return values[static_cast<std::size_t>(t) * 2 + bit]; }
    double& at(int t, int bit) { return values[static_cast<std::size_t>(t) * 2 + bit]; }
};

struct DetectionResult {
    std::vector<double> decisions;  // hard MAP symbol estimates, +/-1
    Posteriors posteriors;
};

namespace detail {

inline void check_table(const LikelihoodTable& table, const Trellis& trellis) {
    if (table.length < 1) throw InvalidParameter("bcjr: empty likelihood table");
    if (table.num_states != trellis.num_states())
        throw InvalidParameter("bcjr: table width != trellis state count");
}

}  // namespace detail

// Forward messages; row t-1 holds alpha_t, each row rescaled to sum 1.
inline std::vector<double> forward_pass(const LikelihoodTable& table, const Trellis& trellis) {
    detail::check_table(table, trellis);
    const int T = table.length;
    const int S = trellis.num_states();
    std::vector<double> alpha(static_cast<std::size_t>(T) * S);
    std::vector<double> prev(static_cast<std::size_t>(S), 1.0 / S);
    for (int t = 0; t < T; ++t) {
        double* row = alpha.data() + static_cast<std::size_t>(t) * S;
        double sum = 0.0;
        for (StateIndex s = 0; s < S; ++s) {
            double in = prev[static_cast<std::size_t>(trellis.predecessor(s, 0))] +
                        prev[static_cast<std::size_t>(trellis.predecessor(s, 1))];
            double a = 0.5 * table.at(t, s) * in;
            row[s] = a;
            sum += a;
        }
        if (!(sum > 0.0)) throw NumericalDegeneracy("forward_pass: zero message mass at t=" +
                                                    std::to_string(t + 1));
        double inv = 1.0 / sum;
        for (StateIndex s = 0; s < S; ++s) {
            row[s] *= inv;
            prev[static_cast<std::size_t>(s)] = row[s];
        }
    }
    return alpha;
}

// Backward messages; row t-1 holds beta_t. beta_T is uniform.
inline std::vector<double> backward_pass(const LikelihoodTable& table, const Trellis& trellis) {
    detail::check_table(table, trellis);
    const int T = table.length;
    const int S = trellis.num_states();
    std::vector<double> beta(static_cast<std::size_t>(T) * S);
    for (StateIndex s = 0; s < S; ++s)
        beta[static_cast<std::size_t>(T - 1) * S + s] = 1.0 / S;
    for (int t = T - 2; t >= 0; --t) {
        const double* next = beta.data() + static_cast<std::size_t>(t + 1) * S;
        double* row = beta.data() + static_cast<std::size_t>(t) * S;
        double sum = 0.0;
        for (StateIndex s = 0; s < S; ++s) {
            StateIndex s0 = trellis.successor(s, 0);
            StateIndex s1 = trellis.successor(s, 1);
            double b = 0.5 * (table.at(t + 1, s0) * next[s0] + table.at(t + 1, s1) * next[s1]);
            row[s] = b;
            sum += b;
        }
        if (!(sum > 0.0)) throw NumericalDegeneracy("backward_pass: zero message mass at t=" +
                                                    std::to_string(t + 1));
        double inv = 1.0 / sum;
        for (StateIndex s = 0; s < S; ++s) row[s] *= inv;
    }
    return beta;
}

// MAP per-symbol decisions and normalized posteriors. Exact posterior ties
// break toward -1 so runs are reproducible.
inline DetectionResult map_detect(const LikelihoodTable& table, const Trellis& trellis) {
    detail::check_table(table, trellis);
    const int T = table.length;
    const int S = trellis.num_states();
    const std::vector<double> alpha = forward_pass(table, trellis);
    const std::vector<double> beta = backward_pass(table, trellis);

    DetectionResult result;
    result.decisions.resize(static_cast<std::size_t>(T));
    result.posteriors = Posteriors(T);

    std::vector<double> uniform(static_cast<std::size_t>(S), 1.0 / S);
    for (int t = 0; t < T; ++t) {
        const double* aprev =
            t == 0 ? uniform.data() : alpha.data() + static_cast<std::size_t>(t - 1) * S;
        const double* b = beta.data() + static_cast<std::size_t>(t) * S;
        double acc[2] = {0.0, 0.0};
        for (StateIndex s = 0; s < S; ++s) {
            double in = aprev[trellis.predecessor(s, 0)] + aprev[trellis.predecessor(s, 1)];
            acc[trellis.driving_bit(s)] += in * 0.5 * table.at(t, s) * b[s];
        }
        double sum = acc[0] + acc[1];
        if (!(sum > 0.0))
            throw NumericalDegeneracy("map_detect: zero posterior mass at t=" +
                                      std::to_string(t + 1));
        result.posteriors.at(t, 0) = acc[0] / sum;
        result.posteriors.at(t, 1) = acc[1] / sum;
        result.decisions[static_cast<std::size_t>(t)] = acc[1] > acc[0] ? 1.0 : -1.0;
    }
    return result;
}

}  // namespace isilab
