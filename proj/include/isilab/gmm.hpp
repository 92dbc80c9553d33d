#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "isilab/errors.hpp"
#include "isilab/rng.hpp"

namespace isilab {

// One-dimensional Gaussian mixture; the marginal density estimator of the
// learned-likelihood path.
struct GmmModel {
    std::vector<double> weights;
    std::vector<double> means;
    std::vector<double> variances;

    int components() const { return static_cast<int>(weights.size()); }
};

inline double gmm_density(const GmmModel& model, double y) {
    double density = 0.0;
    for (int k = 0; k < model.components(); ++k) {
        const double d = y - model.means[static_cast<std::size_t>(k)];
        const double var = model.variances[static_cast<std::size_t>(k)];
        density += model.weights[static_cast<std::size_t>(k)] *
                   std::exp(-d * d / (2.0 * var)) /
                   std::sqrt(2.0 * 3.141592653589793238462643383279 * var);
    }
    return density;
}

struct GmmFit {
    GmmModel model;
    std::vector<double> avg_log_likelihood;  // one entry per EM iteration
};

namespace detail {

inline double log_normal(double y, double mean, double var) {
    const double d = y - mean;
    return -0.5 * std::log(2.0 * 3.141592653589793238462643383279 * var) - d * d / (2.0 * var);
}

// K distinct starting centers, then a few Lloyd iterations.
inline GmmModel kmeans_seed(std::span<const double> samples, int k, rng::Stream& rng,
                            double variance_floor) {
    const std::size_t n = samples.size();
    std::vector<std::size_t> picks;
    picks.reserve(static_cast<std::size_t>(k));
    while (static_cast<int>(picks.size()) < k) {
        std::size_t idx = static_cast<std::size_t>(rng.next_index(static_cast<int>(n)));
        if (std::find(picks.begin(), picks.end(), idx) == picks.end()) picks.push_back(idx);
    }
    std::vector<double> centers;
    centers.reserve(static_cast<std::size_t>(k));
    for (std::size_t idx : picks) centers.push_back(samples[idx]);

    double total = 0.0, total_sq = 0.0;
    for (double y : samples) {
        total += y;
        total_sq += y * y;
    }
    const double overall_mean = total / static_cast<double>(n);
    const double overall_var =
        std::max(total_sq / static_cast<double>(n) - overall_mean * overall_mean, variance_floor);

    std::vector<int> assign(n, 0);
    std::vector<double> sum(static_cast<std::size_t>(k));
    std::vector<double> sumsq(static_cast<std::size_t>(k));
    std::vector<std::size_t> count(static_cast<std::size_t>(k));
    for (int it = 0; it < 10; ++it) {
        std::fill(sum.begin(), sum.end(), 0.0);
        std::fill(sumsq.begin(), sumsq.end(), 0.0);
        std::fill(count.begin(), count.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::max();
            for (int c = 0; c < k; ++c) {
                double d = std::abs(samples[i] - centers[static_cast<std::size_t>(c)]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            assign[i] = best;
            sum[static_cast<std::size_t>(best)] += samples[i];
            sumsq[static_cast<std::size_t>(best)] += samples[i] * samples[i];
            ++count[static_cast<std::size_t>(best)];
        }
        for (int c = 0; c < k; ++c) {
            if (count[static_cast<std::size_t>(c)] == 0) {
                centers[static_cast<std::size_t>(c)] =
                    samples[static_cast<std::size_t>(rng.next_index(static_cast<int>(n)))];
                continue;
            }
            centers[static_cast<std::size_t>(c)] =
                sum[static_cast<std::size_t>(c)] / static_cast<double>(count[static_cast<std::size_t>(c)]);
        }
    }

    GmmModel model;
    model.weights.resize(static_cast<std::size_t>(k));
    model.means.resize(static_cast<std::size_t>(k));
    model.variances.resize(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) {
        const std::size_t m = count[static_cast<std::size_t>(c)];
        model.means[static_cast<std::size_t>(c)] = centers[static_cast<std::size_t>(c)];
        if (m > 0) {
            double mean = sum[static_cast<std::size_t>(c)] / static_cast<double>(m);
            double var = sumsq[static_cast<std::size_t>(c)] / static_cast<double>(m) - mean * mean;
            model.variances[static_cast<std::size_t>(c)] = std::max(var, variance_floor);
            model.weights[static_cast<std::size_t>(c)] =
                static_cast<double>(m) / static_cast<double>(n);
        } else {
            model.variances[static_cast<std::size_t>(c)] = overall_var;
            model.weights[static_cast<std::size_t>(c)] = 1.0 / static_cast<double>(k);
        }
    }
    double wsum = 0.0;
    for (double w : model.weights) wsum += w;
    for (double& w : model.weights) w /= wsum;
    return model;
}

}  // namespace detail

// Expectation-maximization with k-means seeding. Stops when the average
// log-likelihood improves by less than `tol` or after `max_iterations`.
// A collapsed component is re-seeded once; a second collapse is an error.
inline GmmFit fit_gmm(std::span<const double> samples, int components, rng::Stream& rng,
                      int max_iterations = 200, double tol = 1e-6,
                      double variance_floor = 1e-6) {
    const std::size_t n = samples.size();
    if (components < 1) throw InvalidParameter("fit_gmm: need at least one component");
    if (n < static_cast<std::size_t>(components))
        throw InvalidParameter("fit_gmm: fewer samples than components");

    GmmFit fit;
    fit.model = detail::kmeans_seed(samples, components, rng, variance_floor);
    GmmModel& model = fit.model;
    const int k = components;

    double total = 0.0, total_sq = 0.0;
    for (double y : samples) {
        total += y;
        total_sq += y * y;
    }
    const double overall_mean = total / static_cast<double>(n);
    const double overall_var =
        std::max(total_sq / static_cast<double>(n) - overall_mean * overall_mean, variance_floor);

    std::vector<double> log_w(static_cast<std::size_t>(k));
    std::vector<double> resp(static_cast<std::size_t>(k));
    std::vector<double> nk(static_cast<std::size_t>(k));
    std::vector<double> s1(static_cast<std::size_t>(k));
    std::vector<double> s2(static_cast<std::size_t>(k));
    bool reseeded = false;
    double previous_ll = -std::numeric_limits<double>::max();

    for (int iter = 0; iter < max_iterations; ++iter) {
        for (int c = 0; c < k; ++c)
            log_w[static_cast<std::size_t>(c)] = std::log(model.weights[static_cast<std::size_t>(c)]);
        std::fill(nk.begin(), nk.end(), 0.0);
        std::fill(s1.begin(), s1.end(), 0.0);
        std::fill(s2.begin(), s2.end(), 0.0);

        double ll_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double y = samples[i];
            double lmax = -std::numeric_limits<double>::max();
            for (int c = 0; c < k; ++c) {
                double l = log_w[static_cast<std::size_t>(c)] +
                           detail::log_normal(y, model.means[static_cast<std::size_t>(c)],
                                              model.variances[static_cast<std::size_t>(c)]);
                resp[static_cast<std::size_t>(c)] = l;
                lmax = std::max(lmax, l);
            }
            double denom = 0.0;
            for (int c = 0; c < k; ++c) {
                double e = std::exp(resp[static_cast<std::size_t>(c)] - lmax);
                resp[static_cast<std::size_t>(c)] = e;
                denom += e;
            }
            ll_sum += lmax + std::log(denom);
            const double inv = 1.0 / denom;
            for (int c = 0; c < k; ++c) {
                double r = resp[static_cast<std::size_t>(c)] * inv;
                nk[static_cast<std::size_t>(c)] += r;
                s1[static_cast<std::size_t>(c)] += r * y;
                s2[static_cast<std::size_t>(c)] += r * y * y;
            }
        }
        fit.avg_log_likelihood.push_back(ll_sum / static_cast<double>(n));

        bool collapsed = false;
        for (int c = 0; c < k; ++c) {
            const double m = nk[static_cast<std::size_t>(c)];
            if (!(m > n * 1e-12) || !std::isfinite(m)) {
                if (reseeded)
                    throw NumericalDegeneracy("fit_gmm: component " + std::to_string(c) +
                                              " collapsed twice");
                model.means[static_cast<std::size_t>(c)] =
                    samples[static_cast<std::size_t>(rng.next_index(static_cast<int>(n)))];
                model.variances[static_cast<std::size_t>(c)] = overall_var;
                model.weights[static_cast<std::size_t>(c)] = 1.0 / static_cast<double>(k);
                collapsed = true;
                continue;
            }
            model.weights[static_cast<std::size_t>(c)] = m / static_cast<double>(n);
            double mean = s1[static_cast<std::size_t>(c)] / m;
            model.means[static_cast<std::size_t>(c)] = mean;
            model.variances[static_cast<std::size_t>(c)] =
                std::max(s2[static_cast<std::size_t>(c)] / m - mean * mean, variance_floor);
        }
        if (collapsed) {
            reseeded = true;
            double wsum = 0.0;
            for (double w : model.weights) wsum += w;
            for (double& w : model.weights) w /= wsum;
            continue;
        }

        const double ll = fit.avg_log_likelihood.back();
        if (iter > 0 && ll - previous_ll < tol) break;
        previous_ll = ll;
    }
    return fit;
}

}  // namespace isilab
