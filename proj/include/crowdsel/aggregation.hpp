#pragma once
// Label aggregation: weighted majority voting with pluggable weight
// schemes, and one-coin EM.
//
// WMV scores item j on class k as s_jk = sum over answering subset
// workers of weight_i * [z_ij == k]; the prediction is the argmax with
// ties broken toward the smaller label index (and counted, so experiments
// can report them).
//
// EM alternates a posterior step over true labels with reliability and
// class-prior re-estimation, all in log space so long worker lists cannot
// underflow. The observed-data log-likelihood is recorded per iteration;
// it is non-decreasing up to float noise.

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "crowdsel/model.hpp"

namespace crowdsel {

enum class WeightScheme { uniform, linear, log_odds };

struct WeightVector {
    std::vector<double> values; // indexed by worker id - 1
    WeightScheme scheme = WeightScheme::uniform;
};

struct AggregationOutput {
    std::vector<int> predicted;              // per item, 1..L
    std::vector<std::vector<double>> scores; // per item, per class
    int tie_count = 0;
};

inline WeightVector uniform_weights(int num_workers) {
    return {std::vector<double>(static_cast<std::size_t>(num_workers), 1.0),
            WeightScheme::uniform};
}

// nu_i = L w_hat_i - 1: zero at chance level 1/L, negative below it.
inline WeightVector linear_weights(std::span<const double> w_hats, int num_classes) {
    WeightVector wv;
    wv.scheme = WeightScheme::linear;
    wv.values.reserve(w_hats.size());
    for (const double w : w_hats) {
        if (w < 0.0 || w > 1.0) throw std::invalid_argument("linear_weights: w_hat outside [0, 1]");
        wv.values.push_back(static_cast<double>(num_classes) * w - 1.0);
    }
    return wv;
}

// Log-odds weights logit(w_hat) - logit(1/L), with w_hat clamped to
// [eps, 1-eps] first so estimates at 0 or 1 stay finite.
inline WeightVector log_weights(std::span<const double> w_hats, int num_classes,
                                double clamp_eps) {
    if (!(clamp_eps > 0.0 && clamp_eps < 0.5))
        throw std::invalid_argument("log_weights: clamp_eps must lie in (0, 0.5)");
    const double chance = 1.0 / static_cast<double>(num_classes);
    const double offset = std::log(chance / (1.0 - chance));
    WeightVector wv;
    wv.scheme = WeightScheme::log_odds;
    wv.values.reserve(w_hats.size());
    for (double w : w_hats) {
        w = std::clamp(w, clamp_eps, 1.0 - clamp_eps);
        wv.values.push_back(std::log(w / (1.0 - w)) - offset);
    }
    return wv;
}

namespace detail {

inline void check_subset(const LabelMatrix& matrix, std::span<const int> subset,
                         std::size_t weight_count, const char* who) {
    if (subset.empty()) throw std::invalid_argument(std::string(who) + ": empty worker subset");
    for (const int w : subset) {
        if (w < 1 || w > matrix.num_workers())
            throw std::invalid_argument(std::string(who) + ": worker id " + std::to_string(w) +
                                        " out of range");
        if (weight_count != 0 && static_cast<std::size_t>(w) > weight_count)
            throw std::invalid_argument(std::string(who) + ": no weight for worker " +
                                        std::to_string(w));
    }
}

// argmax over class scores, smallest label on ties; bumps `ties` when the
// maximum is not unique.
inline int argmax_label(std::span<const double> scores, int& ties) {
    int best = 1;
    for (int k = 2; k <= static_cast<int>(scores.size()); ++k)
        if (scores[static_cast<std::size_t>(k - 1)] > scores[static_cast<std::size_t>(best - 1)])
            best = k;
    for (int k = 1; k <= static_cast<int>(scores.size()); ++k)
        if (k != best && scores[static_cast<std::size_t>(k - 1)] ==
                             scores[static_cast<std::size_t>(best - 1)]) {
            ++ties;
            break;
        }
    return best;
}

} // namespace detail

// Weighted majority voting over a worker subset. Items no subset member
// answered fall back to label 1 and count as ties.
inline AggregationOutput aggregate_wmv(const LabelMatrix& matrix, const WeightVector& weights,
                                       std::span<const int> worker_subset) {
    detail::check_subset(matrix, worker_subset, weights.values.size(), "aggregate_wmv");

    const int n = matrix.num_items();
    const int l = matrix.num_classes();
    AggregationOutput out;
    out.predicted.resize(static_cast<std::size_t>(n));
    out.scores.assign(static_cast<std::size_t>(n),
                      std::vector<double>(static_cast<std::size_t>(l), 0.0));

    for (int j = 1; j <= n; ++j) {
        auto& s = out.scores[static_cast<std::size_t>(j - 1)];
        for (const int w : worker_subset) {
            const int z = matrix.label(w, j);
            if (z != 0) s[static_cast<std::size_t>(z - 1)] += weights.values[static_cast<std::size_t>(w - 1)];
        }
        out.predicted[static_cast<std::size_t>(j - 1)] = detail::argmax_label(s, out.tie_count);
    }
    return out;
}

// Plain majority voting == WMV with unit weights.
inline AggregationOutput aggregate_majority(const LabelMatrix& matrix,
                                            std::span<const int> worker_subset) {
    return aggregate_wmv(matrix, uniform_weights(matrix.num_workers()), worker_subset);
}

struct EmOptions {
    int max_iter = 100;
    double tol = 1e-6;
    // Items whose posterior is pinned to a known label (item, label);
    // used when control items take part in aggregation.
    std::vector<std::pair<int, int>> clamp_items;
};

struct EmResult {
    AggregationOutput output;        // scores hold the label posteriors
    std::vector<double> final_w;     // size M; untouched workers keep their init
    std::vector<double> class_prior; // size L
    std::vector<double> log_likelihood; // observed-data ll per iteration
    int iterations = 0;
    bool converged = false;
};

// Observed-data log-likelihood of reliabilities + class prior under the
// one-coin model, restricted to `worker_subset`. Shares its summation
// structure with the EM E-step.
inline double one_coin_log_likelihood(const LabelMatrix& matrix, std::span<const int> worker_subset,
                                      std::span<const double> w, std::span<const double> prior) {
    const int n = matrix.num_items();
    const int l = matrix.num_classes();
    std::vector<double> log_correct(w.size()), log_wrong(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        log_correct[i] = std::log(w[i]);
        log_wrong[i] = std::log((1.0 - w[i]) / static_cast<double>(l - 1));
    }
    std::vector<double> lp(static_cast<std::size_t>(l));
    double total = 0.0;
    for (int j = 1; j <= n; ++j) {
        for (int k = 0; k < l; ++k) lp[static_cast<std::size_t>(k)] = std::log(prior[static_cast<std::size_t>(k)]);
        for (const int wk : worker_subset) {
            const int z = matrix.label(wk, j);
            if (z == 0) continue;
            const std::size_t wi = static_cast<std::size_t>(wk - 1);
            for (int k = 1; k <= l; ++k)
                lp[static_cast<std::size_t>(k - 1)] += (k == z) ? log_correct[wi] : log_wrong[wi];
        }
        double mx = lp[0];
        for (int k = 1; k < l; ++k) mx = std::max(mx, lp[static_cast<std::size_t>(k)]);
        double z = 0.0;
        for (int k = 0; k < l; ++k) z += std::exp(lp[static_cast<std::size_t>(k)] - mx);
        total += mx + std::log(z);
    }
    return total;
}

// One-coin EM restricted to a worker subset.
//
//   E: mu_j(k) propto pi_k * prod_i [w_i if z_ij = k else (1-w_i)/(L-1)]
//   M: w_i = mean over answered items of mu_j(z_ij); pi_k = mean_j mu_j(k)
//
// Initial reliabilities are clamped to [1e-4, 1 - 1e-4]; re-estimated ones
// to [1e-13, 1 - 1e-13] so no class can reach an all-zero posterior.
// Stops when max |delta w_i| < tol or after max_iter iterations. Workers
// outside the subset, or who answered nothing, keep their initial value.
inline EmResult em_one_coin(const LabelMatrix& matrix, std::span<const double> init_w,
                            std::span<const int> worker_subset, const EmOptions& opts = {}) {
    detail::check_subset(matrix, worker_subset, init_w.size(), "em_one_coin");
    if (init_w.size() != static_cast<std::size_t>(matrix.num_workers()))
        throw std::invalid_argument("em_one_coin: init_w must cover every worker");
    if (opts.max_iter < 1) throw std::invalid_argument("em_one_coin: max_iter must be at least 1");
    if (!(opts.tol > 0.0)) throw std::invalid_argument("em_one_coin: tol must be positive");

    constexpr double kInitEps = 1e-4;
    constexpr double kIterEps = 1e-13;
    const int n = matrix.num_items();
    const int l = matrix.num_classes();

    std::vector<int> clamp_label(static_cast<std::size_t>(n), 0);
    for (const auto& [item, label] : opts.clamp_items) {
        if (item < 1 || item > n || label < 1 || label > l)
            throw std::invalid_argument("em_one_coin: clamp entry out of range");
        clamp_label[static_cast<std::size_t>(item - 1)] = label;
    }

    EmResult res;
    res.final_w.assign(init_w.begin(), init_w.end());
    for (const int wk : worker_subset) {
        double& w = res.final_w[static_cast<std::size_t>(wk - 1)];
        if (!(w >= 0.0 && w <= 1.0))
            throw std::invalid_argument("em_one_coin: init_w must lie in [0, 1]");
        w = std::clamp(w, kInitEps, 1.0 - kInitEps);
    }
    res.class_prior.assign(static_cast<std::size_t>(l), 1.0 / static_cast<double>(l));

    std::vector<int> answered(res.final_w.size(), 0);
    for (const int wk : worker_subset) {
        int count = 0;
        for (int j = 1; j <= n; ++j)
            if (matrix.has_answer(wk, j)) ++count;
        answered[static_cast<std::size_t>(wk - 1)] = count;
    }

    std::vector<std::vector<double>> mu(static_cast<std::size_t>(n),
                                        std::vector<double>(static_cast<std::size_t>(l), 0.0));
    std::vector<double> log_correct(res.final_w.size()), log_wrong(res.final_w.size());
    std::vector<double> lp(static_cast<std::size_t>(l));

    for (int iter = 0; iter < opts.max_iter; ++iter) {
        // E-step, in log space; also accumulates the observed-data ll.
        for (const int wk : worker_subset) {
            const std::size_t wi = static_cast<std::size_t>(wk - 1);
            log_correct[wi] = std::log(res.final_w[wi]);
            log_wrong[wi] = std::log((1.0 - res.final_w[wi]) / static_cast<double>(l - 1));
        }
        double ll = 0.0;
        for (int j = 1; j <= n; ++j) {
            for (int k = 0; k < l; ++k)
                lp[static_cast<std::size_t>(k)] = std::log(res.class_prior[static_cast<std::size_t>(k)]);
            for (const int wk : worker_subset) {
                const int z = matrix.label(wk, j);
                if (z == 0) continue;
                const std::size_t wi = static_cast<std::size_t>(wk - 1);
                for (int k = 1; k <= l; ++k)
                    lp[static_cast<std::size_t>(k - 1)] += (k == z) ? log_correct[wi] : log_wrong[wi];
            }
            double mx = lp[0];
            for (int k = 1; k < l; ++k) mx = std::max(mx, lp[static_cast<std::size_t>(k)]);
            double z = 0.0;
            for (int k = 0; k < l; ++k) z += std::exp(lp[static_cast<std::size_t>(k)] - mx);
            ll += mx + std::log(z);

            auto& m = mu[static_cast<std::size_t>(j - 1)];
            if (const int pinned = clamp_label[static_cast<std::size_t>(j - 1)]; pinned != 0) {
                std::fill(m.begin(), m.end(), 0.0);
                m[static_cast<std::size_t>(pinned - 1)] = 1.0;
            } else {
                for (int k = 0; k < l; ++k)
                    m[static_cast<std::size_t>(k)] = std::exp(lp[static_cast<std::size_t>(k)] - mx) / z;
            }
        }
        res.log_likelihood.push_back(ll);
        res.iterations = iter + 1;

        // M-step.
        double max_delta = 0.0;
        for (const int wk : worker_subset) {
            const std::size_t wi = static_cast<std::size_t>(wk - 1);
            if (answered[wi] == 0) continue;
            double agree = 0.0;
            for (int j = 1; j <= n; ++j) {
                const int z = matrix.label(wk, j);
                if (z != 0) agree += mu[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(z - 1)];
            }
            const double next = std::clamp(agree / static_cast<double>(answered[wi]), kIterEps,
                                           1.0 - kIterEps);
            max_delta = std::max(max_delta, std::abs(next - res.final_w[wi]));
            res.final_w[wi] = next;
        }
        for (int k = 0; k < l; ++k) {
            double mass = 0.0;
            for (int j = 0; j < n; ++j) mass += mu[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
            res.class_prior[static_cast<std::size_t>(k)] = mass / static_cast<double>(n);
        }

        if (max_delta < opts.tol) {
            res.converged = true;
            break;
        }
    }

    res.output.predicted.resize(static_cast<std::size_t>(n));
    res.output.scores = mu;
    for (int j = 1; j <= n; ++j)
        res.output.predicted[static_cast<std::size_t>(j - 1)] =
            detail::argmax_label(mu[static_cast<std::size_t>(j - 1)], res.output.tie_count);
    return res;
}

// Fraction of eval_items whose prediction matches the truth.
inline double accuracy(std::span<const int> predicted, std::span<const int> truths,
                       std::span<const int> eval_items) {
    if (eval_items.empty()) throw std::invalid_argument("accuracy: no evaluation items");
    std::size_t hits = 0;
    for (const int j : eval_items) {
        if (j < 1 || static_cast<std::size_t>(j) > predicted.size() ||
            static_cast<std::size_t>(j) > truths.size())
            throw std::invalid_argument("accuracy: item index out of range");
        if (predicted[static_cast<std::size_t>(j - 1)] == truths[static_cast<std::size_t>(j - 1)])
            ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(eval_items.size());
}

} // namespace crowdsel
