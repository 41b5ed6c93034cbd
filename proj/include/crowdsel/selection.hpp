#pragma once
// Budget-constrained worker selection.
//
// select_workers ranks workers by their informativeness score x_i, then
// scans the prefix scores F_k = (x_(1) + ... + x_(k)) / sqrt(k) for
// k = 1..min(K, M) and keeps the shortest prefix attaining the maximum.
// That prefix is a global maximizer of Fhat over all subsets of size <= K,
// and has minimum cardinality among maximizers, so it is also Pareto
// optimal for (Fhat, -|S|). brute_force_select enumerates every subset and
// exists to check those claims on small pools.
//
// Scores are passed in rather than recomputed, so the same routine serves
// the bias-corrected scores, the plugin scores, or anything else.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "crowdsel/model.hpp"
#include "crowdsel/rng.hpp"

namespace crowdsel {

namespace detail {

// Worker ids (1-based) ordered by descending value; ties keep the smaller id first.
inline std::vector<int> order_descending(std::span<const double> values) {
    std::vector<int> order(values.size());
    std::iota(order.begin(), order.end(), 1);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double xa = values[static_cast<std::size_t>(a - 1)];
        const double xb = values[static_cast<std::size_t>(b - 1)];
        if (xa != xb) return xa > xb;
        return a < b;
    });
    return order;
}

} // namespace detail

// Linearithmic prefix-scan selection. Comparisons between prefix scores
// are exact double comparisons; sort ties break toward the smaller worker
// index so results are reproducible.
inline SelectionResult select_workers(std::span<const double> x_scores, int budget) {
    if (x_scores.empty()) throw std::invalid_argument("select_workers: empty worker pool");
    if (budget < 1) throw std::invalid_argument("select_workers: budget must be at least 1");

    const int m = static_cast<int>(x_scores.size());
    const int cap = std::min(budget, m);
    const std::vector<int> order = detail::order_descending(x_scores);

    SelectionResult result;
    result.prefix_scores.reserve(static_cast<std::size_t>(cap));
    double running = 0.0;
    for (int k = 1; k <= cap; ++k) {
        running += x_scores[static_cast<std::size_t>(order[static_cast<std::size_t>(k - 1)] - 1)];
        result.prefix_scores.push_back(running / std::sqrt(static_cast<double>(k)));
    }

    int best_k = 1;
    for (int k = 2; k <= cap; ++k)
        if (result.prefix_scores[static_cast<std::size_t>(k - 1)] >
            result.prefix_scores[static_cast<std::size_t>(best_k - 1)])
            best_k = k;

    result.k_star = best_k;
    result.f_hat_star = result.prefix_scores[static_cast<std::size_t>(best_k - 1)];
    result.selected.assign(order.begin(), order.begin() + best_k);
    return result;
}

// Exhaustive oracle: exact maximizer of Fhat over all nonempty subsets of
// size <= budget, minimum cardinality among maximizers. Sums run
// left-to-right over the same descending order select_workers uses, so on
// instances without pathological float ties the two agree bit-for-bit.
// prefix_scores holds the best value found at each cardinality.
inline SelectionResult brute_force_select(std::span<const double> x_scores, int budget) {
    if (x_scores.empty()) throw std::invalid_argument("brute_force_select: empty worker pool");
    if (budget < 1) throw std::invalid_argument("brute_force_select: budget must be at least 1");
    const int m = static_cast<int>(x_scores.size());
    if (m > 22)
        throw std::invalid_argument("brute_force_select: pool too large for 2^M enumeration");

    const int cap = std::min(budget, m);
    const std::vector<int> order = detail::order_descending(x_scores);
    std::vector<double> sorted(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i)
        sorted[static_cast<std::size_t>(i)] =
            x_scores[static_cast<std::size_t>(order[static_cast<std::size_t>(i)] - 1)];

    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    std::vector<double> best_by_card(static_cast<std::size_t>(cap + 1), kNegInf);
    std::vector<std::uint32_t> best_mask(static_cast<std::size_t>(cap + 1), 0);

    // Depth-first over sorted positions; each node carries the running sum.
    struct Frame {
        int pos;
        int card;
        double sum;
        std::uint32_t mask;
    };
    std::vector<Frame> stack;
    stack.push_back({0, 0, 0.0, 0});
    while (!stack.empty()) {
        const Frame f = stack.back();
        stack.pop_back();
        if (f.pos == m) continue;
        // exclude branch
        stack.push_back({f.pos + 1, f.card, f.sum, f.mask});
        // include branch
        const double sum = f.sum + sorted[static_cast<std::size_t>(f.pos)];
        const int card = f.card + 1;
        const std::uint32_t mask = f.mask | (std::uint32_t{1} << f.pos);
        const double score = sum / std::sqrt(static_cast<double>(card));
        if (score > best_by_card[static_cast<std::size_t>(card)]) {
            best_by_card[static_cast<std::size_t>(card)] = score;
            best_mask[static_cast<std::size_t>(card)] = mask;
        }
        if (card < cap) stack.push_back({f.pos + 1, card, sum, mask});
    }

    int best_k = 1;
    for (int k = 2; k <= cap; ++k)
        if (best_by_card[static_cast<std::size_t>(k)] >
            best_by_card[static_cast<std::size_t>(best_k)])
            best_k = k;

    SelectionResult result;
    result.k_star = best_k;
    result.f_hat_star = best_by_card[static_cast<std::size_t>(best_k)];
    result.prefix_scores.assign(best_by_card.begin() + 1, best_by_card.end());
    const std::uint32_t mask = best_mask[static_cast<std::size_t>(best_k)];
    for (int i = 0; i < m; ++i)
        if (mask & (std::uint32_t{1} << i))
            result.selected.push_back(order[static_cast<std::size_t>(i)]);
    return result;
}

// Baseline: the min(K, M) workers with the highest estimated reliability,
// ties toward the smaller worker id.
inline std::vector<int> top_k(std::span<const WorkerStats> stats, int budget) {
    if (budget < 1) throw std::invalid_argument("top_k: budget must be at least 1");
    std::vector<const WorkerStats*> by_w(stats.size());
    for (std::size_t i = 0; i < stats.size(); ++i) by_w[i] = &stats[i];
    std::sort(by_w.begin(), by_w.end(), [](const WorkerStats* a, const WorkerStats* b) {
        if (a->w_hat != b->w_hat) return a->w_hat > b->w_hat;
        return a->worker < b->worker;
    });
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(budget), by_w.size());
    std::vector<int> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) out.push_back(by_w[i]->worker);
    return out;
}

// Baseline: uniform random min(K, M)-subset, deterministic per seed.
// Returned ids are sorted ascending.
inline std::vector<int> random_k(int num_workers, int budget, std::uint64_t seed) {
    if (num_workers < 1) throw std::invalid_argument("random_k: empty worker pool");
    if (budget < 1) throw std::invalid_argument("random_k: budget must be at least 1");
    Rng rng(seed);
    std::vector<int> ids =
        rng.sample_without_replacement(num_workers, std::min(budget, num_workers));
    std::sort(ids.begin(), ids.end());
    return ids;
}

} // namespace crowdsel
