#pragma once
// Synthetic data generation: Beta-distributed worker reliabilities,
// uniform true labels, one-coin answers.
//
// The three draws consume independent substreams of the config seed
// (ids below), so e.g. changing the item count never changes the worker
// vector drawn for the same seed.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "crowdsel/model.hpp"
#include "crowdsel/rng.hpp"

namespace crowdsel {

struct SimConfig {
    int num_workers = 0;
    int num_items = 0;
    int num_classes = 2;
    double beta_a = 2.3;
    double beta_b = 2.0;
    std::uint64_t seed = 0;
};

namespace stream {
inline constexpr std::uint64_t workers = 1;
inline constexpr std::uint64_t truths = 2;
inline constexpr std::uint64_t labels = 3;
} // namespace stream

// M i.i.d. Beta(a, b) reliabilities.
inline std::vector<double> draw_workers(int num_workers, double beta_a, double beta_b,
                                        std::uint64_t seed) {
    if (num_workers < 1) throw std::invalid_argument("draw_workers: need at least 1 worker");
    if (!(beta_a > 0.0) || !(beta_b > 0.0))
        throw std::invalid_argument("draw_workers: Beta parameters must be positive");
    Rng rng(seed);
    std::vector<double> w(static_cast<std::size_t>(num_workers));
    for (double& x : w) x = rng.next_beta(beta_a, beta_b);
    return w;
}

// N i.i.d. uniform labels in 1..L.
inline std::vector<int> draw_truths(int num_items, int num_classes, std::uint64_t seed) {
    if (num_items < 1) throw std::invalid_argument("draw_truths: need at least 1 item");
    if (num_classes < 2) throw std::invalid_argument("draw_truths: need at least 2 classes");
    Rng rng(seed);
    std::vector<int> y(static_cast<std::size_t>(num_items));
    for (int& t : y)
        t = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(num_classes)));
    return y;
}

// Complete answer matrix under the one-coin model: worker i answers the
// truth with probability w_i, otherwise one of the L-1 wrong labels
// uniformly. Truths are embedded in the returned matrix.
inline LabelMatrix generate_labels(std::span<const double> reliabilities,
                                   std::span<const int> truths, int num_classes,
                                   std::uint64_t seed) {
    const int m = static_cast<int>(reliabilities.size());
    const int n = static_cast<int>(truths.size());
    if (m < 1 || n < 1) throw std::invalid_argument("generate_labels: empty workers or items");
    if (num_classes < 2) throw std::invalid_argument("generate_labels: need at least 2 classes");
    for (const double w : reliabilities)
        if (w < 0.0 || w > 1.0)
            throw std::invalid_argument("generate_labels: reliability outside [0, 1]");

    Rng rng(seed);
    std::vector<int> cells(static_cast<std::size_t>(m) * static_cast<std::size_t>(n));
    std::size_t idx = 0;
    for (int i = 0; i < m; ++i) {
        const double w = reliabilities[static_cast<std::size_t>(i)];
        for (int j = 0; j < n; ++j) {
            const int y = truths[static_cast<std::size_t>(j)];
            int z;
            if (rng.next_double() < w) {
                z = y;
            } else {
                const int offset =
                    1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(num_classes - 1)));
                z = 1 + (y - 1 + offset) % num_classes;
            }
            cells[idx++] = z;
        }
    }
    return LabelMatrix(m, n, num_classes, std::move(cells),
                       static_cast<std::size_t>(m) * static_cast<std::size_t>(n),
                       std::vector<int>(truths.begin(), truths.end()));
}

struct SimData {
    std::vector<double> reliabilities;
    LabelMatrix matrix; // complete, with truths
};

inline SimData simulate_dataset(const SimConfig& cfg) {
    auto w = draw_workers(cfg.num_workers, cfg.beta_a, cfg.beta_b,
                          mix_seed(cfg.seed, stream::workers));
    auto y = draw_truths(cfg.num_items, cfg.num_classes, mix_seed(cfg.seed, stream::truths));
    auto matrix = generate_labels(w, y, cfg.num_classes, mix_seed(cfg.seed, stream::labels));
    return {std::move(w), std::move(matrix)};
}

} // namespace crowdsel
