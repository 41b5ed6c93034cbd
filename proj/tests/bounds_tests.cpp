#include <doctest.h>

#include <cmath>

#include "crowdsel/aggregation.hpp"
#include "crowdsel/bounds.hpp"
#include "crowdsel/simulate.hpp"

#include "test_support.hpp"

using namespace crowdsel;

TEST_SUITE_BEGIN("bounds");

TEST_CASE("random guessers get the vacuous bound") {
    const std::vector<double> w(5, 0.5);
    CHECK(error_upper_bound(w, 2) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("perfect binary workers") {
    const std::vector<double> w(8, 1.0);
    CHECK(error_upper_bound(w, 2) == doctest::Approx(std::exp(-4.0)).epsilon(1e-12));
    CHECK(error_upper_bound(w, 2) == doctest::Approx(0.018316).epsilon(1e-4));
}

TEST_CASE("perfect four-class workers") {
    const std::vector<double> w(4, 1.0);
    CHECK(error_upper_bound(w, 4) == doctest::Approx(3.0 * std::exp(-4.5)).epsilon(1e-12));
    CHECK(error_upper_bound(w, 4) == doctest::Approx(0.033327).epsilon(1e-4));
}

TEST_CASE("empty sets are rejected") {
    CHECK_THROWS_AS((void)error_upper_bound({}, 2), std::invalid_argument);
}

TEST_CASE("bound never increases when a worker improves past chance") {
    Rng rng(808);
    for (int iter = 0; iter < 200; ++iter) {
        const int l = 2 + static_cast<int>(rng.next_below(3));
        const int k = 1 + static_cast<int>(rng.next_below(10));
        std::vector<double> w(static_cast<std::size_t>(k));
        for (double& v : w) v = rng.next_uniform(1.0 / l, 1.0);
        const double before = error_upper_bound(w, l);

        const std::size_t who = rng.next_below(static_cast<std::uint64_t>(k));
        w[who] = rng.next_uniform(w[who], 1.0);
        CHECK(error_upper_bound(w, l) <= before + 1e-15);
    }
}

// Small-scale soundness: with true weights, the observed WMV-linear error
// stays below the bound. The acceptance suite runs the full 50-config
// version at 20k items.
TEST_CASE("bound holds on simulated data") {
    Rng rng(909);
    for (int cfg = 0; cfg < 5; ++cfg) {
        const int l = 2 + cfg % 3;
        const int workers = 4 + static_cast<int>(rng.next_below(8));
        std::vector<double> w(static_cast<std::size_t>(workers));
        for (double& v : w) v = rng.next_uniform(0.35, 0.95);

        const int items = 4000;
        const std::vector<int> truths = draw_truths(items, l, rng.next_u64());
        const LabelMatrix matrix = generate_labels(w, truths, l, rng.next_u64());

        const WeightVector weights = linear_weights(w, l);
        std::vector<int> subset(static_cast<std::size_t>(workers));
        for (int i = 0; i < workers; ++i) subset[static_cast<std::size_t>(i)] = i + 1;
        const AggregationOutput out = aggregate_wmv(matrix, weights, subset);

        std::vector<int> eval(static_cast<std::size_t>(items));
        for (int i = 0; i < items; ++i) eval[static_cast<std::size_t>(i)] = i + 1;
        const double err = 1.0 - accuracy(out.predicted, truths, eval);
        CHECK(err <= error_upper_bound(w, l) + 0.02);
    }
}

TEST_SUITE_END();
