#include <doctest.h>

#include <cmath>

#include "crowdsel/simulate.hpp"

#include "test_support.hpp"

using namespace crowdsel;
using testsup::RunningStat;

TEST_SUITE_BEGIN("simulate");

TEST_CASE("worker draws are deterministic per seed and stay inside (0, 1)") {
    const auto a = draw_workers(50, 2.3, 2.0, 77);
    const auto b = draw_workers(50, 2.3, 2.0, 77);
    CHECK(a == b);
    CHECK(a != draw_workers(50, 2.3, 2.0, 78));
    for (const double w : draw_workers(100000 / 50, 2.3, 2.0, 3)) {
        CHECK(w > 0.0);
        CHECK(w < 1.0);
    }
}

TEST_CASE("Beta(2.3, 2) sample mean matches the analytic mean") {
    const auto w = draw_workers(100000, 2.3, 2.0, 12345);
    RunningStat stat;
    for (const double v : w) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
        stat.add(v);
    }
    CHECK(std::abs(stat.mean - 2.3 / 4.3) <= 0.003);
}

TEST_CASE("truth draws are uniform over the classes") {
    CHECK_THROWS_AS((void)draw_truths(10, 1, 0), std::invalid_argument);

    const auto y = draw_truths(100000, 4, 2020);
    std::vector<int> counts(4, 0);
    for (const int t : y) {
        REQUIRE(t >= 1);
        REQUIRE(t <= 4);
        ++counts[static_cast<std::size_t>(t - 1)];
    }
    for (const int c : counts) CHECK(std::abs(c / 100000.0 - 0.25) <= 0.005);

    CHECK(draw_truths(1000, 4, 5) == draw_truths(1000, 4, 5));
}

TEST_CASE("perfect and inverted workers") {
    const std::vector<int> truths = draw_truths(200, 2, 9);

    const LabelMatrix perfect = generate_labels(std::vector<double>{1.0}, truths, 2, 1);
    for (int j = 1; j <= 200; ++j) CHECK(perfect.label(1, j) == truths[static_cast<std::size_t>(j - 1)]);

    const LabelMatrix inverted = generate_labels(std::vector<double>{0.0}, truths, 2, 1);
    for (int j = 1; j <= 200; ++j)
        CHECK(inverted.label(1, j) == 3 - truths[static_cast<std::size_t>(j - 1)]);
}

TEST_CASE("one-coin error rates split evenly over wrong classes") {
    const int n = 10000, l = 4;
    const std::vector<int> truths = draw_truths(n, l, 31337);
    const LabelMatrix m = generate_labels(std::vector<double>{0.7}, truths, l, 31338);

    int correct = 0;
    std::vector<int> wrong_offset_counts(static_cast<std::size_t>(l - 1), 0);
    for (int j = 1; j <= n; ++j) {
        const int y = truths[static_cast<std::size_t>(j - 1)];
        const int z = m.label(1, j);
        if (z == y) {
            ++correct;
        } else {
            const int offset = ((z - 1) - (y - 1) + l) % l; // 1..L-1
            ++wrong_offset_counts[static_cast<std::size_t>(offset - 1)];
        }
    }
    CHECK(std::abs(correct / static_cast<double>(n) - 0.7) <= 0.015);
    for (const int c : wrong_offset_counts)
        CHECK(std::abs(c / static_cast<double>(n) - 0.1) <= 0.01);
}

TEST_CASE("workers err independently given the truths") {
    const int n = 10000;
    const std::vector<double> w = {0.8, 0.6};
    const std::vector<int> truths = draw_truths(n, 2, 11);
    const LabelMatrix m = generate_labels(w, truths, 2, 12);

    RunningStat a, b;
    double cross = 0.0;
    std::vector<double> xa(static_cast<std::size_t>(n)), xb(static_cast<std::size_t>(n));
    for (int j = 1; j <= n; ++j) {
        xa[static_cast<std::size_t>(j - 1)] = m.label(1, j) == truths[static_cast<std::size_t>(j - 1)] ? 1.0 : 0.0;
        xb[static_cast<std::size_t>(j - 1)] = m.label(2, j) == truths[static_cast<std::size_t>(j - 1)] ? 1.0 : 0.0;
        a.add(xa[static_cast<std::size_t>(j - 1)]);
        b.add(xb[static_cast<std::size_t>(j - 1)]);
    }
    for (int j = 0; j < n; ++j)
        cross += (xa[static_cast<std::size_t>(j)] - a.mean) * (xb[static_cast<std::size_t>(j)] - b.mean);
    const double corr = cross / (static_cast<double>(n) * a.stddev() * b.stddev());
    CHECK(std::abs(corr) <= 0.02);
}

TEST_CASE("the worker stream is independent of the item count") {
    SimConfig small{8, 10, 2, 2.3, 2.0, 424242};
    SimConfig big = small;
    big.num_items = 500;
    CHECK(simulate_dataset(small).reliabilities == simulate_dataset(big).reliabilities);
}

TEST_CASE("simulated datasets embed their truths and are complete") {
    const SimData d = simulate_dataset({5, 40, 3, 2.0, 2.0, 7});
    CHECK(d.matrix.is_complete());
    CHECK(d.matrix.has_truths());
    CHECK(d.matrix.num_classes() == 3);
    CHECK(d.reliabilities.size() == 5);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS((void)draw_workers(0, 2.0, 2.0, 1), std::invalid_argument);
    CHECK_THROWS_AS((void)draw_workers(5, 0.0, 2.0, 1), std::invalid_argument);
    const std::vector<double> bad = {1.2};
    const std::vector<int> t = {1};
    CHECK_THROWS_AS((void)generate_labels(bad, t, 2, 1), std::invalid_argument);
}

TEST_SUITE_END();
