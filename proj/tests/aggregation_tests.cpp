#include <doctest.h>

#include <cmath>

#include "crowdsel/aggregation.hpp"
#include "crowdsel/simulate.hpp"

#include "test_support.hpp"

using namespace crowdsel;
using testsup::throws_containing;

namespace {

LabelMatrix single_item(const std::vector<int>& votes, int num_classes) {
    std::vector<AnswerRecord> records;
    for (std::size_t i = 0; i < votes.size(); ++i)
        records.push_back({static_cast<int>(i) + 1, 1, votes[i]});
    return build_label_matrix(records, static_cast<int>(votes.size()), 1, num_classes);
}

std::vector<int> all_workers(const LabelMatrix& m) {
    std::vector<int> ids(static_cast<std::size_t>(m.num_workers()));
    for (int i = 0; i < m.num_workers(); ++i) ids[static_cast<std::size_t>(i)] = i + 1;
    return ids;
}

} // namespace

TEST_SUITE_BEGIN("aggregation");

TEST_CASE("linear weights") {
    const std::vector<double> w = {0.5, 1.0, 0.0, 0.25};
    const WeightVector v2 = linear_weights(w, 2);
    CHECK(v2.values[0] == 0.0);
    CHECK(v2.values[1] == 1.0);
    CHECK(v2.values[2] == -1.0);
    CHECK(v2.scheme == WeightScheme::linear);

    const WeightVector v4 = linear_weights(w, 4);
    CHECK(v4.values[3] == 0.0); // chance level for L = 4
    CHECK(v4.values[1] == 3.0);

    const std::vector<double> third = {1.0 / 3.0};
    CHECK(linear_weights(third, 3).values[0] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("log-odds weights") {
    const std::vector<double> w = {0.5, 0.9, 1.0};
    const WeightVector v = log_weights(w, 2, 0.05);
    CHECK(v.values[0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(v.values[1] == doctest::Approx(std::log(9.0)).epsilon(1e-12));
    CHECK(v.values[2] == doctest::Approx(std::log(19.0)).epsilon(1e-12));
    CHECK(v.scheme == WeightScheme::log_odds);

    CHECK(throws_containing([&] { (void)log_weights(w, 2, 0.0); }, "clamp_eps"));
    CHECK(throws_containing([&] { (void)log_weights(w, 2, 0.5); }, "clamp_eps"));
}

TEST_CASE("unanimous vote wins under any positive weights") {
    const LabelMatrix m = single_item({2, 2, 2}, 3);
    const WeightVector weights{{0.4, 1.5, 0.1}, WeightScheme::linear};
    const AggregationOutput out = aggregate_wmv(m, weights, all_workers(m));
    CHECK(out.predicted[0] == 2);
    CHECK(out.tie_count == 0);
}

TEST_CASE("one strong worker outvotes two weak ones") {
    const LabelMatrix m = single_item({1, 2, 2}, 2);
    const WeightVector weights{{1.0, 0.2, 0.2}, WeightScheme::linear};
    const AggregationOutput out = aggregate_wmv(m, weights, all_workers(m));
    CHECK(out.predicted[0] == 1);
    CHECK(out.scores[0][0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(out.scores[0][1] == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("a negative weight inverts a worse-than-chance worker") {
    const LabelMatrix m = single_item({1}, 2);
    const WeightVector weights{{-1.0}, WeightScheme::linear};
    const AggregationOutput out = aggregate_wmv(m, weights, all_workers(m));
    CHECK(out.predicted[0] == 2); // scores: -1 vs 0
}

TEST_CASE("unanswered items fall back to label 1 and count as ties") {
    // worker 2 never answers item 2
    const std::vector<AnswerRecord> records = {{1, 1, 2}, {2, 1, 2}};
    const LabelMatrix m = build_label_matrix(records, 2, 2, 2);
    const std::vector<int> subset = {2};
    const AggregationOutput out = aggregate_wmv(m, uniform_weights(2), subset);
    CHECK(out.predicted[0] == 2);
    CHECK(out.predicted[1] == 1);
    CHECK(out.tie_count == 1);
}

TEST_CASE("empty subsets are rejected") {
    const LabelMatrix m = single_item({1}, 2);
    CHECK(throws_containing([&] { (void)aggregate_wmv(m, uniform_weights(1), {}); }, "empty"));
    CHECK(throws_containing([&] { (void)aggregate_majority(m, {}); }, "empty"));
}

TEST_CASE("majority voting") {
    CHECK(aggregate_majority(single_item({1, 1, 2}, 2), {std::vector<int>{1, 2, 3}}).predicted[0] ==
          1);
    const AggregationOutput tie = aggregate_majority(single_item({1, 2}, 2), {std::vector<int>{1, 2}});
    CHECK(tie.predicted[0] == 1);
    CHECK(tie.tie_count == 1);
}

TEST_CASE("majority voting equals WMV with unit weights") {
    Rng rng(404);
    for (int iter = 0; iter < 100; ++iter) {
        const int m = 1 + static_cast<int>(rng.next_below(6));
        const int n = 1 + static_cast<int>(rng.next_below(10));
        const int l = 2 + static_cast<int>(rng.next_below(3));
        std::vector<AnswerRecord> records;
        for (int w = 1; w <= m; ++w)
            for (int j = 1; j <= n; ++j)
                if (rng.next_double() < 0.8)
                    records.push_back({w, j, 1 + static_cast<int>(rng.next_below(l))});
        const LabelMatrix matrix = build_label_matrix(records, m, n, l);
        const auto subset = all_workers(matrix);
        const AggregationOutput a = aggregate_majority(matrix, subset);
        const AggregationOutput b = aggregate_wmv(matrix, uniform_weights(m), subset);
        CHECK(a.predicted == b.predicted);
        CHECK(a.scores == b.scores);
        CHECK(a.tie_count == b.tie_count);
    }
}

TEST_CASE("positive weight scaling never changes a decision") {
    Rng rng(505);
    for (int iter = 0; iter < 50; ++iter) {
        const int m = 2 + static_cast<int>(rng.next_below(6));
        const int n = 1 + static_cast<int>(rng.next_below(12));
        const int l = 2 + static_cast<int>(rng.next_below(3));
        std::vector<AnswerRecord> records;
        for (int w = 1; w <= m; ++w)
            for (int j = 1; j <= n; ++j)
                records.push_back({w, j, 1 + static_cast<int>(rng.next_below(l))});
        const LabelMatrix matrix = build_label_matrix(records, m, n, l);

        WeightVector weights{{}, WeightScheme::linear};
        for (int w = 0; w < m; ++w) weights.values.push_back(rng.next_uniform(-1.0, 3.0));
        WeightVector scaled = weights;
        for (double& v : scaled.values) v *= 4.0;

        const auto subset = all_workers(matrix);
        CHECK(aggregate_wmv(matrix, weights, subset).predicted ==
              aggregate_wmv(matrix, scaled, subset).predicted);
    }
}

TEST_CASE("accuracy") {
    const std::vector<int> truth = {1, 2, 1, 2};
    const std::vector<int> items = {1, 2, 3, 4};
    CHECK(accuracy(truth, truth, items) == 1.0);
    CHECK(accuracy(std::vector<int>{2, 1, 2, 1}, truth, items) == 0.0);
    CHECK(accuracy(std::vector<int>{1, 2, 2, 1}, truth, items) == 0.5);
    CHECK(accuracy(truth, truth, std::vector<int>{2, 3}) == 1.0);
    CHECK_THROWS_AS((void)accuracy(truth, truth, {}), std::invalid_argument);
}

TEST_CASE("EM fixed point on unanimous perfect workers") {
    std::vector<AnswerRecord> records;
    const std::vector<int> truths = {1, 2, 2, 1, 2};
    for (int w = 1; w <= 3; ++w)
        for (int j = 1; j <= 5; ++j) records.push_back({w, j, truths[static_cast<std::size_t>(j - 1)]});
    const LabelMatrix m = build_label_matrix(records, 3, 5, 2, truths);

    const std::vector<double> init(3, 0.8);
    const EmResult res = em_one_coin(m, init, all_workers(m));
    CHECK(res.converged);
    CHECK(res.output.predicted == truths);
    for (const int w : all_workers(m))
        CHECK(res.final_w[static_cast<std::size_t>(w - 1)] >= 0.999);
}

TEST_CASE("EM with a single better-than-chance worker follows their labels") {
    const std::vector<AnswerRecord> records = {{1, 1, 1}, {1, 2, 1}, {1, 3, 2}, {1, 4, 1}, {1, 5, 1}};
    const LabelMatrix m = build_label_matrix(records, 1, 5, 2);
    const std::vector<double> init = {0.7};
    const EmResult res = em_one_coin(m, init, std::vector<int>{1});
    CHECK(res.output.predicted == std::vector<int>{1, 1, 2, 1, 1});
}

TEST_CASE("EM leaves silent workers at their initial reliability") {
    const std::vector<AnswerRecord> records = {{1, 1, 1}, {1, 2, 2}};
    const LabelMatrix m = build_label_matrix(records, 2, 2, 2);
    const std::vector<double> init = {0.8, 0.6};
    const EmResult res = em_one_coin(m, init, std::vector<int>{1, 2});
    CHECK(res.final_w[1] == 0.6);
}

TEST_CASE("EM log-likelihood never decreases") {
    Rng rng(606);
    for (int iter = 0; iter < 20; ++iter) {
        const int mw = 2 + static_cast<int>(rng.next_below(4));
        const int n = 3 + static_cast<int>(rng.next_below(8));
        const int l = 2 + static_cast<int>(rng.next_below(2));
        std::vector<double> w(static_cast<std::size_t>(mw));
        for (double& v : w) v = rng.next_uniform(0.2, 0.95);
        std::vector<int> truths(static_cast<std::size_t>(n));
        for (int& t : truths) t = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(l)));
        const LabelMatrix matrix = generate_labels(w, truths, l, rng.next_u64());

        std::vector<double> init(static_cast<std::size_t>(mw));
        for (double& v : init) v = rng.next_uniform(0.3, 0.9);
        EmOptions opts;
        opts.tol = 1e-10;
        const EmResult res = em_one_coin(matrix, init, all_workers(matrix), opts);
        for (std::size_t i = 1; i < res.log_likelihood.size(); ++i)
            CHECK(res.log_likelihood[i] >= res.log_likelihood[i - 1] - 1e-9);
    }
}

TEST_CASE("one-coin log-likelihood agrees with a hand computation") {
    const LabelMatrix m = single_item({1}, 2);
    const std::vector<double> w = {0.7};
    const std::vector<double> prior = {0.5, 0.5};
    const double expected = std::log(0.5 * 0.7 + 0.5 * 0.3);
    CHECK(one_coin_log_likelihood(m, std::vector<int>{1}, w, prior) ==
          doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("EM accepts pinned posteriors for known items") {
    // two spammers agree on the wrong label; pinning item 1 rescues it
    const std::vector<AnswerRecord> records = {{1, 1, 2}, {2, 1, 2}};
    const LabelMatrix m = build_label_matrix(records, 2, 1, 2);
    EmOptions opts;
    opts.clamp_items = {{1, 1}};
    const std::vector<double> init = {0.6, 0.6};
    const EmResult res = em_one_coin(m, init, std::vector<int>{1, 2}, opts);
    CHECK(res.output.predicted[0] == 1);
}

TEST_CASE("EM input validation") {
    const LabelMatrix m = single_item({1}, 2);
    const std::vector<double> bad = {1.5};
    CHECK(throws_containing([&] { (void)em_one_coin(m, bad, std::vector<int>{1}); }, "init_w"));
    const std::vector<double> good = {0.7};
    CHECK(throws_containing([&] { (void)em_one_coin(m, good, {}); }, "empty"));
}

TEST_SUITE_END();
