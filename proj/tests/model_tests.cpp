#include <doctest.h>

#include "crowdsel/matrix_io.hpp"
#include "crowdsel/model.hpp"
#include "crowdsel/rng.hpp"

#include "test_support.hpp"

using namespace crowdsel;
using testsup::throws_containing;

TEST_SUITE_BEGIN("model");

TEST_CASE("minimal instance") {
    const std::vector<AnswerRecord> records = {{1, 1, 1}};
    const LabelMatrix m = build_label_matrix(records, 1, 1, 2);
    CHECK(m.num_workers() == 1);
    CHECK(m.num_items() == 1);
    CHECK(m.num_classes() == 2);
    CHECK(m.num_answers() == 1);
    CHECK(m.label(1, 1) == 1);
    CHECK(m.is_complete());
    CHECK_FALSE(m.has_truths());
}

TEST_CASE("label out of range is rejected") {
    const std::vector<AnswerRecord> records = {{1, 1, 3}};
    CHECK(throws_containing([&] { build_label_matrix(records, 1, 1, 2); }, "label out of range"));
    CHECK(throws_containing([&] { build_label_matrix(records, 1, 1, 2); }, "label 3"));
}

TEST_CASE("index out of range is rejected") {
    CHECK(throws_containing(
        [&] {
            const std::vector<AnswerRecord> r = {{2, 1, 1}};
            build_label_matrix(r, 1, 1, 2);
        },
        "worker index out of range"));
    CHECK(throws_containing(
        [&] {
            const std::vector<AnswerRecord> r = {{1, 0, 1}};
            build_label_matrix(r, 1, 1, 2);
        },
        "item index out of range"));
}

TEST_CASE("duplicate cell is rejected") {
    const std::vector<AnswerRecord> records = {{1, 1, 1}, {1, 1, 2}};
    CHECK(throws_containing([&] { build_label_matrix(records, 1, 1, 2); }, "duplicate"));
}

TEST_CASE("truth validation") {
    const std::vector<AnswerRecord> records = {{1, 1, 1}};
    CHECK(throws_containing([&] { build_label_matrix(records, 1, 2, 2, std::vector<int>{1}); },
                            "expected 2"));
    CHECK(throws_containing([&] { build_label_matrix(records, 1, 1, 2, std::vector<int>{5}); },
                            "label out of range"));
    const LabelMatrix m = build_label_matrix(records, 1, 1, 2, std::vector<int>{2});
    CHECK(m.has_truths());
    CHECK(m.truth(1) == 2);
}

TEST_CASE("is_complete counts every cell") {
    std::vector<AnswerRecord> records = {{1, 1, 1}, {1, 2, 2}, {2, 1, 1}};
    const LabelMatrix partial = build_label_matrix(records, 2, 2, 2);
    CHECK_FALSE(partial.is_complete());
    records.push_back({2, 2, 2});
    const LabelMatrix full = build_label_matrix(records, 2, 2, 2);
    CHECK(full.is_complete());
}

TEST_CASE("answers come back in worker-major order") {
    const std::vector<AnswerRecord> records = {{2, 1, 1}, {1, 2, 2}, {1, 1, 1}};
    const LabelMatrix m = build_label_matrix(records, 2, 2, 2);
    const auto out = m.answers();
    REQUIRE(out.size() == 3);
    CHECK(out[0].worker == 1);
    CHECK(out[0].item == 1);
    CHECK(out[1].worker == 1);
    CHECK(out[1].item == 2);
    CHECK(out[2].worker == 2);
}

// Round-trip: serialize then parse reproduces the matrix cell-exactly.
TEST_CASE("serialize/parse round trip on random matrices") {
    Rng rng(42);
    for (int iter = 0; iter < 50; ++iter) {
        const int m = 1 + static_cast<int>(rng.next_below(6));
        const int n = 1 + static_cast<int>(rng.next_below(8));
        const int l = 2 + static_cast<int>(rng.next_below(4));
        const double density = 0.2 + 0.8 * rng.next_double();

        std::vector<AnswerRecord> records;
        for (int w = 1; w <= m; ++w)
            for (int j = 1; j <= n; ++j)
                if (rng.next_double() < density)
                    records.push_back({w, j, 1 + static_cast<int>(rng.next_below(l))});

        std::optional<std::vector<int>> truths;
        if (rng.next_double() < 0.5) {
            std::vector<int> t(static_cast<std::size_t>(n));
            for (int& v : t) v = 1 + static_cast<int>(rng.next_below(l));
            truths = std::move(t);
        }

        const LabelMatrix original = build_label_matrix(records, m, n, l, truths);
        const LabelMatrix parsed = parse_matrix(serialize_matrix(original));
        CHECK(parsed == original);
        CHECK(parsed.num_answers() == original.num_answers());
    }
}

TEST_SUITE_END();
