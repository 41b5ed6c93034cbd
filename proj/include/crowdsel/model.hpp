#pragma once
// Core domain types: answer matrices, per-worker control statistics, and
// selection results. All types are immutable after construction and safe
// to share across concurrent readers.
//
// Conventions: workers are 1..M, items are 1..N, labels are 1..L. Loaders
// that ingest string-labelled data map onto this range and record the
// dictionary separately.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace crowdsel {

struct AnswerRecord {
    int worker = 0;
    int item = 0;
    int label = 0;
};

// Sparse worker x item answer table with L label classes and optional
// ground truth. Missing answers are representable; complete matrices are
// the common case.
class LabelMatrix {
public:
    LabelMatrix(int num_workers, int num_items, int num_classes,
                std::vector<int> cells, std::size_t num_answers,
                std::vector<int> truths)
        : num_workers_(num_workers),
          num_items_(num_items),
          num_classes_(num_classes),
          cells_(std::move(cells)),
          num_answers_(num_answers),
          truths_(std::move(truths)) {}

    int num_workers() const { return num_workers_; }
    int num_items() const { return num_items_; }
    int num_classes() const { return num_classes_; }
    std::size_t num_answers() const { return num_answers_; }

    bool is_complete() const {
        return num_answers_ ==
               static_cast<std::size_t>(num_workers_) * static_cast<std::size_t>(num_items_);
    }

    // Label given by `worker` on `item`, or 0 if unanswered.
    int label(int worker, int item) const {
        return cells_[cell_index_(worker, item)];
    }

    bool has_answer(int worker, int item) const { return label(worker, item) != 0; }

    bool has_truths() const { return !truths_.empty(); }
    const std::vector<int>& truths() const { return truths_; }
    int truth(int item) const { return truths_[static_cast<std::size_t>(item - 1)]; }

    // All stored answers in (worker, item) order.
    std::vector<AnswerRecord> answers() const {
        std::vector<AnswerRecord> out;
        out.reserve(num_answers_);
        for (int w = 1; w <= num_workers_; ++w)
            for (int j = 1; j <= num_items_; ++j)
                if (const int k = label(w, j); k != 0) out.push_back({w, j, k});
        return out;
    }

    friend bool operator==(const LabelMatrix& a, const LabelMatrix& b) {
        return a.num_workers_ == b.num_workers_ && a.num_items_ == b.num_items_ &&
               a.num_classes_ == b.num_classes_ && a.cells_ == b.cells_ &&
               a.truths_ == b.truths_;
    }

private:
    std::size_t cell_index_(int worker, int item) const {
        return static_cast<std::size_t>(worker - 1) * static_cast<std::size_t>(num_items_) +
               static_cast<std::size_t>(item - 1);
    }

    int num_workers_;
    int num_items_;
    int num_classes_;
    std::vector<int> cells_; // worker-major, 0 = missing
    std::size_t num_answers_;
    std::vector<int> truths_; // empty when no ground truth
};

// Per-worker control-exam counts and the quantities derived from them.
struct WorkerStats {
    int worker = 0;          // 1-based id
    int control_correct = 0; // c_i
    int control_total = 0;   // n, >= 2
    double w_hat = 0.0;      // c_i / n
    double var_hat = 0.0;    // c_i (n - c_i) / (n^2 (n - 1))
    double g_score = 0.0;    // informativeness score x_i
};

// Output of a budgeted selection: the chosen workers in descending score
// order, together with the per-prefix scores F_1..F_B that were compared.
struct SelectionResult {
    std::vector<int> selected; // worker ids
    int k_star = 0;            // = selected.size()
    double f_hat_star = 0.0;
    std::vector<double> prefix_scores;
};

// Builds a validated LabelMatrix from (worker, item, label) records.
// Rejects out-of-range indices/labels (naming the offending record) and
// duplicate (worker, item) cells. `truths`, when given, must hold one
// label in 1..L per item.
inline LabelMatrix build_label_matrix(std::span<const AnswerRecord> records, int num_workers,
                                      int num_items, int num_classes,
                                      std::optional<std::vector<int>> truths = std::nullopt) {
    if (num_workers < 1 || num_items < 1)
        throw std::invalid_argument("label matrix: worker and item counts must be positive");
    if (num_classes < 2)
        throw std::invalid_argument("label matrix: need at least 2 label classes");

    const auto describe = [](const AnswerRecord& r) {
        return "answer (worker " + std::to_string(r.worker) + ", item " + std::to_string(r.item) +
               ", label " + std::to_string(r.label) + ")";
    };

    std::vector<int> cells(
        static_cast<std::size_t>(num_workers) * static_cast<std::size_t>(num_items), 0);
    std::size_t count = 0;
    for (const AnswerRecord& r : records) {
        if (r.worker < 1 || r.worker > num_workers)
            throw std::invalid_argument(describe(r) + ": worker index out of range");
        if (r.item < 1 || r.item > num_items)
            throw std::invalid_argument(describe(r) + ": item index out of range");
        if (r.label < 1 || r.label > num_classes)
            throw std::invalid_argument(describe(r) + ": label out of range");
        int& cell = cells[static_cast<std::size_t>(r.worker - 1) *
                              static_cast<std::size_t>(num_items) +
                          static_cast<std::size_t>(r.item - 1)];
        if (cell != 0)
            throw std::invalid_argument("duplicate answer for worker " +
                                        std::to_string(r.worker) + ", item " +
                                        std::to_string(r.item));
        cell = r.label;
        ++count;
    }

    std::vector<int> truth_vec;
    if (truths.has_value()) {
        truth_vec = std::move(*truths);
        if (truth_vec.size() != static_cast<std::size_t>(num_items))
            throw std::invalid_argument("truths: expected " + std::to_string(num_items) +
                                        " labels, got " + std::to_string(truth_vec.size()));
        for (std::size_t j = 0; j < truth_vec.size(); ++j)
            if (truth_vec[j] < 1 || truth_vec[j] > num_classes)
                throw std::invalid_argument("truth for item " + std::to_string(j + 1) +
                                            ": label out of range");
    }

    return LabelMatrix(num_workers, num_items, num_classes, std::move(cells), count,
                       std::move(truth_vec));
}

} // namespace crowdsel
