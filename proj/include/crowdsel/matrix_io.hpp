#pragma once
// On-disk matrix format and dataset ingestion.
//
// Canonical form, one value set per line:
//
//   M N L has_truth
//   worker item label     (one line per stored answer, worker-major)
//   truth                 (N lines, present iff has_truth = 1)
//
// All indices and labels are 1-based integers. Parse errors carry the
// 1-based line number.
//
// import_triples ingests the looser dataset release format: a labels file
// of whitespace-separated triples with arbitrary string ids plus a truth
// file of (item, label) pairs. Ids and label names are mapped to dense
// 1-based ranges in order of first appearance; the dictionaries are
// returned so they can be recorded next to the converted matrix.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "crowdsel/model.hpp"

namespace crowdsel {

inline std::string serialize_matrix(const LabelMatrix& matrix) {
    std::ostringstream out;
    out << matrix.num_workers() << ' ' << matrix.num_items() << ' ' << matrix.num_classes() << ' '
        << (matrix.has_truths() ? 1 : 0) << '\n';
    for (const AnswerRecord& r : matrix.answers())
        out << r.worker << ' ' << r.item << ' ' << r.label << '\n';
    if (matrix.has_truths())
        for (const int t : matrix.truths()) out << t << '\n';
    return out.str();
}

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        if (i > start) fields.push_back(line.substr(start, i - start));
    }
    return fields;
}

inline int parse_int_field(std::string_view field, std::size_t line_no, const char* what) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size())
        throw std::invalid_argument("line " + std::to_string(line_no) + ": bad " + what + " '" +
                                    std::string(field) + "'");
    return value;
}

inline std::vector<std::string> collect_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string line(text.substr(start, end - start));
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
        if (end == text.size()) break;
        start = end + 1;
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

} // namespace detail

inline LabelMatrix parse_matrix(std::string_view text) {
    const std::vector<std::string> lines = detail::collect_lines(text);
    if (lines.empty()) throw std::invalid_argument("line 1: missing header");

    const auto header = detail::split_fields(lines[0]);
    if (header.size() != 4)
        throw std::invalid_argument("line 1: header must be 'M N L has_truth'");
    const int m = detail::parse_int_field(header[0], 1, "worker count");
    const int n = detail::parse_int_field(header[1], 1, "item count");
    const int l = detail::parse_int_field(header[2], 1, "class count");
    const int has_truth = detail::parse_int_field(header[3], 1, "truth flag");
    if (has_truth != 0 && has_truth != 1)
        throw std::invalid_argument("line 1: truth flag must be 0 or 1");

    const std::size_t truth_lines = has_truth ? static_cast<std::size_t>(n) : 0;
    if (lines.size() < 1 + truth_lines)
        throw std::invalid_argument("expected " + std::to_string(n) +
                                    " truth labels, file has too few lines");
    const std::size_t answer_lines = lines.size() - 1 - truth_lines;

    std::vector<AnswerRecord> records;
    records.reserve(answer_lines);
    for (std::size_t i = 0; i < answer_lines; ++i) {
        const std::size_t line_no = 2 + i;
        const auto fields = detail::split_fields(lines[1 + i]);
        if (fields.size() != 3)
            throw std::invalid_argument("line " + std::to_string(line_no) +
                                        ": expected 'worker item label'");
        AnswerRecord r;
        r.worker = detail::parse_int_field(fields[0], line_no, "worker index");
        r.item = detail::parse_int_field(fields[1], line_no, "item index");
        r.label = detail::parse_int_field(fields[2], line_no, "label");
        records.push_back(r);
    }

    std::optional<std::vector<int>> truths;
    if (has_truth) {
        std::vector<int> t;
        t.reserve(truth_lines);
        for (std::size_t i = 0; i < truth_lines; ++i) {
            const std::size_t line_no = 2 + answer_lines + i;
            const auto fields = detail::split_fields(lines[1 + answer_lines + i]);
            if (fields.size() != 1)
                throw std::invalid_argument("line " + std::to_string(line_no) +
                                            ": expected a single truth label");
            t.push_back(detail::parse_int_field(fields[0], line_no, "truth label"));
        }
        truths = std::move(t);
    }

    return build_label_matrix(records, m, n, l, std::move(truths));
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

// Loads a canonical matrix file.
inline LabelMatrix load_matrix(const std::filesystem::path& path) {
    try {
        return parse_matrix(read_file(path));
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
}

inline void write_matrix(const std::filesystem::path& path, const LabelMatrix& matrix) {
    write_file(path, serialize_matrix(matrix));
}

enum class TripleOrder { item_worker_label, worker_item_label };

struct ImportedDataset {
    LabelMatrix matrix;
    std::vector<std::string> worker_ids;  // index i-1 -> original id
    std::vector<std::string> item_ids;    // index j-1 -> original id
    std::vector<std::string> label_names; // index k-1 -> original label
};

// Converts a triple-list labels file plus a truth file into a LabelMatrix.
// The bluebird release uses item_worker_label ordering.
inline ImportedDataset import_triples(const std::filesystem::path& labels_path,
                                      const std::filesystem::path& truths_path,
                                      TripleOrder order = TripleOrder::item_worker_label) {
    std::unordered_map<std::string, int> workers, items, labels;
    std::vector<std::string> worker_ids, item_ids, label_names;
    const auto intern = [](std::unordered_map<std::string, int>& map,
                           std::vector<std::string>& names, std::string_view key) {
        const auto [it, inserted] = map.emplace(std::string(key), static_cast<int>(names.size()) + 1);
        if (inserted) names.emplace_back(key);
        return it->second;
    };

    struct Triple {
        int worker, item, label;
    };
    std::vector<Triple> triples;
    {
        const std::vector<std::string> lines = detail::collect_lines(read_file(labels_path));
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (lines[i].empty()) continue;
            const auto fields = detail::split_fields(lines[i]);
            if (fields.size() != 3)
                throw std::invalid_argument(labels_path.string() + ": line " +
                                            std::to_string(i + 1) + ": expected three fields");
            const std::string_view worker_field =
                order == TripleOrder::item_worker_label ? fields[1] : fields[0];
            const std::string_view item_field =
                order == TripleOrder::item_worker_label ? fields[0] : fields[1];
            triples.push_back({intern(workers, worker_ids, worker_field),
                               intern(items, item_ids, item_field),
                               intern(labels, label_names, fields[2])});
        }
    }
    if (triples.empty()) throw std::invalid_argument(labels_path.string() + ": no answers found");

    std::vector<int> truths(item_ids.size(), 0);
    {
        const std::vector<std::string> lines = detail::collect_lines(read_file(truths_path));
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (lines[i].empty()) continue;
            const auto fields = detail::split_fields(lines[i]);
            if (fields.size() != 2)
                throw std::invalid_argument(truths_path.string() + ": line " +
                                            std::to_string(i + 1) + ": expected 'item label'");
            const auto it = items.find(std::string(fields[0]));
            if (it == items.end())
                throw std::invalid_argument(truths_path.string() + ": line " +
                                            std::to_string(i + 1) + ": unknown item '" +
                                            std::string(fields[0]) + "'");
            truths[static_cast<std::size_t>(it->second - 1)] =
                intern(labels, label_names, fields[1]);
        }
    }
    for (std::size_t j = 0; j < truths.size(); ++j)
        if (truths[j] == 0)
            throw std::invalid_argument(truths_path.string() + ": no truth for item '" +
                                        item_ids[j] + "'");

    std::vector<AnswerRecord> records;
    records.reserve(triples.size());
    for (const Triple& t : triples) records.push_back({t.worker, t.item, t.label});

    LabelMatrix matrix =
        build_label_matrix(records, static_cast<int>(worker_ids.size()),
                           static_cast<int>(item_ids.size()),
                           static_cast<int>(label_names.size()), std::move(truths));
    return {std::move(matrix), std::move(worker_ids), std::move(item_ids),
            std::move(label_names)};
}

} // namespace crowdsel
