#pragma once
// Reliability estimation from control questions and the voting-confidence
// score of a worker set in all its variants:
//
//   true score    F(S)      = |S|^-1/2 * sum_i (L w_i - 1)^2
//   unbiased      Fhat(S)   = |S|^-1/2 * sum_i G(what_i)
//   plugin        Fplug(S)  = |S|^-1/2 * sum_i (L what_i - 1)^2
//
// where G(what) = (L what - 1)^2 - L^2 varhat(what) corrects the plugin
// estimator's bias by subtracting the estimation variance. The plugin form
// is kept because it is the natural baseline; its bias is always upward.
//
// All functions are pure; all arithmetic is double precision with
// left-to-right summation over the given worker order.

#include <cmath>
#include <span>
#include <stdexcept>

#include "crowdsel/model.hpp"

namespace crowdsel {

enum class ScoreKind { true_score, unbiased, plugin };

struct ScoreEstimate {
    double value = 0.0;
    ScoreKind kind = ScoreKind::unbiased;
    int set_size = 0;
};

// Symmetric interval around a point estimate of F(S); covers the true
// F(S) with probability at least `coverage`.
struct ConfidenceInterval {
    double lo = 0.0;
    double hi = 0.0;
    double alpha = 0.0;
    double coverage = 0.0; // 1 - 2 exp(-2 alpha^2)
};

// (w_hat, var_hat) from `correct` right answers on `total` control items.
// The variance estimator divides by n-1 and is undefined for total < 2.
inline std::pair<double, double> estimate_reliability(int correct, int total) {
    if (total < 2)
        throw std::invalid_argument("estimate_reliability: need at least 2 control answers");
    if (correct < 0 || correct > total)
        throw std::invalid_argument("estimate_reliability: correct count out of range");
    const double n = static_cast<double>(total);
    const double w_hat = static_cast<double>(correct) / n;
    const double var_hat =
        static_cast<double>(correct) * static_cast<double>(total - correct) / (n * n * (n - 1.0));
    return {w_hat, var_hat};
}

// Per-worker informativeness x_i. Workers near w_hat = 1/L score near
// zero (or negative once the variance penalty bites); both extremes of
// w_hat score high.
inline double g_score(double w_hat, double var_hat, int num_classes) {
    if (w_hat < 0.0 || w_hat > 1.0)
        throw std::invalid_argument("g_score: w_hat outside [0, 1]");
    if (var_hat < 0.0) throw std::invalid_argument("g_score: negative var_hat");
    if (num_classes < 2) throw std::invalid_argument("g_score: need at least 2 classes");
    const double l = static_cast<double>(num_classes);
    const double d = l * w_hat - 1.0;
    return d * d - l * l * var_hat;
}

inline WorkerStats make_worker_stats(int worker, int correct, int total, int num_classes) {
    const auto [w_hat, var_hat] = estimate_reliability(correct, total);
    return WorkerStats{worker, correct, total, w_hat, var_hat,
                       g_score(w_hat, var_hat, num_classes)};
}

// F(S) from true reliabilities; only available in simulation, where the
// reliabilities are known.
inline ScoreEstimate f_true(std::span<const double> reliabilities, int num_classes) {
    if (reliabilities.empty()) throw std::invalid_argument("f_true: empty worker set");
    const double l = static_cast<double>(num_classes);
    double sum = 0.0;
    for (const double w : reliabilities) {
        if (w < 0.0 || w > 1.0) throw std::invalid_argument("f_true: reliability outside [0, 1]");
        const double d = l * w - 1.0;
        sum += d * d;
    }
    const ScoreEstimate est{sum / std::sqrt(static_cast<double>(reliabilities.size())),
                            ScoreKind::true_score, static_cast<int>(reliabilities.size())};
    return est;
}

// Unbiased estimate of F(S) from control statistics.
inline ScoreEstimate f_hat(std::span<const WorkerStats> stats, int num_classes) {
    if (stats.empty()) throw std::invalid_argument("f_hat: empty worker set");
    double sum = 0.0;
    for (const WorkerStats& s : stats) sum += g_score(s.w_hat, s.var_hat, num_classes);
    return {sum / std::sqrt(static_cast<double>(stats.size())), ScoreKind::unbiased,
            static_cast<int>(stats.size())};
}

// Plugin estimate: w_hat substituted for w directly. Biased upward by
// |S|^-1/2 * sum_i L^2 var(what_i).
inline ScoreEstimate f_plugin(std::span<const WorkerStats> stats, int num_classes) {
    if (stats.empty()) throw std::invalid_argument("f_plugin: empty worker set");
    const double l = static_cast<double>(num_classes);
    double sum = 0.0;
    for (const WorkerStats& s : stats) {
        const double d = l * s.w_hat - 1.0;
        sum += d * d;
    }
    return {sum / std::sqrt(static_cast<double>(stats.size())), ScoreKind::plugin,
            static_cast<int>(stats.size())};
}

// Hoeffding interval for F(S) around an unbiased estimate computed from n
// control answers per worker. The margin does not depend on the set size:
// the |S|^-1/2 scaling of Fhat cancels the sqrt(|S|) growth of the sum's
// deviation.
inline ConfidenceInterval confidence_interval(double f_hat_value, double alpha, int control_total,
                                              int num_classes, int set_size) {
    if (alpha < 0.0) throw std::invalid_argument("confidence_interval: negative alpha");
    if (control_total < 2)
        throw std::invalid_argument("confidence_interval: need at least 2 control answers");
    if (num_classes < 2) throw std::invalid_argument("confidence_interval: need at least 2 classes");
    if (set_size < 1) throw std::invalid_argument("confidence_interval: empty worker set");
    const double n = static_cast<double>(control_total);
    const double l = static_cast<double>(num_classes);
    const double half_range = l - 1.0 - (l - 2.0) / (2.0 * n);
    const double margin = alpha * (n / (n - 1.0)) * half_range * half_range;
    return {f_hat_value - margin, f_hat_value + margin, alpha,
            1.0 - 2.0 * std::exp(-2.0 * alpha * alpha)};
}

} // namespace crowdsel
