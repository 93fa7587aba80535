#pragma once

#include <utility>
#include <vector>

#include "topoprint/core.hpp"
#include "topoprint/fingerprint.hpp"

namespace topo {

inline constexpr double kDefaultLambda = 0.5;
inline constexpr int kDefaultSmoothK = 2;
inline constexpr double kDefaultKappa = 0.2521;

/// Pairwise window distances: values[i][j] = lambda * L1(beta0_i, beta0'_j)
/// + (1 - lambda) * L1(beta1_i, beta1'_j).
struct CostMatrix {
    Matrix values;
    std::vector<double> row_times;
    std::vector<double> col_times;
};

struct MatchResult {
    std::vector<std::pair<double, double>> pairs;    // (t_i, t_{j_i}) sorted by t_i
    std::vector<std::pair<double, double>> smoothed; // (t_i, median-smoothed t_{j_i})
    double rho = 0.0;
    double error = 0.0; // 1 - rho, in [0, 2]
    bool positive = false;
    double kappa = kDefaultKappa;
};

CostMatrix cost_matrix(const Fingerprint& a, const Fingerprint& b, double lambda);

/// Minimum-cost assignment of min(rows, cols) row/col pairs, each used at
/// most once. Deterministic: among equal-cost optima, returns the
/// lexicographically smallest pair set. Throws on an empty matrix or
/// negative/non-finite entries.
std::vector<std::pair<int, int>> min_cost_assignment(const Matrix& cost);

/// Replace each second coordinate by the median of its neighborhood. The
/// window around position i is shrunk symmetrically near the ends
/// (half-width min(k, i, n-1-i)), so monotone sequences pass through
/// unchanged. Even-sized sets take the mean of the two central values.
std::vector<std::pair<double, double>> neighborhood_median(
    const std::vector<std::pair<double, double>>& pairs, int k);

/// Sample Pearson correlation of first vs second coordinates; 0 if either
/// coordinate has zero variance. Requires at least 2 pairs.
double order_score(const std::vector<std::pair<double, double>>& smoothed);

/// Full comparison pipeline; positive iff error < kappa.
MatchResult compare_fingerprints(const Fingerprint& a, const Fingerprint& b,
                                 double lambda = kDefaultLambda,
                                 int smooth_k = kDefaultSmoothK,
                                 double kappa = kDefaultKappa);

struct LabeledPair {
    const Fingerprint* a;
    const Fingerprint* b;
    bool positive;
};

struct RocPoint {
    double threshold;
    double fpr;
    double tpr;
};

struct BatchMetrics {
    std::vector<MatchResult> results; // one per input pair, in order
    std::vector<double> errors;
    int tp = 0, fp = 0, tn = 0, fn = 0;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double auc = 0.0;
    std::vector<RocPoint> roc;
    double kappa = kDefaultKappa;   // threshold used for the confusion counts
    double learned_kappa = 0.0;     // largest threshold with FPR <= fpr_target
    double fpr_target = 0.01;
};

/// Metrics from precomputed (error, label) scores: confusion counts at
/// kappa, accuracy/precision/recall, ROC sweep over all thresholds,
/// trapezoidal AUC, and the threshold learned at the FPR target.
BatchMetrics metrics_from_scores(const std::vector<double>& errors,
                                 const std::vector<bool>& labels, double kappa,
                                 double fpr_target = 0.01);

/// Compare every labeled fingerprint pair, then score the batch.
BatchMetrics classify_batch(const std::vector<LabeledPair>& pairs, double kappa,
                            double lambda = kDefaultLambda,
                            int smooth_k = kDefaultSmoothK,
                            double fpr_target = 0.01);

} // namespace topo
