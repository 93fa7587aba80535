#include "topoprint/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace topo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct SquareSolution {
    std::vector<int> row_to_col;
    std::vector<double> u, v; // dual potentials, a[i][j] - u[i] - v[j] >= 0
};

// Jonker-Volgenant style shortest augmenting path solver on an n x n matrix.
SquareSolution solve_square(const Matrix& a) {
    const int n = a.rows;
    std::vector<double> u(size_t(n) + 1, 0.0), v(size_t(n) + 1, 0.0);
    std::vector<int> p(size_t(n) + 1, 0), way(size_t(n) + 1, 0);
    std::vector<double> minv(size_t(n) + 1);
    std::vector<char> used(static_cast<size_t>(n) + 1);

    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), kInf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[size_t(j0)] = 1;
            const int i0 = p[size_t(j0)];
            int j1 = 0;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[size_t(j)]) continue;
                const double cur = a.at(i0 - 1, j - 1) - u[size_t(i0)] - v[size_t(j)];
                if (cur < minv[size_t(j)]) {
                    minv[size_t(j)] = cur;
                    way[size_t(j)] = j0;
                }
                if (minv[size_t(j)] < delta) {
                    delta = minv[size_t(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[size_t(j)]) {
                    u[size_t(p[size_t(j)])] += delta;
                    v[size_t(j)] -= delta;
                } else {
                    minv[size_t(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[size_t(j0)] != 0);
        do {
            const int j1 = way[size_t(j0)];
            p[size_t(j0)] = p[size_t(j1)];
            j0 = j1;
        } while (j0);
    }

    SquareSolution sol;
    sol.row_to_col.assign(size_t(n), -1);
    sol.u.assign(size_t(n), 0.0);
    sol.v.assign(size_t(n), 0.0);
    for (int j = 1; j <= n; ++j)
        if (p[size_t(j)] > 0) sol.row_to_col[size_t(p[size_t(j)]) - 1] = j - 1;
    for (int i = 1; i <= n; ++i) sol.u[size_t(i) - 1] = u[size_t(i)];
    for (int j = 1; j <= n; ++j) sol.v[size_t(j) - 1] = v[size_t(j)];
    return sol;
}

// Kuhn augmenting search over the tight subgraph, avoiding fixed columns.
bool augment(int row, const std::vector<std::vector<int>>& adj,
             const std::vector<char>& fixed_col, std::vector<char>& visited,
             std::vector<int>& m_row, std::vector<int>& m_col) {
    for (int j : adj[size_t(row)]) {
        if (fixed_col[size_t(j)] || visited[size_t(j)]) continue;
        visited[size_t(j)] = 1;
        if (m_col[size_t(j)] < 0 ||
            augment(m_col[size_t(j)], adj, fixed_col, visited, m_row, m_col)) {
            m_col[size_t(j)] = row;
            m_row[size_t(row)] = j;
            return true;
        }
    }
    return false;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void check_compatible(const Fingerprint& a, const Fingerprint& b) {
    if (a.config.betti_resolution != b.config.betti_resolution ||
        a.config.betti_lo != b.config.betti_lo || a.config.betti_hi != b.config.betti_hi)
        throw std::invalid_argument("matching: incompatible fingerprints (Betti grid differs)");
}

} // namespace

CostMatrix cost_matrix(const Fingerprint& a, const Fingerprint& b, double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("cost_matrix: lambda must be in [0, 1]");
    if (a.entries.empty() || b.entries.empty())
        throw std::invalid_argument("cost_matrix: empty fingerprint");
    check_compatible(a, b);

    CostMatrix cm;
    cm.values = Matrix(int(a.entries.size()), int(b.entries.size()));
    for (int i = 0; i < cm.values.rows; ++i) {
        const auto& ea = a.entries[size_t(i)];
        for (int j = 0; j < cm.values.cols; ++j) {
            const auto& eb = b.entries[size_t(j)];
            cm.values.at(i, j) = lambda * betti_l1(ea.beta0, eb.beta0) +
                                 (1.0 - lambda) * betti_l1(ea.beta1, eb.beta1);
        }
    }
    cm.row_times.reserve(a.entries.size());
    for (const auto& e : a.entries) cm.row_times.push_back(e.t);
    cm.col_times.reserve(b.entries.size());
    for (const auto& e : b.entries) cm.col_times.push_back(e.t);
    return cm;
}

std::vector<std::pair<int, int>> min_cost_assignment(const Matrix& cost) {
    if (cost.empty()) throw std::invalid_argument("min_cost_assignment: empty matrix");
    double max_abs = 0.0;
    for (double v : cost.data) {
        if (!std::isfinite(v) || v < 0.0)
            throw std::invalid_argument("min_cost_assignment: entries must be finite and >= 0");
        max_abs = std::max(max_abs, v);
    }

    const int rows = cost.rows, cols = cost.cols;
    const int n = std::max(rows, cols);
    Matrix padded(n, n, 0.0);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) padded.at(i, j) = cost.at(i, j);

    SquareSolution sol = solve_square(padded);

    // Every optimal assignment is a perfect matching inside the tight
    // subgraph of the duals. Walk real rows in order and give each one the
    // smallest column that still extends to a perfect matching: this is the
    // lexicographically smallest optimal pair set.
    const double tol = 1e-9 * (1.0 + max_abs);
    std::vector<std::vector<int>> adj(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (padded.at(i, j) - sol.u[size_t(i)] - sol.v[size_t(j)] <= tol)
                adj[size_t(i)].push_back(j);

    std::vector<int> m_row = sol.row_to_col;
    std::vector<int> m_col(size_t(n), -1);
    for (int i = 0; i < n; ++i) m_col[size_t(m_row[size_t(i)])] = i;
    std::vector<char> fixed_col(size_t(n), 0);
    std::vector<char> visited(static_cast<size_t>(n));

    for (int i = 0; i < rows; ++i) {
        for (int j : adj[size_t(i)]) {
            if (fixed_col[size_t(j)]) continue;
            if (m_row[size_t(i)] == j) {
                fixed_col[size_t(j)] = 1;
                break;
            }
            // Try to re-route the current owner of column j elsewhere.
            const int owner = m_col[size_t(j)];
            const int j_old = m_row[size_t(i)];
            m_row[size_t(i)] = j;
            m_col[size_t(j)] = i;
            m_row[size_t(owner)] = -1;
            m_col[size_t(j_old)] = -1;
            std::fill(visited.begin(), visited.end(), 0);
            visited[size_t(j)] = 1;
            if (augment(owner, adj, fixed_col, visited, m_row, m_col)) {
                fixed_col[size_t(j)] = 1;
                break;
            }
            m_row[size_t(i)] = j_old;
            m_col[size_t(j_old)] = i;
            m_row[size_t(owner)] = j;
            m_col[size_t(j)] = owner;
        }
    }

    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(size_t(std::min(rows, cols)));
    for (int i = 0; i < rows; ++i)
        if (m_row[size_t(i)] >= 0 && m_row[size_t(i)] < cols) pairs.emplace_back(i, m_row[size_t(i)]);
    return pairs;
}

std::vector<std::pair<double, double>> neighborhood_median(
    const std::vector<std::pair<double, double>>& pairs, int k) {
    if (pairs.empty()) throw std::invalid_argument("neighborhood_median: empty input");
    if (k < 0) throw std::invalid_argument("neighborhood_median: k must be >= 0");
    for (size_t i = 1; i < pairs.size(); ++i)
        if (pairs[i].first < pairs[i - 1].first)
            throw std::invalid_argument("neighborhood_median: pairs not sorted by first coordinate");

    const int n = int(pairs.size());
    std::vector<std::pair<double, double>> out = pairs;
    std::vector<double> window;
    for (int i = 0; i < n; ++i) {
        const int kk = std::min({k, i, n - 1 - i});
        window.clear();
        for (int j = i - kk; j <= i + kk; ++j) window.push_back(pairs[size_t(j)].second);
        out[size_t(i)].second = median_of(window);
    }
    return out;
}

double order_score(const std::vector<std::pair<double, double>>& smoothed) {
    if (smoothed.size() < 2) throw std::invalid_argument("order_score: need at least 2 pairs");
    const double n = double(smoothed.size());
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : smoothed) {
        mx += x;
        my += y;
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (const auto& [x, y] : smoothed) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

MatchResult compare_fingerprints(const Fingerprint& a, const Fingerprint& b, double lambda,
                                 int smooth_k, double kappa) {
    if (a.entries.empty() || b.entries.empty())
        throw std::invalid_argument("compare: empty fingerprint");

    CostMatrix cm = cost_matrix(a, b, lambda);
    auto assignment = min_cost_assignment(cm.values);

    MatchResult res;
    res.kappa = kappa;
    res.pairs.reserve(assignment.size());
    for (const auto& [i, j] : assignment)
        res.pairs.emplace_back(cm.row_times[size_t(i)], cm.col_times[size_t(j)]);
    res.smoothed = neighborhood_median(res.pairs, smooth_k);
    res.rho = std::clamp(order_score(res.smoothed), -1.0, 1.0);
    res.error = 1.0 - res.rho;
    res.positive = res.error < kappa;
    return res;
}

BatchMetrics metrics_from_scores(const std::vector<double>& errors,
                                 const std::vector<bool>& labels, double kappa,
                                 double fpr_target) {
    if (errors.empty()) throw std::invalid_argument("metrics: empty score list");
    if (errors.size() != labels.size())
        throw std::invalid_argument("metrics: score/label size mismatch");

    BatchMetrics m;
    m.errors = errors;
    m.kappa = kappa;
    m.fpr_target = fpr_target;

    int n_pos = 0, n_neg = 0;
    for (size_t i = 0; i < errors.size(); ++i) {
        const bool predicted = errors[i] < kappa;
        if (labels[i]) {
            ++n_pos;
            predicted ? ++m.tp : ++m.fn;
        } else {
            ++n_neg;
            predicted ? ++m.fp : ++m.tn;
        }
    }
    const double total = double(errors.size());
    m.accuracy = (m.tp + m.tn) / total;
    m.precision = (m.tp + m.fp) > 0 ? double(m.tp) / (m.tp + m.fp) : 0.0;
    m.recall = (m.tp + m.fn) > 0 ? double(m.tp) / (m.tp + m.fn) : 0.0;

    // ROC sweep: a pair is called positive when its error is below the
    // threshold, so thresholds just above each distinct score admit it.
    std::vector<double> distinct = errors;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    std::vector<double> pos_scores, neg_scores;
    for (size_t i = 0; i < errors.size(); ++i)
        (labels[i] ? pos_scores : neg_scores).push_back(errors[i]);
    std::sort(pos_scores.begin(), pos_scores.end());
    std::sort(neg_scores.begin(), neg_scores.end());

    auto count_le = [](const std::vector<double>& v, double x) {
        return double(std::upper_bound(v.begin(), v.end(), x) - v.begin());
    };

    double prev_fpr = 0.0, prev_tpr = 0.0, auc = 0.0;
    for (double v : distinct) {
        const double tpr = n_pos > 0 ? count_le(pos_scores, v) / n_pos : 0.0;
        const double fpr = n_neg > 0 ? count_le(neg_scores, v) / n_neg : 0.0;
        m.roc.push_back({v, fpr, tpr});
        auc += (fpr - prev_fpr) * (tpr + prev_tpr) * 0.5;
        prev_fpr = fpr;
        prev_tpr = tpr;
    }
    m.auc = (n_pos > 0 && n_neg > 0) ? auc : std::numeric_limits<double>::quiet_NaN();

    if (n_neg == 0) {
        m.learned_kappa = kInf;
    } else {
        const int idx = int(std::floor(fpr_target * n_neg));
        m.learned_kappa = idx >= n_neg ? kInf : neg_scores[size_t(idx)];
    }
    return m;
}

BatchMetrics classify_batch(const std::vector<LabeledPair>& pairs, double kappa, double lambda,
                            int smooth_k, double fpr_target) {
    if (pairs.empty()) throw std::invalid_argument("classify_batch: empty input");
    std::vector<MatchResult> results;
    std::vector<double> errors;
    std::vector<bool> labels;
    results.reserve(pairs.size());
    for (const auto& p : pairs) {
        if (p.a == nullptr || p.b == nullptr)
            throw std::invalid_argument("classify_batch: null fingerprint");
        results.push_back(compare_fingerprints(*p.a, *p.b, lambda, smooth_k, kappa));
        errors.push_back(results.back().error);
        labels.push_back(p.positive);
    }
    BatchMetrics m = metrics_from_scores(errors, labels, kappa, fpr_target);
    m.results = std::move(results);
    return m;
}

} // namespace topo
