#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

namespace amod::policy {

// Minimum-cost rectangular assignment (Hungarian algorithm with potentials).
// Returns row -> column (-1 for unassigned rows); exactly min(rows, cols)
// pairs are assigned.
inline std::vector<int> solve_rectangular_assignment(const Eigen::MatrixXd& cost) {
    const int rows = static_cast<int>(cost.rows());
    const int cols = static_cast<int>(cost.cols());
    if (rows == 0 || cols == 0) return std::vector<int>(rows, -1);

    const bool transposed = rows > cols;
    const Eigen::MatrixXd a = transposed ? cost.transpose() : cost;
    const int n = static_cast<int>(a.rows());  // n <= m
    const int m = static_cast<int>(a.cols());
    const double inf = std::numeric_limits<double>::infinity();

    // 1-based potentials; p[j] = row matched to column j
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> match_row(n, -1);
    for (int j = 1; j <= m; ++j)
        if (p[j] != 0) match_row[p[j] - 1] = j - 1;

    if (!transposed) return match_row;
    std::vector<int> out(rows, -1);
    for (int i = 0; i < n; ++i)
        if (match_row[i] >= 0) out[match_row[i]] = i;
    return out;
}

inline double assignment_cost(const Eigen::MatrixXd& cost, const std::vector<int>& assignment) {
    double total = 0.0;
    for (std::size_t i = 0; i < assignment.size(); ++i)
        if (assignment[i] >= 0) total += cost(static_cast<int>(i), assignment[i]);
    return total;
}

}  // namespace amod::policy
