#pragma once

// Small-instance enumeration oracles: factorial assignment search and
// active-set enumeration for strictly convex QPs.

#include <Eigen/Dense>
#include <algorithm>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "amod/deepc/qp.hpp"

namespace oracles {

// minimum assignment cost over all ways to pair min(rows, cols) rows/columns
inline double brute_force_assignment_cost(const Eigen::MatrixXd& cost) {
    const int rows = static_cast<int>(cost.rows());
    const int cols = static_cast<int>(cost.cols());
    if (rows == 0 || cols == 0) return 0.0;
    if (rows <= cols) {
        std::vector<int> idx(cols);
        std::iota(idx.begin(), idx.end(), 0);
        double best = std::numeric_limits<double>::infinity();
        std::sort(idx.begin(), idx.end());
        do {
            double total = 0.0;
            for (int i = 0; i < rows; ++i) total += cost(i, idx[i]);
            best = std::min(best, total);
        } while (std::next_permutation(idx.begin(), idx.end()));
        return best;
    }
    return brute_force_assignment_cost(cost.transpose());
}

// Global minimum of a strictly convex QP by enumerating every active set of
// inequality constraints and checking the KKT conditions of each candidate.
inline std::optional<double> active_set_enumeration_optimum(const amod::deepc::QProblem& qp, double tol = 1e-9) {
    const int n = qp.dim();
    const int me = static_cast<int>(qp.A_eq.rows());
    const int mi = static_cast<int>(qp.G.rows());
    double best = std::numeric_limits<double>::infinity();
    bool found = false;

    for (unsigned mask = 0; mask < (1u << mi); ++mask) {
        std::vector<int> active;
        for (int i = 0; i < mi; ++i)
            if (mask & (1u << i)) active.push_back(i);
        const int na = static_cast<int>(active.size());
        const int dim = n + me + na;

        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(dim, dim);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
        K.topLeftCorner(n, n) = qp.P;
        rhs.head(n) = -qp.c;
        if (me > 0) {
            K.block(0, n, n, me) = qp.A_eq.transpose();
            K.block(n, 0, me, n) = qp.A_eq;
            rhs.segment(n, me) = qp.b_eq;
        }
        for (int k = 0; k < na; ++k) {
            K.block(0, n + me + k, n, 1) = qp.G.row(active[k]).transpose();
            K.block(n + me + k, 0, 1, n) = qp.G.row(active[k]);
            rhs(n + me + k) = qp.h(active[k]);
        }

        Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
        if (!lu.isInvertible()) continue;
        const Eigen::VectorXd sol = lu.solve(rhs);
        const Eigen::VectorXd x = sol.head(n);

        bool ok = true;
        for (int k = 0; k < na && ok; ++k)
            if (sol(n + me + k) < -tol) ok = false;  // multipliers of active inequalities must be >= 0
        if (ok && mi > 0) {
            const Eigen::VectorXd slack = qp.G * x - qp.h;
            for (int i = 0; i < mi && ok; ++i)
                if (slack(i) > tol) ok = false;
        }
        if (ok && me > 0 && (qp.A_eq * x - qp.b_eq).lpNorm<Eigen::Infinity>() > tol) ok = false;
        if (!ok) continue;

        const double obj = 0.5 * x.dot(qp.P * x) + qp.c.dot(x) + qp.constant;
        best = std::min(best, obj);
        found = true;
    }
    if (!found) return std::nullopt;
    return best;
}

}  // namespace oracles
