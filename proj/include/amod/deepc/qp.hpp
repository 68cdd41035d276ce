#pragma once

#include <Eigen/Dense>
#include <algorithm>

namespace amod::deepc {

// Strictly convex quadratic program
//   min 1/2 x'Px + c'x + constant
//   s.t. A_eq x = b_eq,  G x <= h.
struct QProblem {
    Eigen::MatrixXd P;
    Eigen::VectorXd c;
    Eigen::MatrixXd A_eq;
    Eigen::VectorXd b_eq;
    Eigen::MatrixXd G;
    Eigen::VectorXd h;
    double constant = 0.0;

    int dim() const { return static_cast<int>(P.rows()); }
};

enum class QpStatus { optimal, infeasible, max_iter };

inline const char* to_string(QpStatus s) {
    switch (s) {
        case QpStatus::optimal: return "optimal";
        case QpStatus::infeasible: return "infeasible";
        case QpStatus::max_iter: return "max_iter";
    }
    return "?";
}

struct QSolution {
    Eigen::VectorXd x;
    QpStatus status = QpStatus::max_iter;
    double objective = 0.0;
    int iterations = 0;
    bool polished = false;

    // KKT residual components, infinity norms on the unscaled problem
    double eq_residual = 0.0;
    double ineq_residual = 0.0;
    double stationarity = 0.0;
    double complementarity = 0.0;

    Eigen::VectorXd y_eq;    // equality multipliers
    Eigen::VectorXd y_ineq;  // inequality multipliers (>= 0 at an optimum)

    double primal_residual() const { return std::max(eq_residual, ineq_residual); }
    double dual_residual() const { return std::max(stationarity, complementarity); }
    double kkt_residual() const { return std::max(primal_residual(), dual_residual()); }
};

struct QpSettings {
    double tol = 1e-6;
    int max_iter = 20000;

    double sigma = 1e-6;          // x-regularization of the ADMM splitting
    double alpha = 1.6;           // relaxation
    double rho = 0.1;             // base step for inequality rows
    double eq_rho_scale = 1e3;    // equality rows get rho * this
    int check_every = 25;
    bool adaptive_rho = true;
    int scaling_iters = 10;       // Ruiz equilibration sweeps
    double eps_infeasible = 1e-6;

    bool polish = true;
    double polish_delta = 1e-7;
    int polish_refine_steps = 8;
};

}  // namespace amod::deepc
