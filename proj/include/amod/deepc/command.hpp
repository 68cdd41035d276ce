#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "amod/common/error.hpp"
#include "amod/deepc/controller.hpp"

namespace amod::deepc {

// Integer transfer command plus transfer ratios for one upper-layer window.
// Row sums of u_int equal the measured empty-vehicle counts exactly; theta
// rows are stochastic.
struct ControlCommand {
    Eigen::MatrixXd u_float;  // R x R, clipped at zero
    Eigen::MatrixXi u_int;    // R x R, floor off-diagonal, remainder stays
    Eigen::MatrixXd theta;    // R x R row-stochastic transfer ratios
    int regions = 0;

    bool is_identity() const {
        for (int i = 0; i < regions; ++i)
            for (int j = 0; j < regions; ++j)
                if (u_int(i, j) != (i == j ? u_int(i, i) : 0)) return false;
        return true;
    }
};

// Rounding per the implementation rule: floor the off-diagonal transfers, let
// the remaining empty vehicles stay. theta_IJ = u_IJ / sum_J u_IJ, with an
// all-zero row falling back to "stay" (the 0/0 case).
inline ControlCommand command_from_float(const Eigen::MatrixXd& u_float_in, const Eigen::VectorXi& e) {
    const int R = static_cast<int>(e.size());
    if (u_float_in.rows() != R || u_float_in.cols() != R)
        throw ConfigError("command: u matrix must be R x R");
    ControlCommand cmd;
    cmd.regions = R;
    cmd.u_float = u_float_in.cwiseMax(0.0);  // solver tolerance can leave -1e-9 entries
    cmd.u_int.setZero(R, R);
    cmd.theta.setZero(R, R);
    for (int i = 0; i < R; ++i) {
        int moved = 0;
        for (int j = 0; j < R; ++j) {
            if (i == j) continue;
            cmd.u_int(i, j) = static_cast<int>(std::floor(cmd.u_float(i, j)));
            moved += cmd.u_int(i, j);
        }
        const int stay = e(i) - moved;
        if (stay < 0)
            throw RuntimeError("command: transfers exceed available vehicles in region " + std::to_string(i) +
                               " (budget constraint violated)");
        cmd.u_int(i, i) = stay;
        const double row_sum = cmd.u_float.row(i).sum();
        if (row_sum > 1e-12) {
            cmd.theta.row(i) = cmd.u_float.row(i) / row_sum;
        } else {
            cmd.theta(i, i) = 1.0;
        }
    }
    return cmd;
}

inline ControlCommand extract_command(const PlanResult& plan, const HankelSet& h, const Eigen::VectorXi& e) {
    const int R = static_cast<int>(e.size());
    if (h.m != R * R) throw ConfigError("command: input dimension is not regions squared");
    Eigen::MatrixXd u(R, R);
    for (int i = 0; i < R; ++i)
        for (int j = 0; j < R; ++j) u(i, j) = plan.u_first(i * R + j);
    return command_from_float(u, e);
}

// Fallback when a solve fails: everything stays.
inline ControlCommand stay_command(const Eigen::VectorXi& e) {
    const int R = static_cast<int>(e.size());
    ControlCommand cmd;
    cmd.regions = R;
    cmd.u_float = Eigen::MatrixXd::Zero(R, R);
    cmd.u_int.setZero(R, R);
    cmd.theta = Eigen::MatrixXd::Identity(R, R);
    for (int i = 0; i < R; ++i) {
        cmd.u_int(i, i) = e(i);
        cmd.u_float(i, i) = e(i);
    }
    return cmd;
}

inline Eigen::VectorXd flatten_command(const Eigen::MatrixXi& u_int) {
    const int R = static_cast<int>(u_int.rows());
    Eigen::VectorXd v(R * R);
    for (int i = 0; i < R; ++i)
        for (int j = 0; j < R; ++j) v(i * R + j) = static_cast<double>(u_int(i, j));
    return v;
}

// One full receding-horizon step of the fleet controller: plan, extract the
// integer command (identity-theta fallback on solver failure), stage the
// applied input for the next measurement commit.
inline ControlCommand deepc_step(DeepcController& ctrl, const Eigen::VectorXd& w_future, const Eigen::VectorXi& e) {
    const PlanResult plan = ctrl.plan(w_future, e.cast<double>());
    ControlCommand cmd;
    if (plan.ok) {
        cmd = extract_command(plan, ctrl.hankels(), e);
    } else {
        cmd = stay_command(e);
    }
    ctrl.stage_applied_input(flatten_command(cmd.u_int));
    return cmd;
}

}  // namespace amod::deepc
