#pragma once

#include <Eigen/Dense>
#include <deque>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "amod/common/error.hpp"
#include "amod/deepc/hankel.hpp"
#include "amod/deepc/qp_solver.hpp"

namespace amod::deepc {

// Weights and horizons of the predictive controller. Defaults follow the
// reference experiment configuration; desk-scale runs override the horizons.
struct DeepcParams {
    int T_ini = 35;
    int N = 10;
    double lambda_g = 1000.0;
    double lambda_y = 0.01;
    double alpha = 150.0;
    Eigen::RowVectorXd Q;   // 1 x p output weight
    Eigen::RowVectorXd Rw;  // 1 x m input weight

    // First-step input budget: sum of the listed input entries equals the
    // matching element of the measured availability vector e. Empty means no
    // budget constraints (used by the generic LTI validation path).
    std::vector<std::vector<int>> budget_groups;

    // state-dimension proxy for the excitation diagnostic; < 0 disables
    int n_assumed = -1;

    void validate(int m, int p) const {
        if (T_ini < 1 || N < 1) throw ConfigError("deepc: T_ini and N must be >= 1");
        if (!(lambda_g > 0.0)) throw ConfigError("deepc: lambda_g must be > 0");
        if (!(lambda_y > 0.0)) throw ConfigError("deepc: lambda_y must be > 0");
        if (alpha < 0.0) throw ConfigError("deepc: alpha must be >= 0");
        if (Q.size() != p) throw ConfigError("deepc: Q must have one weight per output");
        if (Rw.size() != m) throw ConfigError("deepc: Rw must have one weight per input");
        if (Q.minCoeff() < 0.0 || (Rw.size() > 0 && Rw.minCoeff() < 0.0))
            throw ConfigError("deepc: Q and Rw must be nonnegative");
        for (const auto& grp : budget_groups)
            for (int idx : grp)
                if (idx < 0 || idx >= m) throw ConfigError("deepc: budget group index out of range");
    }
};

// Condensed single-variable QP in g. The substitutions u = U^f g, y = Y^f g
// and delta_y = Y^p g - y_ini eliminate everything but g; the L1 objective
// terms reduce to inner products because u, y and the weights are all
// nonnegative under the constraints.
//
//   min  -alpha (1 kron Q) Y^f g + (1 kron Rw) U^f g
//        + lambda_g ||g||^2 + lambda_y ||Y^p g - y_ini||^2
//   s.t. U^p g = u_ini, W^p g = w_ini, W^f g = w_future,
//        sum over budget group I of (U^f g)_first-step = e_I,
//        U^f g >= 0, Y^f g >= 0.
inline QProblem formulate_deepc_qp(const HankelSet& h, const Eigen::VectorXd& u_ini, const Eigen::VectorXd& w_ini,
                                   const Eigen::VectorXd& y_ini, const Eigen::VectorXd& w_future,
                                   const Eigen::VectorXd& e, const DeepcParams& params) {
    params.validate(h.m, h.p);
    if (u_ini.size() != h.m * h.T_ini) throw ConfigError("deepc: u_ini length mismatch");
    if (w_ini.size() != h.q * h.T_ini) throw ConfigError("deepc: w_ini length mismatch");
    if (y_ini.size() != h.p * h.T_ini) throw ConfigError("deepc: y_ini length mismatch");
    if (w_future.size() != h.q * h.N) throw ConfigError("deepc: w_future length mismatch");
    if (e.size() != static_cast<Eigen::Index>(params.budget_groups.size()))
        throw ConfigError("deepc: e must match the number of budget groups");
    if (e.size() > 0 && e.minCoeff() < 0.0) throw ConfigError("deepc: e must be nonnegative");

    const int ng = h.cols();
    const int R = static_cast<int>(params.budget_groups.size());

    QProblem qp;
    qp.P = 2.0 * params.lambda_y * (h.Yp.transpose() * h.Yp);
    qp.P.diagonal().array() += 2.0 * params.lambda_g;

    Eigen::VectorXd q_rep(h.p * h.N), r_rep(h.m * h.N);
    for (int i = 0; i < h.N; ++i) {
        q_rep.segment(i * h.p, h.p) = params.Q.transpose();
        r_rep.segment(i * h.m, h.m) = params.Rw.transpose();
    }
    qp.c = h.Uf.transpose() * r_rep - params.alpha * (h.Yf.transpose() * q_rep) -
           2.0 * params.lambda_y * (h.Yp.transpose() * y_ini);
    qp.constant = params.lambda_y * y_ini.squaredNorm();

    const int me = h.m * h.T_ini + h.q * h.T_ini + h.q * h.N + R;
    qp.A_eq.resize(me, ng);
    qp.b_eq.resize(me);
    int row = 0;
    qp.A_eq.middleRows(row, h.m * h.T_ini) = h.Up;
    qp.b_eq.segment(row, h.m * h.T_ini) = u_ini;
    row += h.m * h.T_ini;
    qp.A_eq.middleRows(row, h.q * h.T_ini) = h.Wp;
    qp.b_eq.segment(row, h.q * h.T_ini) = w_ini;
    row += h.q * h.T_ini;
    qp.A_eq.middleRows(row, h.q * h.N) = h.Wf;
    qp.b_eq.segment(row, h.q * h.N) = w_future;
    row += h.q * h.N;
    for (int g = 0; g < R; ++g) {
        Eigen::RowVectorXd sum_row = Eigen::RowVectorXd::Zero(ng);
        for (int idx : params.budget_groups[g]) sum_row += h.Uf.row(idx);  // first horizon step only
        qp.A_eq.row(row) = sum_row;
        qp.b_eq(row) = e(g);
        ++row;
    }

    qp.G.resize(h.m * h.N + h.p * h.N, ng);
    qp.G.topRows(h.m * h.N) = -h.Uf;
    qp.G.bottomRows(h.p * h.N) = -h.Yf;
    qp.h = Eigen::VectorXd::Zero(h.m * h.N + h.p * h.N);
    return qp;
}

struct SolveLogEntry {
    int step = 0;
    QpStatus status = QpStatus::max_iter;
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double objective = 0.0;
    bool fallback = false;

    std::string line() const {
        std::ostringstream os;
        os << "step=" << step << " status=" << to_string(status) << " iters=" << iterations
           << " prim=" << primal_residual << " dual=" << dual_residual << " obj=" << objective
           << (fallback ? " fallback=1" : "");
        return os.str();
    }
};

struct PlanResult {
    bool ok = false;                 // solution usable for command extraction
    Eigen::VectorXd u_first;         // first-step optimal input, length m
    Eigen::VectorXd u_sequence;      // full m*N optimal input sequence
    Eigen::VectorXd g;
    QSolution solution;
};

// Receding-horizon driver around the Hankel model. Owns the rolling T_ini
// window of past (u, w, y) and one staged input awaiting its measured window.
// The QP matrices are fixed over the controller lifetime, so one QpSolver is
// built on the first plan and only right-hand sides change afterwards.
class DeepcController {
  public:
    DeepcController(HankelSet hankels, DeepcParams params, QpSettings qp_settings = {},
                    double accept_residual = 1e-3)
        : h_(std::move(hankels)), params_(std::move(params)), qp_settings_(qp_settings),
          accept_residual_(accept_residual) {
        params_.validate(h_.m, h_.p);
        if (h_.T_ini != params_.T_ini || h_.N != params_.N)
            throw ConfigError("deepc: Hankel set horizons differ from parameters");
    }

    int input_dim() const { return h_.m; }
    int disturbance_dim() const { return h_.q; }
    int output_dim() const { return h_.p; }
    const HankelSet& hankels() const { return h_; }
    const DeepcParams& params() const { return params_; }

    bool ready() const { return static_cast<int>(u_hist_.size()) == params_.T_ini; }

    // Fill the initial window, oldest first. Takes the tail if longer.
    void seed_history(const std::vector<Eigen::VectorXd>& u, const std::vector<Eigen::VectorXd>& w,
                      const std::vector<Eigen::VectorXd>& y) {
        if (u.size() != w.size() || u.size() != y.size()) throw ConfigError("deepc: seed history size mismatch");
        if (static_cast<int>(u.size()) < params_.T_ini)
            throw ConfigError("deepc: seed history shorter than T_ini");
        u_hist_.clear();
        w_hist_.clear();
        y_hist_.clear();
        for (std::size_t i = u.size() - params_.T_ini; i < u.size(); ++i) {
            check_dims(u[i], w[i], y[i]);
            u_hist_.push_back(u[i]);
            w_hist_.push_back(w[i]);
            y_hist_.push_back(y[i]);
        }
    }

    // Solve the horizon problem for the current window. The caller applies
    // some input afterwards and must stage it with stage_applied_input.
    PlanResult plan(const Eigen::VectorXd& w_future, const Eigen::VectorXd& e) {
        if (!ready()) throw RuntimeError("deepc: controller history not seeded");
        const QProblem qp = formulate_deepc_qp(h_, stack(u_hist_), stack(w_hist_), stack(y_hist_), w_future, e,
                                               params_);
        if (!solver_) {
            solver_.emplace(QpSolver::from_problem(qp, qp_settings_));
        } else {
            solver_->update_equality_rhs(qp.b_eq);
            solver_->update_linear_cost(qp.c);
            solver_->set_constant(qp.constant);
        }
        PlanResult r;
        r.solution = solver_->solve();
        r.g = r.solution.x;
        r.u_sequence = h_.Uf * r.g;
        r.u_first = r.u_sequence.head(h_.m);
        r.ok = r.solution.status == QpStatus::optimal ||
               (r.solution.status == QpStatus::max_iter && r.solution.kkt_residual() <= accept_residual_);

        SolveLogEntry entry;
        entry.step = step_index_;
        entry.status = r.solution.status;
        entry.iterations = r.solution.iterations;
        entry.primal_residual = r.solution.primal_residual();
        entry.dual_residual = r.solution.dual_residual();
        entry.objective = r.solution.objective;
        entry.fallback = !r.ok;
        log_.push_back(entry);
        ++step_index_;
        return r;
    }

    // Record the input actually applied this window (integer-rounded commands
    // in the fleet loop, raw optima in validation loops).
    void stage_applied_input(const Eigen::VectorXd& u_applied) {
        if (u_applied.size() != h_.m) throw ConfigError("deepc: staged input dimension mismatch");
        staged_u_ = u_applied;
    }

    // Complete the staged record with the window's measured disturbance and
    // output, then roll the T_ini window forward.
    void commit_measurement(const Eigen::VectorXd& w_meas, const Eigen::VectorXd& y_meas) {
        if (!staged_u_) throw RuntimeError("deepc: no staged input to commit");
        check_dims(*staged_u_, w_meas, y_meas);
        u_hist_.push_back(*staged_u_);
        w_hist_.push_back(w_meas);
        y_hist_.push_back(y_meas);
        u_hist_.pop_front();
        w_hist_.pop_front();
        y_hist_.pop_front();
        staged_u_.reset();
    }

    bool has_staged_input() const { return staged_u_.has_value(); }
    const std::vector<SolveLogEntry>& log() const { return log_; }

  private:
    void check_dims(const Eigen::VectorXd& u, const Eigen::VectorXd& w, const Eigen::VectorXd& y) const {
        if (u.size() != h_.m || w.size() != h_.q || y.size() != h_.p)
            throw ConfigError("deepc: record dimensions do not match the Hankel set");
    }

    static Eigen::VectorXd stack(const std::deque<Eigen::VectorXd>& v) {
        Eigen::Index total = 0;
        for (const auto& x : v) total += x.size();
        Eigen::VectorXd out(total);
        Eigen::Index at = 0;
        for (const auto& x : v) {
            out.segment(at, x.size()) = x;
            at += x.size();
        }
        return out;
    }

    HankelSet h_;
    DeepcParams params_;
    QpSettings qp_settings_;
    double accept_residual_;

    std::deque<Eigen::VectorXd> u_hist_, w_hist_, y_hist_;
    std::optional<Eigen::VectorXd> staged_u_;
    std::optional<QpSolver> solver_;
    std::vector<SolveLogEntry> log_;
    int step_index_ = 0;
};

// AMoD input layout: u is a flattened R x R matrix in row-major order, entry
// (I, J) = vehicles sent from region I to region J. Group I sums row I.
inline std::vector<std::vector<int>> region_budget_groups(int regions) {
    std::vector<std::vector<int>> groups(regions);
    for (int i = 0; i < regions; ++i) {
        groups[i].resize(regions);
        for (int j = 0; j < regions; ++j) groups[i][j] = i * regions + j;
    }
    return groups;
}

}  // namespace amod::deepc
