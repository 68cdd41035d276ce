#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "amod/common/error.hpp"
#include "amod/deepc/qp.hpp"

namespace amod::deepc {

// Operator-splitting QP solver in the OSQP style: ADMM on the box form
// l <= Ax <= u with Ruiz equilibration, per-row step sizes, primal
// infeasibility certificates and an active-set polish step that solves the
// equality-constrained KKT system with iterative refinement.
//
// The solver object keeps its factorization and last iterate, so a receding
// horizon controller can update bounds and linear cost between solves and
// warm-start for a fraction of the cold-start iterations.
class QpSolver {
  public:
    // Rows 0..n_eq-1 of A are equality rows (l == u required there).
    QpSolver(Eigen::MatrixXd P, Eigen::VectorXd c, Eigen::MatrixXd A, Eigen::VectorXd l, Eigen::VectorXd u,
             int n_eq = 0, QpSettings settings = {})
        : settings_(settings),
          P_(std::move(P)),
          A_(std::move(A)),
          c_(std::move(c)),
          l_(std::move(l)),
          u_(std::move(u)) {
        n_ = static_cast<int>(P_.rows());
        mc_ = static_cast<int>(A_.rows());
        n_eq_ = n_eq;
        rho_base_ = settings_.rho;
        if (P_.cols() != n_ || c_.size() != n_) throw ConfigError("QP: inconsistent P/c dimensions");
        if (A_.cols() != n_ && mc_ > 0) throw ConfigError("QP: A column count must match decision dimension");
        if (l_.size() != mc_ || u_.size() != mc_) throw ConfigError("QP: bound sizes must match A rows");
        if (n_eq_ < 0 || n_eq_ > mc_) throw ConfigError("QP: invalid equality row count");
        for (int i = 0; i < mc_; ++i)
            if (l_(i) > u_(i)) throw ConfigError("QP: lower bound above upper bound");
        eq_row_.assign(mc_, false);
        for (int i = 0; i < n_eq_; ++i) {
            if (l_(i) != u_(i)) throw ConfigError("QP: equality row with l != u");
            eq_row_[i] = true;
        }
        equilibrate();
        build_rho();
        factorize();
        x_ = Eigen::VectorXd::Zero(n_);
        y_ = Eigen::VectorXd::Zero(mc_);
        z_ = Eigen::VectorXd::Zero(mc_);
    }

    static QpSolver from_problem(const QProblem& qp, QpSettings settings = {}) {
        const int me = static_cast<int>(qp.A_eq.rows());
        const int mi = static_cast<int>(qp.G.rows());
        const int n = qp.dim();
        Eigen::MatrixXd A(me + mi, n);
        Eigen::VectorXd l(me + mi), u(me + mi);
        if (me > 0) {
            A.topRows(me) = qp.A_eq;
            l.head(me) = qp.b_eq;
            u.head(me) = qp.b_eq;
        }
        if (mi > 0) {
            A.bottomRows(mi) = qp.G;
            l.tail(mi).setConstant(-std::numeric_limits<double>::infinity());
            u.tail(mi) = qp.h;
        }
        QpSolver s(qp.P, qp.c, std::move(A), std::move(l), std::move(u), me, settings);
        s.constant_ = qp.constant;
        return s;
    }

    // New right-hand sides; the KKT factorization is reused.
    void update_bounds(const Eigen::VectorXd& l, const Eigen::VectorXd& u) {
        if (l.size() != mc_ || u.size() != mc_) throw ConfigError("QP: bound update size mismatch");
        l_ = l;
        u_ = u;
        for (int i = 0; i < mc_; ++i) {
            if (l_(i) > u_(i)) throw ConfigError("QP: lower bound above upper bound");
            if (eq_row_[i] != (l_(i) == u_(i))) throw ConfigError("QP: bound update may not change row type");
        }
        ls_ = E_.cwiseProduct(l_);
        us_ = E_.cwiseProduct(u_);
    }

    void update_equality_rhs(const Eigen::VectorXd& b_eq) {
        Eigen::VectorXd l = l_, u = u_;
        if (b_eq.size() != n_eq_) throw ConfigError("QP: equality rhs size mismatch");
        l.head(n_eq_) = b_eq;
        u.head(n_eq_) = b_eq;
        update_bounds(l, u);
    }

    void update_linear_cost(const Eigen::VectorXd& c) {
        if (c.size() != n_) throw ConfigError("QP: cost update size mismatch");
        c_ = c;
        cs_ = cost_scale_ * D_.cwiseProduct(c_);
    }

    void set_constant(double k) { constant_ = k; }

    void reset_warm_start() {
        x_.setZero();
        y_.setZero();
        z_.setZero();
    }

    QSolution solve() {
        const double tol = settings_.tol;
        int iter_budget = settings_.max_iter;
        // loose pass first, then polish; tighten if polish does not certify
        double eps = std::max(tol, 2e-5);
        int used = 0;
        int infeasible_streak = 0;
        QSolution best;
        best.status = QpStatus::max_iter;

        while (used < iter_budget) {
            const AdmmOutcome out = admm_run(eps, iter_budget - used, infeasible_streak);
            used += out.iterations;
            if (out.infeasible) {
                QSolution s = current_solution();
                s.iterations = used;
                s.status = QpStatus::infeasible;
                return s;
            }

            QSolution raw = current_solution();
            raw.iterations = used;
            if (settings_.polish) {
                std::optional<QSolution> pol = try_polish();
                if (pol && pol->kkt_residual() <= tol) {
                    pol->iterations = used;
                    pol->status = QpStatus::optimal;
                    pol->polished = true;
                    store_warm_start(*pol);
                    return *pol;
                }
            }
            if (raw.kkt_residual() <= tol) {
                raw.status = QpStatus::optimal;
                return raw;
            }
            if (out.iterations == 0) break;  // no progress possible
            if (eps <= tol * 1.0000001 && out.converged) break;
            eps = std::max(tol, eps / 100.0);
        }

        QSolution s = current_solution();
        s.iterations = used;
        s.status = QpStatus::max_iter;
        return s;
    }

    const Eigen::MatrixXd& A() const { return A_; }
    int n_eq() const { return n_eq_; }

  private:
    struct AdmmOutcome {
        int iterations = 0;
        bool converged = false;
        bool infeasible = false;
    };

    void equilibrate() {
        D_ = Eigen::VectorXd::Ones(n_);
        E_ = Eigen::VectorXd::Ones(mc_);
        cost_scale_ = 1.0;
        Ps_ = P_;
        As_ = A_;
        cs_ = c_;
        auto safe = [](double v) { return (v < 1e-12 || !std::isfinite(v)) ? 1.0 : v; };
        for (int it = 0; it < settings_.scaling_iters; ++it) {
            Eigen::VectorXd dcol(n_);
            for (int j = 0; j < n_; ++j) {
                double m = Ps_.col(j).cwiseAbs().maxCoeff();
                if (mc_ > 0) m = std::max(m, As_.col(j).cwiseAbs().maxCoeff());
                dcol(j) = 1.0 / std::sqrt(safe(m));
            }
            Ps_ = dcol.asDiagonal() * Ps_ * dcol.asDiagonal();
            if (mc_ > 0) As_ = As_ * dcol.asDiagonal();
            D_ = D_.cwiseProduct(dcol);
            if (mc_ > 0) {
                Eigen::VectorXd erow(mc_);
                for (int i = 0; i < mc_; ++i) erow(i) = 1.0 / std::sqrt(safe(As_.row(i).cwiseAbs().maxCoeff()));
                As_ = erow.asDiagonal() * As_;
                E_ = E_.cwiseProduct(erow);
            }
        }
        // cost scaling
        double pnorm = 0.0;
        for (int j = 0; j < n_; ++j) pnorm += Ps_.col(j).cwiseAbs().maxCoeff();
        pnorm /= std::max(1, n_);
        cs_ = D_.cwiseProduct(c_);
        const double denom = std::max(pnorm, cs_.lpNorm<Eigen::Infinity>());
        cost_scale_ = (denom < 1e-12) ? 1.0 : 1.0 / denom;
        Ps_ *= cost_scale_;
        cs_ *= cost_scale_;
        ls_ = E_.cwiseProduct(l_);
        us_ = E_.cwiseProduct(u_);
    }

    void build_rho() {
        rho_ = Eigen::VectorXd::Constant(mc_, rho_base_);
        for (int i = 0; i < mc_; ++i)
            if (eq_row_[i]) rho_(i) = rho_base_ * settings_.eq_rho_scale;
    }

    void factorize() {
        Eigen::MatrixXd M = Ps_;
        M.diagonal().array() += settings_.sigma;
        if (mc_ > 0) M.noalias() += As_.transpose() * rho_.asDiagonal() * As_;
        llt_.compute(M);
        double jitter = 1e-12;
        while (llt_.info() != Eigen::Success && jitter < 1e-2) {
            Eigen::MatrixXd Mj = M;
            Mj.diagonal().array() += jitter;
            llt_.compute(Mj);
            jitter *= 100.0;
        }
        if (llt_.info() != Eigen::Success) throw RuntimeError("QP: KKT factorization failed");
    }

    AdmmOutcome admm_run(double eps, int budget, int& infeasible_streak) {
        AdmmOutcome out;
        if (budget <= 0) return out;
        const double alpha = settings_.alpha;
        Eigen::VectorXd x_prev, y_prev;
        for (int k = 0; k < budget; ++k) {
            y_prev = y_;
            Eigen::VectorXd rhs = settings_.sigma * x_ - cs_;
            if (mc_ > 0) rhs.noalias() += As_.transpose() * (rho_.cwiseProduct(z_) - y_);
            const Eigen::VectorXd xt = llt_.solve(rhs);
            Eigen::VectorXd zt;
            if (mc_ > 0) zt.noalias() = As_ * xt;
            x_ = alpha * xt + (1.0 - alpha) * x_;
            if (mc_ > 0) {
                const Eigen::VectorXd zc = alpha * zt + (1.0 - alpha) * z_ + y_.cwiseQuotient(rho_);
                z_ = zc.cwiseMax(ls_).cwiseMin(us_);
                y_ = rho_.cwiseProduct(zc - z_);
            }
            ++out.iterations;

            if ((k + 1) % settings_.check_every == 0 || k + 1 == budget) {
                Residuals r = residuals();
                const double ep = eps * (1.0 + r.prim_scale);
                const double ed = eps * (1.0 + r.dual_scale);
                if (r.prim <= ep && r.dual <= ed) {
                    out.converged = true;
                    return out;
                }
                if (mc_ > 0 && primal_infeasibility_certificate(y_ - y_prev)) {
                    if (++infeasible_streak >= 2) {
                        out.infeasible = true;
                        return out;
                    }
                } else {
                    infeasible_streak = 0;
                }
                if (settings_.adaptive_rho && (k + 1) % (settings_.check_every * 4) == 0) adapt_rho(r);
            }
        }
        return out;
    }

    struct Residuals {
        double prim = 0.0, dual = 0.0;
        double prim_scale = 0.0, dual_scale = 0.0;
    };

    Residuals residuals() const {
        Residuals r;
        const Eigen::VectorXd x = D_.cwiseProduct(x_);
        const Eigen::VectorXd Px = P_ * x;
        if (mc_ > 0) {
            const Eigen::VectorXd Ax = A_ * x;
            const Eigen::VectorXd z = z_.cwiseQuotient(E_);
            const Eigen::VectorXd y = E_.cwiseProduct(y_) / cost_scale_;
            r.prim = (Ax - z).lpNorm<Eigen::Infinity>();
            r.prim_scale = std::max(Ax.lpNorm<Eigen::Infinity>(), z.lpNorm<Eigen::Infinity>());
            const Eigen::VectorXd Aty = A_.transpose() * y;
            r.dual = (Px + c_ + Aty).lpNorm<Eigen::Infinity>();
            r.dual_scale = std::max({Px.lpNorm<Eigen::Infinity>(), Aty.lpNorm<Eigen::Infinity>(),
                                     c_.lpNorm<Eigen::Infinity>()});
        } else {
            r.dual = (Px + c_).lpNorm<Eigen::Infinity>();
            r.dual_scale = std::max(Px.lpNorm<Eigen::Infinity>(), c_.lpNorm<Eigen::Infinity>());
        }
        return r;
    }

    void adapt_rho(const Residuals& r) {
        const double rp = r.prim / std::max(r.prim_scale, 1e-10);
        const double rd = r.dual / std::max(r.dual_scale, 1e-10);
        if (rp < 1e-14 && rd < 1e-14) return;
        double ratio = std::sqrt(std::max(rp, 1e-14) / std::max(rd, 1e-14));
        ratio = std::clamp(ratio, 1e-3, 1e3);
        const double next = std::clamp(rho_base_ * ratio, 1e-6, 1e6);
        if (next > rho_base_ * 5.0 || next < rho_base_ / 5.0) {
            rho_base_ = next;
            build_rho();
            factorize();
        }
    }

    // Certificate on the normalized dual step; rows with an infinite bound must
    // have the matching sign (within tolerance) or the direction is rejected.
    bool primal_infeasibility_certificate(const Eigen::VectorXd& dy_scaled) const {
        Eigen::VectorXd dy = E_.cwiseProduct(dy_scaled) / cost_scale_;
        const double norm = dy.lpNorm<Eigen::Infinity>();
        if (!(norm > 0.0)) return false;
        dy /= norm;
        const double eps = settings_.eps_infeasible;
        if ((A_.transpose() * dy).lpNorm<Eigen::Infinity>() > eps) return false;
        double support = 0.0;
        for (int i = 0; i < mc_; ++i) {
            const double pos = std::max(dy(i), 0.0);
            const double neg = std::min(dy(i), 0.0);
            if (std::isinf(u_(i))) {
                if (pos > eps) return false;
            } else {
                support += u_(i) * pos;
            }
            if (std::isinf(l_(i))) {
                if (neg < -eps) return false;
            } else {
                support += l_(i) * neg;
            }
        }
        return support <= -eps;
    }

    QSolution current_solution() const {
        QSolution s;
        s.x = D_.cwiseProduct(x_);
        const Eigen::VectorXd y = mc_ > 0 ? Eigen::VectorXd(E_.cwiseProduct(y_) / cost_scale_) : Eigen::VectorXd();
        fill_solution(s, s.x, y);
        return s;
    }

    void fill_solution(QSolution& s, const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
        s.objective = 0.5 * x.dot(P_ * x) + c_.dot(x) + constant_;
        s.y_eq = y.size() > 0 ? Eigen::VectorXd(y.head(n_eq_)) : Eigen::VectorXd::Zero(n_eq_);
        s.y_ineq = y.size() > 0 ? Eigen::VectorXd(y.tail(mc_ - n_eq_)) : Eigen::VectorXd::Zero(mc_ - n_eq_);
        s.eq_residual = 0.0;
        s.ineq_residual = 0.0;
        s.stationarity = 0.0;
        s.complementarity = 0.0;
        Eigen::VectorXd grad = P_ * x + c_;
        if (mc_ > 0) {
            const Eigen::VectorXd Ax = A_ * x;
            for (int i = 0; i < mc_; ++i) {
                if (eq_row_[i]) {
                    s.eq_residual = std::max(s.eq_residual, std::abs(Ax(i) - u_(i)));
                } else {
                    const double viol = std::max({Ax(i) - u_(i), std::isinf(l_(i)) ? 0.0 : l_(i) - Ax(i), 0.0});
                    s.ineq_residual = std::max(s.ineq_residual, viol);
                    const double yi = y(i);
                    // one-sided upper rows need y >= 0; fold sign violations in
                    if (std::isinf(l_(i))) s.complementarity = std::max(s.complementarity, std::max(0.0, -yi));
                    const double slack = std::min(std::abs(Ax(i) - u_(i)), std::isinf(l_(i))
                                                                               ? std::numeric_limits<double>::infinity()
                                                                               : std::abs(Ax(i) - l_(i)));
                    s.complementarity = std::max(s.complementarity, std::abs(yi) * std::min(slack, 1e12));
                }
            }
            grad.noalias() += A_.transpose() * y;
        }
        s.stationarity = grad.lpNorm<Eigen::Infinity>();
    }

    std::optional<QSolution> try_polish() const {
        const Eigen::VectorXd y = E_.cwiseProduct(y_) / cost_scale_;
        const Eigen::VectorXd z = mc_ > 0 ? Eigen::VectorXd(z_.cwiseQuotient(E_)) : Eigen::VectorXd();
        // pass 1: dual sign; pass 2: proximity to the bounds
        for (int attempt = 0; attempt < 2; ++attempt) {
            std::vector<int> act;
            std::vector<double> bnd;
            std::vector<int> side;  // -1 lower, +1 upper, 0 equality
            for (int i = 0; i < mc_; ++i) {
                if (eq_row_[i]) {
                    act.push_back(i);
                    bnd.push_back(u_(i));
                    side.push_back(0);
                    continue;
                }
                bool lower = false, upper = false;
                if (attempt == 0) {
                    lower = y(i) < 0.0;
                    upper = y(i) > 0.0;
                } else {
                    const double tl = 1e-6 * (1.0 + std::abs(l_(i)));
                    const double tu = 1e-6 * (1.0 + std::abs(u_(i)));
                    lower = std::isfinite(l_(i)) && z(i) - l_(i) <= tl;
                    upper = std::isfinite(u_(i)) && u_(i) - z(i) <= tu;
                }
                if (upper) {
                    act.push_back(i);
                    bnd.push_back(u_(i));
                    side.push_back(1);
                } else if (lower) {
                    act.push_back(i);
                    bnd.push_back(l_(i));
                    side.push_back(-1);
                }
            }
            std::optional<QSolution> s = polish_with(act, bnd, side);
            if (s) return s;
        }
        return std::nullopt;
    }

    std::optional<QSolution> polish_with(const std::vector<int>& act, const std::vector<double>& bnd,
                                         const std::vector<int>& side) const {
        const int na = static_cast<int>(act.size());
        Eigen::MatrixXd Ahat(na, n_);
        Eigen::VectorXd bhat(na);
        for (int k = 0; k < na; ++k) {
            Ahat.row(k) = A_.row(act[k]);
            bhat(k) = bnd[k];
        }
        const double delta = settings_.polish_delta;
        Eigen::MatrixXd Pd = P_;
        Pd.diagonal().array() += delta;
        Eigen::LLT<Eigen::MatrixXd> pllt(Pd);
        if (pllt.info() != Eigen::Success) return std::nullopt;
        Eigen::LLT<Eigen::MatrixXd> sllt;
        if (na > 0) {
            Eigen::MatrixXd S = Ahat * pllt.solve(Ahat.transpose());
            S.diagonal().array() += delta;
            sllt.compute(S);
            if (sllt.info() != Eigen::Success) return std::nullopt;
        }
        auto kkt_solve = [&](const Eigen::VectorXd& r1, const Eigen::VectorXd& r2, Eigen::VectorXd& dx,
                             Eigen::VectorXd& dnu) {
            if (na == 0) {
                dx = pllt.solve(r1);
                dnu.resize(0);
                return;
            }
            dnu = sllt.solve(Ahat * pllt.solve(r1) - r2);
            dx = pllt.solve(r1 - Ahat.transpose() * dnu);
        };

        Eigen::VectorXd x = Eigen::VectorXd::Zero(n_), nu = Eigen::VectorXd::Zero(na);
        Eigen::VectorXd dx, dnu;
        kkt_solve(-c_, bhat, x, nu);
        // refine against the unregularized KKT system
        for (int it = 0; it < settings_.polish_refine_steps; ++it) {
            Eigen::VectorXd r1 = -c_ - P_ * x;
            if (na > 0) r1.noalias() -= Ahat.transpose() * nu;
            const Eigen::VectorXd r2 = na > 0 ? Eigen::VectorXd(bhat - Ahat * x) : Eigen::VectorXd();
            if (r1.lpNorm<Eigen::Infinity>() < 1e-15 && (na == 0 || r2.lpNorm<Eigen::Infinity>() < 1e-15)) break;
            kkt_solve(r1, r2, dx, dnu);
            x += dx;
            if (na > 0) nu += dnu;
        }

        // duals must have the right sign, inactive rows must stay feasible
        Eigen::VectorXd yfull = Eigen::VectorXd::Zero(mc_);
        for (int k = 0; k < na; ++k) {
            if (side[k] == 1 && nu(k) < -settings_.tol) return std::nullopt;
            if (side[k] == -1 && nu(k) > settings_.tol) return std::nullopt;
            yfull(act[k]) = nu(k);
        }
        if (mc_ > 0) {
            const Eigen::VectorXd Ax = A_ * x;
            for (int i = 0; i < mc_; ++i) {
                if (Ax(i) > u_(i) + settings_.tol) return std::nullopt;
                if (std::isfinite(l_(i)) && Ax(i) < l_(i) - settings_.tol) return std::nullopt;
            }
        }
        QSolution s;
        s.x = x;
        fill_solution(s, x, yfull);
        return s;
    }

    void store_warm_start(const QSolution& s) {
        x_ = s.x.cwiseQuotient(D_);
        if (mc_ > 0) {
            Eigen::VectorXd y(mc_);
            y.head(n_eq_) = s.y_eq;
            y.tail(mc_ - n_eq_) = s.y_ineq;
            y_ = cost_scale_ * y.cwiseQuotient(E_);
            z_ = E_.cwiseProduct(A_ * s.x);
        }
    }

    QpSettings settings_;
    int n_ = 0, mc_ = 0, n_eq_ = 0;
    double constant_ = 0.0;
    double rho_base_ = 0.1;

    // unscaled problem
    Eigen::MatrixXd P_, A_;
    Eigen::VectorXd c_, l_, u_;
    std::vector<bool> eq_row_;

    // scaled problem and scalings
    Eigen::MatrixXd Ps_, As_;
    Eigen::VectorXd cs_, ls_, us_, D_, E_;
    double cost_scale_ = 1.0;

    Eigen::VectorXd rho_;
    Eigen::LLT<Eigen::MatrixXd> llt_;

    // scaled iterate, persists across solves as the warm start
    Eigen::VectorXd x_, y_, z_;
};

inline QSolution solve_qp(const QProblem& qp, double tol = 1e-6, int max_iter = 20000) {
    QpSettings settings;
    settings.tol = tol;
    settings.max_iter = max_iter;
    QpSolver solver = QpSolver::from_problem(qp, settings);
    return solver.solve();
}

}  // namespace amod::deepc
