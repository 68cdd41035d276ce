#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "amod/common/error.hpp"
#include "amod/common/rng.hpp"
#include "amod/deepc/hankel.hpp"

namespace amod::deepc {

// Discrete-time LTI system with measurable disturbance,
//   x+ = A x + B u + B_d w,   y = C x + D u + D_d w.
// Validation-only: the controller never sees these matrices.
struct LtiOracle {
    Eigen::MatrixXd A, B, C, D, Bd, Dd;
    Eigen::VectorXd x;

    int n() const { return static_cast<int>(A.rows()); }
    int m() const { return static_cast<int>(B.cols()); }
    int p() const { return static_cast<int>(C.rows()); }
    int q() const { return static_cast<int>(Bd.cols()); }

    Eigen::VectorXd output(const Eigen::VectorXd& u, const Eigen::VectorXd& w) const {
        return C * x + D * u + Dd * w;
    }

    // emits y_k and advances the state
    Eigen::VectorXd step(const Eigen::VectorXd& u, const Eigen::VectorXd& w) {
        Eigen::VectorXd y = output(u, w);
        x = A * x + B * u + Bd * w;
        return y;
    }

    double spectral_radius() const {
        return A.eigenvalues().cwiseAbs().maxCoeff();
    }

    // Random stable system. nonneg = true draws nonnegative entries so that
    // nonnegative inputs and states produce nonnegative outputs, which keeps
    // the positivity-constrained control problems feasible.
    static LtiOracle random_stable(int n, int m, int p, int q, double target_radius, Rng& rng,
                                   bool nonneg = false) {
        auto draw = [&](int r, int c) {
            Eigen::MatrixXd M(r, c);
            for (int i = 0; i < r; ++i)
                for (int j = 0; j < c; ++j) M(i, j) = nonneg ? rng.uniform01() : rng.uniform(-1.0, 1.0);
            return M;
        };
        LtiOracle sys;
        sys.A = draw(n, n);
        const double rad = sys.A.eigenvalues().cwiseAbs().maxCoeff();
        if (rad > 1e-12) sys.A *= target_radius / rad;
        sys.B = draw(n, m);
        sys.C = draw(p, n);
        sys.D = 0.5 * draw(p, m);
        sys.Bd = draw(n, q);
        sys.Dd = 0.5 * draw(p, q);
        sys.x = Eigen::VectorXd::Zero(n);
        return sys;
    }
};

// (u, w, y) signal triple, one column per time step.
struct Trajectory {
    Eigen::MatrixXd u, w, y;

    int length() const { return static_cast<int>(u.cols()); }
};

// Runs the oracle over given inputs and disturbances from its current state.
inline Trajectory simulate(LtiOracle sys, const Eigen::MatrixXd& u, const Eigen::MatrixXd& w) {
    if (u.cols() != w.cols()) throw ConfigError("lti: input and disturbance lengths differ");
    Trajectory t;
    t.u = u;
    t.w = w;
    t.y.resize(sys.p(), u.cols());
    for (int k = 0; k < u.cols(); ++k) t.y.col(k) = sys.step(u.col(k), w.col(k));
    return t;
}

// Least-squares check of the behavioral identity: solve the stacked
// [U^p;W^p;Y^p;U^f;W^f;Y^f] g = col(ini, future) system for g and return the
// residual norm. Oracle-generated trajectories land at numerical zero.
inline double verify_fundamental_lemma(const Trajectory& data, const Trajectory& test, int T_ini, int N) {
    if (test.length() != T_ini + N) throw ConfigError("lemma: test trajectory must have length T_ini + N");
    const HankelSet h = assemble_hankel_set(SignalSeries(data.u), SignalSeries(data.w), SignalSeries(data.y),
                                            T_ini, N);
    const int rows = static_cast<int>(h.Up.rows() + h.Wp.rows() + h.Yp.rows() + h.Uf.rows() + h.Wf.rows() +
                                      h.Yf.rows());
    Eigen::MatrixXd H(rows, h.cols());
    Eigen::VectorXd b(rows);
    int at = 0;
    auto put = [&](const Eigen::MatrixXd& block, const Eigen::MatrixXd& sig, int from, int count) {
        H.middleRows(at, block.rows()) = block;
        Eigen::VectorXd v(block.rows());
        int vi = 0;
        for (int k = from; k < from + count; ++k) {
            v.segment(vi, sig.rows()) = sig.col(k);
            vi += static_cast<int>(sig.rows());
        }
        b.segment(at, block.rows()) = v;
        at += static_cast<int>(block.rows());
    };
    put(h.Up, test.u, 0, T_ini);
    put(h.Wp, test.w, 0, T_ini);
    put(h.Yp, test.y, 0, T_ini);
    put(h.Uf, test.u, T_ini, N);
    put(h.Wf, test.w, T_ini, N);
    put(h.Yf, test.y, T_ini, N);

    const Eigen::VectorXd g = H.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(b);
    return (H * g - b).norm();
}

}  // namespace amod::deepc
