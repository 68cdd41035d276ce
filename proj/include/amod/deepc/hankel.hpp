#pragma once

#include <Eigen/Dense>
#include <string>

#include "amod/common/error.hpp"

namespace amod::deepc {

// Time-ordered multivariate signal; one column per sample.
struct SignalSeries {
    Eigen::MatrixXd samples;  // dim x T_d

    SignalSeries() = default;
    explicit SignalSeries(Eigen::MatrixXd m) : samples(std::move(m)) {
        if (samples.cols() < 1) throw ConfigError("signal series needs at least one sample");
    }

    int dim() const { return static_cast<int>(samples.rows()); }
    int length() const { return static_cast<int>(samples.cols()); }

    static SignalSeries vertical_stack(const SignalSeries& a, const SignalSeries& b) {
        if (a.length() != b.length()) throw ConfigError("stacked series must have equal length");
        Eigen::MatrixXd m(a.dim() + b.dim(), a.length());
        m.topRows(a.dim()) = a.samples;
        m.bottomRows(b.dim()) = b.samples;
        return SignalSeries(std::move(m));
    }
};

// Block-Hankel matrix of depth L: column j stacks samples j..j+L-1.
inline Eigen::MatrixXd build_hankel(const SignalSeries& s, int L) {
    if (L < 1) throw ConfigError("Hankel depth must be >= 1");
    if (s.length() < L)
        throw ConfigError("series length " + std::to_string(s.length()) + " is shorter than Hankel depth " +
                          std::to_string(L));
    const int d = s.dim();
    const int cols = s.length() - L + 1;
    Eigen::MatrixXd h(d * L, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < L; ++i) h.block(i * d, j, d, 1) = s.samples.col(j + i);
    return h;
}

// numerical rank via singular values, threshold max_dim * eps * sigma_max
inline Eigen::Index numerical_rank(const Eigen::MatrixXd& m) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0) return 0;
    const double tol =
        static_cast<double>(std::max(m.rows(), m.cols())) * std::numeric_limits<double>::epsilon() * sv(0);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol) ++rank;
    return rank;
}

// full row rank of the depth-L Hankel matrix
inline bool is_persistently_exciting(const SignalSeries& s, int L) {
    const Eigen::MatrixXd h = build_hankel(s, L);
    return numerical_rank(h) == h.rows();
}

// The six partitioned data matrices acting as the non-parametric model.
// U^p holds the first m*T_ini block rows of the depth-(T_ini+N) input Hankel
// matrix, U^f the last m*N rows; analogously for W (dim q) and Y (dim p).
struct HankelSet {
    Eigen::MatrixXd Up, Uf, Wp, Wf, Yp, Yf;
    int m = 0, q = 0, p = 0;
    int T_ini = 0, N = 0, T_d = 0;

    bool pe_warning = false;   // stacked (u, w) failed the excitation check
    int pe_order_checked = 0;  // T_ini + N + n_assumed
    Eigen::Index pe_rank = 0;
    Eigen::Index pe_required_rank = 0;

    int cols() const { return static_cast<int>(Up.cols()); }
};

// Builds the U/W/Y partitions and runs the persistent-excitation diagnostic on
// col(u, w) at order T_ini + N + n_assumed. A rank deficit only sets
// pe_warning: recorded fleet data may be near-deficient and the controller's
// regularization copes, so assembly must not abort. n_assumed < 0 skips the check.
inline HankelSet assemble_hankel_set(const SignalSeries& u, const SignalSeries& w, const SignalSeries& y, int T_ini,
                                     int N, int n_assumed = -1) {
    if (T_ini < 1 || N < 1) throw ConfigError("T_ini and N must be >= 1");
    if (u.length() != w.length() || u.length() != y.length())
        throw ConfigError("u, w, y series must have the same length");
    const int L = T_ini + N;
    if (u.length() < L)
        throw ConfigError("data length " + std::to_string(u.length()) + " is too short for T_ini + N = " +
                          std::to_string(L));

    HankelSet h;
    h.m = u.dim();
    h.q = w.dim();
    h.p = y.dim();
    h.T_ini = T_ini;
    h.N = N;
    h.T_d = u.length();

    const Eigen::MatrixXd hu = build_hankel(u, L);
    const Eigen::MatrixXd hw = build_hankel(w, L);
    const Eigen::MatrixXd hy = build_hankel(y, L);
    h.Up = hu.topRows(h.m * T_ini);
    h.Uf = hu.bottomRows(h.m * N);
    h.Wp = hw.topRows(h.q * T_ini);
    h.Wf = hw.bottomRows(h.q * N);
    h.Yp = hy.topRows(h.p * T_ini);
    h.Yf = hy.bottomRows(h.p * N);

    if (n_assumed >= 0) {
        h.pe_order_checked = L + n_assumed;
        const SignalSeries uw = SignalSeries::vertical_stack(u, w);
        if (uw.length() >= h.pe_order_checked) {
            const Eigen::MatrixXd huw = build_hankel(uw, h.pe_order_checked);
            h.pe_rank = numerical_rank(huw);
            h.pe_required_rank = huw.rows();
        } else {
            h.pe_rank = 0;
            h.pe_required_rank = static_cast<Eigen::Index>(uw.dim()) * h.pe_order_checked;
        }
        h.pe_warning = h.pe_rank < h.pe_required_rank;
    }
    return h;
}

}  // namespace amod::deepc
