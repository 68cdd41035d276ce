#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "amod/common/error.hpp"
#include "amod/common/rng.hpp"

namespace amod::deepc {

// Ground-truth demand corrupted by unbiased Gaussian noise and clipped at
// zero: w_hat_IJ = max(0, w_IJ + N(0, sigma2)). Returns col(w^O, w^D) per
// horizon step, the row and column sums of the noisy matrix.
inline std::vector<Eigen::VectorXd> perturb_forecast(const std::vector<Eigen::MatrixXd>& w_true, double sigma2,
                                                     Rng& rng) {
    if (sigma2 < 0.0) throw ConfigError("forecast: sigma2 must be >= 0");
    const double stddev = std::sqrt(sigma2);
    std::vector<Eigen::VectorXd> out;
    out.reserve(w_true.size());
    for (const auto& w : w_true) {
        const int R = static_cast<int>(w.rows());
        if (w.cols() != R) throw ConfigError("forecast: demand matrices must be square");
        Eigen::MatrixXd noisy = w;
        if (sigma2 > 0.0) {
            for (int i = 0; i < R; ++i)
                for (int j = 0; j < R; ++j) noisy(i, j) = std::max(0.0, w(i, j) + rng.gaussian(0.0, stddev));
        }
        Eigen::VectorXd v(2 * R);
        v.head(R) = noisy.rowwise().sum();
        v.tail(R) = noisy.colwise().sum();
        out.push_back(std::move(v));
    }
    return out;
}

// SNR in decibels: total per-entry sample variance of the demand history over
// the noise variance.
inline double snr_of(const std::vector<Eigen::MatrixXd>& w_history, double sigma2) {
    if (!(sigma2 > 0.0)) throw ConfigError("snr: sigma2 must be > 0");
    if (w_history.size() < 2) throw ConfigError("snr: history must cover >= 2 time steps");
    const int R = static_cast<int>(w_history.front().rows());
    const double T = static_cast<double>(w_history.size());
    double total_var = 0.0;
    for (int i = 0; i < R; ++i) {
        for (int j = 0; j < R; ++j) {
            double mean = 0.0;
            for (const auto& w : w_history) mean += w(i, j);
            mean /= T;
            double ss = 0.0;
            for (const auto& w : w_history) ss += (w(i, j) - mean) * (w(i, j) - mean);
            total_var += ss / (T - 1.0);
        }
    }
    return 10.0 * std::log10(total_var / sigma2);
}

// sigma2 that realizes a target SNR for the given demand history
inline double sigma2_for_snr(const std::vector<Eigen::MatrixXd>& w_history, double snr_db) {
    const double total_var = snr_of(w_history, 1.0);  // 10*log10(var) when sigma2 = 1
    const double var = std::pow(10.0, total_var / 10.0);
    return var / std::pow(10.0, snr_db / 10.0);
}

}  // namespace amod::deepc
