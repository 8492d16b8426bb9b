#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "wavedr/edr.hpp"
#include "wavedr/estimators.hpp"
#include "wavedr/simulation.hpp"

namespace wavedr {

/// Plug-in estimate of the limiting variance of tr(A^T sqrt(n)(Lambda_n - Lambda)):
/// the sample variance (divisor n - 1) of
///   U_i = sum_{k,l} (a_kl / 2) (X_il R_k(Y_i) + X_ik R_l(Y_i)),
/// with R replaced by the truncated wavelet ratio estimate. Only the
/// symmetric part of A enters. Needs n >= 2 and cfg.whiten off.
double sigma2_A_plugin(const Sample& sample, const EstimatorConfig& cfg, const Eigen::MatrixXd& a);

struct VarianceReport {
    double sigma2_A = 0.0;       // mean of the plug-in over the replications
    double mc_variance = 0.0;    // n * sample variance of tr(A^T Lambda_n)
    double relative_gap = 0.0;   // |sigma2_A - mc_variance| / max(sigma2_A, eps)
    double reference_trace = 0.0;  // tr(A^T Lambda) from one large sample
    double mean_trace = 0.0;       // mean of tr(A^T Lambda_n) over replications
    int reps = 0;
};

struct MonteCarloOptions {
    /// Size of the single sample that stands in for the population Lambda.
    Eigen::Index reference_n = 1'000'000;
    unsigned threads = 1;
};

/// Empirical check of the trace CLT: replication r uses
/// generate(model, n, stream_seed(seed, r)); the reference sample uses a
/// separate stream. Deterministic in seed for any thread count.
VarianceReport mc_trace_variance(const ModelSpec& model, const Eigen::MatrixXd& a, Eigen::Index n, int reps,
                                 std::uint64_t seed, const EstimatorConfig& cfg, const MonteCarloOptions& opts = {});

struct DirectionCovariance {
    Eigen::MatrixXd sigma_j;  // d x d, symmetric PSD
};

inline constexpr double kMinEigenGap = 1e-8;

/// Plug-in estimate of the limiting covariance of sqrt(n)(beta_j_hat - beta_j):
/// the empirical covariance (divisor n - 1) of the per-observation vectors
///   W_jk = (sum_{r != j} b_rk / (l_j - l_r)) * sum_{p,q} (b_jp b_jq / 2)(X_q R_p(Y) + X_p R_q(Y))
/// with eigenpairs (l, b) taken from `e` and R from the wavelet estimator.
/// j is zero-based. Throws EigenGapTooSmall if |l_j - l_r| <= 1e-8 for some r != j.
DirectionCovariance sigma_j_plugin(const Sample& sample, const EstimatorConfig& cfg, const EdrEstimate& e,
                                   Eigen::Index j);

struct DirectionCovarianceReport {
    Eigen::MatrixXd plugin_mean;      // mean over replications of sigma_j / n
    Eigen::MatrixXd empirical;        // covariance of the unit, sign-aligned beta_j_hat
    Eigen::VectorXd diagonal_ratio;   // plugin_mean(k, k) / empirical(k, k)
    int reps = 0;
};

/// Replication oracle for sigma_j_plugin: the wavelet estimate of beta_j over
/// `reps` samples of size n, aligned in sign to the true beta_j.
DirectionCovarianceReport mc_direction_covariance(const ModelSpec& model, Eigen::Index j, Eigen::Index n, int reps,
                                                  std::uint64_t seed, const EstimatorConfig& cfg,
                                                  unsigned threads = 1);

}  // namespace wavedr
