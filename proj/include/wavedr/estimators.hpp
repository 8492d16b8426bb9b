#pragma once

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "wavedr/sample.hpp"
#include "wavedr/wavelet.hpp"

namespace wavedr {

/// How the kernel sums over the sample are evaluated.
enum class Evaluation {
    /// cell_bucket for Haar; direct up to kDirectLimit observations, coefficient above.
    automatic,
    /// Kernel evaluated against every observation, O(n) per point.
    direct,
    /// Haar only: observations grouped by dyadic cell; bit-identical to direct.
    cell_bucket,
    /// Scaling coefficients accumulated once, O(S) per point. Agrees with
    /// direct up to rounding.
    coefficient,
};

inline constexpr Eigen::Index kDirectLimit = 20000;

/// Knobs of the linear wavelet estimators.
///
/// The consistency theory asks for 2^-j_n ~ n^-c1 and b_n ~ n^-c2 with
/// 0 < c2 < 1/10 and 1/8 + c2/4 < c1 < 1/4 - c2. Those rates are guidance
/// only; any j_n >= 0 and b_n > 0 is accepted.
struct EstimatorConfig {
    int resolution = 0;     // j_n
    double floor = 0.01;    // b_n
    std::shared_ptr<const FatherWavelet> wavelet;
    Evaluation evaluation = Evaluation::automatic;
    /// Center X by its sample mean and whiten by the inverse square root of
    /// its sample covariance before estimating.
    bool whiten = false;

    /// Throws InvalidArgument on j_n < 0, b_n <= 0 or a missing wavelet.
    void validate() const;

    static EstimatorConfig make(WaveletFamily family, int resolution = 0, double floor = 0.01);
};

/// Estimate of Cov(E(X | Y)); symmetric positive semidefinite d x d.
struct LambdaMatrix {
    Eigen::MatrixXd m;

    [[nodiscard]] Eigen::Index dim() const noexcept { return m.rows(); }
    [[nodiscard]] bool is_symmetric(double tol = 1e-10) const;
    [[nodiscard]] double min_eigenvalue() const;
};

/// Linear wavelet estimators of the density f of Y, of g_j(y) = E(X_j | Y=y) f(y),
/// and of the truncated ratio R_j = g_j / max(f, b_n).
///
/// Observations are held in a canonical order (ascending Y, ties by the X
/// row), so every result is invariant to the order of the input rows bit for
/// bit.
class LinearWaveletEstimator {
public:
    LinearWaveletEstimator(const Sample& sample, EstimatorConfig cfg);

    [[nodiscard]] Eigen::Index n() const noexcept { return y_.size(); }
    [[nodiscard]] Eigen::Index d() const noexcept { return x_.cols(); }
    [[nodiscard]] const EstimatorConfig& config() const noexcept { return cfg_; }
    /// Evaluation strategy actually used after resolving `automatic`.
    [[nodiscard]] Evaluation evaluation() const noexcept { return mode_; }

    /// f_n(y) = (2^j_n / n) sum_i K(2^j_n y, 2^j_n Y_i).
    [[nodiscard]] double density(double y) const;
    /// g_{j,n}(y) = (1/n) sum_i X_ij 2^j_n K(2^j_n Y_i, 2^j_n y); j is zero-based.
    [[nodiscard]] double g(Eigen::Index j, double y) const;
    /// R_{b_n}(y), all d components.
    [[nodiscard]] Eigen::VectorXd r_hat(double y) const;
    /// R_{b_n}(Y_i) for every observation; row i pairs with input row i.
    [[nodiscard]] Eigen::MatrixXd r_hat_at_observations() const;
    /// (1/n) sum_i R(Y_i) R(Y_i)^T.
    [[nodiscard]] LambdaMatrix lambda() const;

private:
    struct Accumulated {
        double density_sum = 0.0;
        Eigen::VectorXd g_sum;
    };

    [[nodiscard]] Accumulated accumulate(double y, bool with_g) const;
    [[nodiscard]] Eigen::VectorXd ratio(const Accumulated& acc) const;

    EstimatorConfig cfg_;
    Evaluation mode_;
    double scale_;  // 2^j_n
    Eigen::VectorXd y_;
    Eigen::MatrixXd x_;
    std::vector<Eigen::Index> order_;  // canonical position -> input row
    std::vector<double> t_;            // 2^j_n * Y in canonical order

    // cell_bucket: occupied dyadic cells (ascending) with their counts and
    // covariate sums, accumulated in canonical order.
    std::vector<long> cells_;
    std::vector<double> cell_counts_;
    Eigen::MatrixXd cell_sums_;
    // coefficient: unnormalized scaling coefficients, index k - k_min_.
    long k_min_ = 0;
    std::vector<double> alpha_;
    Eigen::MatrixXd delta_;
};

double density_estimate(std::span<const double> ys, const EstimatorConfig& cfg, double y);

/// max(f, b_n).
double truncated_density(double f, double floor);

/// j is zero-based; throws InvalidArgument if j >= d.
double g_estimate(const Sample& sample, Eigen::Index j, const EstimatorConfig& cfg, double y);

Eigen::VectorXd r_hat(const Sample& sample, const EstimatorConfig& cfg, double y);

LambdaMatrix lambda_hat(const Sample& sample, const EstimatorConfig& cfg);

/// Affine map X -> (X - mean) * W with W = S^-1/2 for the sample covariance S.
struct Whitening {
    Eigen::RowVectorXd mean;
    Eigen::MatrixXd transform;  // S^-1/2, symmetric
};

/// Throws InvalidArgument if the sample covariance is singular.
Whitening fit_whitening(const Sample& sample);
Sample apply_whitening(const Sample& sample, const Whitening& w);

}  // namespace wavedr
