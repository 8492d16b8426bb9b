#pragma once

#include <vector>

#include "wavedr/estimators.hpp"
#include "wavedr/sample.hpp"

namespace wavedr {

struct SirConfig {
    int slices = 5;  // H
};

/// Equal-count slicing of the observations sorted by Y (ties by input row).
/// Slice h holds n / H observations, plus one for the first n % H slices.
/// Returns the input row indices of each slice.
std::vector<std::vector<Eigen::Index>> equal_count_slices(const Eigen::VectorXd& y, int slices);

/// Sliced inverse regression: sum_h (n_h / n) m_h m_h^T where m_h is the
/// slice mean of X centered by the overall sample mean.
/// Throws InvalidArgument unless 2 <= H <= n.
LambdaMatrix sir_lambda(const Sample& sample, const SirConfig& cfg);

/// 0.9375 (1 - x^2)^2 on [-1, 1], zero elsewhere.
constexpr double quadratic_kernel(double x) noexcept {
    if (x < -1.0 || x > 1.0) {
        return 0.0;
    }
    const double u = 1.0 - x * x;
    return 0.9375 * u * u;
}

struct KernelConfig {
    double bandwidth = 0.0;  // h
    double floor = 0.01;     // b_n

    void validate() const;

    /// h = n^-0.2 with b_n = 0.01.
    static KernelConfig for_sample_size(Eigen::Index n);
};

/// Kernel counterpart of lambda_hat: density and regression functions are
/// Nadaraya-Watson style estimates with the quadratic kernel, truncated by
/// the same floor b_n, and X is used uncentered.
LambdaMatrix kernel_lambda(const Sample& sample, const KernelConfig& cfg);

}  // namespace wavedr
