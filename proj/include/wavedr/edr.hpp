#pragma once

#include <Eigen/Core>

#include "wavedr/estimators.hpp"

namespace wavedr {

/// Spectral decomposition of a LambdaMatrix.
///
/// eigenvalues are descending; column j of eigenvectors pairs with
/// eigenvalue j, has unit norm, and its largest-magnitude component is
/// positive (lowest index wins among equal magnitudes). Closely spaced
/// eigenvalues give unstable directions; nothing here guards against that.
struct EdrEstimate {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;
    LambdaMatrix source;
};

/// Flips v so its largest-magnitude component is positive. Idempotent.
void apply_sign_convention(Eigen::Ref<Eigen::VectorXd> v);

/// Throws InvalidArgument if m is not square or not symmetric to
/// 1e-10 * max(1, max|m_ij|).
EdrEstimate eig_sym(const LambdaMatrix& m);

/// First n_dirs eigenvector columns; throws InvalidArgument unless 1 <= n_dirs <= d.
Eigen::MatrixXd edr_directions(const EdrEstimate& e, Eigen::Index n_dirs);

/// (a.b)^2 / (|a|^2 |b|^2), clamped to [0, 1]. Throws InvalidArgument on a
/// zero vector or mismatched sizes.
double squared_cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace wavedr
