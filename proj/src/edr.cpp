#include "wavedr/edr.hpp"

#include <algorithm>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "wavedr/error.hpp"

namespace wavedr {

namespace {
constexpr double kMagnitudeTie = 1e-12;
}

void apply_sign_convention(Eigen::Ref<Eigen::VectorXd> v) {
    if (v.size() == 0) {
        return;
    }
    const double top = v.cwiseAbs().maxCoeff();
    Eigen::Index pivot = 0;
    while (std::abs(v(pivot)) < top - kMagnitudeTie) {
        ++pivot;
    }
    if (v(pivot) < 0.0) {
        v = -v;
    }
}

EdrEstimate eig_sym(const LambdaMatrix& m) {
    const Eigen::MatrixXd& a = m.m;
    if (a.rows() != a.cols() || a.rows() == 0) {
        throw InvalidArgument(fmt::format("eig_sym needs a nonempty square matrix, got {}x{}", a.rows(), a.cols()));
    }
    if (!a.allFinite()) {
        throw InvalidArgument("eig_sym input has non-finite entries");
    }
    const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
    const double tol = 1e-10 * std::max(1.0, a.cwiseAbs().maxCoeff());
    if (asym > tol) {
        throw InvalidArgument(fmt::format("eig_sym input is not symmetric (max |m - m^T| = {:.3g})", asym));
    }

    const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    if (solver.info() != Eigen::Success) {
        throw InvalidArgument("symmetric eigen-decomposition did not converge");
    }

    const Eigen::Index d = a.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const auto& values = solver.eigenvalues();
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index l, Eigen::Index r) { return values(l) > values(r); });

    EdrEstimate out;
    out.eigenvalues.resize(d);
    out.eigenvectors.resize(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        const Eigen::Index src = order[static_cast<std::size_t>(j)];
        out.eigenvalues(j) = values(src);
        Eigen::VectorXd v = solver.eigenvectors().col(src).normalized();
        apply_sign_convention(v);
        out.eigenvectors.col(j) = v;
    }
    out.source = m;
    return out;
}

Eigen::MatrixXd edr_directions(const EdrEstimate& e, Eigen::Index n_dirs) {
    const Eigen::Index d = e.eigenvectors.cols();
    if (n_dirs < 1 || n_dirs > d) {
        throw InvalidArgument(fmt::format("number of directions must be in [1, {}], got {}", d, n_dirs));
    }
    return e.eigenvectors.leftCols(n_dirs);
}

double squared_cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) {
        throw InvalidArgument(fmt::format("squared_cosine size mismatch: {} vs {}", a.size(), b.size()));
    }
    const double aa = a.squaredNorm();
    const double bb = b.squaredNorm();
    if (aa == 0.0 || bb == 0.0) {
        throw InvalidArgument("squared_cosine of a zero vector is undefined");
    }
    const double ab = a.dot(b);
    return std::clamp(ab * ab / (aa * bb), 0.0, 1.0);
}

}  // namespace wavedr
