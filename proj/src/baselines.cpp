#include "wavedr/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "wavedr/error.hpp"

namespace wavedr {

std::vector<std::vector<Eigen::Index>> equal_count_slices(const Eigen::VectorXd& y, int slices) {
    const Eigen::Index n = y.size();
    if (slices < 2 || slices > n) {
        throw InvalidArgument(fmt::format("number of slices H must be in [2, n={}], got {}", n, slices));
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return y(a) < y(b); });

    const auto h_count = static_cast<Eigen::Index>(slices);
    const Eigen::Index base = n / h_count;
    const Eigen::Index extra = n % h_count;
    std::vector<std::vector<Eigen::Index>> out(static_cast<std::size_t>(slices));
    auto it = order.begin();
    for (Eigen::Index h = 0; h < h_count; ++h) {
        const Eigen::Index size = base + (h < extra ? 1 : 0);
        out[static_cast<std::size_t>(h)].assign(it, it + size);
        it += size;
    }
    return out;
}

LambdaMatrix sir_lambda(const Sample& sample, const SirConfig& cfg) {
    sample.validate();
    const auto slices = equal_count_slices(sample.y, cfg.slices);
    const Eigen::Index d = sample.d();
    const auto n = static_cast<double>(sample.n());
    const Eigen::RowVectorXd mean = sample.x.colwise().mean();

    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(d, d);
    for (const auto& slice : slices) {
        Eigen::VectorXd m = Eigen::VectorXd::Zero(d);
        for (Eigen::Index i : slice) {
            m += (sample.x.row(i) - mean).transpose();
        }
        const auto count = static_cast<double>(slice.size());
        m /= count;
        sum.noalias() += (count / n) * (m * m.transpose());
    }
    return LambdaMatrix{sum};
}

void KernelConfig::validate() const {
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
        throw InvalidArgument(fmt::format("bandwidth h must be positive, got {}", bandwidth));
    }
    if (!(floor > 0.0) || !std::isfinite(floor)) {
        throw InvalidArgument(fmt::format("truncation floor b_n must be positive, got {}", floor));
    }
}

KernelConfig KernelConfig::for_sample_size(Eigen::Index n) {
    return KernelConfig{std::pow(static_cast<double>(n), -0.2), 0.01};
}

LambdaMatrix kernel_lambda(const Sample& sample, const KernelConfig& cfg) {
    sample.validate();
    cfg.validate();
    const Eigen::Index n = sample.n();
    const Eigen::Index d = sample.d();
    const double h = cfg.bandwidth;

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return sample.y(a) < sample.y(b); });
    std::vector<double> ys(order.size());
    std::transform(order.begin(), order.end(), ys.begin(), [&](Eigen::Index i) { return sample.y(i); });

    const double norm = 1.0 / (static_cast<double>(n) * h);
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd g(d);
    for (std::size_t a = 0; a < ys.size(); ++a) {
        const double y = ys[a];
        const auto lo = std::lower_bound(ys.begin(), ys.end(), y - h);
        const auto hi = std::upper_bound(ys.begin(), ys.end(), y + h);
        double f = 0.0;
        g.setZero();
        for (auto it = lo; it != hi; ++it) {
            const auto b = static_cast<std::size_t>(it - ys.begin());
            const double k = quadratic_kernel((y - *it) / h);
            f += k;
            g += k * sample.x.row(order[b]).transpose();
        }
        const double denom = std::max(norm * f, cfg.floor);
        const Eigen::VectorXd r = (norm * g) / denom;
        sum.noalias() += r * r.transpose();
    }
    return LambdaMatrix{sum / static_cast<double>(n)};
}

}  // namespace wavedr
