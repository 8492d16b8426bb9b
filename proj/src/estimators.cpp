#include "wavedr/estimators.hpp"

#include <algorithm>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "wavedr/error.hpp"

namespace wavedr {

void EstimatorConfig::validate() const {
    if (resolution < 0 || resolution > 30) {
        throw InvalidArgument(fmt::format("resolution level j_n must be in [0, 30], got {}", resolution));
    }
    if (!(floor > 0.0) || !std::isfinite(floor)) {
        throw InvalidArgument(fmt::format("truncation floor b_n must be positive, got {}", floor));
    }
    if (!wavelet) {
        throw InvalidArgument("estimator config has no wavelet");
    }
    if (evaluation == Evaluation::cell_bucket && wavelet->family() != WaveletFamily::haar) {
        throw InvalidArgument("cell_bucket evaluation requires the Haar wavelet");
    }
}

EstimatorConfig EstimatorConfig::make(WaveletFamily family, int resolution, double floor) {
    EstimatorConfig cfg;
    cfg.resolution = resolution;
    cfg.floor = floor;
    cfg.wavelet = std::make_shared<const FatherWavelet>(build_wavelet(family));
    return cfg;
}

bool LambdaMatrix::is_symmetric(double tol) const {
    return m.rows() == m.cols() && (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

double LambdaMatrix::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

LinearWaveletEstimator::LinearWaveletEstimator(const Sample& input, EstimatorConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    input.validate();

    const Sample whitened = cfg_.whiten ? apply_whitening(input, fit_whitening(input)) : Sample{};
    const Sample& sample = cfg_.whiten ? whitened : input;

    const Eigen::Index n = sample.n();
    const Eigen::Index d = sample.d();
    scale_ = std::ldexp(1.0, cfg_.resolution);

    order_.resize(static_cast<std::size_t>(n));
    std::iota(order_.begin(), order_.end(), Eigen::Index{0});
    std::sort(order_.begin(), order_.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (sample.y(a) != sample.y(b)) {
            return sample.y(a) < sample.y(b);
        }
        for (Eigen::Index j = 0; j < d; ++j) {
            if (sample.x(a, j) != sample.x(b, j)) {
                return sample.x(a, j) < sample.x(b, j);
            }
        }
        return a < b;
    });

    y_.resize(n);
    x_.resize(n, d);
    t_.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index src = order_[static_cast<std::size_t>(i)];
        y_(i) = sample.y(src);
        x_.row(i) = sample.x.row(src);
        t_[static_cast<std::size_t>(i)] = scale_ * y_(i);
    }

    const FatherWavelet& w = *cfg_.wavelet;
    mode_ = cfg_.evaluation;
    if (mode_ == Evaluation::automatic) {
        if (w.family() == WaveletFamily::haar) {
            mode_ = Evaluation::cell_bucket;
        } else {
            mode_ = n <= kDirectLimit ? Evaluation::direct : Evaluation::coefficient;
        }
    }

    if (mode_ == Evaluation::cell_bucket) {
        std::vector<Eigen::Index> starts;
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto cell = static_cast<long>(std::floor(t_[static_cast<std::size_t>(i)]));
            if (cells_.empty() || cells_.back() != cell) {
                cells_.push_back(cell);
                starts.push_back(i);
            }
        }
        starts.push_back(n);
        cell_counts_.resize(cells_.size());
        cell_sums_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cells_.size()), d);
        for (std::size_t c = 0; c < cells_.size(); ++c) {
            cell_counts_[c] = static_cast<double>(starts[c + 1] - starts[c]);
            for (Eigen::Index i = starts[c]; i < starts[c + 1]; ++i) {
                for (Eigen::Index j = 0; j < d; ++j) {
                    cell_sums_(static_cast<Eigen::Index>(c), j) += x_(i, j);
                }
            }
        }
    } else if (mode_ == Evaluation::coefficient) {
        k_min_ = static_cast<long>(std::floor(t_.front())) - w.support() + 1;
        const long k_max = static_cast<long>(std::floor(t_.back()));
        const auto count = static_cast<std::size_t>(k_max - k_min_ + 1);
        alpha_.assign(count, 0.0);
        delta_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(count), d);
        for (Eigen::Index i = 0; i < n; ++i) {
            w.for_each_translate(t_[static_cast<std::size_t>(i)], [&](long k, double phi) {
                const auto slot = k - k_min_;
                alpha_[static_cast<std::size_t>(slot)] += phi;
                delta_.row(static_cast<Eigen::Index>(slot)) += phi * x_.row(i);
            });
        }
    }
}

LinearWaveletEstimator::Accumulated LinearWaveletEstimator::accumulate(double y, bool with_g) const {
    const FatherWavelet& w = *cfg_.wavelet;
    const double t = scale_ * y;
    const Eigen::Index d = x_.cols();
    Accumulated acc;
    acc.g_sum = Eigen::VectorXd::Zero(with_g ? d : 0);

    switch (mode_) {
        case Evaluation::cell_bucket: {
            const auto cell = static_cast<long>(std::floor(t));
            const auto it = std::lower_bound(cells_.begin(), cells_.end(), cell);
            if (it != cells_.end() && *it == cell) {
                const auto c = static_cast<Eigen::Index>(it - cells_.begin());
                acc.density_sum = cell_counts_[static_cast<std::size_t>(c)];
                if (with_g) {
                    acc.g_sum = cell_sums_.row(c).transpose();
                }
            }
            break;
        }
        case Evaluation::coefficient: {
            const long count = static_cast<long>(alpha_.size());
            w.for_each_translate(t, [&](long k, double phi) {
                const long slot = k - k_min_;
                if (slot < 0 || slot >= count) {
                    return;
                }
                acc.density_sum += alpha_[static_cast<std::size_t>(slot)] * phi;
                if (with_g) {
                    for (Eigen::Index j = 0; j < d; ++j) {
                        acc.g_sum(j) += delta_(slot, j) * phi;
                    }
                }
            });
            break;
        }
        case Evaluation::direct:
        case Evaluation::automatic: {
            for (Eigen::Index i = 0; i < y_.size(); ++i) {
                const double k = w.kernel(t_[static_cast<std::size_t>(i)], t);
                acc.density_sum += k;
                if (with_g) {
                    for (Eigen::Index j = 0; j < d; ++j) {
                        acc.g_sum(j) += x_(i, j) * k;
                    }
                }
            }
            break;
        }
    }
    return acc;
}

Eigen::VectorXd LinearWaveletEstimator::ratio(const Accumulated& acc) const {
    const auto n = static_cast<double>(y_.size());
    const double f = truncated_density(scale_ * acc.density_sum / n, cfg_.floor);
    Eigen::VectorXd r(acc.g_sum.size());
    for (Eigen::Index j = 0; j < r.size(); ++j) {
        r(j) = (scale_ * acc.g_sum(j) / n) / f;
    }
    return r;
}

double LinearWaveletEstimator::density(double y) const {
    return scale_ * accumulate(y, false).density_sum / static_cast<double>(y_.size());
}

double LinearWaveletEstimator::g(Eigen::Index j, double y) const {
    if (j < 0 || j >= x_.cols()) {
        throw InvalidArgument(fmt::format("covariate index {} out of range [0, {})", j, x_.cols()));
    }
    return scale_ * accumulate(y, true).g_sum(j) / static_cast<double>(y_.size());
}

Eigen::VectorXd LinearWaveletEstimator::r_hat(double y) const { return ratio(accumulate(y, true)); }

Eigen::MatrixXd LinearWaveletEstimator::r_hat_at_observations() const {
    Eigen::MatrixXd out(y_.size(), x_.cols());
    for (Eigen::Index i = 0; i < y_.size(); ++i) {
        out.row(order_[static_cast<std::size_t>(i)]) = ratio(accumulate(y_(i), true)).transpose();
    }
    return out;
}

LambdaMatrix LinearWaveletEstimator::lambda() const {
    const Eigen::Index d = x_.cols();
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index i = 0; i < y_.size(); ++i) {
        const Eigen::VectorXd r = ratio(accumulate(y_(i), true));
        sum.noalias() += r * r.transpose();
    }
    return LambdaMatrix{sum / static_cast<double>(y_.size())};
}

double density_estimate(std::span<const double> ys, const EstimatorConfig& cfg, double y) {
    Sample s;
    s.y = Eigen::Map<const Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
    s.x = Eigen::MatrixXd::Zero(s.y.size(), 1);
    return LinearWaveletEstimator(s, cfg).density(y);
}

double truncated_density(double f, double floor) { return std::max(f, floor); }

double g_estimate(const Sample& sample, Eigen::Index j, const EstimatorConfig& cfg, double y) {
    if (j < 0 || j >= sample.d()) {
        throw InvalidArgument(fmt::format("covariate index {} out of range [0, {})", j, sample.d()));
    }
    return LinearWaveletEstimator(sample, cfg).g(j, y);
}

Eigen::VectorXd r_hat(const Sample& sample, const EstimatorConfig& cfg, double y) {
    return LinearWaveletEstimator(sample, cfg).r_hat(y);
}

LambdaMatrix lambda_hat(const Sample& sample, const EstimatorConfig& cfg) {
    return LinearWaveletEstimator(sample, cfg).lambda();
}

Whitening fit_whitening(const Sample& sample) {
    sample.validate(2);
    Whitening w;
    w.mean = sample.x.colwise().mean();
    const Eigen::MatrixXd centered = sample.x.rowwise() - w.mean;
    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(sample.n() - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.eigenvalues().minCoeff() <= 1e-12 * std::max(1.0, solver.eigenvalues().maxCoeff())) {
        throw InvalidArgument("sample covariance of X is singular; cannot whiten");
    }
    w.transform = solver.operatorInverseSqrt();
    return w;
}

Sample apply_whitening(const Sample& sample, const Whitening& w) {
    Sample out;
    out.y = sample.y;
    out.x = (sample.x.rowwise() - w.mean) * w.transform;
    return out;
}

}  // namespace wavedr
