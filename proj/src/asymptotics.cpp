#include "wavedr/asymptotics.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "wavedr/error.hpp"

namespace wavedr {

namespace {

constexpr std::uint64_t kReferenceStream = 0xFFFF'FFFF'FFFF'FFFFULL;

void require_plain(const EstimatorConfig& cfg) {
    if (cfg.whiten) {
        throw InvalidArgument("plug-in variances are defined for raw X; disable whitening");
    }
}

double sample_variance(const Eigen::VectorXd& v) {
    const double m = v.mean();
    return (v.array() - m).square().sum() / static_cast<double>(v.size() - 1);
}

}  // namespace

double sigma2_A_plugin(const Sample& sample, const EstimatorConfig& cfg, const Eigen::MatrixXd& a) {
    require_plain(cfg);
    sample.validate(2);
    const Eigen::Index d = sample.d();
    if (a.rows() != d || a.cols() != d) {
        throw InvalidArgument(fmt::format("A must be {}x{}, got {}x{}", d, d, a.rows(), a.cols()));
    }
    if (!a.allFinite()) {
        throw InvalidArgument("A has non-finite entries");
    }
    const Eigen::MatrixXd a_sym = 0.5 * (a + a.transpose());
    const Eigen::MatrixXd r = LinearWaveletEstimator(sample, cfg).r_hat_at_observations();

    // sum_{k,l} (a_kl / 2)(X_l R_k + X_k R_l) = X^T A_sym R
    Eigen::VectorXd u(sample.n());
    for (Eigen::Index i = 0; i < sample.n(); ++i) {
        u(i) = sample.x.row(i).dot(a_sym * r.row(i).transpose());
    }
    return sample_variance(u);
}

VarianceReport mc_trace_variance(const ModelSpec& model, const Eigen::MatrixXd& a, Eigen::Index n, int reps,
                                 std::uint64_t seed, const EstimatorConfig& cfg, const MonteCarloOptions& opts) {
    require_plain(cfg);
    cfg.validate();
    if (reps < 2) {
        throw InvalidArgument(fmt::format("need at least 2 replications, got {}", reps));
    }
    if (n < 2) {
        throw InvalidArgument(fmt::format("sample size must be at least 2, got {}", n));
    }
    if (a.rows() != model.d || a.cols() != model.d) {
        throw InvalidArgument(fmt::format("A must be {}x{}", model.d, model.d));
    }

    VarianceReport report;
    report.reps = reps;
    if (opts.reference_n > 0) {
        const Sample big = generate(model, opts.reference_n, stream_seed(seed, kReferenceStream));
        report.reference_trace = (a.transpose() * lambda_hat(big, cfg).m).trace();
    }

    Eigen::VectorXd traces(reps);
    Eigen::VectorXd plugins(reps);
    parallel_for(static_cast<std::size_t>(reps), opts.threads, [&](std::size_t r) {
        const Sample s = generate(model, n, stream_seed(seed, r));
        const auto idx = static_cast<Eigen::Index>(r);
        traces(idx) = (a.transpose() * lambda_hat(s, cfg).m).trace();
        plugins(idx) = sigma2_A_plugin(s, cfg, a);
    });

    const double root_n = std::sqrt(static_cast<double>(n));
    const Eigen::VectorXd centered = root_n * (traces.array() - report.reference_trace).matrix();
    report.mc_variance = sample_variance(centered);
    report.mean_trace = traces.mean();
    report.sigma2_A = plugins.mean();
    report.relative_gap = std::abs(report.sigma2_A - report.mc_variance) /
                          std::max(report.sigma2_A, std::numeric_limits<double>::epsilon());
    return report;
}

DirectionCovariance sigma_j_plugin(const Sample& sample, const EstimatorConfig& cfg, const EdrEstimate& e,
                                   Eigen::Index j) {
    require_plain(cfg);
    sample.validate(2);
    const Eigen::Index d = sample.d();
    if (e.eigenvalues.size() != d || e.eigenvectors.rows() != d || e.eigenvectors.cols() != d) {
        throw InvalidArgument("eigen-decomposition does not match the sample dimension");
    }
    if (j < 0 || j >= d) {
        throw InvalidArgument(fmt::format("direction index {} out of range [0, {})", j, d));
    }

    Eigen::VectorXd prefactor = Eigen::VectorXd::Zero(d);
    for (Eigen::Index r = 0; r < d; ++r) {
        if (r == j) {
            continue;
        }
        const double gap = e.eigenvalues(j) - e.eigenvalues(r);
        if (std::abs(gap) <= kMinEigenGap) {
            throw EigenGapTooSmall(
                fmt::format("eigenvalues {} and {} differ by {:.3g}, below {:.0e}", j, r, gap, kMinEigenGap), gap);
        }
        prefactor += e.eigenvectors.col(r) / gap;
    }

    const Eigen::VectorXd beta = e.eigenvectors.col(j);
    const Eigen::MatrixXd r_hat = LinearWaveletEstimator(sample, cfg).r_hat_at_observations();
    const Eigen::Index n = sample.n();

    // sum_{p,q} (b_p b_q / 2)(X_q R_p + X_p R_q) = (b.X)(b.R)
    Eigen::MatrixXd w(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double s = sample.x.row(i).dot(beta) * r_hat.row(i).dot(beta);
        w.row(i) = s * prefactor.transpose();
    }
    const Eigen::MatrixXd centered = w.rowwise() - w.colwise().mean();
    Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
    cov = 0.5 * (cov + cov.transpose()).eval();
    return DirectionCovariance{cov};
}

DirectionCovarianceReport mc_direction_covariance(const ModelSpec& model, Eigen::Index j, Eigen::Index n, int reps,
                                                  std::uint64_t seed, const EstimatorConfig& cfg, unsigned threads) {
    require_plain(cfg);
    cfg.validate();
    if (reps < 2) {
        throw InvalidArgument(fmt::format("need at least 2 replications, got {}", reps));
    }
    if (j < 0 || j >= model.n_dirs) {
        throw InvalidArgument(fmt::format("direction index {} out of range [0, {})", j, model.n_dirs));
    }
    const Eigen::Index d = model.d;
    const Eigen::VectorXd truth = model.true_betas.col(j);

    std::vector<Eigen::VectorXd> betas(static_cast<std::size_t>(reps));
    std::vector<Eigen::MatrixXd> plugins(static_cast<std::size_t>(reps));
    parallel_for(static_cast<std::size_t>(reps), threads, [&](std::size_t r) {
        const Sample s = generate(model, n, stream_seed(seed, r));
        const EdrEstimate e = eig_sym(lambda_hat(s, cfg));
        Eigen::VectorXd b = e.eigenvectors.col(j);
        if (b.dot(truth) < 0.0) {
            b = -b;
        }
        betas[r] = b;
        plugins[r] = sigma_j_plugin(s, cfg, e, j).sigma_j / static_cast<double>(n);
    });

    DirectionCovarianceReport out;
    out.reps = reps;
    out.plugin_mean = Eigen::MatrixXd::Zero(d, d);
    Eigen::MatrixXd stacked(reps, d);
    for (int r = 0; r < reps; ++r) {
        out.plugin_mean += plugins[static_cast<std::size_t>(r)];
        stacked.row(r) = betas[static_cast<std::size_t>(r)].transpose();
    }
    out.plugin_mean /= static_cast<double>(reps);
    const Eigen::MatrixXd centered = stacked.rowwise() - stacked.colwise().mean();
    out.empirical = centered.transpose() * centered / static_cast<double>(reps - 1);
    out.diagonal_ratio = out.plugin_mean.diagonal().cwiseQuotient(out.empirical.diagonal());
    return out;
}

}  // namespace wavedr
