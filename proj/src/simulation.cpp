#include "wavedr/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <ostream>
#include <random>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "wavedr/baselines.hpp"
#include "wavedr/edr.hpp"
#include "wavedr/error.hpp"

namespace wavedr {

namespace {

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return s / static_cast<double>(v.size());
}

// Divisor reps - 1; a single replication has SD 0.
double sd_of(const std::vector<double>& v) {
    if (v.size() < 2) {
        return 0.0;
    }
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) {
        ss += (x - m) * (x - m);
    }
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// Binds a method and its settings once so replications reuse the wavelet table.
class LambdaEstimator {
public:
    LambdaEstimator(Method method, const MethodSettings& settings) : method_(method), settings_(settings) {
        settings_.validate(method);
        if (method == Method::wavelet_haar || method == Method::wavelet_daubechies) {
            const auto family =
                method == Method::wavelet_haar ? WaveletFamily::haar : WaveletFamily::daubechies2;
            wavelet_cfg_.resolution = settings.resolution;
            wavelet_cfg_.floor = settings.floor;
            wavelet_cfg_.wavelet = std::make_shared<const FatherWavelet>(build_wavelet(family, settings.cascade_depth));
        }
    }

    [[nodiscard]] LambdaMatrix operator()(const Sample& sample) const {
        switch (method_) {
            case Method::sir:
                return sir_lambda(sample, SirConfig{settings_.slices});
            case Method::kernel: {
                KernelConfig kc = KernelConfig::for_sample_size(sample.n());
                if (settings_.bandwidth) {
                    kc.bandwidth = *settings_.bandwidth;
                }
                kc.floor = settings_.floor;
                return kernel_lambda(sample, kc);
            }
            case Method::wavelet_haar:
            case Method::wavelet_daubechies:
                return lambda_hat(sample, wavelet_cfg_);
        }
        throw InvalidArgument("unknown method");
    }

private:
    Method method_;
    MethodSettings settings_;
    EstimatorConfig wavelet_cfg_;
};

}  // namespace

ModelId parse_model(std::string_view tag) {
    const auto t = lowercase(tag);
    if (t == "1" || t == "m1") {
        return ModelId::m1;
    }
    if (t == "2" || t == "m2") {
        return ModelId::m2;
    }
    if (t == "3" || t == "m3") {
        return ModelId::m3;
    }
    throw InvalidArgument(fmt::format("unknown model '{}' (expected 1, 2 or 3)", tag));
}

std::string_view to_string(ModelId id) {
    switch (id) {
        case ModelId::m1:
            return "M1";
        case ModelId::m2:
            return "M2";
        case ModelId::m3:
            return "M3";
    }
    return "?";
}

ModelSpec ModelSpec::make(ModelId id) {
    ModelSpec spec;
    spec.id = id;
    spec.d = 5;
    switch (id) {
        case ModelId::m1:
            spec.n_dirs = 1;
            spec.true_betas = Eigen::MatrixXd::Zero(5, 1);
            spec.true_betas.col(0) << 1, 1, 1, 1, 0;
            break;
        case ModelId::m2:
            spec.n_dirs = 2;
            spec.true_betas = Eigen::MatrixXd::Zero(5, 2);
            spec.true_betas.col(0) << 1, 0, 0, 0, 0;
            spec.true_betas.col(1) << 1, 1, 0, 0, 0;
            break;
        case ModelId::m3:
            spec.n_dirs = 2;
            spec.true_betas = Eigen::MatrixXd::Zero(5, 2);
            spec.true_betas.col(0) << 1, 0, 0, 0, 0;
            spec.true_betas.col(1) << 0, 1, 0, 0, 0;
            break;
    }
    return spec;
}

double ModelSpec::response(const Eigen::Ref<const Eigen::RowVectorXd>& x, double noise) const {
    switch (id) {
        case ModelId::m1:
            return x(0) + x(1) + x(2) + x(3) + noise;
        case ModelId::m2:
            return x(0) * (x(0) + x(1) + 1.0) + noise;
        case ModelId::m3: {
            const double shifted = x(1) + 1.5;
            return x(0) / (0.5 + shifted * shifted) + noise;
        }
    }
    return noise;
}

Method parse_method(std::string_view tag) {
    const auto t = lowercase(tag);
    if (t == "sir") {
        return Method::sir;
    }
    if (t == "kernel") {
        return Method::kernel;
    }
    if (t == "wavelet-h" || t == "wavelet_h" || t == "haar") {
        return Method::wavelet_haar;
    }
    if (t == "wavelet-d" || t == "wavelet_d" || t == "daubechies") {
        return Method::wavelet_daubechies;
    }
    throw InvalidArgument(fmt::format("unknown method '{}' (expected sir, kernel, wavelet-h, wavelet-d)", tag));
}

std::string_view to_string(Method m) {
    switch (m) {
        case Method::sir:
            return "SIR";
        case Method::kernel:
            return "Kernel";
        case Method::wavelet_haar:
            return "WaveletH";
        case Method::wavelet_daubechies:
            return "WaveletD";
    }
    return "?";
}

void MethodSettings::validate(Method method) const {
    if (method == Method::sir && slices < 2) {
        throw InvalidArgument(fmt::format("number of slices H must be at least 2, got {}", slices));
    }
    if (bandwidth && (!(*bandwidth > 0.0) || !std::isfinite(*bandwidth))) {
        throw InvalidArgument(fmt::format("bandwidth must be positive, got {}", *bandwidth));
    }
    if (!(floor > 0.0) || !std::isfinite(floor)) {
        throw InvalidArgument(fmt::format("truncation floor b_n must be positive, got {}", floor));
    }
    if (resolution < 0 || resolution > 30) {
        throw InvalidArgument(fmt::format("resolution level j_n must be in [0, 30], got {}", resolution));
    }
    if (cascade_depth < 1 || cascade_depth > 24) {
        throw InvalidArgument(fmt::format("cascade depth must be in [1, 24], got {}", cascade_depth));
    }
}

LambdaMatrix estimate_lambda(const Sample& sample, Method method, const MethodSettings& settings) {
    return LambdaEstimator(method, settings)(sample);
}

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(master ^ splitmix64(index));
}

Sample generate(const ModelSpec& model, Eigen::Index n, std::uint64_t seed) {
    if (n < 1) {
        throw InvalidArgument(fmt::format("sample size must be positive, got {}", n));
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Sample s;
    s.x.resize(n, model.d);
    s.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < model.d; ++j) {
            s.x(i, j) = normal(rng);
        }
        const double noise = normal(rng);
        s.y(i) = model.response(s.x.row(i), noise);
    }
    return s;
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
    if (threads == 0) {
        threads = std::max(1U, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    {
        std::vector<std::jthread> workers;
        workers.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) {
            workers.emplace_back([&] {
                for (std::size_t i = next++; i < count && !failed.load(); i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        if (!failed.exchange(true)) {
                            failure = std::current_exception();
                        }
                    }
                }
            });
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

ReplicationRun run_replications(const ModelSpec& model, Method method, Eigen::Index n, int reps,
                                std::uint64_t master_seed, const MethodSettings& settings, unsigned threads) {
    if (reps < 1) {
        throw InvalidArgument(fmt::format("number of replications must be positive, got {}", reps));
    }
    if (n < 2) {
        throw InvalidArgument(fmt::format("sample size must be at least 2, got {}", n));
    }
    const LambdaEstimator estimator(method, settings);
    const Eigen::Index n_dirs = model.n_dirs;
    const bool track_beta = model.id == ModelId::m1;

    ReplicationRun run;
    run.r2.assign(static_cast<std::size_t>(reps), std::vector<double>(static_cast<std::size_t>(n_dirs)));
    if (track_beta) {
        run.beta1.assign(static_cast<std::size_t>(reps), Eigen::VectorXd());
    }

    parallel_for(static_cast<std::size_t>(reps), threads, [&](std::size_t r) {
        const Sample sample = generate(model, n, stream_seed(master_seed, r));
        const EdrEstimate e = eig_sym(estimator(sample));
        for (Eigen::Index j = 0; j < n_dirs; ++j) {
            Eigen::VectorXd b = e.eigenvectors.col(j);
            const Eigen::VectorXd truth = model.true_betas.col(j);
            if (b.dot(truth) < 0.0) {
                b = -b;
            }
            run.r2[r][static_cast<std::size_t>(j)] = squared_cosine(b, truth);
            if (track_beta && j == 0) {
                run.beta1[r] = b.normalized() * truth.norm();
            }
        }
    });

    ReplicationSummary& s = run.summary;
    s.model = model.id;
    s.method = method;
    s.n = n;
    s.reps = reps;
    s.seed = master_seed;
    for (Eigen::Index j = 0; j < n_dirs; ++j) {
        std::vector<double> vals;
        vals.reserve(run.r2.size());
        for (const auto& row : run.r2) {
            vals.push_back(row[static_cast<std::size_t>(j)]);
        }
        s.r2_means.push_back(mean_of(vals));
        s.r2_sds.push_back(sd_of(vals));
    }
    if (track_beta) {
        for (Eigen::Index c = 0; c < model.d; ++c) {
            std::vector<double> vals;
            vals.reserve(run.beta1.size());
            for (const auto& b : run.beta1) {
                vals.push_back(b(c));
            }
            s.beta_means.push_back(mean_of(vals));
            s.beta_sds.push_back(sd_of(vals));
        }
    }
    return run;
}

std::vector<TableRow> summarize_tables(const std::vector<ReplicationSummary>& summaries) {
    return {summaries.begin(), summaries.end()};
}

void write_results_csv(std::ostream& out, const std::vector<TableRow>& rows, TableKind kind) {
    out << "model,method,n,reps,seed,stat,component,value\n";
    auto emit = [&](const TableRow& row, std::string_view stat, const std::vector<double>& values) {
        for (std::size_t c = 0; c < values.size(); ++c) {
            fmt::print(out, "{},{},{},{},{},{},{},{}\n", to_string(row.model), to_string(row.method), row.n, row.reps,
                       row.seed, stat, c + 1, values[c]);
        }
    };
    for (const auto& row : rows) {
        if (kind != TableKind::r2) {
            emit(row, "beta_mean", row.beta_means);
            emit(row, "beta_sd", row.beta_sds);
        }
        if (kind != TableKind::beta) {
            emit(row, "r2_mean", row.r2_means);
            emit(row, "r2_sd", row.r2_sds);
        }
    }
}

void write_boxplot_csv(std::ostream& out, const std::vector<ReplicationRun>& runs) {
    out << "model,method,rep,direction,r2\n";
    for (const auto& run : runs) {
        for (std::size_t r = 0; r < run.r2.size(); ++r) {
            for (std::size_t j = 0; j < run.r2[r].size(); ++j) {
                fmt::print(out, "{},{},{},{},{}\n", to_string(run.summary.model), to_string(run.summary.method), r + 1,
                           j + 1, run.r2[r][j]);
            }
        }
    }
}

std::string boxplot_script(std::string_view csv_path) {
    return fmt::format(R"PY(#!/usr/bin/env python3
# R^2 boxplots per model and direction. Usage: python3 <script> [csv] [out-prefix]
import csv
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "{}"
prefix = sys.argv[2] if len(sys.argv) > 2 else "boxplot"
methods = ["SIR", "Kernel", "WaveletH", "WaveletD"]
data = defaultdict(list)
with open(path, newline="") as fh:
    for row in csv.DictReader(fh):
        data[(row["model"], int(row["direction"]), row["method"])].append(float(row["r2"]))

for model in sorted({{key[0] for key in data}}):
    directions = sorted({{key[1] for key in data if key[0] == model}})
    fig, axes = plt.subplots(1, len(directions), figsize=(5 * len(directions), 4), squeeze=False)
    for ax, j in zip(axes[0], directions):
        present = [m for m in methods if (model, j, m) in data]
        ax.boxplot([data[(model, j, m)] for m in present], labels=present)
        ax.set_title(f"{{model}}: R^2(beta_{{j}})")
    fig.tight_layout()
    fig.savefig(f"{{prefix}}_{{model}}.png", dpi=150)
)PY",
                       csv_path);
}

}  // namespace wavedr
