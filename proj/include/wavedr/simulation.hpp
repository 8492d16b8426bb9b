#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "wavedr/estimators.hpp"
#include "wavedr/sample.hpp"

namespace wavedr {

enum class ModelId { m1, m2, m3 };

/// Accepts "1"/"m1"/"M1" etc.
ModelId parse_model(std::string_view tag);
std::string_view to_string(ModelId id);

/// The three single-index / two-index regression designs with X ~ N(0, I_5)
/// and standard normal noise:
///   M1: Y = X1 + X2 + X3 + X4 + e
///   M2: Y = X1 (X1 + X2 + 1) + e
///   M3: Y = X1 / (0.5 + (X2 + 1.5)^2) + e
struct ModelSpec {
    ModelId id = ModelId::m1;
    Eigen::Index d = 5;
    Eigen::Index n_dirs = 1;  // structural dimension N
    Eigen::MatrixXd true_betas;  // d x N, unnormalized

    static ModelSpec make(ModelId id);
    [[nodiscard]] double response(const Eigen::Ref<const Eigen::RowVectorXd>& x, double noise) const;
};

enum class Method { sir, kernel, wavelet_haar, wavelet_daubechies };

/// Accepts "sir", "kernel", "wavelet-h", "wavelet-d".
Method parse_method(std::string_view tag);
std::string_view to_string(Method m);
inline constexpr Method kAllMethods[] = {Method::sir, Method::kernel, Method::wavelet_haar,
                                         Method::wavelet_daubechies};
inline constexpr ModelId kAllModels[] = {ModelId::m1, ModelId::m2, ModelId::m3};

/// Per-method tuning; defaults reproduce the reference study.
struct MethodSettings {
    int slices = 5;                    // SIR H
    std::optional<double> bandwidth;   // kernel h; n^-0.2 when empty
    int resolution = 0;                // wavelet j_n
    double floor = 0.01;               // b_n (wavelet and kernel)
    int cascade_depth = kDefaultCascadeDepth;

    void validate(Method method) const;
};

/// Lambda estimate of the chosen method on one sample.
LambdaMatrix estimate_lambda(const Sample& sample, Method method, const MethodSettings& settings);

/// Seed of replication stream `index` under `master`. Streams for distinct
/// indices are decorrelated by a SplitMix64 finalizer.
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index);

/// n draws from the model; bit-identical for identical (model, n, seed).
Sample generate(const ModelSpec& model, Eigen::Index n, std::uint64_t seed);

struct ReplicationSummary {
    ModelId model = ModelId::m1;
    Method method = Method::sir;
    Eigen::Index n = 0;
    int reps = 0;
    std::uint64_t seed = 0;
    /// Model 1 only: beta_1 sign-aligned to the truth and scaled to |beta_1| = 2.
    std::vector<double> beta_means;
    std::vector<double> beta_sds;
    std::vector<double> r2_means;  // one per true direction
    std::vector<double> r2_sds;
};

struct ReplicationRun {
    ReplicationSummary summary;
    /// r2[r][j] is R^2 of direction j in replication r.
    std::vector<std::vector<double>> r2;
    /// Model 1 only: the aligned, scaled beta_1 of each replication.
    std::vector<Eigen::VectorXd> beta1;
};

/// Runs `reps` independent replications in parallel on `threads` workers
/// (0 means hardware concurrency). Replication r draws its sample from
/// stream_seed(master_seed, r), so the output does not depend on `threads`.
ReplicationRun run_replications(const ModelSpec& model, Method method, Eigen::Index n, int reps,
                                std::uint64_t master_seed, const MethodSettings& settings = {},
                                unsigned threads = 1);

/// Evaluates fn(r) for r in [0, count) on up to `threads` workers. fn must
/// only write to slot r of its own output.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

/// One row per summary, fields as in ReplicationSummary.
using TableRow = ReplicationSummary;
std::vector<TableRow> summarize_tables(const std::vector<ReplicationSummary>& summaries);

enum class TableKind { beta, r2, all };

/// Long format: model,method,n,reps,seed,stat,component,value (components are
/// 1-based). `beta` emits beta_mean/beta_sd, `r2` emits r2_mean/r2_sd.
void write_results_csv(std::ostream& out, const std::vector<TableRow>& rows, TableKind kind);

/// Boxplot data: model,method,rep,direction,r2.
void write_boxplot_csv(std::ostream& out, const std::vector<ReplicationRun>& runs);

/// A self-contained matplotlib script drawing R^2 boxplots per model from
/// the boxplot CSV.
std::string boxplot_script(std::string_view csv_path);

}  // namespace wavedr
