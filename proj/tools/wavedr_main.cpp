// wavedr: estimate EDR directions from data and reproduce the simulation study.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "wavedr/baselines.hpp"
#include "wavedr/edr.hpp"
#include "wavedr/error.hpp"
#include "wavedr/estimators.hpp"
#include "wavedr/sample.hpp"
#include "wavedr/simulation.hpp"
#include "wavedr/wavelet.hpp"

namespace {

using namespace wavedr;

constexpr int kExitUsage = 2;
constexpr const char* kThreadsEnv = "WAVEDR_THREADS";

struct MethodFlags {
    std::string method = "wavelet-h";
    std::optional<int> resolution;
    std::optional<double> floor;
    std::optional<int> slices;
    std::optional<double> bandwidth;
};

void add_method_flags(CLI::App* cmd, MethodFlags& f, bool with_method) {
    if (with_method) {
        cmd->add_option("--method", f.method, "sir | kernel | wavelet-h | wavelet-d")->capture_default_str();
    }
    cmd->add_option("--jn", f.resolution, "wavelet resolution level j_n (default 0)");
    cmd->add_option("--bn", f.floor, "density truncation floor b_n (default 0.01)");
    cmd->add_option("--H", f.slices, "number of SIR slices (default 5)");
    cmd->add_option("--bandwidth", f.bandwidth, "kernel bandwidth h (default n^-0.2)");
}

// Rejects flags that do not apply to `method`.
MethodSettings settings_for(Method method, const MethodFlags& f) {
    const bool wavelet = method == Method::wavelet_haar || method == Method::wavelet_daubechies;
    if (f.resolution && !wavelet) {
        throw InvalidArgument("--jn applies only to wavelet-h and wavelet-d");
    }
    if (f.slices && method != Method::sir) {
        throw InvalidArgument("--H applies only to sir");
    }
    if (f.bandwidth && method != Method::kernel) {
        throw InvalidArgument("--bandwidth applies only to kernel");
    }
    if (f.floor && method == Method::sir) {
        throw InvalidArgument("--bn does not apply to sir");
    }
    MethodSettings s;
    if (f.resolution) {
        s.resolution = *f.resolution;
    }
    if (f.floor) {
        s.floor = *f.floor;
    }
    if (f.slices) {
        s.slices = *f.slices;
    }
    s.bandwidth = f.bandwidth;
    s.validate(method);
    return s;
}

// Table runs cover several methods, so method-specific flags apply to the
// methods they name and are ignored by the others.
MethodSettings shared_settings(const MethodFlags& f) {
    MethodSettings s;
    if (f.resolution) {
        s.resolution = *f.resolution;
    }
    if (f.floor) {
        s.floor = *f.floor;
    }
    if (f.slices) {
        s.slices = *f.slices;
    }
    s.bandwidth = f.bandwidth;
    for (Method m : kAllMethods) {
        s.validate(m);
    }
    return s;
}

unsigned default_threads() {
    if (const char* env = std::getenv(kThreadsEnv)) {
        try {
            const int v = std::stoi(env);
            if (v >= 0) {
                return static_cast<unsigned>(v);
            }
        } catch (const std::exception&) {
        }
        throw InvalidArgument(fmt::format("{} must be a nonnegative integer, got '{}'", kThreadsEnv, env));
    }
    return 1;
}

std::vector<Method> parse_methods(const std::vector<std::string>& tags) {
    std::vector<Method> out;
    for (const auto& t : tags) {
        out.push_back(parse_method(t));
    }
    return out.empty() ? std::vector<Method>(std::begin(kAllMethods), std::end(kAllMethods)) : out;
}

std::vector<ModelId> parse_models(const std::vector<std::string>& tags) {
    std::vector<ModelId> out;
    for (const auto& t : tags) {
        out.push_back(parse_model(t));
    }
    return out.empty() ? std::vector<ModelId>(std::begin(kAllModels), std::end(kAllModels)) : out;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InvalidArgument(fmt::format("cannot write '{}'", path));
    }
    out << content;
}

void print_summary(std::ostream& out, const ReplicationSummary& s) {
    fmt::print(out, "{:<3} {:<9} n={} reps={}", to_string(s.model), to_string(s.method), s.n, s.reps);
    for (std::size_t j = 0; j < s.r2_means.size(); ++j) {
        fmt::print(out, "  R2(b{})={:.4f} ({:.4f})", j + 1, s.r2_means[j], s.r2_sds[j]);
    }
    out << '\n';
    if (!s.beta_means.empty()) {
        out << "    beta1:";
        for (std::size_t c = 0; c < s.beta_means.size(); ++c) {
            fmt::print(out, " {:.4f} ({:.4f})", s.beta_means[c], s.beta_sds[c]);
        }
        out << '\n';
    }
}

struct StudyFlags {
    Eigen::Index n = 500;
    int reps = 100;
    std::uint64_t seed = 42;
    std::optional<unsigned> threads;
    std::string output;
    std::string boxplot_out;
    std::string plot_script;
};

void add_study_flags(CLI::App* cmd, StudyFlags& f) {
    cmd->add_option("--n", f.n, "sample size per replication")->capture_default_str()->check(CLI::Range(2, 100000000));
    cmd->add_option("--reps", f.reps, "number of replications")->capture_default_str()->check(CLI::Range(1, 1000000));
    cmd->add_option("--seed", f.seed, "master seed")->capture_default_str();
    cmd->add_option("--threads", f.threads, fmt::format("worker threads (default ${} or 1; 0 = all cores)", kThreadsEnv));
    cmd->add_option("--output,-o", f.output, "results CSV path (default: stdout)");
    cmd->add_option("--boxplot-out", f.boxplot_out, "write per-replication R^2 values for boxplots");
    cmd->add_option("--plot-script", f.plot_script, "write a matplotlib script rendering the boxplot CSV")
        ->needs("--boxplot-out");
}

// Writes results, optional boxplot data and plot script; returns the exit code.
int emit_study(const StudyFlags& f, const std::vector<ReplicationRun>& runs, TableKind kind) {
    std::vector<ReplicationSummary> summaries;
    for (const auto& r : runs) {
        summaries.push_back(r.summary);
    }
    const auto rows = summarize_tables(summaries);
    std::ostringstream csv;
    write_results_csv(csv, rows, kind);
    if (f.output.empty()) {
        std::cout << csv.str();
    } else {
        write_file(f.output, csv.str());
        for (const auto& s : summaries) {
            print_summary(std::cout, s);
        }
    }
    if (!f.boxplot_out.empty()) {
        std::ostringstream box;
        write_boxplot_csv(box, runs);
        write_file(f.boxplot_out, box.str());
    }
    if (!f.plot_script.empty()) {
        write_file(f.plot_script, boxplot_script(f.boxplot_out));
    }
    return 0;
}

int run_estimate(const std::string& input, const MethodFlags& mf, int n_dirs, bool whiten, const std::string& output,
                 int depth) {
    const Method method = parse_method(mf.method);
    MethodSettings settings = settings_for(method, mf);
    settings.cascade_depth = depth;
    settings.validate(method);
    if (whiten && method != Method::wavelet_haar && method != Method::wavelet_daubechies) {
        throw InvalidArgument("--whiten applies only to wavelet-h and wavelet-d");
    }

    const Sample sample = read_sample_csv(input);
    sample.validate();
    if (n_dirs > sample.d()) {
        throw InvalidArgument(fmt::format("--n-dirs {} exceeds the dimension d={}", n_dirs, sample.d()));
    }

    LambdaMatrix lambda;
    std::optional<Whitening> whitening;
    if (whiten) {
        EstimatorConfig cfg;
        cfg.resolution = settings.resolution;
        cfg.floor = settings.floor;
        cfg.wavelet = std::make_shared<const FatherWavelet>(build_wavelet(
            method == Method::wavelet_haar ? WaveletFamily::haar : WaveletFamily::daubechies2, depth));
        cfg.whiten = true;
        whitening = fit_whitening(sample);
        lambda = lambda_hat(sample, cfg);
    } else {
        lambda = estimate_lambda(sample, method, settings);
    }
    const EdrEstimate e = eig_sym(lambda);
    Eigen::MatrixXd dirs = edr_directions(e, n_dirs);
    if (whitening) {
        // Back to the original X coordinates.
        for (Eigen::Index j = 0; j < dirs.cols(); ++j) {
            Eigen::VectorXd v = whitening->transform * dirs.col(j);
            v.normalize();
            apply_sign_convention(v);
            dirs.col(j) = v;
        }
    }

    fmt::print("method: {}  n={}  d={}\n", to_string(method), sample.n(), sample.d());
    fmt::print("eigenvalues:");
    for (Eigen::Index j = 0; j < e.eigenvalues.size(); ++j) {
        fmt::print(" {:.6g}", e.eigenvalues(j));
    }
    fmt::print("\n");
    for (Eigen::Index j = 0; j < dirs.cols(); ++j) {
        fmt::print("direction {}:", j + 1);
        for (Eigen::Index k = 0; k < dirs.rows(); ++k) {
            fmt::print(" {:.6f}", dirs(k, j));
        }
        fmt::print("\n");
    }

    if (!output.empty()) {
        std::ostringstream csv;
        csv << "kind,index,component,value\n";
        for (Eigen::Index j = 0; j < e.eigenvalues.size(); ++j) {
            fmt::print(csv, "eigenvalue,{},,{}\n", j + 1, e.eigenvalues(j));
        }
        for (Eigen::Index j = 0; j < dirs.cols(); ++j) {
            for (Eigen::Index k = 0; k < dirs.rows(); ++k) {
                fmt::print(csv, "direction,{},{},{}\n", j + 1, k + 1, dirs(k, j));
            }
        }
        for (Eigen::Index r = 0; r < lambda.m.rows(); ++r) {
            for (Eigen::Index c = 0; c < lambda.m.cols(); ++c) {
                fmt::print(csv, "lambda,{},{},{}\n", r + 1, c + 1, lambda.m(r, c));
            }
        }
        write_file(output, csv.str());
    }
    return 0;
}

int run_diagnostics(const std::string& family_tag, int depth, std::vector<double> probes) {
    const FatherWavelet w = build_wavelet(parse_wavelet_family(family_tag), depth);
    if (probes.empty()) {
        probes = {0.0, 0.2, 0.5, 0.7, 1.3, 2.5};
    }
    const KernelDiagnostics diag = kernel_diagnostics(w, probes);
    fmt::print("wavelet: {}  support: [0, {}]  cascade depth: {}\n", to_string(w.family()), w.support(), w.depth());
    fmt::print("filter:");
    for (double h : w.filter()) {
        fmt::print(" {:.15g}", h);
    }
    fmt::print("\nintegral of phi (trapezoid on table): {:.12f}\n", w.table_integral());
    fmt::print("max refinement residual: {:.3e}\n", w.max_refinement_residual());
    fmt::print("{:>10} {:>14} {:>14} {:>14} {:>14}\n", "x", "moment1", "moment2", "moment3", "|int K - 1|");
    for (const auto& p : diag.probes) {
        fmt::print("{:>10.4f} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.3e}\n", p.x, p.moment_residuals[0],
                   p.moment_residuals[1], p.moment_residuals[2], p.normalization_residual);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"wavedr: wavelet-based estimation of effective dimension reduction directions"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "expand help for every subcommand");

    // estimate
    auto* estimate = app.add_subcommand("estimate", "estimate EDR directions from a y,x1,...,xd CSV file");
    std::string input;
    MethodFlags est_flags;
    int n_dirs = 1;
    bool whiten = false;
    std::string est_output;
    int depth = kDefaultCascadeDepth;
    estimate->add_option("--input,-i", input, "sample CSV with header y,x1,...,xd")->required();
    add_method_flags(estimate, est_flags, true);
    estimate->add_option("--n-dirs", n_dirs, "number of directions to report")->capture_default_str()->check(
        CLI::PositiveNumber);
    estimate->add_flag("--whiten", whiten, "center and whiten X before estimating (wavelet methods)");
    estimate->add_option("--depth", depth, "cascade depth for the Daubechies table")->capture_default_str();
    estimate->add_option("--output,-o", est_output, "write eigenvalues, directions and Lambda as CSV");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "replicate one method on one model");
    std::string model_tag = "1";
    MethodFlags sim_flags;
    StudyFlags sim_study;
    simulate->add_option("--model", model_tag, "model 1, 2 or 3")->capture_default_str();
    add_method_flags(simulate, sim_flags, true);
    add_study_flags(simulate, sim_study);

    // table1
    auto* table1 = app.add_subcommand("table1", "means and SDs of beta_1 on model 1 for every method");
    MethodFlags t1_flags;
    StudyFlags t1_study;
    std::vector<std::string> t1_methods;
    table1->add_option("--methods", t1_methods, "subset of methods (default all four)")->delimiter(',');
    add_method_flags(table1, t1_flags, false);
    add_study_flags(table1, t1_study);

    // table2
    auto* table2 = app.add_subcommand("table2", "means and SDs of R^2(beta_j) for every model and method");
    MethodFlags t2_flags;
    StudyFlags t2_study;
    std::vector<std::string> t2_methods;
    std::vector<std::string> t2_models;
    table2->add_option("--methods", t2_methods, "subset of methods (default all four)")->delimiter(',');
    table2->add_option("--models", t2_models, "subset of models (default 1,2,3)")->delimiter(',');
    add_method_flags(table2, t2_flags, false);
    add_study_flags(table2, t2_study);

    // diagnostics
    auto* diagnostics = app.add_subcommand("diagnostics", "father wavelet and projection kernel diagnostics");
    std::string family_tag = "daubechies2";
    int diag_depth = kDefaultCascadeDepth;
    std::vector<double> probes;
    diagnostics->add_option("--wavelet", family_tag, "haar | daubechies2")->capture_default_str();
    diagnostics->add_option("--depth", diag_depth, "cascade depth L")->capture_default_str();
    diagnostics->add_option("--probes", probes, "probe points x")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*estimate) {
            return run_estimate(input, est_flags, n_dirs, whiten, est_output, depth);
        }
        if (*simulate) {
            const Method method = parse_method(sim_flags.method);
            const MethodSettings settings = settings_for(method, sim_flags);
            const ModelSpec model = ModelSpec::make(parse_model(model_tag));
            const unsigned threads = sim_study.threads.value_or(default_threads());
            std::vector<ReplicationRun> runs;
            runs.push_back(run_replications(model, method, sim_study.n, sim_study.reps, sim_study.seed, settings,
                                            threads));
            return emit_study(sim_study, runs, TableKind::all);
        }
        if (*table1) {
            const auto methods = parse_methods(t1_methods);
            const MethodSettings settings = shared_settings(t1_flags);
            const unsigned threads = t1_study.threads.value_or(default_threads());
            const ModelSpec model = ModelSpec::make(ModelId::m1);
            std::vector<ReplicationRun> runs;
            for (Method m : methods) {
                runs.push_back(run_replications(model, m, t1_study.n, t1_study.reps, t1_study.seed, settings, threads));
            }
            return emit_study(t1_study, runs, TableKind::beta);
        }
        if (*table2) {
            const auto methods = parse_methods(t2_methods);
            const auto models = parse_models(t2_models);
            const MethodSettings settings = shared_settings(t2_flags);
            const unsigned threads = t2_study.threads.value_or(default_threads());
            std::vector<ReplicationRun> runs;
            for (ModelId id : models) {
                const ModelSpec model = ModelSpec::make(id);
                for (Method m : methods) {
                    runs.push_back(
                        run_replications(model, m, t2_study.n, t2_study.reps, t2_study.seed, settings, threads));
                }
            }
            return emit_study(t2_study, runs, TableKind::r2);
        }
        if (*diagnostics) {
            return run_diagnostics(family_tag, diag_depth, probes);
        }
    } catch (const InvalidArgument& e) {
        fmt::print(std::cerr, "error: {}\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        fmt::print(std::cerr, "fatal: {}\n", e.what());
        return 1;
    }
    return kExitUsage;
}
