#include <set>
#include <sstream>

#include <doctest.h>

#include "wavedr/error.hpp"
#include "wavedr/simulation.hpp"

using namespace wavedr;

TEST_CASE("model specs") {
    const ModelSpec m1 = ModelSpec::make(ModelId::m1);
    CHECK(m1.d == 5);
    CHECK(m1.n_dirs == 1);
    CHECK(m1.true_betas.col(0) == (Eigen::VectorXd(5) << 1, 1, 1, 1, 0).finished());
    const ModelSpec m2 = ModelSpec::make(ModelId::m2);
    CHECK(m2.n_dirs == 2);
    CHECK(m2.true_betas.col(0) == (Eigen::VectorXd(5) << 1, 0, 0, 0, 0).finished());
    CHECK(m2.true_betas.col(1) == (Eigen::VectorXd(5) << 1, 1, 0, 0, 0).finished());
    const ModelSpec m3 = ModelSpec::make(ModelId::m3);
    CHECK(m3.true_betas.col(1) == (Eigen::VectorXd(5) << 0, 1, 0, 0, 0).finished());

    Eigen::RowVectorXd x(5);
    x << 0.5, -1.0, 2.0, 0.25, 9.0;
    CHECK(m1.response(x, 0.1) == doctest::Approx(1.85));
    CHECK(m2.response(x, 0.0) == doctest::Approx(0.5 * (0.5 - 1.0 + 1.0)));
    CHECK(m3.response(x, 0.0) == doctest::Approx(0.5 / (0.5 + 0.25)));

    CHECK(parse_model("2") == ModelId::m2);
    CHECK(parse_model("m3") == ModelId::m3);
    CHECK(parse_model("M1") == ModelId::m1);
    CHECK_THROWS_AS(parse_model("4"), InvalidArgument);
    CHECK(parse_method("wavelet-d") == Method::wavelet_daubechies);
    CHECK_THROWS_AS(parse_method("pca"), InvalidArgument);
}

TEST_CASE("generation is deterministic and has the right moments") {
    const ModelSpec m1 = ModelSpec::make(ModelId::m1);
    const Sample a = generate(m1, 100, 9);
    const Sample b = generate(m1, 100, 9);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
    CHECK(a.d() == 5);
    CHECK(generate(m1, 100, 10).y != a.y);

    const Sample big = generate(m1, 100000, 42);
    const double mean = big.y.mean();
    const double var = (big.y.array() - mean).square().sum() / static_cast<double>(big.n() - 1);
    CHECK(std::abs(mean) <= 0.03);
    CHECK(std::abs(var - 5.0) <= 0.15);
}

TEST_CASE("stream seeds differ") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t r = 0; r < 1000; ++r) {
        seen.insert(stream_seed(42, r));
    }
    CHECK(seen.size() == 1000);
    CHECK(stream_seed(42, 0) != stream_seed(43, 0));
}

TEST_CASE("method settings validation") {
    MethodSettings s;
    CHECK_NOTHROW(s.validate(Method::sir));
    s.slices = 1;
    CHECK_THROWS_AS(s.validate(Method::sir), InvalidArgument);
    s = {};
    s.bandwidth = -1.0;
    CHECK_THROWS_AS(s.validate(Method::kernel), InvalidArgument);
    s = {};
    s.floor = 0.0;
    CHECK_THROWS_AS(s.validate(Method::wavelet_haar), InvalidArgument);
}

TEST_CASE("replications are deterministic across thread counts") {
    for (Method method : kAllMethods) {
        for (ModelId id : {ModelId::m1, ModelId::m2}) {
            const ModelSpec model = ModelSpec::make(id);
            const ReplicationRun one = run_replications(model, method, 200, 9, 42, {}, 1);
            const ReplicationRun four = run_replications(model, method, 200, 9, 42, {}, 4);
            const ReplicationRun again = run_replications(model, method, 200, 9, 42, {}, 1);
            CHECK(one.r2 == four.r2);
            CHECK(one.r2 == again.r2);
            CHECK(one.summary.r2_means == four.summary.r2_means);
            CHECK(one.summary.beta_means == four.summary.beta_means);
            for (const auto& rep : one.r2) {
                for (double v : rep) {
                    CHECK(v >= 0.0);
                    CHECK(v <= 1.0);
                }
            }
        }
    }
}

TEST_CASE("a single replication has zero spread") {
    const ModelSpec m1 = ModelSpec::make(ModelId::m1);
    const ReplicationRun run = run_replications(m1, Method::sir, 300, 1, 5, {}, 1);
    REQUIRE(run.summary.r2_sds.size() == 1);
    CHECK(run.summary.r2_sds[0] == 0.0);
    CHECK(run.summary.r2_means[0] == run.r2[0][0]);
    for (std::size_t k = 0; k < 5; ++k) {
        CHECK(run.summary.beta_sds[k] == 0.0);
        CHECK(run.summary.beta_means[k] == run.beta1[0](static_cast<Eigen::Index>(k)));
    }
    CHECK(run.beta1[0].norm() == doctest::Approx(2.0));
}

TEST_CASE("tables and csv schema") {
    CHECK(summarize_tables({}).empty());
    std::vector<ReplicationSummary> sums;
    for (ModelId id : kAllModels) {
        for (Method method : kAllMethods) {
            sums.push_back(run_replications(ModelSpec::make(id), method, 100, 2, 42, {}, 1).summary);
        }
    }
    const auto rows = summarize_tables(sums);
    CHECK(rows.size() == 12);
    CHECK(summarize_tables({sums[0]}).size() == 1);

    std::ostringstream out;
    write_results_csv(out, rows, TableKind::r2);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "model,method,n,reps,seed,stat,component,value");
    std::set<std::pair<std::string, std::string>> blocks;
    int lines = 0;
    while (std::getline(in, line)) {
        ++lines;
        std::istringstream fields(line);
        std::string model, method;
        std::getline(fields, model, ',');
        std::getline(fields, method, ',');
        blocks.emplace(model, method);
        CHECK(std::count(line.begin(), line.end(), ',') == 7);
    }
    CHECK(blocks.size() == 12);
    // (1 + 2 + 2) directions x 4 methods x {mean, sd}
    CHECK(lines == 40);

    std::ostringstream betas;
    write_results_csv(betas, {rows[0]}, TableKind::beta);
    CHECK(betas.str().find("beta_mean") != std::string::npos);
    CHECK(betas.str().find("beta_sd") != std::string::npos);

    std::ostringstream box;
    write_boxplot_csv(box, {run_replications(ModelSpec::make(ModelId::m2), Method::sir, 100, 3, 1, {}, 1)});
    const std::string text = box.str();
    CHECK(text.rfind("model,method,rep,direction,r2\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 3 * 2);
    CHECK(boxplot_script("box.csv").find("box.csv") != std::string::npos);
}
