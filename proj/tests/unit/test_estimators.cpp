#include <algorithm>
#include <random>
#include <vector>

#include <doctest.h>

#include "oracles.hpp"
#include "wavedr/error.hpp"
#include "wavedr/estimators.hpp"

using namespace wavedr;
using wavedr::testing::brute_lambda;
using wavedr::testing::histogram_density;
using wavedr::testing::random_sample;

namespace {

Sample make_sample(std::initializer_list<std::initializer_list<double>> xs, std::initializer_list<double> ys) {
    Sample s;
    s.y = Eigen::Map<const Eigen::VectorXd>(std::data(ys), static_cast<Eigen::Index>(ys.size()));
    s.x.resize(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(xs.begin()->size()));
    Eigen::Index i = 0;
    for (const auto& row : xs) {
        Eigen::Index j = 0;
        for (double v : row) {
            s.x(i, j++) = v;
        }
        ++i;
    }
    return s;
}

EstimatorConfig config(WaveletFamily f, int jn = 0, double bn = 0.01, Evaluation e = Evaluation::automatic) {
    EstimatorConfig cfg = EstimatorConfig::make(f, jn, bn);
    cfg.evaluation = e;
    return cfg;
}

Sample permuted(const Sample& s, std::mt19937_64& rng) {
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(s.n()));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    Sample out;
    out.x.resize(s.n(), s.d());
    out.y.resize(s.n());
    for (Eigen::Index i = 0; i < s.n(); ++i) {
        out.x.row(i) = s.x.row(perm[static_cast<std::size_t>(i)]);
        out.y(i) = s.y(perm[static_cast<std::size_t>(i)]);
    }
    return out;
}

}  // namespace

TEST_CASE("config validation") {
    EstimatorConfig cfg = config(WaveletFamily::haar);
    cfg.resolution = -1;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg = config(WaveletFamily::haar, 0, 0.0);
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg = config(WaveletFamily::haar, 0, -0.1);
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg = config(WaveletFamily::daubechies2, 0, 0.01, Evaluation::cell_bucket);
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    EstimatorConfig none;
    CHECK_THROWS_AS(none.validate(), InvalidArgument);
}

TEST_CASE("density hand examples") {
    const auto haar0 = config(WaveletFamily::haar);
    const std::vector<double> one{0.3};
    CHECK(density_estimate(one, haar0, 0.7) == 1.0);
    CHECK(density_estimate(one, haar0, 1.5) == 0.0);
    const std::vector<double> four{0.1, 0.2, 0.9, 1.3};
    CHECK(density_estimate(four, config(WaveletFamily::haar, 1), 0.15) == 1.0);
}

TEST_CASE("truncated density") {
    CHECK(truncated_density(0.0, 0.01) == 0.01);
    CHECK(truncated_density(0.5, 0.01) == 0.5);
    CHECK(truncated_density(-0.003, 0.01) == 0.01);
}

TEST_CASE("g and R hand examples") {
    const auto haar0 = config(WaveletFamily::haar);
    CHECK(g_estimate(make_sample({{2.0}}, {0.3}), 0, haar0, 0.5) == 2.0);
    CHECK(g_estimate(make_sample({{0.0}, {0.0}}, {0.3, 1.7}), 0, haar0, 0.5) == 0.0);
    const Sample two = make_sample({{1.0}, {3.0}}, {0.2, 0.8});
    CHECK(g_estimate(two, 0, haar0, 0.5) == 2.0);
    CHECK(r_hat(two, haar0, 0.5)(0) == 2.0);
    CHECK_THROWS_AS(g_estimate(two, 1, haar0, 0.5), InvalidArgument);

    const Eigen::VectorXd r = r_hat(make_sample({{2.0, -1.0}}, {0.3}), haar0, 0.5);
    CHECK(r(0) == 2.0);
    CHECK(r(1) == -1.0);
    const Eigen::VectorXd far = r_hat(make_sample({{2.0, -1.0}}, {0.3}), haar0, 40.5);
    CHECK(far.isZero(0.0));
}

TEST_CASE("Lambda hand examples") {
    const auto haar0 = config(WaveletFamily::haar);
    const Sample s = make_sample({{2.0}, {4.0}}, {0.2, 0.8});
    CHECK(lambda_hat(s, haar0).m(0, 0) == 9.0);
    CHECK(brute_lambda(s, *haar0.wavelet, 0, 0.01)(0, 0) == 9.0);
    Sample zero = make_sample({{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}}, {0.1, 0.5, 2.0});
    CHECK(lambda_hat(zero, haar0).m.isZero(0.0));
    CHECK(lambda_hat(zero, config(WaveletFamily::daubechies2)).m.isZero(0.0));
}

TEST_CASE("Lambda agrees with the straight-from-formula oracle") {
    std::mt19937_64 rng(2024);
    for (WaveletFamily f : {WaveletFamily::haar, WaveletFamily::daubechies2}) {
        for (int jn : {0, 1, 2}) {
            const Sample s = random_sample(rng, 60, 3);
            const auto cfg = config(f, jn, 0.01);
            const Eigen::MatrixXd got = lambda_hat(s, cfg).m;
            const Eigen::MatrixXd want = brute_lambda(s, *cfg.wavelet, jn, 0.01);
            CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, want.cwiseAbs().maxCoeff()));
        }
    }
}

TEST_CASE("Haar density equals the bin-count histogram on 50 random samples") {
    std::mt19937_64 rng(50);
    std::normal_distribution<double> normal;
    std::uniform_int_distribution<int> size(1, 200);
    std::uniform_int_distribution<int> level(0, 4);
    std::uniform_real_distribution<double> spread(0.2, 5.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = size(rng);
        const int jn = level(rng);
        const double sd = spread(rng);
        std::vector<double> ys(static_cast<std::size_t>(n));
        for (double& y : ys) {
            y = sd * normal(rng);
        }
        const auto cfg = config(WaveletFamily::haar, jn);
        Sample s;
        s.y = Eigen::Map<const Eigen::VectorXd>(ys.data(), n);
        s.x = Eigen::MatrixXd::Zero(n, 1);
        const LinearWaveletEstimator est(s, cfg);
        for (int q = 0; q < 40; ++q) {
            const double y = q < 20 ? ys[static_cast<std::size_t>(q) % ys.size()] : sd * 1.5 * normal(rng);
            CHECK(est.density(y) == histogram_density(ys, jn, y));
        }
    }
}

TEST_CASE("density integrates to one") {
    std::mt19937_64 rng(8);
    const Sample s = random_sample(rng, 300, 1);
    for (int jn : {0, 2}) {
        // Haar: height times width summed over occupied cells.
        const auto haar = config(WaveletFamily::haar, jn);
        const LinearWaveletEstimator h(s, haar);
        const double width = std::ldexp(1.0, -jn);
        std::vector<double> cells;
        for (Eigen::Index i = 0; i < s.n(); ++i) {
            cells.push_back(std::floor(s.y(i) / width));
        }
        std::sort(cells.begin(), cells.end());
        cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
        double mass = 0.0;
        for (double c : cells) {
            mass += h.density((c + 0.5) * width) * width;
        }
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-14));

        const LinearWaveletEstimator d(s, config(WaveletFamily::daubechies2, jn));
        const double lo = s.y.minCoeff() - 4.0;
        const double hi = s.y.maxCoeff() + 4.0;
        const int steps = 40000;
        double integral = 0.0;
        for (int i = 0; i < steps; ++i) {
            integral += d.density(lo + (i + 0.5) * (hi - lo) / steps);
        }
        CHECK(std::abs(integral * (hi - lo) / steps - 1.0) <= 1e-2);
    }
}

TEST_CASE("Lambda is symmetric PSD on 100 random samples") {
    std::mt19937_64 rng(100);
    std::uniform_int_distribution<int> size(5, 120);
    std::uniform_int_distribution<int> dim(1, 5);
    std::uniform_int_distribution<int> level(0, 3);
    for (int trial = 0; trial < 100; ++trial) {
        const Sample s = random_sample(rng, size(rng), dim(rng), 2.0);
        const auto f = trial % 2 == 0 ? WaveletFamily::haar : WaveletFamily::daubechies2;
        const LambdaMatrix m = lambda_hat(s, config(f, level(rng)));
        CHECK(m.is_symmetric(1e-10));
        CHECK(m.min_eigenvalue() >= -1e-8);
    }
}

TEST_CASE("scaling X by c scales Lambda by c squared") {
    std::mt19937_64 rng(12);
    for (WaveletFamily f : {WaveletFamily::haar, WaveletFamily::daubechies2}) {
        const Sample s = random_sample(rng, 150, 4);
        const auto cfg = config(f);
        const Eigen::MatrixXd base = lambda_hat(s, cfg).m;
        for (double c : {-2.0, 0.1, 7.5}) {
            Sample scaled = s;
            scaled.x *= c;
            const Eigen::MatrixXd got = lambda_hat(scaled, cfg).m;
            CHECK((got - c * c * base).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, c * c * base.cwiseAbs().maxCoeff()));
        }
    }
}

TEST_CASE("row permutations leave f, g and Lambda unchanged bit for bit") {
    std::mt19937_64 rng(77);
    for (WaveletFamily f : {WaveletFamily::haar, WaveletFamily::daubechies2}) {
        for (Evaluation e : {Evaluation::direct, Evaluation::coefficient, Evaluation::automatic}) {
            Sample s = random_sample(rng, 90, 3);
            s.y(5) = s.y(6);  // a tie in Y
            const auto cfg = config(f, 1, 0.01, e);
            const LinearWaveletEstimator a(s, cfg);
            const Sample p = permuted(s, rng);
            const LinearWaveletEstimator b(p, cfg);
            CHECK(a.lambda().m == b.lambda().m);
            for (double y : {-1.3, 0.0, 0.41, 2.2}) {
                CHECK(a.density(y) == b.density(y));
                CHECK(a.g(2, y) == b.g(2, y));
            }
        }
    }
}

TEST_CASE("Haar cell bucketing is bit-identical to direct evaluation") {
    std::mt19937_64 rng(31);
    for (int jn : {0, 1, 3}) {
        const Sample s = random_sample(rng, 400, 5, 3.0);
        const LinearWaveletEstimator direct(s, config(WaveletFamily::haar, jn, 0.01, Evaluation::direct));
        const LinearWaveletEstimator bucket(s, config(WaveletFamily::haar, jn, 0.01, Evaluation::cell_bucket));
        CHECK(bucket.evaluation() == Evaluation::cell_bucket);
        CHECK(direct.lambda().m == bucket.lambda().m);
        CHECK(direct.r_hat_at_observations() == bucket.r_hat_at_observations());
        for (double y : {-2.0, -0.5, 0.0, 1.0, 3.7}) {
            CHECK(direct.density(y) == bucket.density(y));
        }
    }
}

TEST_CASE("coefficient evaluation agrees with direct evaluation") {
    std::mt19937_64 rng(32);
    for (WaveletFamily f : {WaveletFamily::haar, WaveletFamily::daubechies2}) {
        const Sample s = random_sample(rng, 400, 5, 3.0);
        const LinearWaveletEstimator direct(s, config(f, 1, 0.01, Evaluation::direct));
        const LinearWaveletEstimator coef(s, config(f, 1, 0.01, Evaluation::coefficient));
        const Eigen::MatrixXd a = direct.lambda().m;
        const Eigen::MatrixXd b = coef.lambda().m;
        CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("automatic evaluation choice") {
    std::mt19937_64 rng(1);
    const Sample s = random_sample(rng, 20, 2);
    CHECK(LinearWaveletEstimator(s, config(WaveletFamily::haar)).evaluation() == Evaluation::cell_bucket);
    CHECK(LinearWaveletEstimator(s, config(WaveletFamily::daubechies2)).evaluation() == Evaluation::direct);
}

TEST_CASE("whitening") {
    std::mt19937_64 rng(4);
    Sample s = random_sample(rng, 300, 3);
    s.x.col(1) = 3.0 * s.x.col(1) + s.x.col(0) + Eigen::VectorXd::Constant(s.n(), 5.0);
    const Whitening w = fit_whitening(s);
    const Sample white = apply_whitening(s, w);
    const Eigen::MatrixXd c = white.x.rowwise() - white.x.colwise().mean();
    const Eigen::MatrixXd cov = c.transpose() * c / static_cast<double>(s.n() - 1);
    CHECK((cov - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-10);

    EstimatorConfig cfg = config(WaveletFamily::haar);
    cfg.whiten = true;
    const EstimatorConfig plain = config(WaveletFamily::haar);
    CHECK(lambda_hat(s, cfg).m == lambda_hat(white, plain).m);

    Sample singular = s;
    singular.x.col(2) = singular.x.col(0);
    CHECK_THROWS_AS(fit_whitening(singular), InvalidArgument);
}
