#include <sstream>

#include <doctest.h>

#include "wavedr/error.hpp"
#include "wavedr/sample.hpp"

using namespace wavedr;

TEST_CASE("csv round trip is exact") {
    Sample s;
    s.x.resize(3, 2);
    s.x << 0.1, -2.5, 1.0 / 3.0, 1e-300, 123456.789, -0.0;
    s.y.resize(3);
    s.y << 0.7, -1.0 / 7.0, 5e10;
    std::stringstream buf;
    write_sample_csv(buf, s);
    CHECK(buf.str().rfind("y,x1,x2\n", 0) == 0);
    const Sample back = read_sample_csv(buf);
    CHECK(back.x == s.x);
    CHECK(back.y == s.y);
}

TEST_CASE("csv errors") {
    std::istringstream empty("");
    CHECK_THROWS_WITH_AS(read_sample_csv(empty), doctest::Contains("no observations"), InvalidArgument);

    std::istringstream header_only("y,x1\n");
    CHECK_THROWS_WITH_AS(read_sample_csv(header_only), doctest::Contains("no observations"), InvalidArgument);

    std::istringstream bad_header("y,z1\n1,2\n");
    CHECK_THROWS_AS(read_sample_csv(bad_header), InvalidArgument);

    std::istringstream bad_field("y,x1\n1,2\n3,abc\n");
    CHECK_THROWS_WITH_AS(read_sample_csv(bad_field), doctest::Contains("line 3"), InvalidArgument);

    std::istringstream short_row("y,x1,x2\n1,2,3\n1,2\n");
    CHECK_THROWS_WITH_AS(read_sample_csv(short_row), doctest::Contains("line 3"), InvalidArgument);

    std::istringstream non_finite("y,x1\n1,inf\n");
    CHECK_THROWS_AS(read_sample_csv(non_finite), InvalidArgument);
}

TEST_CASE("validate checks shape and size") {
    Sample s;
    s.x = Eigen::MatrixXd::Zero(2, 3);
    s.y = Eigen::VectorXd::Zero(2);
    CHECK_NOTHROW(s.validate(2));
    CHECK_THROWS_AS(s.validate(3), InvalidArgument);
    s.y = Eigen::VectorXd::Zero(3);
    CHECK_THROWS_AS(s.validate(), InvalidArgument);
    Sample nan_sample;
    nan_sample.x = Eigen::MatrixXd::Constant(1, 1, std::nan(""));
    nan_sample.y = Eigen::VectorXd::Zero(1);
    CHECK_THROWS_AS(nan_sample.validate(), InvalidArgument);
}
