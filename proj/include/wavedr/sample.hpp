#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <Eigen/Core>

namespace wavedr {

/// n paired observations (X_i in R^d, Y_i). Row i of `x` pairs with y(i).
struct Sample {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;

    [[nodiscard]] Eigen::Index n() const noexcept { return y.size(); }
    [[nodiscard]] Eigen::Index d() const noexcept { return x.cols(); }

    /// Throws InvalidArgument unless n >= min_n, d >= 1, shapes agree and
    /// every entry is finite.
    void validate(Eigen::Index min_n = 1) const;
};

/// Reads the `y,x1,...,xd` CSV format. Errors name the offending line.
Sample read_sample_csv(std::istream& in);
Sample read_sample_csv(const std::filesystem::path& path);

/// Writes `y,x1,...,xd` with shortest round-trip decimal formatting.
void write_sample_csv(std::ostream& out, const Sample& sample);
void write_sample_csv(const std::filesystem::path& path, const Sample& sample);

}  // namespace wavedr
