#include "wavedr/sample.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <vector>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "wavedr/error.hpp"

namespace wavedr {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return fields;
}

double parse_real(std::string_view field, std::size_t line_no, std::size_t column) {
    double value = 0.0;
    if (!field.empty() && field.front() == '+') {
        field.remove_prefix(1);
    }
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (field.empty() || ec != std::errc{} || ptr != end) {
        throw InvalidArgument(fmt::format("line {}: column {} is not a real number: '{}'", line_no, column, field));
    }
    if (!std::isfinite(value)) {
        throw InvalidArgument(fmt::format("line {}: column {} is not finite", line_no, column));
    }
    return value;
}

}  // namespace

void Sample::validate(Eigen::Index min_n) const {
    if (n() < min_n) {
        throw InvalidArgument(n() == 0 ? std::string("no observations")
                                       : fmt::format("need at least {} observations, got {}", min_n, n()));
    }
    if (d() < 1) {
        throw InvalidArgument("sample has no covariates");
    }
    if (x.rows() != n()) {
        throw InvalidArgument(fmt::format("covariate rows ({}) do not match responses ({})", x.rows(), n()));
    }
    if (!x.allFinite() || !y.allFinite()) {
        throw InvalidArgument("sample contains non-finite values");
    }
}

Sample read_sample_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::size_t d = 0;
    bool have_header = false;
    std::vector<double> values;

    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(line);
        if (body.empty()) {
            continue;
        }
        const auto fields = split_fields(body);
        if (!have_header) {
            if (fields.size() < 2 || fields[0] != "y") {
                throw InvalidArgument(fmt::format("line {}: header must be y,x1,...,xd", line_no));
            }
            for (std::size_t j = 1; j < fields.size(); ++j) {
                if (fields[j] != fmt::format("x{}", j)) {
                    throw InvalidArgument(
                        fmt::format("line {}: header column {} should be x{}, got '{}'", line_no, j + 1, j, fields[j]));
                }
            }
            d = fields.size() - 1;
            have_header = true;
            continue;
        }
        if (fields.size() != d + 1) {
            throw InvalidArgument(fmt::format("line {}: expected {} fields, got {}", line_no, d + 1, fields.size()));
        }
        for (std::size_t c = 0; c < fields.size(); ++c) {
            values.push_back(parse_real(fields[c], line_no, c + 1));
        }
    }
    if (values.empty()) {
        throw InvalidArgument("no observations");
    }

    const auto n = static_cast<Eigen::Index>(values.size() / (d + 1));
    Sample s;
    s.x.resize(n, static_cast<Eigen::Index>(d));
    s.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto row = static_cast<std::size_t>(i) * (d + 1);
        s.y(i) = values[row];
        for (std::size_t j = 0; j < d; ++j) {
            s.x(i, static_cast<Eigen::Index>(j)) = values[row + 1 + j];
        }
    }
    return s;
}

Sample read_sample_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidArgument(fmt::format("cannot open '{}'", path.string()));
    }
    return read_sample_csv(in);
}

void write_sample_csv(std::ostream& out, const Sample& sample) {
    out << 'y';
    for (Eigen::Index j = 1; j <= sample.d(); ++j) {
        out << ",x" << j;
    }
    out << '\n';
    for (Eigen::Index i = 0; i < sample.n(); ++i) {
        fmt::print(out, "{}", sample.y(i));
        for (Eigen::Index j = 0; j < sample.d(); ++j) {
            fmt::print(out, ",{}", sample.x(i, j));
        }
        out << '\n';
    }
}

void write_sample_csv(const std::filesystem::path& path, const Sample& sample) {
    std::ofstream out(path);
    if (!out) {
        throw InvalidArgument(fmt::format("cannot write '{}'", path.string()));
    }
    write_sample_csv(out, sample);
}

}  // namespace wavedr
