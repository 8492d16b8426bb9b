#include "wavedr/wavelet.hpp"

#include <algorithm>
#include <cctype>
#include <numbers>

#include <Eigen/Dense>

#include "wavedr/error.hpp"

namespace wavedr {

namespace {

std::vector<double> daubechies2_filter() {
    const double s3 = std::sqrt(3.0);
    const double norm = 4.0 * std::numbers::sqrt2;
    return {(1.0 + s3) / norm, (3.0 + s3) / norm, (3.0 - s3) / norm, (1.0 - s3) / norm};
}

// Values of phi at the integers 0..S: the eigenvector of the refinement
// operator phi(m) = sqrt(2) sum_k h_k phi(2m - k) for eigenvalue 1, normalized
// so that the integer values sum to one.
std::vector<double> integer_values(std::span<const double> h, int support) {
    const int interior = support - 1;
    Eigen::MatrixXd system = Eigen::MatrixXd::Zero(interior + 1, interior);
    for (int m = 1; m <= interior; ++m) {
        for (int p = 1; p <= interior; ++p) {
            const int k = 2 * m - p;
            if (k >= 0 && k < static_cast<int>(h.size())) {
                system(m - 1, p - 1) = std::numbers::sqrt2 * h[static_cast<std::size_t>(k)];
            }
        }
        system(m - 1, m - 1) -= 1.0;
    }
    system.row(interior).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(interior + 1);
    rhs(interior) = 1.0;
    const Eigen::VectorXd sol = system.colPivHouseholderQr().solve(rhs);

    std::vector<double> values(static_cast<std::size_t>(support) + 1, 0.0);
    for (int p = 1; p <= interior; ++p) {
        values[static_cast<std::size_t>(p)] = sol(p - 1);
    }
    return values;
}

std::vector<double> cascade(std::span<const double> h, int support, int depth) {
    const long scale = 1L << depth;
    const long last = support * scale;
    std::vector<double> table(static_cast<std::size_t>(last) + 1, 0.0);

    const auto ints = integer_values(h, support);
    for (int m = 0; m <= support; ++m) {
        table[static_cast<std::size_t>(m * scale)] = ints[static_cast<std::size_t>(m)];
    }

    for (int level = 1; level <= depth; ++level) {
        const long stride = 1L << (depth - level);
        for (long m = stride; m < last; m += 2 * stride) {
            double acc = 0.0;
            for (std::size_t k = 0; k < h.size(); ++k) {
                const long src = 2 * m - static_cast<long>(k) * scale;
                if (src >= 0 && src <= last) {
                    acc += h[k] * table[static_cast<std::size_t>(src)];
                }
            }
            table[static_cast<std::size_t>(m)] = std::numbers::sqrt2 * acc;
        }
    }
    return table;
}

}  // namespace

WaveletFamily parse_wavelet_family(std::string_view tag) {
    std::string lower(tag);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "haar" || lower == "h") {
        return WaveletFamily::haar;
    }
    if (lower == "daubechies2" || lower == "db2" || lower == "d") {
        return WaveletFamily::daubechies2;
    }
    throw InvalidArgument("unsupported wavelet family '" + std::string(tag) + "'");
}

std::string_view to_string(WaveletFamily family) {
    switch (family) {
        case WaveletFamily::haar:
            return "haar";
        case WaveletFamily::daubechies2:
            return "daubechies2";
    }
    return "unknown";
}

FatherWavelet::FatherWavelet(WaveletFamily family, int support, int depth, std::vector<double> filter,
                             std::vector<double> table)
    : family_(family),
      support_(support),
      depth_(depth),
      scale_(std::ldexp(1.0, depth)),
      filter_(std::move(filter)),
      table_(std::move(table)) {}

FatherWavelet build_wavelet(WaveletFamily family, int depth) {
    if (depth < 1 || depth > 24) {
        throw InvalidArgument("cascade depth must be in [1, 24], got " + std::to_string(depth));
    }
    switch (family) {
        case WaveletFamily::haar: {
            const std::size_t cells = std::size_t{1} << depth;
            std::vector<double> table(cells + 1, 1.0);
            table.back() = 0.0;
            std::vector<double> filter{std::numbers::sqrt2 / 2.0, std::numbers::sqrt2 / 2.0};
            return FatherWavelet(family, 1, depth, std::move(filter), std::move(table));
        }
        case WaveletFamily::daubechies2: {
            auto filter = daubechies2_filter();
            auto table = cascade(filter, 3, depth);
            return FatherWavelet(family, 3, depth, std::move(filter), std::move(table));
        }
    }
    throw InvalidArgument("unsupported wavelet family tag " + std::to_string(static_cast<int>(family)));
}

double FatherWavelet::kernel(double x, double y) const noexcept {
    if (family_ == WaveletFamily::haar) {
        return std::floor(x) == std::floor(y) ? 1.0 : 0.0;
    }
    const auto fx = static_cast<long>(std::floor(x));
    const auto fy = static_cast<long>(std::floor(y));
    double sum = 0.0;
    for (long k = std::max(fx, fy) - support_ + 1; k <= std::min(fx, fy); ++k) {
        const auto kd = static_cast<double>(k);
        sum += (*this)(x - kd) * (*this)(y - kd);
    }
    return sum;
}

double FatherWavelet::table_integral() const noexcept {
    double sum = 0.0;
    for (double v : table_) {
        sum += v;
    }
    sum -= 0.5 * (table_.front() + table_.back());
    return sum / scale_;
}

double FatherWavelet::max_refinement_residual() const noexcept {
    const long scale = static_cast<long>(scale_);
    const long last = static_cast<long>(table_.size()) - 1;
    double worst = 0.0;
    for (long m = 0; m <= last; m += 2) {
        double acc = 0.0;
        for (std::size_t k = 0; k < filter_.size(); ++k) {
            const long src = 2 * m - static_cast<long>(k) * scale;
            if (src >= 0 && src <= last) {
                acc += filter_[k] * table_[static_cast<std::size_t>(src)];
            }
        }
        worst = std::max(worst, std::abs(table_[static_cast<std::size_t>(m)] - std::numbers::sqrt2 * acc));
    }
    return worst;
}

double FatherWavelet::on_closed_cell(double t, long cell) const noexcept {
    if (cell < 0 || cell >= support_) {
        return 0.0;
    }
    if (family_ == WaveletFamily::haar) {
        return 1.0;
    }
    const double lo = static_cast<double>(cell);
    return interpolate(std::clamp(t, lo, lo + 1.0));
}

double KernelDiagnostics::max_normalization_residual() const noexcept {
    double worst = 0.0;
    for (const auto& p : probes) {
        worst = std::max(worst, p.normalization_residual);
    }
    return worst;
}

KernelDiagnostics kernel_diagnostics(const FatherWavelet& w, std::span<const double> probes, double step) {
    if (!(step > 0.0)) {
        throw InvalidArgument("quadrature step must be positive");
    }
    const int support = w.support();
    KernelDiagnostics out;
    out.probes.reserve(probes.size());

    for (double x : probes) {
        if (!std::isfinite(x)) {
            throw InvalidArgument("kernel diagnostics probe must be finite");
        }
        ProbeDiagnostics diag;
        diag.x = x;
        std::array<double, 4> integrals{};  // moments 0..3

        // K(x, y) for y in the closed integer cell m; factors phi(y - k) are
        // read with one-sided limits at the cell edges.
        auto integrand_in_cell = [&](double y, long m) {
            double k_sum = 0.0;
            w.for_each_translate(x, [&](long k, double phi_x) {
                if (phi_x != 0.0) {
                    k_sum += phi_x * w.on_closed_cell(y - static_cast<double>(k), m - k);
                }
            });
            return k_sum;
        };

        const double lo = x - support;
        const double hi = x + support;
        for (long m = static_cast<long>(std::floor(lo)); static_cast<double>(m) < hi; ++m) {
            const double a = std::max(lo, static_cast<double>(m));
            const double b = std::min(hi, static_cast<double>(m + 1));
            if (b <= a) {
                continue;
            }
            const auto panels = static_cast<long>(std::ceil((b - a) / step));
            const double dy = (b - a) / static_cast<double>(panels);
            for (long i = 0; i <= panels; ++i) {
                const double y = (i == panels) ? b : a + static_cast<double>(i) * dy;
                const double weight = (i == 0 || i == panels) ? 0.5 * dy : dy;
                const double kv = integrand_in_cell(y, m) * weight;
                const double u = y - x;
                integrals[0] += kv;
                integrals[1] += kv * u;
                integrals[2] += kv * u * u;
                integrals[3] += kv * u * u * u;
            }
        }
        diag.moment_residuals = {integrals[1], integrals[2], integrals[3]};
        diag.normalization_residual = std::abs(integrals[0] - 1.0);
        out.probes.push_back(diag);
    }
    return out;
}

}  // namespace wavedr
