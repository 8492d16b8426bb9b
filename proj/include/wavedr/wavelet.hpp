#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wavedr {

enum class WaveletFamily { haar, daubechies2 };

/// Accepts "haar"/"h" and "daubechies2"/"db2"/"d" (case-insensitive).
WaveletFamily parse_wavelet_family(std::string_view tag);
std::string_view to_string(WaveletFamily family);

inline constexpr int kDefaultCascadeDepth = 12;

/// Compactly supported father wavelet (scaling function) on [0, S].
///
/// Daubechies2 values are tabulated on the dyadic grid m * 2^-L by the cascade
/// algorithm and linearly interpolated in between. Haar is evaluated
/// analytically as the indicator of [0, 1); its table is kept only for
/// inspection.
///
/// Immutable after construction.
class FatherWavelet {
public:
    [[nodiscard]] WaveletFamily family() const noexcept { return family_; }
    /// Right end S of the support [0, S].
    [[nodiscard]] int support() const noexcept { return support_; }
    [[nodiscard]] int depth() const noexcept { return depth_; }
    [[nodiscard]] std::span<const double> filter() const noexcept { return filter_; }
    /// phi(m * 2^-depth) for 0 <= m <= support * 2^depth.
    [[nodiscard]] std::span<const double> table() const noexcept { return table_; }

    /// phi(x); zero outside [0, S).
    [[nodiscard]] double operator()(double x) const noexcept {
        if (family_ == WaveletFamily::haar) {
            return (x >= 0.0 && x < 1.0) ? 1.0 : 0.0;
        }
        if (!(x >= 0.0) || x >= support_) {
            return 0.0;
        }
        return interpolate(x);
    }

    /// Calls fn(k, phi(t - k)) for every integer k with t - k in [0, S), in
    /// ascending k.
    template <class Fn>
    void for_each_translate(double t, Fn&& fn) const {
        const auto top = static_cast<long>(std::floor(t));
        for (long k = top - support_ + 1; k <= top; ++k) {
            fn(k, (*this)(t - static_cast<double>(k)));
        }
    }

    /// Projection kernel K(x, y) = sum_k phi(x - k) phi(y - k), restricted to
    /// the finitely many k where both factors can be nonzero.
    [[nodiscard]] double kernel(double x, double y) const noexcept;

    /// Trapezoid rule applied to the dyadic table; approximates the integral of phi.
    [[nodiscard]] double table_integral() const noexcept;

    /// max |phi(x) - sqrt(2) sum_k h_k phi(2x - k)| over the table points on
    /// the depth-(L-1) grid.
    [[nodiscard]] double max_refinement_residual() const noexcept;

    /// phi restricted to the closed cell [c, c+1], evaluated at t (clamped into
    /// the cell). Differs from operator() only at jump points of Haar.
    [[nodiscard]] double on_closed_cell(double t, long cell) const noexcept;

private:
    friend FatherWavelet build_wavelet(WaveletFamily, int);

    FatherWavelet(WaveletFamily family, int support, int depth, std::vector<double> filter,
                  std::vector<double> table);

    [[nodiscard]] double interpolate(double x) const noexcept {
        const double u = x * scale_;
        const auto i = static_cast<std::size_t>(u);
        if (i + 1 >= table_.size()) {
            return table_.back();
        }
        const double frac = u - static_cast<double>(i);
        return table_[i] + frac * (table_[i + 1] - table_[i]);
    }

    WaveletFamily family_;
    int support_;
    int depth_;
    double scale_;  // 2^depth
    std::vector<double> filter_;
    std::vector<double> table_;
};

/// Builds the scaling function table of the given family by the cascade
/// algorithm. Throws InvalidArgument for depth < 1 or an unknown family.
FatherWavelet build_wavelet(WaveletFamily family, int depth = kDefaultCascadeDepth);

inline double eval_phi(const FatherWavelet& w, double x) noexcept { return w(x); }

inline double projection_kernel(const FatherWavelet& w, double x, double y) noexcept {
    return w.kernel(x, y);
}

struct ProbeDiagnostics {
    double x = 0.0;
    /// Integral of K(x, y) (y - x)^k dy for k = 1, 2, 3.
    std::array<double, 3> moment_residuals{};
    /// |integral of K(x, y) dy - 1|.
    double normalization_residual = 0.0;
};

struct KernelDiagnostics {
    std::vector<ProbeDiagnostics> probes;

    [[nodiscard]] double max_normalization_residual() const noexcept;
};

inline constexpr double kDiagnosticQuadratureStep = 1.0 / 1024.0;

/// Measures the moment and normalization residuals of the projection kernel
/// by composite trapezoid quadrature over [x - S, x + S]. The window is split
/// at integers so that Haar's jumps never fall inside a panel.
KernelDiagnostics kernel_diagnostics(const FatherWavelet& w, std::span<const double> probes,
                                     double step = kDiagnosticQuadratureStep);

}  // namespace wavedr
