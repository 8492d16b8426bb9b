#pragma once

#include <stdexcept>
#include <string>

namespace wavedr {

/// Raised when an input violates a precondition (bad config, shape mismatch,
/// malformed data). Callers at the CLI boundary map it to exit code 2.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Two eigenvalues are too close for a perturbation formula that divides by
/// their difference.
class EigenGapTooSmall : public std::domain_error {
public:
    EigenGapTooSmall(const std::string& what, double gap) : std::domain_error(what), gap_(gap) {}
    [[nodiscard]] double gap() const noexcept { return gap_; }

private:
    double gap_;
};

}  // namespace wavedr
