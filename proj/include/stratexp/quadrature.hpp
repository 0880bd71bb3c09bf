#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace stratexp {

/// Gauss-Hermite rule for the weight exp(-x^2): sum_i w_i f(x_i) approximates
/// the integral of exp(-x^2) f(x) over the real line. Nodes are ascending.
class GaussHermiteRule {
public:
    explicit GaussHermiteRule(std::size_t n);

    std::size_t size() const noexcept { return nodes_.size(); }
    std::span<const double> nodes() const noexcept { return nodes_; }
    std::span<const double> weights() const noexcept { return weights_; }

    /// Shared 64-point rule used by the belief kernels.
    static const GaussHermiteRule& standard();

private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

}  // namespace stratexp
