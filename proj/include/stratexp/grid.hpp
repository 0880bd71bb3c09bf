#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "stratexp/beliefs.hpp"

namespace stratexp {

/// Strictly increasing beliefs 0 = p_0 < ... < p_M = 1.
class BeliefGrid {
public:
    explicit BeliefGrid(std::vector<double> nodes);

    /// `n` uniform nodes on [0, 1] merged with the given interior beliefs.
    /// Extra nodes closer than 1e-12 to an existing node replace it.
    static BeliefGrid uniform(std::size_t n, std::span<const double> extra = {});

    std::size_t size() const noexcept { return nodes_.size(); }
    double operator[](std::size_t i) const noexcept { return nodes_[i]; }
    std::span<const double> nodes() const noexcept { return nodes_; }

    /// Index i with p_i <= p < p_{i+1} (i = size-2 for p = 1).
    std::size_t cell(double p) const;
    /// Index of the node equal to p, or size() if p is not a node.
    std::size_t find(double p) const;

private:
    std::vector<double> nodes_;
};

/// Function of the belief known at grid nodes, piecewise linear in between.
class BeliefGridFn {
public:
    BeliefGridFn(BeliefGrid grid, std::vector<double> values);
    BeliefGridFn(const BeliefGrid& grid, double constant);

    const BeliefGrid& grid() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    std::vector<double>& mutable_values() noexcept { return values_; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }

    /// Linear interpolation; arguments outside [0, 1] are clamped.
    double operator()(double p) const;

private:
    BeliefGrid grid_;
    std::vector<double> values_;
};

/// sup_i |a_i - b_i| over nodes of the same grid.
double sup_distance(const BeliefGridFn& a, const BeliefGridFn& b);

/// E^delta_K as a sparse row-stochastic matrix on a grid: row i holds the
/// interpolation weights of the posterior distribution from prior p_i.
class ExpectationMatrix {
public:
    ExpectationMatrix(const TransitionKernel& kernel, const BeliefGrid& grid);

    int K() const noexcept { return K_; }
    std::size_t rows() const noexcept { return row_start_.size() - 1; }
    std::size_t nonzeros() const noexcept { return cols_.size(); }

    double apply_row(std::size_t i, std::span<const double> values) const {
        double acc = 0.0;
        for (std::size_t k = row_start_[i]; k < row_start_[i + 1]; ++k) acc += weights_[k] * values[cols_[k]];
        return acc;
    }
    void apply(std::span<const double> values, std::span<double> out) const;

private:
    int K_;
    std::vector<std::size_t> row_start_;
    std::vector<std::uint32_t> cols_;
    std::vector<double> weights_;
};

}  // namespace stratexp
