#include "stratexp/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace stratexp {

BeliefGrid::BeliefGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.size() < 2) throw ValidationError("belief grid needs at least two nodes");
    if (nodes_.front() != 0.0 || nodes_.back() != 1.0) throw ValidationError("belief grid must span [0, 1]");
    for (std::size_t i = 1; i < nodes_.size(); ++i)
        if (!(nodes_[i] > nodes_[i - 1])) throw ValidationError("belief grid must be strictly increasing");
}

BeliefGrid BeliefGrid::uniform(std::size_t n, std::span<const double> extra) {
    if (n < 2) throw ValidationError("grid size must be at least 2");
    std::vector<double> nodes(n);
    for (std::size_t i = 0; i < n; ++i) nodes[i] = static_cast<double>(i) / static_cast<double>(n - 1);
    nodes.back() = 1.0;
    for (double e : extra) {
        if (!(e > 0.0 && e < 1.0)) continue;
        auto it = std::lower_bound(nodes.begin(), nodes.end(), e);
        if (it != nodes.end() && std::abs(*it - e) < 1e-12) {
            if (*it != 0.0 && *it != 1.0) *it = e;
            continue;
        }
        if (it != nodes.begin() && std::abs(*(it - 1) - e) < 1e-12) {
            if (*(it - 1) != 0.0) *(it - 1) = e;
            continue;
        }
        nodes.insert(it, e);
    }
    return BeliefGrid(std::move(nodes));
}

std::size_t BeliefGrid::cell(double p) const {
    if (p <= 0.0) return 0;
    if (p >= 1.0) return nodes_.size() - 2;
    const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), p);
    return static_cast<std::size_t>(it - nodes_.begin()) - 1;
}

std::size_t BeliefGrid::find(double p) const {
    const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), p);
    if (it != nodes_.end() && *it == p) return static_cast<std::size_t>(it - nodes_.begin());
    return nodes_.size();
}

BeliefGridFn::BeliefGridFn(BeliefGrid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size())
        throw ValidationError("grid function: " + std::to_string(values_.size()) + " values for " +
                              std::to_string(grid_.size()) + " nodes");
}

BeliefGridFn::BeliefGridFn(const BeliefGrid& grid, double constant)
    : grid_(grid), values_(grid.size(), constant) {}

double BeliefGridFn::operator()(double p) const {
    if (p <= 0.0) return values_.front();
    if (p >= 1.0) return values_.back();
    const std::size_t i = grid_.cell(p);
    const double a = grid_[i];
    const double b = grid_[i + 1];
    const double t = (p - a) / (b - a);
    return values_[i] + t * (values_[i + 1] - values_[i]);
}

double sup_distance(const BeliefGridFn& a, const BeliefGridFn& b) {
    if (a.grid().size() != b.grid().size()) throw ValidationError("sup_distance: grid mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < a.grid().size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

ExpectationMatrix::ExpectationMatrix(const TransitionKernel& kernel, const BeliefGrid& grid) : K_(kernel.K()) {
    const std::size_t n = grid.size();
    row_start_.reserve(n + 1);
    row_start_.push_back(0);
    std::vector<double> scratch(n, 0.0);
    std::vector<std::uint32_t> touched;
    auto add = [&](std::size_t col, double w) {
        if (w == 0.0) return;
        if (scratch[col] == 0.0) touched.push_back(static_cast<std::uint32_t>(col));
        scratch[col] += w;  // weights are non-negative, so a touched column never returns to 0
    };
    for (std::size_t i = 0; i < n; ++i) {
        touched.clear();
        kernel.for_each_outcome(grid[i], [&](double w, double post) {
            if (post <= 0.0) {
                add(0, w);
            } else if (post >= 1.0) {
                add(n - 1, w);
            } else {
                const std::size_t c = grid.cell(post);
                const double t = (post - grid[c]) / (grid[c + 1] - grid[c]);
                add(c, w * (1.0 - t));
                add(c + 1, w * t);
            }
        });
        std::sort(touched.begin(), touched.end());
        for (auto c : touched) {
            cols_.push_back(c);
            weights_.push_back(scratch[c]);
            scratch[c] = 0.0;
        }
        row_start_.push_back(cols_.size());
    }
}

void ExpectationMatrix::apply(std::span<const double> values, std::span<double> out) const {
    for (std::size_t i = 0; i < rows(); ++i) out[i] = apply_row(i, values);
}

}  // namespace stratexp
