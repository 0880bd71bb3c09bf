#include "stratexp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace stratexp {

// Newton iteration on the orthonormal Hermite recurrence with the classical
// asymptotic starting guesses (largest root first, then successive roots).
GaussHermiteRule::GaussHermiteRule(std::size_t n) : nodes_(n), weights_(n) {
    if (n == 0) throw std::invalid_argument("Gauss-Hermite rule needs at least one node");
    const double pim4 = 1.0 / std::pow(std::numbers::pi, 0.25);
    const std::size_t m = (n + 1) / 2;
    const double nd = static_cast<double>(n);
    double z = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        if (i == 0) {
            z = std::sqrt(2.0 * nd + 1.0) - 1.85575 * std::pow(2.0 * nd + 1.0, -0.16667);
        } else if (i == 1) {
            z -= 1.14 * std::pow(nd, 0.426) / z;
        } else if (i == 2) {
            z = 1.86 * z - 0.86 * nodes_[0];
        } else if (i == 3) {
            z = 1.91 * z - 0.91 * nodes_[1];
        } else {
            z = 2.0 * z - nodes_[i - 2];
        }
        double pp = 0.0;
        int it = 0;
        for (; it < 100; ++it) {
            double p1 = pim4;
            double p2 = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                const double jd = static_cast<double>(j);
                p1 = z * std::sqrt(2.0 / (jd + 1.0)) * p2 - std::sqrt(jd / (jd + 1.0)) * p3;
            }
            pp = std::sqrt(2.0 * nd) * p2;
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
        }
        if (it == 100) throw std::runtime_error("Gauss-Hermite: Newton iteration did not converge");
        nodes_[i] = z;
        nodes_[n - 1 - i] = -z;
        weights_[i] = 2.0 / (pp * pp);
        weights_[n - 1 - i] = weights_[i];
    }
    // Stored ascending.
    std::reverse(nodes_.begin(), nodes_.end());
    std::reverse(weights_.begin(), weights_.end());
}

const GaussHermiteRule& GaussHermiteRule::standard() {
    static const GaussHermiteRule rule(64);
    return rule;
}

}  // namespace stratexp
