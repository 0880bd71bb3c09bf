#include "stratexp/model.hpp"

#include <cmath>

namespace stratexp {

namespace {

void require(bool ok, const char* invariant) {
    if (!ok) throw ValidationError(std::string("invalid model parameters: ") + invariant);
}

}  // namespace

void validate(const ModelParams& p) {
    require(std::isfinite(p.r) && std::isfinite(p.s) && std::isfinite(p.sigma) &&
                std::isfinite(p.alpha0) && std::isfinite(p.alpha1) && std::isfinite(p.h) &&
                std::isfinite(p.lambda0) && std::isfinite(p.lambda1),
            "all parameters must be finite");
    require(p.r > 0.0, "r > 0");
    require(p.sigma > 0.0, "sigma > 0");
    require(p.lambda0 >= 0.0, "lambda0 >= 0");
    require(p.lambda0 <= p.lambda1, "lambda1 >= lambda0");
    // Without jumps (lambda1 = 0) the lump size never enters payoffs or beliefs.
    require(p.h > 0.0 || (p.lambda1 == 0.0 && p.h >= 0.0), "h > 0");
    require(p.N >= 1, "N >= 1");
    const double m0 = p.alpha0 + p.lambda0 * p.h;
    const double m1 = p.alpha1 + p.lambda1 * p.h;
    require(m0 < p.s, "m0 < s");
    require(p.s < m1, "s < m1");
}

DerivedQuantities derive(const ModelParams& p) {
    validate(p);
    DerivedQuantities d{};
    const double dalpha = p.alpha1 - p.alpha0;
    d.rho = dalpha == 0.0 ? 0.0 : (dalpha * dalpha) / (p.sigma * p.sigma);
    d.m0 = p.alpha0 + p.lambda0 * p.h;
    d.m1 = p.alpha1 + p.lambda1 * p.h;
    d.p_myopic = (p.s - d.m0) / (d.m1 - d.m0);
    return d;
}

Model::Model(const ModelParams& params) : params_(params), derived_(derive(params)) {}

double Model::discount(double delta) const {
    if (!(delta > 0.0) || !std::isfinite(delta))
        throw ValidationError("period length must be positive and finite");
    return std::exp(-params_.r * delta);
}

Model Model::with_players(int N) const {
    ModelParams p = params_;
    p.N = N;
    return Model(p);
}

}  // namespace stratexp
