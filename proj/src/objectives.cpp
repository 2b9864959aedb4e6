#include "geossl/objectives.hpp"

namespace geossl::objectives {

RegressionKind regression_kind_from_string(const std::string& s) {
    if (s == "mse") return RegressionKind::mse;
    if (s == "logcosh") return RegressionKind::logcosh;
    throw ValidationError("unknown regression kind: '" + s + "'");
}

std::string to_string(RegressionKind k) {
    return k == RegressionKind::mse ? "mse" : "logcosh";
}

LossReport combined_loss(double contrastive, double regression, double lambda) {
    if (!std::isfinite(contrastive) || !std::isfinite(regression) || !std::isfinite(lambda))
        throw DivergenceError("non-finite loss component: contrastive=" +
                              std::to_string(contrastive) +
                              " regression=" + std::to_string(regression));
    LossReport r;
    r.contrastive = contrastive;
    r.regression = regression;
    r.lambda = lambda;
    r.total = contrastive + lambda * regression;
    if (!std::isfinite(r.total)) throw DivergenceError("non-finite combined loss");
    return r;
}

}  // namespace geossl::objectives
