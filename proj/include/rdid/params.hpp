#pragma once

#include <cmath>
#include <string>

#include "rdid/errors.hpp"

namespace rdid {

// Physical and control parameters of the closed loop.
//   plant      u_t = lambda u_xx - k_true u,  u_x(0)=0,  u_x(1)=v,  y=u(1)
//   controller chi' = -rho (y - y_r),  v = chi - gamma (y - y_r)
//   observer   injection gain alpha at the measured boundary
struct SystemParams {
    double lambda = 0.0;
    double k_true = 0.0;
    double gamma = 0.0;
    double rho = 0.0;
    double y_r = 0.0;
    double alpha = 2.0;
};

// `estimation_run`: the run inverts chi/y_r to recover k, so y_r must be
// nonzero on top of the always-required positivity constraints.
inline void validate(const SystemParams& p, bool estimation_run) {
    auto bad = [](const std::string& what) { throw validation_error(what); };
    if (!(p.lambda > 0.0) || !std::isfinite(p.lambda)) bad("lambda must be positive and finite");
    if (!(p.k_true > 0.0) || !std::isfinite(p.k_true)) bad("k_true must be positive and finite");
    if (!(p.gamma > 0.0) || !std::isfinite(p.gamma)) bad("gamma must be positive and finite");
    if (!(p.rho > 0.0) || !std::isfinite(p.rho)) bad("rho must be positive and finite");
    if (!std::isfinite(p.y_r)) bad("y_r must be finite");
    if (!(p.alpha >= 0.0) || !std::isfinite(p.alpha)) bad("alpha must be nonnegative and finite");
    if (estimation_run && p.y_r == 0.0)
        bad("y_r must be nonzero when the gain estimate chi/y_r is in use");
}

} // namespace rdid
