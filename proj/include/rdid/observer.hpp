#pragma once

#include <cmath>

#include "rdid/control_loop.hpp"
#include "rdid/steady_state.hpp"
#include "rdid/tridiag.hpp"

namespace rdid {

// Boundary-injected state observer. k_hat is the gain estimate in force for
// the current step; it is held constant across the step and refreshed by the
// caller between steps.
struct ObserverState {
    Field u_hat;
    double k_hat = 0.0;
    double t = 0.0;
};

// One theta-step of
//   u_hat_t = lambda u_hat_xx - k_hat u_hat,
//   u_hat_x(0) = 0,  u_hat_x(1) = v + alpha (y - u_hat(1)),
// with the measured pair (y, v) held constant over the step. The injection
// term folds into the last diagonal (-alpha b_last) and an affine source
// b_last (v + alpha y); the matrix depends on k_hat and is refactored per
// call. The grid is implied by the field length.
inline ObserverState observer_step(const ObserverState& obs, double y_meas, double v_applied,
                                   const SystemParams& p, const LoopConfig& cfg) {
    const size_t n = obs.u_hat.size();
    if (n < 3) throw validation_error("observer_step: field needs at least 3 nodes");
    if (!(obs.k_hat >= 0.0) || !std::isfinite(obs.k_hat))
        throw validation_error("observer_step: k_hat must be nonnegative and finite");
    const Grid g = Grid::uniform(static_cast<int>(n));
    Operator op = assemble_operator(p.lambda, obs.k_hat, g);
    op.A.diag.back() -= p.alpha * op.b_last;

    Field source(n, 0.0);
    source.back() = op.b_last * (v_applied + p.alpha * y_meas);

    ObserverState next = obs;
    next.u_hat = advance_field(obs.u_hat, op.A, source, cfg.dt, theta_of(cfg.scheme));
    next.t += cfg.dt;
    return next;
}

// Pointwise observer error eta = u - u_hat.
inline Field error_field(const PlantState& plant, const ObserverState& obs) {
    if (plant.u.size() != obs.u_hat.size())
        throw validation_error("error_field: mismatched field lengths");
    Field eta(plant.u.size());
    for (size_t i = 0; i < eta.size(); ++i) eta[i] = plant.u[i] - obs.u_hat[i];
    return eta;
}

} // namespace rdid
