#include "dcee/baselines.hpp"

#include "dcee/error.hpp"
#include "dcee/log.hpp"

#include <cmath>

namespace dcee {

void validate(const HcState& state) {
    if (!(state.step > 0.0) || !std::isfinite(state.step)) {
        throw ValidationError("hill-climbing step must be positive");
    }
    if (state.last_dir != 1 && state.last_dir != -1) {
        throw ValidationError("hill-climbing direction must be +1 or -1");
    }
}

void validate(const IcState& state) {
    if (!(state.step > 0.0) || !std::isfinite(state.step)) {
        throw ValidationError("incremental-conductance step must be positive");
    }
    if (!(state.deadband >= 0.0)) {
        throw ValidationError("incremental-conductance deadband must be nonnegative");
    }
}

BaselineStep hc_step(HcState& state, double p_now, double v_now) {
    int dir = +1;
    if (state.primed) {
        dir = p_now > state.p_prev ? state.last_dir : -state.last_dir;
    }
    state.v_prev = v_now;
    state.p_prev = p_now;
    state.last_dir = dir;
    state.primed = true;
    return {dir * state.step, false};
}

BaselineStep ic_step(IcState& state, double v_now, double i_now) {
    BaselineStep out;
    if (!state.primed) {
        out.dv = state.step;
    } else if (v_now == 0.0) {
        log::warn("incremental conductance: zero terminal voltage, holding");
        out.held = true;
    } else {
        const double dv = v_now - state.v_prev;
        const double di = i_now - state.i_prev;
        const double eps = state.deadband;
        if (std::abs(dv) < eps) {
            if (std::abs(di) < eps) {
                out.held = true;
            } else {
                out.dv = di > 0.0 ? state.step : -state.step;
            }
        } else {
            // dI/dV + I/V is proportional to dP/dV.
            const double g = di / dv + i_now / v_now;
            if (std::abs(g) < eps) {
                out.held = true;
            } else {
                out.dv = g > 0.0 ? state.step : -state.step;
            }
        }
    }
    state.v_prev = v_now;
    state.i_prev = i_now;
    state.primed = true;
    return out;
}

} // namespace dcee
