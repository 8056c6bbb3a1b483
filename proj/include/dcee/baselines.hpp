#pragma once

// Reference MPPT trackers: hill climbing (perturb and observe) and
// incremental conductance. Both emit a voltage increment per tick.

#include <optional>

namespace dcee {

struct HcState {
    double v_prev = 0.0;
    double p_prev = 0.0;
    int last_dir = +1;
    double step = 0.5;
    bool primed = false; // false until the first measurement is seen
};

struct IcState {
    double v_prev = 0.0;
    double i_prev = 0.0;
    double step = 0.5;
    double deadband = 1e-3;
    bool primed = false;
};

struct BaselineStep {
    double dv = 0.0;
    bool held = false; // IC only: the MPP (or no-change) branch fired
};

// Returns the move and the updated state. The first call moves +step.
BaselineStep hc_step(HcState& state, double p_now, double v_now);

// The first call has no increment to work with and moves +step. A zero
// terminal voltage holds without dividing.
BaselineStep ic_step(IcState& state, double v_now, double i_now);

void validate(const HcState& state);
void validate(const IcState& state);

} // namespace dcee
