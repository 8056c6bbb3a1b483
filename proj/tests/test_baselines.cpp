#include "dcee/baselines.hpp"
#include "dcee/error.hpp"
#include "dcee/pv.hpp"

#include "doctest.h"

#include <algorithm>
#include <cmath>

using namespace dcee;

namespace {

HcState primed_hc(double v, double p, int dir) {
    HcState s;
    s.v_prev = v;
    s.p_prev = p;
    s.last_dir = dir;
    s.primed = true;
    return s;
}

IcState primed_ic(double v, double i) {
    IcState s;
    s.v_prev = v;
    s.i_prev = i;
    s.primed = true;
    return s;
}

// Spacing of the conductance residual dI/dV + I/V between neighbouring
// voltages one step apart near the maximiser: the discretization error a
// deadband has to exceed for IC to settle.
double conductance_spacing(const PvParams& pv, double g, double t, double v_star, double step) {
    const auto residual = [&](double v) {
        const double h = 1e-4;
        const double di = (pv_current(pv, v + h, g, t).current - pv_current(pv, v - h, g, t).current) / (2.0 * h);
        return di + pv_current(pv, v, g, t).current / v;
    };
    return std::abs(residual(v_star + 0.5) - residual(v_star - 0.5)) * step;
}

} // namespace

TEST_CASE("hc_step examples") {
    HcState fresh;
    CHECK(hc_step(fresh, 100.0, 30.0).dv == 0.5);
    CHECK(fresh.primed);

    HcState rose = primed_hc(30.0, 100.0, +1);
    CHECK(hc_step(rose, 101.0, 30.5).dv == 0.5);

    HcState fell = primed_hc(30.0, 100.0, +1);
    CHECK(hc_step(fell, 99.0, 30.5).dv == -0.5);
    CHECK(fell.last_dir == -1);

    HcState fell_down = primed_hc(30.0, 100.0, -1);
    CHECK(hc_step(fell_down, 99.0, 29.5).dv == 0.5);
}

TEST_CASE("ic_step examples") {
    IcState fresh;
    CHECK(ic_step(fresh, 30.0, 5.0).dv == 0.5);

    // dI/dV = -I/V: moving 10 -> 11 V with I going 5 -> 55/12 A.
    IcState at_mpp = primed_ic(10.0, 5.0);
    const BaselineStep hold = ic_step(at_mpp, 11.0, 55.0 / 12.0);
    CHECK(hold.dv == 0.0);
    CHECK(hold.held);

    IcState still = primed_ic(30.0, 5.0);
    CHECK(ic_step(still, 30.0, 5.0).dv == 0.0);

    IcState left = primed_ic(20.0, 5.0);
    CHECK(ic_step(left, 20.5, 4.99).dv == 0.5); // dI/dV = -0.02 > -I/V

    IcState right = primed_ic(40.0, 3.0);
    CHECK(ic_step(right, 40.5, 2.0).dv == -0.5); // dI/dV = -2 < -I/V

    IcState brighter = primed_ic(30.0, 5.0);
    CHECK(ic_step(brighter, 30.0, 5.5).dv == 0.5);
    IcState darker = primed_ic(30.0, 5.0);
    CHECK(ic_step(darker, 30.0, 4.5).dv == -0.5);

    IcState zero_v = primed_ic(1.0, 5.0);
    const BaselineStep z = ic_step(zero_v, 0.0, 5.35);
    CHECK(z.dv == 0.0);
    CHECK(z.held);
}

TEST_CASE("baseline state validation") {
    HcState hc;
    hc.step = 0.0;
    CHECK_THROWS_AS(validate(hc), ValidationError);
    hc.step = 0.5;
    hc.last_dir = 0;
    CHECK_THROWS_AS(validate(hc), ValidationError);
    IcState ic;
    ic.step = -1.0;
    CHECK_THROWS_AS(validate(ic), ValidationError);
    ic.step = 0.1;
    ic.deadband = -1.0;
    CHECK_THROWS_AS(validate(ic), ValidationError);
}

TEST_CASE("property: IC reaches the maximum power point on a frozen curve and holds") {
    const PvParams pv;
    const MppPoint mpp = mpp_oracle(pv, 1000.0, 25.0);
    for (double v0 : {20.0, 30.0, 39.0}) {
        IcState s;
        s.step = 0.1;
        s.deadband = conductance_spacing(pv, 1000.0, 25.0, mpp.v_star, s.step);
        double v = v0;
        int first_hold = -1;
        for (int k = 0; k < 2000; ++k) {
            const double i = pv_current(pv, v, 1000.0, 25.0).current;
            const BaselineStep st = ic_step(s, v, i);
            if (first_hold < 0 && st.dv == 0.0 && k > 0) {
                first_hold = k;
            }
            if (first_hold >= 0) {
                CHECK(st.dv == 0.0);
            }
            v += st.dv;
        }
        REQUIRE(first_hold >= 0);
        CHECK(std::abs(v - mpp.v_star) < 0.5);
    }
}

TEST_CASE("IC with a deadband below the discretization error keeps moving") {
    const PvParams pv;
    IcState s;
    s.step = 0.1;
    s.deadband = 1e-4;
    double v = 30.0;
    int moves_late = 0;
    for (int k = 0; k < 1000; ++k) {
        const BaselineStep st = ic_step(s, v, pv_current(pv, v, 1000.0, 25.0).current);
        if (k >= 900 && st.dv != 0.0) {
            ++moves_late;
        }
        v += st.dv;
    }
    CHECK(moves_late > 0);
}

TEST_CASE("property: HC settles into a bounded limit cycle around the maximiser") {
    const PvParams pv;
    const MppPoint mpp = mpp_oracle(pv, 1000.0, 25.0);
    for (double step : {0.1, 0.5, 1.0}) {
        HcState s;
        s.step = step;
        double v = 25.0;
        double lo = 1e9;
        double hi = -1e9;
        for (int k = 0; k < 3000; ++k) {
            const double p = pv_power(pv, v, 1000.0, 25.0);
            v += hc_step(s, p, v).dv;
            if (k >= 2500) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
        CHECK(hi - lo <= 2.0 * step + 1e-9);
        CHECK(hi - lo > 0.0);
        CHECK(lo <= mpp.v_star + step);
        CHECK(hi >= mpp.v_star - step);
    }
}
