#include "dcee/error.hpp"
#include "dcee/harness.hpp"

#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace dcee;

namespace {

bool same_trace(const Trace& a, const Trace& b) {
    if (a.records.size() != b.records.size() || a.columns() != b.columns()) {
        return false;
    }
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        if (a.row(i) != b.row(i)) {
            return false;
        }
    }
    return true;
}

ScenarioConfig short_mppt(Algo algo, std::int64_t steps = 200) {
    ScenarioConfig c = default_mppt_config(algo);
    c.run.steps = steps;
    c.ensemble.size = 20;
    c.run.band_window.reset();
    return c;
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("dcee_test_" + name);
}

const char* kMinimalLinear = R"({
  "scenario": {"kind": "quadratic-linear"},
  "plant": {"A": [[0, 1], [2, 1]], "B": [[1], [1]], "C": [[0, 1]], "x0": [0, 0], "poles": [0.4, 0.7]},
  "ensemble": {"size": 10, "prior_low": [0], "prior_high": [20]},
  "run": {"steps": 10}
})";

} // namespace

TEST_CASE("horizon 0 produces exactly the initial record") {
    for (ScenarioConfig cfg : {example_linear_config(), short_mppt(Algo::Dcee), short_mppt(Algo::Hc)}) {
        cfg.run.steps = 0;
        const Trace tr = run_scenario(cfg);
        REQUIRE(tr.records.size() == 1);
        CHECK(tr.records[0].k == 0);
        CHECK(tr.records[0].t == 0.0);
        CHECK_NOTHROW(tr.check());
    }
}

TEST_CASE("run_scenario has steps + 1 finite records") {
    ScenarioConfig cfg = example_linear_config();
    cfg.run.steps = 50;
    const Trace tr = run_scenario(cfg);
    CHECK(tr.records.size() == 51);
    CHECK_NOTHROW(tr.check());
    for (std::size_t i = 0; i < tr.records.size(); ++i) {
        CHECK(tr.records[i].k == std::int64_t(i));
        CHECK((tr.records[i].e - (tr.records[i].y - tr.records[i].xi)).norm() == 0.0);
    }
    CHECK(tr.records[0].x.norm() == 0.0);
}

TEST_CASE("same config and seed give bit-identical traces") {
    ScenarioConfig cfg = example_linear_config();
    cfg.run.steps = 300;
    CHECK(same_trace(run_scenario(cfg), run_scenario(cfg)));
    ScenarioConfig other = cfg;
    other.run.seed = 2;
    CHECK_FALSE(same_trace(run_scenario(cfg), run_scenario(other)));
    for (Algo a : {Algo::Dcee, Algo::Hc, Algo::Ic}) {
        CHECK(same_trace(run_scenario(short_mppt(a)), run_scenario(short_mppt(a))));
    }
}

TEST_CASE("noise stream does not depend on the ensemble size") {
    ScenarioConfig a = example_linear_config();
    a.run.steps = 20;
    ScenarioConfig b = a;
    b.ensemble.size = 7;
    const Trace ta = run_scenario(a);
    const Trace tb = run_scenario(b);
    // j_obs at step 0 depends only on y(0) and the first noise draw.
    CHECK(ta.records[0].j_obs == tb.records[0].j_obs);
}

TEST_CASE("noise-free example converges given enough steps") {
    ScenarioConfig cfg = example_linear_config(0.0);
    cfg.run.steps = 30000;
    const Trace tr = run_scenario(cfg);
    CHECK(std::abs(tr.records.back().theta_mean[0] - 1.0) < 1e-3);
    CHECK(std::abs(tr.records.back().y[0] - 1.0) < 1e-3);
}

TEST_CASE("gains report for the example system") {
    const GainsReport g = compute_gains(example_linear_config());
    CHECK(std::abs(g.Psi(0, 0) - 1.0 / 3.0) < 1e-12);
    CHECK(std::abs(g.Psi(1, 0) - 1.0) < 1e-12);
    CHECK(std::abs(g.G(0, 0) + 2.0 / 3.0) < 1e-12);
    CHECK(g.regulation_residual < 1e-10);
    CHECK(g.closed_loop_poles.size() == 2);
}

TEST_CASE("parse_config accepts a minimal file and fills defaults") {
    const ScenarioConfig c = parse_config(kMinimalLinear);
    CHECK(c.kind == ScenarioKind::QuadraticLinear);
    CHECK(c.ensemble.size == 10);
    CHECK(c.run.steps == 10);
    CHECK(c.controller.delta == 0.5);
    CHECK(c.quadratic.theta_true[0] == 1.0);
    CHECK_NOTHROW(run_scenario(c));
}

TEST_CASE("parse_config rejects unknown keys and bad values") {
    std::string text = kMinimalLinear;
    std::string typo = text;
    typo.replace(typo.find("\"steps\""), 7, "\"stepz\"");
    CHECK_THROWS_AS(parse_config(typo), ValidationError);
    try {
        (void)parse_config(typo);
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("stepz") != std::string::npos);
    }
    std::string extra = text;
    extra.insert(extra.rfind('}'), R"(, "bogus": {})");
    CHECK_THROWS_AS(parse_config(extra), ValidationError);
    CHECK_THROWS_AS(parse_config("{ not json"), ValidationError);
    std::string bad_size = text;
    bad_size.replace(bad_size.find("\"size\": 10"), 10, "\"size\": 0");
    CHECK_THROWS_AS(parse_config(bad_size), ValidationError);
    std::string bad_algo = text;
    bad_algo.insert(bad_algo.rfind('}'), R"(, "controller": {"algo": "pso"})");
    CHECK_THROWS_AS(parse_config(bad_algo), ValidationError);
    CHECK_THROWS_AS(load_config("/nonexistent/dcee.json"), IoError);
}

TEST_CASE("shipped configs parse and validate") {
    for (const char* name : {"sv_noisy.json", "sv_noisefree.json", "mppt_default.json"}) {
        const ScenarioConfig c = load_config(std::string(DCEE_CONFIG_DIR) + "/" + name);
        CHECK_NOTHROW(validate(c));
    }
    const ScenarioConfig m = load_config(std::string(DCEE_CONFIG_DIR) + "/mppt_default.json");
    CHECK(m.kind == ScenarioKind::Mppt);
    CHECK(m.compare_algos.size() == 3);
    CHECK(m.run.steps == 2000);
}

TEST_CASE("CSV round trip preserves every value") {
    ScenarioConfig cfg = example_linear_config();
    cfg.run.steps = 25;
    const Trace tr = run_scenario(cfg);
    const auto path = temp_path("roundtrip.csv");
    emit_csv(tr, path.string());
    const CsvTable t = read_csv(path.string());
    CHECK(t.header == tr.columns());
    REQUIRE(t.rows.size() == tr.records.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        CHECK(t.rows[i] == tr.row(i));
    }
    const std::vector<double> y = t.column("y");
    for (std::size_t i = 0; i < y.size(); ++i) {
        CHECK(y[i] == tr.records[i].y[0]);
    }
    CHECK(t.column_index("k") == 0);
    std::filesystem::remove(path);
}

TEST_CASE("CSV schema of linear and MPPT traces") {
    ScenarioConfig cfg = example_linear_config();
    cfg.run.steps = 0;
    const auto lin = run_scenario(cfg).columns();
    for (const char* c : {"k", "t", "x_0", "x_1", "y", "xi", "u", "theta_mean", "theta_std", "p_explore", "j_obs",
                          "r_mean", "e", "contraction_ok"}) {
        CHECK(std::find(lin.begin(), lin.end(), c) != lin.end());
    }
    const auto hc = run_scenario(short_mppt(Algo::Hc, 0)).columns();
    for (const char* c : {"power", "p_mpp", "v_mpp", "irradiance", "temperature", "current"}) {
        CHECK(std::find(hc.begin(), hc.end(), c) != hc.end());
    }
    CHECK(std::find(hc.begin(), hc.end(), "theta_mean") == hc.end());
}

TEST_CASE("empty-horizon trace writes a header and one row") {
    ScenarioConfig cfg = example_linear_config();
    cfg.run.steps = 0;
    std::ostringstream os;
    write_csv(to_table(run_scenario(cfg)), os);
    const std::string s = os.str();
    CHECK(std::count(s.begin(), s.end(), '\n') == 2);
}

TEST_CASE("read_csv handles quoting and rejects ragged rows") {
    std::istringstream ok("\"a,b\",c\n1,2\n");
    const CsvTable t = read_csv(ok);
    CHECK(t.header[0] == "a,b");
    CHECK(t.rows[0][1] == 2.0);
    std::istringstream ragged("a,b\n1\n");
    CHECK_THROWS_AS(read_csv(ragged), IoError);
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("x\"y") == "\"x\"\"y\"");
    CHECK_THROWS_AS(read_csv(std::string("/nonexistent/x.csv")), IoError);
}

TEST_CASE("metrics examples") {
    const std::vector<double> t{0.0, 1.0, 2.0, 3.0};
    const std::vector<double> oracle{100.0, 120.0, 110.0, 90.0};
    const std::vector<double> out{30.0, 31.0, 30.5, 30.7};
    const Metrics same = metrics(t, oracle, oracle, out);
    CHECK(same.efficiency == 1.0);
    CHECK(same.power_loss == 0.0);
    std::vector<double> half(oracle);
    for (double& p : half) {
        p *= 0.5;
    }
    const Metrics h = metrics(t, half, oracle, out);
    CHECK(h.efficiency == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(h.energy_max == doctest::Approx(325.0));
    CHECK(h.power_loss == doctest::Approx(162.5));
    const std::vector<double> short_t{0.0, 1.0};
    CHECK_THROWS_AS(metrics(short_t, oracle, oracle, out), ValidationError);
}

TEST_CASE("metrics on an MPPT trace stay within [0, 1]") {
    for (Algo a : {Algo::Dcee, Algo::Hc, Algo::Ic}) {
        const Metrics m = metrics(run_scenario(short_mppt(a)));
        CHECK(m.efficiency > 0.0);
        CHECK(m.efficiency <= 1.0);
        CHECK(m.power_loss >= -1e-9);
    }
    CHECK_THROWS_AS(metrics(run_scenario(example_linear_config())), ValidationError);
}

TEST_CASE("compare examples") {
    const std::vector<ScenarioConfig> one{short_mppt(Algo::Hc)};
    CHECK(compare(one).size() == 1);

    std::vector<ScenarioConfig> twice{short_mppt(Algo::Ic), short_mppt(Algo::Ic)};
    const auto rows = compare(twice);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].m.efficiency == rows[1].m.efficiency);
    CHECK(rows[0].m.energy_extracted == rows[1].m.energy_extracted);
    CHECK(rows[0].window_band == rows[1].window_band);

    ScenarioConfig expand = short_mppt(Algo::Dcee);
    expand.compare_algos = {Algo::Dcee, Algo::Hc, Algo::Ic};
    const auto cfgs = expand_compare(expand);
    REQUIRE(cfgs.size() == 3);
    CHECK(cfgs[1].controller.algo == Algo::Hc);
    const auto table = compare(cfgs);
    for (std::size_t i = 1; i < table.size(); ++i) {
        CHECK(table[i - 1].m.efficiency >= table[i].m.efficiency);
    }
    CHECK(render_table(table).find("hc") != std::string::npos);
}

TEST_CASE("compare rejects inconsistent shared sections") {
    ScenarioConfig a = short_mppt(Algo::Dcee);
    ScenarioConfig b = short_mppt(Algo::Hc);
    b.run.steps = 100;
    CHECK_THROWS_AS(compare({a, b}), ValidationError);
    ScenarioConfig c = short_mppt(Algo::Hc);
    c.mppt.profile = constant_profile(800.0, 25.0);
    CHECK_THROWS_AS(compare({a, c}), ValidationError);
    ScenarioConfig d = short_mppt(Algo::Hc);
    d.mppt.v_max = 40.0;
    CHECK_THROWS_AS(compare({a, d}), ValidationError);
    CHECK_THROWS_AS(compare({example_linear_config()}), ValidationError);
}

TEST_CASE("seed sweeps do not depend on DCEE_THREADS") {
    ScenarioConfig cfg = example_linear_config();
    cfg.run.steps = 200;
    const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6};
    ::setenv("DCEE_THREADS", "1", 1);
    CHECK(thread_cap() == 1);
    const auto serial = sweep_seeds(cfg, seeds);
    ::setenv("DCEE_THREADS", "4", 1);
    CHECK(thread_cap() == 4);
    const auto parallel = sweep_seeds(cfg, seeds);
    ::unsetenv("DCEE_THREADS");
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(same_trace(serial[i], parallel[i]));
    }
    CHECK(same_trace(serial[2], [&] {
        ScenarioConfig c = cfg;
        c.run.seed = 3;
        return run_scenario(c);
    }()));
}

TEST_CASE("parallel_map rethrows worker errors") {
    ::setenv("DCEE_THREADS", "3", 1);
    const auto fn = [](std::size_t i) -> int {
        if (i == 5) {
            throw NumericalError("boom");
        }
        return int(i);
    };
    CHECK_THROWS_AS(parallel_map<int>(10, fn), NumericalError);
    ::unsetenv("DCEE_THREADS");
}

TEST_CASE("band window measures the voltage range on a segment") {
    ScenarioConfig cfg = short_mppt(Algo::Hc, 400);
    const Trace tr = run_scenario(cfg);
    const double b = output_band(tr, 0.1, 0.3);
    CHECK(b >= 0.0);
    CHECK(b <= cfg.mppt.v_max - cfg.mppt.v_min);
    CHECK_THROWS_AS(output_band(tr, 5.0, 6.0), ValidationError);
}
