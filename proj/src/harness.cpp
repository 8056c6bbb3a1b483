#include "dcee/harness.hpp"

#include "dcee/baselines.hpp"
#include "dcee/log.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

namespace dcee {
namespace {

double trapezoid(std::span<const double> t, std::span<const double> v) {
    double acc = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) {
        acc += 0.5 * (t[i] - t[i - 1]) * (v[i] + v[i - 1]);
    }
    return acc;
}

Mat feedback_gain(const ScenarioConfig& cfg) {
    if (cfg.linear.K) {
        return *cfg.linear.K;
    }
    return stabilizing_gain(cfg.linear.A, cfg.linear.B, cfg.linear.poles);
}

double draw_noise(const NoiseSpec& noise, Rng& rng) {
    if (noise.variance == 0.0) {
        return 0.0;
    }
    std::normal_distribution<double> gauss(0.0, std::sqrt(noise.variance));
    return gauss(rng);
}

void fill_estimates(TraceRecord& rec, const Ensemble& ens, const DualDiagnostics& d) {
    ParamMoments s = param_moments(ens);
    rec.theta_mean = std::move(s.mean);
    rec.theta_std = std::move(s.theta_std);
    rec.r_mean = d.r_mean;
    rec.p_explore = d.p_explore;
    rec.contraction_ok = d.contraction_ok;
    rec.grad_exploit = d.exploit_grad;
    rec.grad_explore = d.explore_grad;
}

[[noreturn]] void fail_run(const Error& e, Trace& trace, std::int64_t k) {
    std::ostringstream os;
    os << "run failed at step " << k << ": " << e.what();
    throw RunFailure(e.category(), os.str(), std::move(trace));
}

Trace run_linear(const ScenarioConfig& cfg) {
    const RewardModel model = build_reward(cfg);
    const GainsReport g = compute_gains(cfg);
    LinearPlant plant(cfg.linear.A, cfg.linear.B, cfg.linear.C, cfg.linear.x0);
    const ServoGains gains = make_gains(plant, g.Psi, g.G, g.K);

    Rng noise_rng = make_stream(cfg.run.seed, Stream::Noise);
    Rng init_rng = make_stream(cfg.run.seed, Stream::EnsembleInit);
    Ensemble ens = build_ensemble(cfg, model, init_rng);
    ServoState servo{cfg.controller.xi0 ? *cfg.controller.xi0 : plant.output()};

    DualOptions opts;
    opts.gradient = cfg.controller.gradient;
    opts.limits = model.admissible();

    Trace trace;
    trace.records.reserve(std::size_t(cfg.run.steps) + 1);
    std::int64_t k = 0;
    try {
        for (; k <= cfg.run.steps; ++k) {
            TraceRecord rec;
            rec.k = k;
            rec.t = double(k) * cfg.run.dt;
            rec.x = plant.x();
            rec.y = plant.output();
            rec.xi = servo.xi;
            rec.e = rec.y - rec.xi;

            const Observation obs = observe(model, cfg.quadratic.theta_true, rec.y, cfg.noise, noise_rng, k);
            rec.j_obs = obs.j_obs;
            adapt_inplace(ens, rec.y, obs.j_obs, model);

            ServoStep next = servo_step(plant, servo, gains, ens, model, cfg.controller.delta, cfg.controller.fd_eps, opts);
            rec.u = next.diag.u;
            fill_estimates(rec, ens, next.diag.dual);
            trace.records.push_back(std::move(rec));
            if (k < cfg.run.steps) {
                plant = std::move(next.plant);
                servo = std::move(next.servo);
            }
        }
    } catch (const Error& e) {
        fail_run(e, trace, k);
    }
    return trace;
}

Trace run_mppt(const ScenarioConfig& cfg) {
    const MpptPlantSpec& plant = cfg.mppt;
    const Algo algo = cfg.controller.algo;
    const RewardModel model = build_reward(cfg);
    Rng noise_rng = make_stream(cfg.run.seed, Stream::Noise);
    Rng init_rng = make_stream(cfg.run.seed, Stream::EnsembleInit);
    std::optional<Ensemble> ens;
    if (algo == Algo::Dcee) {
        ens = build_ensemble(cfg, model, init_rng);
    }
    HcState hc;
    hc.step = cfg.controller.hc_step;
    IcState ic;
    ic.step = cfg.controller.ic_step;
    ic.deadband = cfg.controller.ic_deadband;
    validate(hc);
    validate(ic);

    DualOptions opts;
    opts.gradient = cfg.controller.gradient;
    opts.limits = Box::interval(plant.v_min, plant.v_max);

    std::map<std::pair<double, double>, MppPoint> oracle_cache;
    const auto oracle = [&](const EnvSample& env) {
        const auto key = std::pair{env.irradiance, env.temperature};
        auto it = oracle_cache.find(key);
        if (it == oracle_cache.end()) {
            it = oracle_cache.emplace(key, mpp_oracle(plant.pv, env.irradiance, env.temperature, cfg.run.oracle_grid)).first;
        }
        return it->second;
    };

    Trace trace;
    trace.mppt = true;
    trace.has_estimator = algo == Algo::Dcee;
    trace.algo = std::string(to_string(algo));
    trace.records.reserve(std::size_t(cfg.run.steps) + 1);

    double v = plant.v0;
    std::int64_t k = 0;
    try {
        for (; k <= cfg.run.steps; ++k) {
            TraceRecord rec;
            rec.k = k;
            rec.t = double(k) * cfg.run.dt;
            const EnvSample env = profile_eval(plant.profile, rec.t);
            rec.irradiance = env.irradiance;
            rec.temperature = env.temperature;
            rec.current = pv_current(plant.pv, v, env.irradiance, env.temperature).current;
            rec.power = v * rec.current;
            const MppPoint mpp = oracle(env);
            rec.p_mpp = mpp.p_star;
            rec.v_mpp = mpp.v_star;
            rec.j_obs = rec.power + draw_noise(cfg.noise, noise_rng);
            rec.x = rec.y = rec.xi = scalar_vec(v);
            rec.e = Vec::Zero(1);

            double v_next = v;
            switch (algo) {
            case Algo::Dcee: {
                adapt_inplace(*ens, rec.y, rec.j_obs, model);
                const DualStep step =
                    dcee_step(DualState{rec.y, cfg.controller.delta, cfg.controller.fd_eps}, *ens, model, opts);
                v_next = step.state.y[0];
                fill_estimates(rec, *ens, step.diag);
                break;
            }
            case Algo::Hc:
                v_next = v + hc_step(hc, rec.j_obs, v).dv;
                break;
            case Algo::Ic: {
                // The tracker sees the same noisy power channel, expressed as current.
                const double i_meas = v > 0.0 ? rec.j_obs / v : rec.current;
                v_next = v + ic_step(ic, v, i_meas).dv;
                break;
            }
            }
            v_next = std::clamp(v_next, plant.v_min, plant.v_max);
            rec.u = scalar_vec(v_next - v);
            trace.records.push_back(std::move(rec));
            v = v_next;
        }
    } catch (const Error& e) {
        fail_run(e, trace, k);
    }
    return trace;
}

} // namespace

GainsReport compute_gains(const ScenarioConfig& cfg) {
    if (cfg.kind != ScenarioKind::QuadraticLinear) {
        throw ValidationError("gains are defined for the linear-plant scenario only");
    }
    const LinearPlantSpec& p = cfg.linear;
    const RegulationSolution reg = solve_regulation(p.A, p.B, p.C);
    GainsReport out;
    out.Psi = reg.Psi;
    out.G = reg.G;
    out.K = feedback_gain(cfg);
    out.closed_loop_poles = Eigen::EigenSolver<Mat>(p.A - p.B * out.K, false).eigenvalues();
    const Eigen::Index n = p.A.rows();
    const Eigen::Index q = p.C.rows();
    out.regulation_residual = std::max(((p.A - Mat::Identity(n, n)) * reg.Psi + p.B * reg.G).norm(),
                                       (p.C * reg.Psi - Mat::Identity(q, q)).norm());
    return out;
}

RewardModel build_reward(const ScenarioConfig& cfg) {
    if (cfg.kind == ScenarioKind::QuadraticLinear) {
        const QuadraticSpec& q = cfg.quadratic;
        return quadratic_reward(q.linear_coeff, q.y_lo, q.y_hi, q.theta_floor);
    }
    return pv_poly_reward(cfg.pv_reward);
}

std::vector<double> member_rates(const EnsembleSpec& e) {
    std::vector<double> rates(e.size, e.rate);
    if (e.rate_range && e.size > 1) {
        const double lo = std::log(e.rate_range->first);
        const double hi = std::log(e.rate_range->second);
        for (std::size_t i = 0; i < e.size; ++i) {
            rates[i] = std::exp(lo + (hi - lo) * double(i) / double(e.size - 1));
        }
    } else if (e.rate_range) {
        rates[0] = std::sqrt(e.rate_range->first * e.rate_range->second);
    }
    return rates;
}

Ensemble build_ensemble(const ScenarioConfig& cfg, const RewardModel& model, Rng& rng) {
    const EnsembleSpec& e = cfg.ensemble;
    const std::vector<double> rates = member_rates(e);
    switch (e.prior) {
    case PriorKind::Box:
        if (e.prior_low.size() != model.param_dim()) {
            throw ValidationError("ensemble prior bounds do not match the reward parameter dimension");
        }
        return init_ensemble(e.size, e.prior_low, e.prior_high, rates, rng);
    case PriorKind::Nominal: {
        if (cfg.kind != ScenarioKind::Mppt) {
            throw ValidationError("a nominal-fit prior needs the MPPT scenario");
        }
        const Vec nominal = fit_poly(cfg.mppt.pv, cfg.pv_reward.basis, e.nominal_irradiance, e.nominal_temperature,
                                     e.fit_from, e.fit_to);
        const Vec half = e.prior_width * nominal.cwiseAbs().cwiseMax(e.prior_floor);
        return init_ensemble(e.size, nominal - half, nominal + half, rates, rng);
    }
    case PriorKind::Conditions: {
        if (cfg.kind != ScenarioKind::Mppt) {
            throw ValidationError("a conditions prior needs the MPPT scenario");
        }
        // Uniform belief over the environment, pushed through the curve fit.
        std::uniform_real_distribution<double> g(e.irradiance_range.first, e.irradiance_range.second);
        std::uniform_real_distribution<double> t(e.temperature_range.first, e.temperature_range.second);
        std::vector<Vec> members;
        for (std::size_t i = 0; i < e.size; ++i) {
            const double gi = g(rng);
            const double ti = t(rng);
            members.push_back(fit_poly(cfg.mppt.pv, cfg.pv_reward.basis, gi, ti, e.fit_from, e.fit_to));
        }
        return Ensemble::from_members(members, rates);
    }
    }
    throw ValidationError("unknown prior kind");
}

Trace run_scenario(const ScenarioConfig& cfg) {
    validate(cfg);
    return cfg.kind == ScenarioKind::Mppt ? run_mppt(cfg) : run_linear(cfg);
}

Metrics metrics(std::span<const double> t, std::span<const double> power, std::span<const double> oracle,
                std::span<const double> output) {
    if (power.size() != t.size() || oracle.size() != t.size() || output.size() != t.size()) {
        throw ValidationError("metrics: series lengths differ");
    }
    if (t.empty()) {
        throw ValidationError("metrics: empty series");
    }
    Metrics m;
    m.energy_extracted = trapezoid(t, power);
    m.energy_max = trapezoid(t, oracle);
    if (t.size() == 1) {
        // A single sample has no duration; compare the instantaneous values.
        m.efficiency = oracle[0] > 0.0 ? power[0] / oracle[0] : 1.0;
    } else {
        m.efficiency = m.energy_max > 0.0 ? m.energy_extracted / m.energy_max : 1.0;
    }
    m.power_loss = m.energy_max - m.energy_extracted;
    const std::size_t tail = std::max<std::size_t>(1, t.size() / 10);
    const auto [lo, hi] = std::minmax_element(output.end() - std::ptrdiff_t(tail), output.end());
    m.steady_state_band = *hi - *lo;
    return m;
}

Metrics metrics(const Trace& trace) {
    if (!trace.mppt) {
        throw ValidationError("metrics need an MPPT trace with oracle power");
    }
    std::vector<double> t, p, o, y;
    for (const TraceRecord& r : trace.records) {
        t.push_back(r.t);
        p.push_back(r.power);
        o.push_back(r.p_mpp);
        y.push_back(r.y[0]);
    }
    return metrics(t, p, o, y);
}

double output_band(const Trace& trace, double t0, double t1) {
    double lo = INFINITY;
    double hi = -INFINITY;
    for (const TraceRecord& r : trace.records) {
        if (r.t >= t0 && r.t <= t1) {
            lo = std::min(lo, r.y[0]);
            hi = std::max(hi, r.y[0]);
        }
    }
    if (lo > hi) {
        throw ValidationError("band window contains no records");
    }
    return hi - lo;
}

std::vector<ScenarioConfig> expand_compare(const ScenarioConfig& cfg) {
    std::vector<ScenarioConfig> out;
    if (cfg.compare_algos.empty()) {
        out.push_back(cfg);
        return out;
    }
    for (const Algo a : cfg.compare_algos) {
        ScenarioConfig c = cfg;
        c.controller.algo = a;
        c.compare_algos.clear();
        c.name = cfg.name + "/" + std::string(to_string(a));
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<CompareRow> compare(const std::vector<ScenarioConfig>& configs) {
    check_shared_sections(configs);
    for (const auto& c : configs) {
        if (c.kind != ScenarioKind::Mppt) {
            throw ValidationError("compare applies to MPPT scenarios");
        }
    }
    std::vector<CompareRow> rows = parallel_map<CompareRow>(configs.size(), [&](std::size_t i) {
        const Trace trace = run_scenario(configs[i]);
        CompareRow row;
        row.name = configs[i].name;
        row.algo = configs[i].controller.algo;
        row.m = metrics(trace);
        if (configs[i].run.band_window) {
            row.window_band = output_band(trace, configs[i].run.band_window->first, configs[i].run.band_window->second);
        }
        return row;
    });
    std::stable_sort(rows.begin(), rows.end(),
                     [](const CompareRow& a, const CompareRow& b) { return a.m.efficiency > b.m.efficiency; });
    return rows;
}

std::string render_table(const std::vector<CompareRow>& rows) {
    std::ostringstream os;
    os << std::left << std::setw(24) << "scenario" << std::setw(6) << "algo" << std::right << std::setw(12)
       << "efficiency" << std::setw(14) << "energy [J]" << std::setw(14) << "max [J]" << std::setw(12) << "loss [J]"
       << std::setw(12) << "band [V]" << std::setw(14) << "window [V]" << '\n';
    os << std::fixed;
    for (const CompareRow& r : rows) {
        os << std::left << std::setw(24) << r.name << std::setw(6) << to_string(r.algo) << std::right
           << std::setprecision(5) << std::setw(12) << r.m.efficiency << std::setprecision(4) << std::setw(14)
           << r.m.energy_extracted << std::setw(14) << r.m.energy_max << std::setw(12) << r.m.power_loss
           << std::setw(12) << r.m.steady_state_band << std::setw(14) << r.window_band << '\n';
    }
    return os.str();
}

void write_compare_csv(const std::vector<CompareRow>& rows, std::ostream& out) {
    out << "scenario,algo,efficiency,energy_extracted,energy_max,power_loss,steady_state_band,window_band\n";
    for (const CompareRow& r : rows) {
        out << csv_field(r.name) << ',' << to_string(r.algo) << ',' << format_double(r.m.efficiency) << ','
            << format_double(r.m.energy_extracted) << ',' << format_double(r.m.energy_max) << ','
            << format_double(r.m.power_loss) << ',' << format_double(r.m.steady_state_band) << ','
            << format_double(r.window_band) << '\n';
    }
}

unsigned thread_cap() {
    unsigned cap = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("DCEE_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) {
            cap = unsigned(v);
        } else {
            log::warn("ignoring DCEE_THREADS (expected a positive integer)");
        }
    }
    return cap;
}

std::vector<Trace> sweep_seeds(const ScenarioConfig& cfg, std::span<const std::uint64_t> seeds) {
    return parallel_map<Trace>(seeds.size(), [&](std::size_t i) {
        ScenarioConfig c = cfg;
        c.run.seed = seeds[i];
        return run_scenario(c);
    });
}

} // namespace dcee
