#include "dcee/config.hpp"

#include "dcee/error.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace dcee {
namespace {

using nlohmann::json;

// Object view that records which keys were read and rejects the rest.
class Section {
  public:
    Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) {
            throw ValidationError(path_ + ": expected an object");
        }
    }
    Section(const Section&) = delete;
    Section& operator=(const Section&) = delete;
    ~Section() noexcept(false) {
        if (std::uncaught_exceptions() > 0) {
            return;
        }
        for (const auto& [key, value] : obj_.items()) {
            if (!seen_.contains(key)) {
                throw ValidationError(path_ + "." + key + ": unknown key");
            }
        }
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return obj_.contains(key);
    }
    [[nodiscard]] std::string at(const std::string& key) const { return path_ + "." + key; }
    const json& raw(const std::string& key) {
        seen_.insert(key);
        return obj_.at(key);
    }

    template <class T>
    void get(const std::string& key, T& out) {
        if (!has(key)) {
            return;
        }
        try {
            out = obj_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ValidationError(at(key) + ": " + e.what());
        }
    }

  private:
    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

double number(const json& v, const std::string& path) {
    if (v.is_number()) {
        return v.get<double>();
    }
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "infinity") {
            return INFINITY;
        }
    }
    throw ValidationError(path + ": expected a number");
}

Vec vector_of(const json& v, const std::string& path) {
    if (v.is_number()) {
        return scalar_vec(v.get<double>());
    }
    if (!v.is_array()) {
        throw ValidationError(path + ": expected a number array");
    }
    Vec out(Eigen::Index(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[Eigen::Index(i)] = number(v[i], path + "[" + std::to_string(i) + "]");
    }
    return out;
}

Mat matrix_of(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) {
        throw ValidationError(path + ": expected a nonempty array of rows");
    }
    const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
    Mat out(Eigen::Index(v.size()), Eigen::Index(cols));
    for (std::size_t r = 0; r < v.size(); ++r) {
        if (!v[r].is_array() || v[r].size() != cols || cols == 0) {
            throw ValidationError(path + ": rows must be equal-length nonempty arrays");
        }
        for (std::size_t c = 0; c < cols; ++c) {
            out(Eigen::Index(r), Eigen::Index(c)) = number(v[r][c], path);
        }
    }
    return out;
}

std::pair<double, double> range_of(const json& v, const std::string& path) {
    const Vec r = vector_of(v, path);
    if (r.size() != 2) {
        throw ValidationError(path + ": expected [low, high]");
    }
    return {r[0], r[1]};
}

std::vector<std::pair<double, double>> knots_of(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) {
        throw ValidationError(path + ": expected a nonempty array of [t, value] pairs");
    }
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(range_of(v[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

std::vector<std::complex<double>> poles_of(const json& v, const std::string& path) {
    if (!v.is_array()) {
        throw ValidationError(path + ": expected an array of poles");
    }
    std::vector<std::complex<double>> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string p = path + "[" + std::to_string(i) + "]";
        if (v[i].is_array()) {
            const auto [re, im] = range_of(v[i], p);
            out.emplace_back(re, im);
        } else {
            out.emplace_back(number(v[i], p), 0.0);
        }
    }
    return out;
}

void parse_linear_plant(Section& s, LinearPlantSpec& plant) {
    if (s.has("A")) plant.A = matrix_of(s.raw("A"), s.at("A"));
    if (s.has("B")) plant.B = matrix_of(s.raw("B"), s.at("B"));
    if (s.has("C")) plant.C = matrix_of(s.raw("C"), s.at("C"));
    if (s.has("x0")) plant.x0 = vector_of(s.raw("x0"), s.at("x0"));
    if (s.has("poles")) plant.poles = poles_of(s.raw("poles"), s.at("poles"));
    if (s.has("K")) plant.K = matrix_of(s.raw("K"), s.at("K"));
}

void parse_pv(Section& s, PvParams& pv) {
    s.get("i_sc_ref", pv.i_sc_ref);
    s.get("v_oc_ref", pv.v_oc_ref);
    s.get("n_cells", pv.n_cells);
    s.get("ideality", pv.ideality);
    s.get("r_s", pv.r_s);
    if (s.has("r_sh")) pv.r_sh = number(s.raw("r_sh"), s.at("r_sh"));
    s.get("temp_coeff_i", pv.temp_coeff_i);
    s.get("temp_coeff_v", pv.temp_coeff_v);
}

void parse_mppt_plant(Section& s, MpptPlantSpec& plant) {
    if (s.has("pv")) {
        Section pv(s.raw("pv"), s.at("pv"));
        parse_pv(pv, plant.pv);
    }
    if (s.has("profile")) {
        const json& p = s.raw("profile");
        if (p.is_string()) {
            if (p.get<std::string>() != "default") {
                throw ValidationError(s.at("profile") + ": only \"default\" is a named profile");
            }
            plant.profile = default_profile();
        } else {
            Section prof(p, s.at("profile"));
            if (prof.has("irradiance")) plant.profile.irradiance = knots_of(prof.raw("irradiance"), prof.at("irradiance"));
            if (prof.has("temperature")) plant.profile.temperature = knots_of(prof.raw("temperature"), prof.at("temperature"));
        }
    }
    s.get("v_min", plant.v_min);
    s.get("v_max", plant.v_max);
    s.get("v0", plant.v0);
}

void parse_reward(Section& s, ScenarioConfig& cfg) {
    std::string model = cfg.kind == ScenarioKind::Mppt ? "pv-poly" : "quadratic";
    s.get("model", model);
    if (cfg.kind == ScenarioKind::QuadraticLinear) {
        if (model != "quadratic") {
            throw ValidationError(s.at("model") + ": the linear-plant scenario uses the \"quadratic\" reward");
        }
        s.get("linear_coeff", cfg.quadratic.linear_coeff);
        if (s.has("theta_true")) cfg.quadratic.theta_true = vector_of(s.raw("theta_true"), s.at("theta_true"));
        if (s.has("y_range")) std::tie(cfg.quadratic.y_lo, cfg.quadratic.y_hi) = range_of(s.raw("y_range"), s.at("y_range"));
        s.get("theta_floor", cfg.quadratic.theta_floor);
    } else {
        if (model != "pv-poly") {
            throw ValidationError(s.at("model") + ": the MPPT scenario uses the \"pv-poly\" reward");
        }
        s.get("degree", cfg.pv_reward.basis.degree);
        s.get("center", cfg.pv_reward.basis.center);
        s.get("scale", cfg.pv_reward.basis.scale);
        if (s.has("optimum_range")) {
            std::tie(cfg.pv_reward.r_lo, cfg.pv_reward.r_hi) = range_of(s.raw("optimum_range"), s.at("optimum_range"));
        }
    }
}

void parse_ensemble(Section& s, EnsembleSpec& e) {
    s.get("size", e.size);
    if (s.has("prior")) {
        const auto kind = s.raw("prior").get<std::string>();
        if (kind == "box") {
            e.prior = PriorKind::Box;
        } else if (kind == "nominal") {
            e.prior = PriorKind::Nominal;
        } else if (kind == "conditions") {
            e.prior = PriorKind::Conditions;
        } else {
            throw ValidationError(s.at("prior") + ": expected \"box\", \"nominal\" or \"conditions\"");
        }
    }
    if (s.has("prior_low")) e.prior_low = vector_of(s.raw("prior_low"), s.at("prior_low"));
    if (s.has("prior_high")) e.prior_high = vector_of(s.raw("prior_high"), s.at("prior_high"));
    s.get("rate", e.rate);
    if (s.has("rate_range")) e.rate_range = range_of(s.raw("rate_range"), s.at("rate_range"));
    s.get("prior_width", e.prior_width);
    s.get("prior_floor", e.prior_floor);
    s.get("nominal_irradiance", e.nominal_irradiance);
    s.get("nominal_temperature", e.nominal_temperature);
    if (s.has("fit_range")) std::tie(e.fit_from, e.fit_to) = range_of(s.raw("fit_range"), s.at("fit_range"));
    if (s.has("irradiance_range")) e.irradiance_range = range_of(s.raw("irradiance_range"), s.at("irradiance_range"));
    if (s.has("temperature_range")) e.temperature_range = range_of(s.raw("temperature_range"), s.at("temperature_range"));
}

void parse_controller(Section& s, ScenarioConfig& cfg) {
    ControllerSpec& c = cfg.controller;
    if (s.has("algo")) c.algo = parse_algo(s.raw("algo").get<std::string>());
    if (s.has("algos")) {
        const json& list = s.raw("algos");
        if (!list.is_array() || list.empty()) {
            throw ValidationError(s.at("algos") + ": expected a nonempty array of algorithm names");
        }
        for (const auto& a : list) {
            cfg.compare_algos.push_back(parse_algo(a.get<std::string>()));
        }
    }
    s.get("delta", c.delta);
    s.get("fd_eps", c.fd_eps);
    if (s.has("gradient")) {
        const auto g = s.raw("gradient").get<std::string>();
        if (g == "fd" || g == "finite-difference") {
            c.gradient = ExploreGradient::FiniteDifference;
        } else if (g == "analytic") {
            c.gradient = ExploreGradient::Analytic;
        } else {
            throw ValidationError(s.at("gradient") + ": expected \"fd\" or \"analytic\"");
        }
    }
    if (s.has("xi0")) c.xi0 = vector_of(s.raw("xi0"), s.at("xi0"));
    s.get("hc_step", c.hc_step);
    s.get("ic_step", c.ic_step);
    s.get("ic_deadband", c.ic_deadband);
}

void parse_run(Section& s, RunSpec& r) {
    s.get("dt", r.dt);
    s.get("steps", r.steps);
    if (s.has("duration")) {
        const double dur = number(s.raw("duration"), s.at("duration"));
        if (!(r.dt > 0.0) || !(dur >= 0.0)) {
            throw ValidationError(s.at("duration") + ": needs a positive dt and nonnegative duration");
        }
        r.steps = std::llround(dur / r.dt);
    }
    s.get("seed", r.seed);
    s.get("out", r.out);
    s.get("oracle_grid", r.oracle_grid);
    if (s.has("band_window")) r.band_window = range_of(s.raw("band_window"), s.at("band_window"));
}

template <class M>
bool same(const M& a, const M& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

} // namespace

std::string_view to_string(ScenarioKind kind) {
    return kind == ScenarioKind::Mppt ? "mppt" : "quadratic-linear";
}

std::string_view to_string(Algo algo) {
    switch (algo) {
    case Algo::Dcee: return "dcee";
    case Algo::Hc: return "hc";
    case Algo::Ic: return "ic";
    }
    return "?";
}

Algo parse_algo(std::string_view name) {
    if (name == "dcee") return Algo::Dcee;
    if (name == "hc") return Algo::Hc;
    if (name == "ic") return Algo::Ic;
    throw ValidationError("unknown algorithm '" + std::string(name) + "' (expected dcee, hc or ic)");
}

ScenarioConfig example_linear_config(double noise_variance) {
    ScenarioConfig cfg;
    cfg.name = noise_variance > 0.0 ? "linear-noisy" : "linear-noise-free";
    cfg.kind = ScenarioKind::QuadraticLinear;
    cfg.linear.A = (Mat(2, 2) << 0.0, 1.0, 2.0, 1.0).finished();
    cfg.linear.B = (Mat(2, 1) << 1.0, 1.0).finished();
    cfg.linear.C = (Mat(1, 2) << 0.0, 1.0).finished();
    cfg.linear.x0 = Vec::Zero(2);
    cfg.linear.poles = {{0.4, 0.0}, {0.7, 0.0}};
    cfg.ensemble.size = 100;
    cfg.ensemble.prior_low = scalar_vec(0.0);
    cfg.ensemble.prior_high = scalar_vec(20.0);
    cfg.ensemble.rate = 0.005;
    cfg.controller.delta = 0.5;
    cfg.noise.variance = noise_variance;
    cfg.run.steps = 5000;
    cfg.run.dt = 1.0;
    return cfg;
}

ScenarioConfig default_mppt_config(Algo algo) {
    ScenarioConfig cfg;
    cfg.name = "mppt";
    cfg.kind = ScenarioKind::Mppt;
    cfg.controller.algo = algo;
    cfg.controller.delta = 0.75;
    cfg.controller.fd_eps = 1e-4;
    cfg.ensemble.size = 100;
    cfg.ensemble.prior = PriorKind::Conditions;
    cfg.ensemble.irradiance_range = {400.0, 1000.0};
    cfg.ensemble.rate = 0.6;
    cfg.noise.variance = 2.0;
    cfg.run.dt = 1e-3;
    cfg.run.steps = 2000;
    cfg.run.band_window = std::pair{1.3, 1.5};
    return cfg;
}

ScenarioConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    Section root(doc, "config");

    ScenarioKind kind = ScenarioKind::QuadraticLinear;
    std::string name;
    if (root.has("scenario")) {
        Section s(root.raw("scenario"), "config.scenario");
        std::string k = "quadratic-linear";
        s.get("kind", k);
        if (k == "mppt") {
            kind = ScenarioKind::Mppt;
        } else if (k != "quadratic-linear") {
            throw ValidationError("config.scenario.kind: expected \"quadratic-linear\" or \"mppt\"");
        }
        s.get("name", name);
    }
    ScenarioConfig cfg = kind == ScenarioKind::Mppt ? default_mppt_config() : example_linear_config();
    if (!name.empty()) {
        cfg.name = name;
    }

    if (root.has("plant")) {
        Section s(root.raw("plant"), "config.plant");
        if (kind == ScenarioKind::Mppt) {
            parse_mppt_plant(s, cfg.mppt);
        } else {
            parse_linear_plant(s, cfg.linear);
        }
    }
    if (root.has("reward")) {
        Section s(root.raw("reward"), "config.reward");
        parse_reward(s, cfg);
    }
    if (root.has("ensemble")) {
        Section s(root.raw("ensemble"), "config.ensemble");
        parse_ensemble(s, cfg.ensemble);
    }
    if (root.has("controller")) {
        Section s(root.raw("controller"), "config.controller");
        parse_controller(s, cfg);
    }
    if (root.has("noise")) {
        Section s(root.raw("noise"), "config.noise");
        s.get("variance", cfg.noise.variance);
    }
    if (root.has("run")) {
        Section s(root.raw("run"), "config.run");
        parse_run(s, cfg.run);
    }
    if (kind == ScenarioKind::Mppt) {
        cfg.pv_reward.v_lo = cfg.mppt.v_min;
        cfg.pv_reward.v_hi = cfg.mppt.v_max;
    }
    validate(cfg);
    return cfg;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config file '" + path + "'");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config(buf.str());
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

void validate(const ScenarioConfig& cfg) {
    const auto fail = [](const std::string& msg) { throw ValidationError(msg); };
    if (cfg.run.steps < 0) fail("run.steps must be nonnegative");
    if (!(cfg.run.dt > 0.0)) fail("run.dt must be positive");
    if (cfg.ensemble.size < 1) fail("ensemble.size must be at least 1");
    if (!(cfg.ensemble.rate > 0.0) || !std::isfinite(cfg.ensemble.rate)) fail("ensemble.rate must be positive");
    if (cfg.ensemble.rate_range && !(cfg.ensemble.rate_range->first > 0.0 &&
                                     cfg.ensemble.rate_range->first <= cfg.ensemble.rate_range->second &&
                                     std::isfinite(cfg.ensemble.rate_range->second))) {
        fail("ensemble.rate_range must be positive and ordered");
    }
    if (!(cfg.controller.delta > 0.0)) fail("controller.delta must be positive");
    if (!(cfg.controller.fd_eps > 0.0)) fail("controller.fd_eps must be positive");
    if (!(cfg.noise.variance >= 0.0) || !std::isfinite(cfg.noise.variance)) fail("noise.variance must be nonnegative");
    if (cfg.ensemble.prior_low.size() != cfg.ensemble.prior_high.size()) {
        fail("ensemble.prior_low and prior_high must have the same length");
    }
    if ((cfg.ensemble.prior_low.array() > cfg.ensemble.prior_high.array()).any()) {
        fail("ensemble prior bounds must satisfy low <= high");
    }

    if (cfg.kind == ScenarioKind::QuadraticLinear) {
        const LinearPlantSpec& p = cfg.linear;
        const Eigen::Index n = p.A.rows();
        if (n == 0 || p.A.cols() != n || p.B.rows() != n || p.C.cols() != n || p.x0.size() != n) {
            fail("plant matrices and x0 have inconsistent dimensions");
        }
        if (p.C.rows() != 1) fail("the quadratic reward is scalar, so C must have one row");
        if (!p.K && Eigen::Index(p.poles.size()) != n) fail("plant.poles needs one pole per state when K is absent");
        if (p.K && (p.K->rows() != p.B.cols() || p.K->cols() != n)) fail("plant.K must be p x n");
        if (cfg.quadratic.theta_true.size() != 1) fail("reward.theta_true must have one entry");
        if (!(cfg.quadratic.y_lo < cfg.quadratic.y_hi)) fail("reward.y_range must be ordered");
        if (cfg.ensemble.prior != PriorKind::Box) fail("the linear-plant scenario needs an explicit prior box");
        if (cfg.ensemble.prior_low.size() != 1) fail("ensemble prior bounds must have one entry");
        if (cfg.controller.xi0 && cfg.controller.xi0->size() != 1) fail("controller.xi0 must have one entry");
        if (cfg.controller.algo != Algo::Dcee || !cfg.compare_algos.empty()) {
            fail("baseline algorithms apply to the MPPT scenario only");
        }
    } else {
        validate(cfg.mppt.pv);
        validate(cfg.mppt.profile);
        validate(cfg.pv_reward.basis);
        const auto& m = cfg.mppt;
        if (!(m.v_min >= 0.0) || !(m.v_min < m.v_max)) fail("plant.v_min/v_max must satisfy 0 <= v_min < v_max");
        if (!(m.v0 >= m.v_min && m.v0 <= m.v_max)) fail("plant.v0 must lie within the voltage limits");
        if (!(cfg.pv_reward.r_lo >= m.v_min && cfg.pv_reward.r_hi <= m.v_max && cfg.pv_reward.r_lo < cfg.pv_reward.r_hi)) {
            fail("reward.optimum_range must be ordered and inside the voltage limits");
        }
        const auto m_dim = Eigen::Index(cfg.pv_reward.basis.degree + 1);
        if (cfg.ensemble.prior == PriorKind::Box && cfg.ensemble.prior_low.size() != m_dim) {
            fail("ensemble prior bounds must have degree + 1 entries");
        }
        const auto& gr = cfg.ensemble.irradiance_range;
        const auto& tr = cfg.ensemble.temperature_range;
        if (!(gr.first > 0.0 && gr.first <= gr.second) || !(tr.first <= tr.second)) {
            fail("ensemble irradiance/temperature ranges must be ordered (irradiance positive)");
        }
        if (!(cfg.ensemble.prior_width >= 0.0) || !(cfg.ensemble.prior_floor >= 0.0)) {
            fail("ensemble.prior_width and prior_floor must be nonnegative");
        }
        if (!(cfg.ensemble.fit_from < cfg.ensemble.fit_to)) fail("ensemble.fit_range must be ordered");
        if (!(cfg.controller.hc_step > 0.0) || !(cfg.controller.ic_step > 0.0)) fail("baseline steps must be positive");
        if (!(cfg.controller.ic_deadband >= 0.0)) fail("controller.ic_deadband must be nonnegative");
        if (cfg.run.oracle_grid < 1000) fail("run.oracle_grid must be at least 1000");
        if (cfg.run.band_window && !(cfg.run.band_window->first < cfg.run.band_window->second)) {
            fail("run.band_window must be ordered");
        }
    }
}

void check_shared_sections(const std::vector<ScenarioConfig>& configs) {
    if (configs.empty()) {
        throw ValidationError("compare needs at least one scenario");
    }
    const ScenarioConfig& a = configs.front();
    for (const ScenarioConfig& b : configs) {
        const auto mismatch = [&](const char* what) {
            throw ValidationError(std::string("compared scenarios disagree on ") + what);
        };
        if (b.kind != a.kind) mismatch("scenario kind");
        if (b.run.steps != a.run.steps || b.run.dt != a.run.dt) mismatch("the horizon");
        if (b.kind == ScenarioKind::Mppt) {
            const PvParams& p = a.mppt.pv;
            const PvParams& q = b.mppt.pv;
            if (p.i_sc_ref != q.i_sc_ref || p.v_oc_ref != q.v_oc_ref || p.n_cells != q.n_cells ||
                p.ideality != q.ideality || p.r_s != q.r_s || p.r_sh != q.r_sh || p.temp_coeff_i != q.temp_coeff_i ||
                p.temp_coeff_v != q.temp_coeff_v || a.mppt.v_min != b.mppt.v_min || a.mppt.v_max != b.mppt.v_max ||
                a.mppt.v0 != b.mppt.v0) {
                mismatch("the plant");
            }
            if (a.mppt.profile.irradiance != b.mppt.profile.irradiance ||
                a.mppt.profile.temperature != b.mppt.profile.temperature) {
                mismatch("the environment profile");
            }
        } else {
            if (!same(a.linear.A, b.linear.A) || !same(a.linear.B, b.linear.B) || !same(a.linear.C, b.linear.C) ||
                !same(a.linear.x0, b.linear.x0)) {
                mismatch("the plant");
            }
        }
    }
}

} // namespace dcee
