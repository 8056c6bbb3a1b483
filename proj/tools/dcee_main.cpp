// dcee: run DCEE scenarios, MPPT comparisons and servo gain checks.

#include "dcee/harness.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

using namespace dcee;

std::string gnuplot_path(const std::string& csv) {
    const auto dot = csv.rfind('.');
    return (dot == std::string::npos ? csv : csv.substr(0, dot)) + ".gp";
}

void persist(const Trace& trace, const std::string& out) {
    if (out.empty()) {
        return;
    }
    emit_csv(trace, out);
    emit_gnuplot(trace, out, gnuplot_path(out));
}

void print_matrix(const char* name, const Mat& m) {
    std::printf("%s =\n", name);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        std::printf("  [");
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            std::printf("%s% .17g", c ? ", " : "", m(r, c));
        }
        std::printf("]\n");
    }
}

void summarize(const ScenarioConfig& cfg, const Trace& trace) {
    const TraceRecord& last = trace.records.back();
    std::printf("scenario %s (%s), %zu records\n", cfg.name.c_str(), std::string(to_string(cfg.kind)).c_str(),
                trace.records.size());
    if (trace.has_estimator) {
        std::printf("final theta_mean[0] = %.10g, theta_std[0] = %.3g, P = %.3g\n", last.theta_mean[0],
                    last.theta_std[0], last.p_explore);
    }
    std::printf("final y[0] = %.10g, |e| = %.3g\n", last.y[0], last.e.norm());
    if (trace.mppt) {
        const Metrics m = metrics(trace);
        std::printf("efficiency = %.5f, energy = %.4f J of %.4f J, loss = %.4f J, band = %.4f V\n", m.efficiency,
                    m.energy_extracted, m.energy_max, m.power_loss, m.steady_state_band);
    }
}

int run_cmd(const std::string& path, std::optional<std::uint64_t> seed, const std::string& out_flag,
            std::optional<Algo> algo, int sweep) {
    ScenarioConfig cfg = load_config(path);
    if (seed) {
        cfg.run.seed = *seed;
    }
    if (algo) {
        if (cfg.kind != ScenarioKind::Mppt) {
            throw ValidationError("--algo applies to MPPT scenarios");
        }
        cfg.controller.algo = *algo;
    }
    const std::string out = out_flag.empty() ? cfg.run.out : out_flag;

    if (sweep > 1) {
        std::vector<std::uint64_t> seeds;
        for (int i = 0; i < sweep; ++i) {
            seeds.push_back(cfg.run.seed + std::uint64_t(i));
        }
        const auto traces = sweep_seeds(cfg, seeds);
        for (std::size_t i = 0; i < traces.size(); ++i) {
            std::printf("seed %llu: ", static_cast<unsigned long long>(seeds[i]));
            const TraceRecord& last = traces[i].records.back();
            if (traces[i].mppt) {
                std::printf("efficiency %.5f\n", metrics(traces[i]).efficiency);
            } else {
                std::printf("theta_mean %.6f, y %.6f\n", last.theta_mean[0], last.y[0]);
            }
        }
        return 0;
    }

    try {
        const Trace trace = run_scenario(cfg);
        persist(trace, out);
        summarize(cfg, trace);
    } catch (const RunFailure& f) {
        persist(f.partial(), out);
        throw;
    }
    return 0;
}

int compare_cmd(const std::string& path, const std::string& csv_out) {
    const ScenarioConfig cfg = load_config(path);
    if (cfg.kind != ScenarioKind::Mppt) {
        throw ValidationError("compare applies to MPPT scenarios");
    }
    ScenarioConfig base = cfg;
    if (base.compare_algos.empty()) {
        base.compare_algos = {Algo::Dcee, Algo::Hc, Algo::Ic};
    }
    const auto rows = compare(expand_compare(base));
    std::cout << render_table(rows);
    if (!csv_out.empty()) {
        std::ofstream out(csv_out);
        if (!out) {
            throw IoError("cannot open '" + csv_out + "' for writing");
        }
        write_compare_csv(rows, out);
    }
    return 0;
}

int gains_cmd(const std::string& path) {
    const auto t0 = std::chrono::steady_clock::now();
    const GainsReport g = compute_gains(load_config(path));
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    print_matrix("Psi", g.Psi);
    print_matrix("G", g.G);
    print_matrix("K", g.K);
    std::printf("eig(A - B K) =");
    for (Eigen::Index i = 0; i < g.closed_loop_poles.size(); ++i) {
        std::printf(" %.12g%+.3gi", g.closed_loop_poles[i].real(), g.closed_loop_poles[i].imag());
    }
    std::printf("\nregulation residual = %.3g\nelapsed = %.3f ms\n", g.regulation_residual, ms);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dual control for exploration and exploitation: simulation harness"};
    app.require_subcommand(1);

    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string algo_name;
    std::string csv_out;
    int sweep = 1;

    auto* run = app.add_subcommand("run", "run a scenario and write its trace");
    run->add_option("--config", config, "scenario JSON file")->required();
    run->add_option("--seed", seed, "override run.seed");
    run->add_option("--out", out, "trace CSV path (a .gp script is written next to it)");
    run->add_option("--sweep", sweep, "run this many consecutive seeds in parallel and summarize")->check(CLI::PositiveNumber);

    auto* mppt = app.add_subcommand("mppt", "run an MPPT scenario with the chosen tracker");
    mppt->add_option("--algo", algo_name, "dcee, hc or ic")->required()->check(CLI::IsMember({"dcee", "hc", "ic"}));
    mppt->add_option("--config", config, "scenario JSON file")->required();
    mppt->add_option("--seed", seed, "override run.seed");
    mppt->add_option("--out", out, "trace CSV path");

    auto* cmp = app.add_subcommand("compare", "compare MPPT trackers on one plant and profile");
    cmp->add_option("--config", config, "scenario JSON file")->required();
    cmp->add_option("--csv", csv_out, "also write the table as CSV");

    auto* gains = app.add_subcommand("gains", "print the servo gains Psi, G and K");
    gains->add_option("--config", config, "scenario JSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : int(ErrorCategory::Validation);
    }

    try {
        if (*run) {
            return run_cmd(config, seed, out, std::nullopt, sweep);
        }
        if (*mppt) {
            return run_cmd(config, seed, out, parse_algo(algo_name), 1);
        }
        if (*cmp) {
            return compare_cmd(config, csv_out);
        }
        return gains_cmd(config);
    } catch (const Error& e) {
        std::fprintf(stderr, "dcee: %s\n", e.what());
        return e.exit_code();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "dcee: internal error: %s\n", e.what());
        return 1;
    }
}
