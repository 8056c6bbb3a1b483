#pragma once

// Scenario execution, metrics, algorithm comparison and seed sweeps.

#include "dcee/config.hpp"
#include "dcee/error.hpp"
#include "dcee/servo.hpp"
#include "dcee/trace.hpp"

#include <atomic>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <thread>
#include <vector>

namespace dcee {

// A failure part-way through a run. The records produced so far are kept so
// that callers can still persist them.
class RunFailure : public Error {
  public:
    RunFailure(ErrorCategory category, const std::string& what, Trace partial)
        : Error(category, what), partial_(std::move(partial)) {}
    [[nodiscard]] const Trace& partial() const { return partial_; }

  private:
    Trace partial_;
};

struct GainsReport {
    Mat Psi, G, K;
    Eigen::VectorXcd closed_loop_poles;
    double regulation_residual = 0.0; // max of the two Frobenius residuals
};

GainsReport compute_gains(const ScenarioConfig& cfg);
RewardModel build_reward(const ScenarioConfig& cfg);
Ensemble build_ensemble(const ScenarioConfig& cfg, const RewardModel& model, Rng& rng);

// Runs the closed loop for cfg.run.steps ticks and returns steps + 1 records.
Trace run_scenario(const ScenarioConfig& cfg);

struct Metrics {
    double energy_extracted = 0.0;
    double energy_max = 0.0;
    double efficiency = 0.0;
    double power_loss = 0.0;
    double steady_state_band = 0.0; // output range over the final 10% of records
};

Metrics metrics(std::span<const double> t, std::span<const double> power, std::span<const double> oracle,
                std::span<const double> output);
// Uses the per-step oracle power stored in an MPPT trace.
Metrics metrics(const Trace& trace);

// Range of the first output component over records with t in [t0, t1].
double output_band(const Trace& trace, double t0, double t1);

struct CompareRow {
    std::string name;
    Algo algo = Algo::Dcee;
    Metrics m;
    double window_band = 0.0; // over run.band_window when set
};

// One config per algorithm in cfg.compare_algos (or the single configured algo).
std::vector<ScenarioConfig> expand_compare(const ScenarioConfig& cfg);
// Rows are sorted by efficiency, best first.
std::vector<CompareRow> compare(const std::vector<ScenarioConfig>& configs);
std::string render_table(const std::vector<CompareRow>& rows);
void write_compare_csv(const std::vector<CompareRow>& rows, std::ostream& out);

// Worker cap from DCEE_THREADS (default: hardware concurrency).
unsigned thread_cap();

// Evaluates fn(0..n-1) on up to thread_cap() threads. Results are stored by
// index, so the output does not depend on the thread count.
template <class T>
std::vector<T> parallel_map(std::size_t n, const std::function<T(std::size_t)>& fn) {
    std::vector<T> out(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                out[i] = fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::min<std::size_t>(thread_cap(), n);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < threads; ++w) {
            pool.emplace_back(worker);
        }
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return out;
}

std::vector<Trace> sweep_seeds(const ScenarioConfig& cfg, std::span<const std::uint64_t> seeds);

} // namespace dcee
