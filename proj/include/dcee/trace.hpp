#pragma once

// Per-step simulation record and its CSV form. Record k holds the state at
// time k, the observation taken there, the estimates after adapting to it and
// the control computed from them.

#include "dcee/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace dcee {

struct TraceRecord {
    std::int64_t k = 0;
    double t = 0.0;
    Vec x, y, xi, u;
    Vec theta_mean, theta_std, r_mean;
    Vec e; // y - xi
    Vec grad_exploit, grad_explore;
    double p_explore = 0.0;
    double j_obs = 0.0;
    bool contraction_ok = false;
    // MPPT only
    double current = 0.0;
    double power = 0.0; // true power at the applied voltage
    double p_mpp = 0.0;
    double v_mpp = 0.0;
    double irradiance = 0.0;
    double temperature = 0.0;
};

struct Trace {
    bool mppt = false;
    bool has_estimator = true;
    std::string algo = "dcee";
    std::vector<TraceRecord> records;

    [[nodiscard]] std::vector<std::string> columns() const;
    [[nodiscard]] std::vector<double> row(std::size_t index) const;
    // Throws NumericalError on a non-finite value, ValidationError on broken indexing.
    void check() const;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    [[nodiscard]] std::size_t column_index(const std::string& name) const;
    [[nodiscard]] std::vector<double> column(const std::string& name) const;
};

std::string format_double(double v);
std::string csv_field(const std::string& text);

CsvTable to_table(const Trace& trace);
void write_csv(const CsvTable& table, std::ostream& out);
void emit_csv(const Trace& trace, const std::string& path);
CsvTable read_csv(std::istream& in);
CsvTable read_csv(const std::string& path);

// gnuplot script plotting the main signals of a CSV written by emit_csv.
void emit_gnuplot(const Trace& trace, const std::string& csv_path, const std::string& script_path);

} // namespace dcee
