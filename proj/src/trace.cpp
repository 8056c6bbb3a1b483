#include "dcee/trace.hpp"

#include "dcee/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace dcee {
namespace {

void add_vec(std::vector<std::string>& cols, const char* base, Eigen::Index n) {
    if (n == 1) {
        cols.emplace_back(base);
        return;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        cols.push_back(std::string(base) + "_" + std::to_string(i));
    }
}

void put(std::vector<double>& row, const Vec& v) { row.insert(row.end(), v.data(), v.data() + v.size()); }

std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    if (quoted) {
        throw IoError("CSV line " + std::to_string(line_no) + ": unterminated quote");
    }
    out.push_back(std::move(cur));
    return out;
}

} // namespace

std::vector<std::string> Trace::columns() const {
    std::vector<std::string> cols{"k", "t"};
    if (records.empty()) {
        return cols;
    }
    const TraceRecord& r = records.front();
    add_vec(cols, "x", r.x.size());
    add_vec(cols, "y", r.y.size());
    add_vec(cols, "xi", r.xi.size());
    add_vec(cols, "u", r.u.size());
    if (has_estimator) {
        add_vec(cols, "theta_mean", r.theta_mean.size());
        add_vec(cols, "theta_std", r.theta_std.size());
        cols.emplace_back("p_explore");
    }
    cols.emplace_back("j_obs");
    if (has_estimator) {
        add_vec(cols, "r_mean", r.r_mean.size());
        add_vec(cols, "grad_exploit", r.grad_exploit.size());
        add_vec(cols, "grad_explore", r.grad_explore.size());
    }
    add_vec(cols, "e", r.e.size());
    if (has_estimator) {
        cols.emplace_back("contraction_ok");
    }
    if (mppt) {
        for (const char* c : {"current", "power", "p_mpp", "v_mpp", "irradiance", "temperature"}) {
            cols.emplace_back(c);
        }
    }
    return cols;
}

std::vector<double> Trace::row(std::size_t index) const {
    const TraceRecord& r = records.at(index);
    std::vector<double> out{double(r.k), r.t};
    put(out, r.x);
    put(out, r.y);
    put(out, r.xi);
    put(out, r.u);
    if (has_estimator) {
        put(out, r.theta_mean);
        put(out, r.theta_std);
        out.push_back(r.p_explore);
    }
    out.push_back(r.j_obs);
    if (has_estimator) {
        put(out, r.r_mean);
        put(out, r.grad_exploit);
        put(out, r.grad_explore);
    }
    put(out, r.e);
    if (has_estimator) {
        out.push_back(r.contraction_ok ? 1.0 : 0.0);
    }
    if (mppt) {
        out.insert(out.end(), {r.current, r.power, r.p_mpp, r.v_mpp, r.irradiance, r.temperature});
    }
    return out;
}

void Trace::check() const {
    const std::size_t width = columns().size();
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].k != std::int64_t(i)) {
            throw ValidationError("trace record " + std::to_string(i) + " has step " + std::to_string(records[i].k));
        }
        const std::vector<double> r = row(i);
        if (r.size() != width) {
            throw ValidationError("trace record " + std::to_string(i) + " changes dimension");
        }
        if (!std::all_of(r.begin(), r.end(), [](double v) { return std::isfinite(v); })) {
            throw NumericalError("trace record " + std::to_string(i) + " has a non-finite value");
        }
    }
}

std::size_t CsvTable::column_index(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        throw ValidationError("CSV has no column '" + name + "'");
    }
    return std::size_t(it - header.begin());
}

std::vector<double> CsvTable::column(const std::string& name) const {
    const std::size_t c = column_index(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        out.push_back(r.at(c));
    }
    return out;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\r\n") == std::string::npos) {
        return text;
    }
    std::string out = "\"";
    for (const char c : text) {
        out += c;
        if (c == '"') {
            out += '"';
        }
    }
    return out + "\"";
}

CsvTable to_table(const Trace& trace) {
    CsvTable t;
    t.header = trace.columns();
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
        t.rows.push_back(trace.row(i));
    }
    return t;
}

void write_csv(const CsvTable& table, std::ostream& out) {
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        out << (c ? "," : "") << csv_field(table.header[c]);
    }
    out << '\n';
    for (const auto& r : table.rows) {
        for (std::size_t c = 0; c < r.size(); ++c) {
            out << (c ? "," : "") << format_double(r[c]);
        }
        out << '\n';
    }
}

void emit_csv(const Trace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    write_csv(to_table(trace), out);
    out.flush();
    if (!out) {
        throw IoError("write to '" + path + "' failed");
    }
}

CsvTable read_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) {
        throw IoError("CSV is empty");
    }
    ++line_no;
    t.header = split_csv_line(line, line_no);
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto fields = split_csv_line(line, line_no);
        if (fields.size() != t.header.size()) {
            throw IoError("CSV line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                          " fields, header has " + std::to_string(t.header.size()));
        }
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) {
            char* end = nullptr;
            const double v = std::strtod(f.c_str(), &end);
            if (f.empty() || end != f.c_str() + f.size()) {
                throw IoError("CSV line " + std::to_string(line_no) + ": '" + f + "' is not a number");
            }
            row.push_back(v);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "' for reading");
    }
    try {
        return read_csv(in);
    } catch (const IoError& e) {
        throw IoError(path + ": " + e.what());
    }
}

void emit_gnuplot(const Trace& trace, const std::string& csv_path, const std::string& script_path) {
    std::ofstream out(script_path);
    if (!out) {
        throw IoError("cannot open '" + script_path + "' for writing");
    }
    const auto cols = trace.columns();
    const auto col = [&](const std::string& name) {
        const auto it = std::find(cols.begin(), cols.end(), name);
        return it == cols.end() ? 0 : int(it - cols.begin()) + 1;
    };
    out << "# usage: gnuplot -p " << script_path << "\n"
        << "set datafile separator ','\n"
        << "set key autotitle columnhead\n"
        << "set grid\n"
        << "data = '" << csv_path << "'\n";
    if (trace.mppt) {
        out << "set multiplot layout 2,1\n"
            << "set ylabel 'power [W]'\n"
            << "plot data using " << col("t") << ":" << col("power") << " with lines, \\\n"
            << "     data using " << col("t") << ":" << col("p_mpp") << " with lines\n"
            << "set xlabel 't [s]'\nset ylabel 'voltage [V]'\n"
            << "plot data using " << col("t") << ":" << col("y") << " with lines, \\\n"
            << "     data using " << col("t") << ":" << col("v_mpp") << " with lines\n"
            << "unset multiplot\n";
    } else {
        const int theta = col("theta_mean");
        const int sd = col("theta_std");
        out << "set multiplot layout 2,1\n"
            << "set ylabel 'theta'\n"
            << "plot data using " << col("k") << ":" << theta << " with lines, \\\n"
            << "     data using " << col("k") << ":($" << theta << "-$" << sd << "):($" << theta << "+$" << sd
            << ") with filledcurves fs transparent solid 0.2 title 'mean +/- std'\n"
            << "set xlabel 'k'\nset ylabel 'output'\n"
            << "plot data using " << col("k") << ":" << col("y") << " with lines, \\\n"
            << "     data using " << col("k") << ":" << col("xi") << " with lines\n"
            << "unset multiplot\n";
    }
    if (!out) {
        throw IoError("write to '" + script_path + "' failed");
    }
}

} // namespace dcee
