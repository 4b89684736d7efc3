#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "relvac/errors.hpp"
#include "relvac/thermo.hpp"

namespace relvac {

/// One diagnostics row. Energy columns are NaN until enough history exists
/// for the central time differences.
struct DiagRow {
    double t = 0.0;
    double theta_sq_min = 1.0;
    double vel_sup_ratio = 0.0;
    double baryon_residual = 0.0;
    double e_total = std::numeric_limits<double>::quiet_NaN();
    double e_u = std::numeric_limits<double>::quiet_NaN();
    double e_v = std::numeric_limits<double>::quiet_NaN();
    double e_w = std::numeric_limits<double>::quiet_NaN();
    double dt = 0.0;
};

inline constexpr const char* diag_header =
    "t,theta_sq_min,vel_sup_ratio,baryon_residual,E_total,E_u,E_v,E_w,dt";

/// Unit of persistence for one run: the diagnostics time series, the initial
/// and final states, the energy-term table, and the completion status.
struct RunRecord {
    std::vector<DiagRow> rows;
    State initial;
    State final_state;
    bool completed = false;
    fault abort_kind = fault::none;
    int abort_node = -1;
    double abort_time = 0.0;
    std::string abort_message;
    std::vector<std::pair<std::string, std::string>> config_echo;
    std::vector<std::string> energy_term_names;
    std::vector<double> energy_times;
    std::vector<std::vector<double>> energy_terms;
};

namespace detail {

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_state(const std::string& path, const State& s) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << "# t = " << fmt(s.t) << "\n";
    out << "# x r u v w rho n\n";
    const int nn = int(s.r.size());
    for (int i = 0; i < nn; ++i) {
        const double x = double(i) / (nn - 1);
        out << fmt(x) << ' ' << fmt(s.r[i]) << ' ' << fmt(s.u[i]) << ' '
            << fmt(s.v[i]) << ' ' << fmt(s.w[i]);
        out << '\n';
    }
}

/// Same layout, with the derived density columns filled in.
inline void write_state(const std::string& path, const State& s, const Workspace& ws) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    Reconstruction rec;
    bool have_rec = true;
    try {
        rec = density_reconstruct(s, ws);
    } catch (const solver_error&) {
        have_rec = false;
    }
    out << "# t = " << fmt(s.t) << "\n";
    out << "# x r u v w rho n\n";
    for (int i = 0; i < ws.grid.n_nodes(); ++i) {
        out << fmt(ws.grid.x[i]) << ' ' << fmt(s.r[i]) << ' ' << fmt(s.u[i])
            << ' ' << fmt(s.v[i]) << ' ' << fmt(s.w[i]);
        if (have_rec)
            out << ' ' << fmt(rec.rho[i]) << ' ' << fmt(rec.n[i]);
        out << '\n';
    }
}

/// Comma/space separated doubles; strtod so that "nan" and "inf" round-trip.
inline std::vector<double> parse_doubles(const std::string& line) {
    std::vector<double> out;
    const char* p = line.c_str();
    while (*p) {
        if (*p == ',' || *p == ' ' || *p == '\t') {
            ++p;
            continue;
        }
        char* end = nullptr;
        const double v = std::strtod(p, &end);
        if (end == p)
            break;
        out.push_back(v);
        p = end;
    }
    return out;
}

inline State read_state(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot read " + path);
    State s;
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("# t =", 0) == 0) {
            s.t = std::stod(line.substr(5));
            continue;
        }
        if (line.empty() || line[0] == '#')
            continue;
        const std::vector<double> v = parse_doubles(line);
        if (v.size() < 5)
            throw std::runtime_error(path + ": bad state row: " + line);
        s.r.push_back(v[1]);
        s.u.push_back(v[2]);
        s.v.push_back(v[3]);
        s.w.push_back(v[4]);
    }
    return s;
}

}  // namespace detail

inline void save_run_record(const std::string& dir, const RunRecord& rec,
                            const Workspace* ws = nullptr) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    {
        std::ofstream out(dir + "/diagnostics.csv");
        out << diag_header << "\n";
        for (const DiagRow& r : rec.rows)
            out << detail::fmt(r.t) << ',' << detail::fmt(r.theta_sq_min) << ','
                << detail::fmt(r.vel_sup_ratio) << ',' << detail::fmt(r.baryon_residual)
                << ',' << detail::fmt(r.e_total) << ',' << detail::fmt(r.e_u) << ','
                << detail::fmt(r.e_v) << ',' << detail::fmt(r.e_w) << ','
                << detail::fmt(r.dt) << '\n';
    }
    if (ws != nullptr) {
        detail::write_state(dir + "/state_initial.txt", rec.initial, *ws);
        detail::write_state(dir + "/state_final.txt", rec.final_state, *ws);
    } else {
        detail::write_state(dir + "/state_initial.txt", rec.initial);
        detail::write_state(dir + "/state_final.txt", rec.final_state);
    }
    if (!rec.energy_term_names.empty()) {
        std::ofstream out(dir + "/energy_terms.csv");
        out << "t";
        for (const auto& n : rec.energy_term_names)
            out << ',' << n;
        out << '\n';
        for (std::size_t j = 0; j < rec.energy_times.size(); ++j) {
            out << detail::fmt(rec.energy_times[j]);
            for (double v : rec.energy_terms[j])
                out << ',' << detail::fmt(v);
            out << '\n';
        }
    }
    {
        std::ofstream out(dir + "/meta.txt");
        out << "completed=" << (rec.completed ? 1 : 0) << '\n';
        out << "abort_kind=" << fault_name(rec.abort_kind) << '\n';
        out << "abort_node=" << rec.abort_node << '\n';
        out << "abort_time=" << detail::fmt(rec.abort_time) << '\n';
        out << "abort_message=" << rec.abort_message << '\n';
        for (const auto& [k, v] : rec.config_echo)
            out << "config." << k << '=' << v << '\n';
    }
}

inline RunRecord load_run_record(const std::string& dir) {
    RunRecord rec;
    {
        std::ifstream in(dir + "/diagnostics.csv");
        if (!in)
            throw std::runtime_error("cannot read " + dir + "/diagnostics.csv");
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
            if (line.empty())
                continue;
            const std::vector<double> v = detail::parse_doubles(line);
            if (v.size() != 9)
                throw std::runtime_error(dir + "/diagnostics.csv: bad row: " + line);
            DiagRow r;
            r.t = v[0];
            r.theta_sq_min = v[1];
            r.vel_sup_ratio = v[2];
            r.baryon_residual = v[3];
            r.e_total = v[4];
            r.e_u = v[5];
            r.e_v = v[6];
            r.e_w = v[7];
            r.dt = v[8];
            rec.rows.push_back(r);
        }
    }
    rec.initial = detail::read_state(dir + "/state_initial.txt");
    rec.final_state = detail::read_state(dir + "/state_final.txt");
    {
        std::ifstream in(dir + "/meta.txt");
        if (!in)
            throw std::runtime_error("cannot read " + dir + "/meta.txt");
        std::string line;
        while (std::getline(in, line)) {
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                continue;
            const std::string key = line.substr(0, eq);
            const std::string val = line.substr(eq + 1);
            if (key == "completed")
                rec.completed = val == "1";
            else if (key == "abort_kind")
                rec.abort_kind = fault_from_name(val);
            else if (key == "abort_node")
                rec.abort_node = std::stoi(val);
            else if (key == "abort_time")
                rec.abort_time = std::stod(val);
            else if (key == "abort_message")
                rec.abort_message = val;
            else if (key.rfind("config.", 0) == 0)
                rec.config_echo.emplace_back(key.substr(7), val);
        }
    }
    {
        std::ifstream in(dir + "/energy_terms.csv");
        if (in) {
            std::string line;
            if (std::getline(in, line)) {
                std::stringstream hs(line);
                std::string col;
                bool first = true;
                while (std::getline(hs, col, ',')) {
                    if (!first)
                        rec.energy_term_names.push_back(col);
                    first = false;
                }
            }
            while (std::getline(in, line)) {
                if (line.empty())
                    continue;
                std::vector<double> v = detail::parse_doubles(line);
                if (v.empty())
                    continue;
                rec.energy_times.push_back(v[0]);
                v.erase(v.begin());
                rec.energy_terms.push_back(std::move(v));
            }
        }
    }
    return rec;
}

}  // namespace relvac
