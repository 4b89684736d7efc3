#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "relvac/dynamics.hpp"
#include "relvac/record.hpp"

namespace relvac {

// ---------------------------------------------------------------------------
// configuration
// ---------------------------------------------------------------------------

/// Run configuration, mirroring the key=value config file and the CLI flags.
/// `c` is ignored in classical mode (the classical solver is the exact
/// infinite-c system, not a large-c run).
struct Config {
    std::string mode = "relativistic";  // relativistic | classical
    double gamma = 2.0;
    double c = 16.0;
    double mu = 0.0;
    double cfl = 0.4;
    int n_cells = 128;
    double delta = 0.1;
    double t_end = 0.1;
    int output_every = 5;
    std::string init = "builtin:demo";  // builtin:<name> | file:<path>

    void set(const std::string& key, const std::string& value) {
        auto num = [&](const char* what) {
            try {
                std::size_t pos = 0;
                const double v = std::stod(value, &pos);
                if (pos != value.size())
                    throw std::invalid_argument(value);
                return v;
            } catch (const std::exception&) {
                throw std::invalid_argument(std::string("config: bad number for ") + what +
                                            ": '" + value + "'");
            }
        };
        if (key == "mode") {
            if (value != "relativistic" && value != "classical")
                throw std::invalid_argument("config: mode must be relativistic or classical");
            mode = value;
        } else if (key == "gamma")
            gamma = num("gamma");
        else if (key == "c") {
            if (value == "inf" || value == "infinite")
                c = infinite_c;
            else
                c = num("c");
        } else if (key == "mu")
            mu = num("mu");
        else if (key == "cfl")
            cfl = num("cfl");
        else if (key == "n_cells")
            n_cells = int(num("n_cells"));
        else if (key == "delta")
            delta = num("delta");
        else if (key == "t_end")
            t_end = num("t_end");
        else if (key == "output_every")
            output_every = int(num("output_every"));
        else if (key == "init")
            init = value;
        else
            throw std::invalid_argument("config: unknown key '" + key + "'");
    }

    std::vector<std::pair<std::string, std::string>> echo() const {
        auto fmt = [](double v) {
            if (!std::isfinite(v))
                return std::string("inf");
            std::ostringstream os;
            os.precision(17);
            os << v;
            return os.str();
        };
        return {{"mode", mode},           {"gamma", fmt(gamma)},
                {"c", fmt(c)},            {"mu", fmt(mu)},
                {"cfl", fmt(cfl)},        {"n_cells", std::to_string(n_cells)},
                {"delta", fmt(delta)},    {"t_end", fmt(t_end)},
                {"output_every", std::to_string(output_every)},
                {"init", init}};
    }
};

inline Config parse_config(std::istream& in, Config base = {}) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key=value, got '" + line + "'");
        base.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return base;
}

inline Config load_config(const std::string& path, Config base = {}) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config file: " + path);
    return parse_config(in, base);
}

/// Grid + data + params + workspace, validated and admissibility-checked.
/// Construction fails before any stepping if the configuration is rejected.
struct Problem {
    Grid grid;
    InitialData init;
    PhysParams params;
    Workspace ws;
};

inline InitialData make_initial_data(const Config& cfg, const Grid& grid) {
    if (cfg.init.rfind("builtin:", 0) == 0) {
        const std::string name = cfg.init.substr(8);
        InitialData d;
        if (name == "demo")
            d = InitialData::demo(grid, cfg.gamma);
        else if (name == "rest")
            d = InitialData::rest(grid, cfg.gamma);
        else
            throw std::invalid_argument("config: unknown builtin initial data '" + name + "'");
        d.validate(grid);
        return d;
    }
    if (cfg.init.rfind("file:", 0) == 0)
        return load_initial_data(cfg.init.substr(5), grid, cfg.gamma);
    throw std::invalid_argument("config: init must be builtin:<name> or file:<path>, got '" +
                                cfg.init + "'");
}

inline Problem make_problem(const Config& cfg) {
    Problem p;
    p.grid = Grid(cfg.n_cells, cfg.delta);
    p.init = make_initial_data(cfg, p.grid);
    p.params.c = cfg.mode == "classical" ? infinite_c : cfg.c;
    p.params.gamma = cfg.gamma;
    p.params.mu = cfg.mu;
    p.params.cfl = cfg.cfl;
    p.params.validate();
    check_admissibility(p.params, p.init);
    p.ws = Workspace(p.grid, p.init, p.params);
    check_cutoff_radius(p.ws);
    return p;
}

/// Full run: validate, advance, stamp the config echo.
inline RunRecord run_simulation(const Config& cfg, double dt_override = 0.0) {
    const Problem p = make_problem(cfg);
    AdvanceOptions opts;
    opts.t_end = cfg.t_end;
    opts.record_every = std::max(1, cfg.output_every);
    opts.dt_override = dt_override;
    RunRecord rec = advance(State::initial(p.grid, p.init), p.ws, opts);
    rec.config_echo = cfg.echo();
    return rec;
}

// ---------------------------------------------------------------------------
// rate fits and sweeps
// ---------------------------------------------------------------------------

enum class SweepKind { light_speed, viscosity, refinement, stability };

struct SweepSpec {
    SweepKind kind = SweepKind::light_speed;
    std::vector<double> values;  // strictly monotone; >= 3 entries for a fit
    Config base;
    std::string norm = "sup";  // sup | weighted-l2

    void validate() const {
        if (values.size() < 3)
            throw std::invalid_argument("sweep: need at least 3 values for a rate fit");
        for (std::size_t i = 1; i < values.size(); ++i)
            if (!(values[i] > values[i - 1]) && !(values[i] < values[i - 1]))
                throw std::invalid_argument("sweep: values must be strictly monotone");
        for (std::size_t i = 2; i < values.size(); ++i)
            if ((values[i] > values[i - 1]) != (values[1] > values[0]))
                throw std::invalid_argument("sweep: values must be strictly monotone");
        if (norm != "sup" && norm != "weighted-l2")
            throw std::invalid_argument("sweep: norm must be sup or weighted-l2");
    }
};

struct RateReport {
    SweepKind kind = SweepKind::light_speed;
    std::vector<std::pair<double, double>> pairs;  // (parameter, error)
    double slope = 0.0;
    double intercept = 0.0;
    double fit_residual = 0.0;
    double target_low = 0.0, target_high = 0.0;
    bool pass = false;
    std::vector<double> aborted_values;  // members that did not finish
};

/// Least-squares fit of log(err) against log(parameter).
inline void fit_loglog(RateReport& rep) {
    const std::size_t n = rep.pairs.size();
    if (n < 2)
        throw std::invalid_argument("rate fit: need at least 2 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [p, e] : rep.pairs) {
        if (!(p > 0.0) || !(e > 0.0))
            throw std::invalid_argument("rate fit: parameters and errors must be positive");
        const double lx = std::log(p), ly = std::log(e);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double det = double(n) * sxx - sx * sx;
    rep.slope = (double(n) * sxy - sx * sy) / det;
    rep.intercept = (sy * sxx - sx * sxy) / det;
    double rss = 0;
    for (const auto& [p, e] : rep.pairs) {
        const double d = std::log(e) - (rep.intercept + rep.slope * std::log(p));
        rss += d * d;
    }
    rep.fit_residual = std::sqrt(rss / double(n));
}

namespace detail {

/// Difference of two states in the requested norm, maximised over the listed
/// fields (r_x included via the derivative operator).
inline double state_distance(const State& a, const State& b, const Workspace& ws,
                             const std::string& norm) {
    const Grid& g = ws.grid;
    field diff(g.n_nodes());
    double worst = 0.0;
    auto add = [&](const field& fa, const field& fb) {
        for (int i = 0; i < g.n_nodes(); ++i)
            diff[i] = fa[i] - fb[i];
        const double e = norm == "sup" ? max_abs(diff)
                                       : weighted_norm(diff, "sqrt_alpha0", ws);
        worst = std::max(worst, e);
    };
    add(a.u, b.u);
    add(a.v, b.v);
    add(a.w, b.w);
    add(a.r, b.r);
    add(deriv(a.r, g), deriv(b.r, g));
    return worst;
}

}  // namespace detail

/// Light-speed sweep: one classical reference (exact infinite-c mode) plus a
/// run per c, all on the same grid and the same uniform dt (computed from the
/// stiffest member). Pass window for the fitted slope: [-2.3, -1.7].
inline RateReport limit_sweep(const SweepSpec& spec) {
    SweepSpec s = spec;
    s.validate();
    RateReport rep;
    rep.kind = SweepKind::light_speed;
    rep.target_low = -2.3;
    rep.target_high = -1.7;

    Config ref_cfg = s.base;
    ref_cfg.mode = "classical";
    const Problem ref_problem = make_problem(ref_cfg);

    // shared schedule: stiffest member decides
    double dt_shared = step_control(State::initial(ref_problem.grid, ref_problem.init),
                                    ref_problem.ws)
                           .dt;
    std::vector<Problem> members;
    for (double c : s.values) {
        Config cfg = s.base;
        cfg.mode = "relativistic";
        cfg.c = c;
        members.push_back(make_problem(cfg));
        dt_shared = std::min(dt_shared,
                             step_control(State::initial(members.back().grid,
                                                         members.back().init),
                                          members.back().ws)
                                 .dt);
    }

    AdvanceOptions opts;
    opts.t_end = s.base.t_end;
    opts.record_every = std::max(1, s.base.output_every);
    opts.dt_override = dt_shared;
    const RunRecord ref = advance(State::initial(ref_problem.grid, ref_problem.init),
                                  ref_problem.ws, opts);
    if (!ref.completed)
        throw solver_error(ref.abort_kind, ref.abort_node, ref.abort_time,
                           "classical reference run aborted");

    for (std::size_t i = 0; i < members.size(); ++i) {
        const RunRecord run = advance(State::initial(members[i].grid, members[i].init),
                                      members[i].ws, opts);
        if (!run.completed) {
            rep.aborted_values.push_back(s.values[i]);
            continue;
        }
        const double err = detail::state_distance(run.final_state, ref.final_state,
                                                  ref_problem.ws, s.norm);
        rep.pairs.emplace_back(s.values[i], err);
    }
    if (rep.pairs.size() >= 2)
        fit_loglog(rep);
    rep.pass = rep.aborted_values.empty() && rep.pairs.size() == s.values.size() &&
               rep.slope >= rep.target_low && rep.slope <= rep.target_high;
    return rep;
}

/// Viscosity sweep: reference is the mu = 0 run on the shared schedule
/// (stiffest = largest mu); err(mu) = distance of u at t_end. Expect slope
/// 1.0 +- 0.3 and monotone decrease.
inline RateReport viscosity_sweep(const SweepSpec& spec) {
    SweepSpec s = spec;
    s.validate();
    RateReport rep;
    rep.kind = SweepKind::viscosity;
    rep.target_low = 0.7;
    rep.target_high = 1.3;

    Config ref_cfg = s.base;
    ref_cfg.mu = 0.0;
    const Problem ref_problem = make_problem(ref_cfg);
    double dt_shared = step_control(State::initial(ref_problem.grid, ref_problem.init),
                                    ref_problem.ws)
                           .dt;
    std::vector<Problem> members;
    for (double mu : s.values) {
        Config cfg = s.base;
        cfg.mu = mu;
        members.push_back(make_problem(cfg));
        dt_shared = std::min(dt_shared,
                             step_control(State::initial(members.back().grid,
                                                         members.back().init),
                                          members.back().ws)
                                 .dt);
    }
    AdvanceOptions opts;
    opts.t_end = s.base.t_end;
    opts.record_every = std::max(1, s.base.output_every);
    opts.dt_override = dt_shared;
    const RunRecord ref = advance(State::initial(ref_problem.grid, ref_problem.init),
                                  ref_problem.ws, opts);
    if (!ref.completed)
        throw solver_error(ref.abort_kind, ref.abort_node, ref.abort_time,
                           "mu=0 reference run aborted");
    for (std::size_t i = 0; i < members.size(); ++i) {
        const RunRecord run = advance(State::initial(members[i].grid, members[i].init),
                                      members[i].ws, opts);
        if (!run.completed) {
            rep.aborted_values.push_back(s.values[i]);
            continue;
        }
        field diff(ref_problem.grid.n_nodes());
        for (int j = 0; j < ref_problem.grid.n_nodes(); ++j)
            diff[j] = run.final_state.u[j] - ref.final_state.u[j];
        const double err = s.norm == "sup" ? max_abs(diff)
                                           : weighted_norm(diff, "sqrt_alpha0", ref_problem.ws);
        rep.pairs.emplace_back(s.values[i], err);
    }
    if (rep.pairs.size() >= 2)
        fit_loglog(rep);
    bool monotone = true;
    std::vector<std::pair<double, double>> sorted = rep.pairs;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (!(sorted[i].second > sorted[i - 1].second))
            monotone = false;
    rep.pass = rep.aborted_values.empty() && rep.pairs.size() == s.values.size() && monotone &&
               rep.slope >= rep.target_low && rep.slope <= rep.target_high;
    return rep;
}

/// Grid refinement study (values = n_cells list, each member on its own
/// CFL-scaled dt so dx and dt refine together). Error pairs are nested-grid
/// differences of u against the next finer member; expected order 2.0 +- 0.3.
inline RateReport refinement_study(const SweepSpec& spec) {
    SweepSpec s = spec;
    s.validate();
    RateReport rep;
    rep.kind = SweepKind::refinement;
    rep.target_low = 1.7;
    rep.target_high = 2.3;

    std::vector<RunRecord> runs;
    std::vector<int> cells;
    for (double v : s.values) {
        Config cfg = s.base;
        cfg.n_cells = int(v);
        cells.push_back(cfg.n_cells);
        runs.push_back(run_simulation(cfg));
        if (!runs.back().completed) {
            rep.aborted_values.push_back(v);
            return rep;
        }
    }
    for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
        if (cells[i + 1] % cells[i] != 0)
            throw std::invalid_argument("refinement: grids must be nested");
        const int stride = cells[i + 1] / cells[i];
        double diff = 0.0;
        for (int j = 0; j <= cells[i]; ++j)
            diff = std::max(diff, std::fabs(runs[i].final_state.u[j] -
                                            runs[i + 1].final_state.u[j * stride]));
        rep.pairs.emplace_back(1.0 / cells[i], diff);
    }
    if (rep.pairs.size() >= 2) {
        fit_loglog(rep);
    } else {
        // two-grid pair: observed order from the single ratio is not a fit;
        // report the Richardson exponent directly
        rep.slope = 0.0;
    }
    rep.pass = rep.aborted_values.empty() && rep.slope >= rep.target_low &&
               rep.slope <= rep.target_high;
    return rep;
}

/// Amplification of a max-norm epsilon perturbation of u0 at t_end.
/// epsilon = 0 returns 0 by convention.
inline double stability_probe(const Config& cfg, double epsilon) {
    if (epsilon == 0.0)
        return 0.0;
    const Problem base = make_problem(cfg);
    const double dt_shared =
        step_control(State::initial(base.grid, base.init), base.ws).dt;
    AdvanceOptions opts;
    opts.t_end = cfg.t_end;
    opts.record_every = std::max(1, cfg.output_every);
    opts.dt_override = dt_shared;
    const RunRecord a = advance(State::initial(base.grid, base.init), base.ws, opts);
    if (!a.completed)
        throw solver_error(a.abort_kind, a.abort_node, a.abort_time, "base run aborted");

    InitialData perturbed = base.init;
    for (int i = 0; i < base.grid.n_nodes(); ++i) {
        const double x = base.grid.x[i];
        perturbed.u0[i] += epsilon * 4.0 * x * (1.0 - x);  // max-norm bump of size epsilon
    }
    perturbed.validate(base.grid);
    check_admissibility(base.params, perturbed);
    const Workspace ws2(base.grid, perturbed, base.params);
    const RunRecord b = advance(State::initial(base.grid, perturbed), ws2, opts);
    if (!b.completed)
        throw solver_error(b.abort_kind, b.abort_node, b.abort_time, "perturbed run aborted");

    return detail::state_distance(a.final_state, b.final_state, base.ws, "sup") /
           std::fabs(epsilon);
}

// ---------------------------------------------------------------------------
// report persistence
// ---------------------------------------------------------------------------

inline const char* sweep_kind_name(SweepKind k) {
    switch (k) {
        case SweepKind::light_speed: return "light-speed";
        case SweepKind::viscosity: return "viscosity";
        case SweepKind::refinement: return "refinement";
        case SweepKind::stability: return "stability";
    }
    return "unknown";
}

inline void save_rate_report(const std::string& path, const RateReport& rep) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << "kind=" << sweep_kind_name(rep.kind) << '\n';
    out << "points=" << rep.pairs.size() << '\n';
    out << "# parameter error\n";
    out.precision(17);
    for (const auto& [p, e] : rep.pairs)
        out << p << ' ' << e << '\n';
    out << "slope=" << rep.slope << '\n';
    out << "intercept=" << rep.intercept << '\n';
    out << "fit_residual=" << rep.fit_residual << '\n';
    out << "target_low=" << rep.target_low << '\n';
    out << "target_high=" << rep.target_high << '\n';
    out << "pass=" << (rep.pass ? 1 : 0) << '\n';
    if (!rep.aborted_values.empty()) {
        out << "aborted=";
        for (std::size_t i = 0; i < rep.aborted_values.size(); ++i)
            out << (i ? "," : "") << rep.aborted_values[i];
        out << '\n';
    }
}

}  // namespace relvac
