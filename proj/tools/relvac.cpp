// Command line driver: single runs, light-speed / viscosity / refinement
// sweeps, stability probes, and energy reports. All outputs are plain text
// (CSV diagnostics, column state snapshots, structured rate reports).

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "relvac/harness.hpp"

namespace {

std::vector<double> parse_values(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty())
            out.push_back(std::stod(tok));
    return out;
}

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::string mode, c_text, init;
    double gamma = -1, mu = -1, cfl = -1, delta = -1, t_end = -1;
    int n_cells = -1, output_every = -1;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "key=value config file");
    cmd->add_option("--out", f.out_dir, "output directory");
    cmd->add_option("--mode", f.mode, "relativistic|classical");
    cmd->add_option("--gamma", f.gamma, "adiabatic exponent (> 1)");
    cmd->add_option("--c", f.c_text, "light speed (number or 'inf')");
    cmd->add_option("--mu", f.mu, "regularization strength (>= 0)");
    cmd->add_option("--cfl", f.cfl, "Courant number in (0,1)");
    cmd->add_option("--n_cells", f.n_cells, "grid cells (>= 4)");
    cmd->add_option("--delta", f.delta, "cut-off half-width in (0,1/4]");
    cmd->add_option("--t_end", f.t_end, "integration horizon");
    cmd->add_option("--output_every", f.output_every, "diagnostics cadence in steps");
    cmd->add_option("--init", f.init, "builtin:demo | builtin:rest | file:PATH");
}

relvac::Config build_config(const CommonFlags& f) {
    relvac::Config cfg;
    if (!f.config_path.empty())
        cfg = relvac::load_config(f.config_path, cfg);
    if (!f.mode.empty()) cfg.set("mode", f.mode);
    if (f.gamma >= 0) cfg.gamma = f.gamma;
    if (!f.c_text.empty()) cfg.set("c", f.c_text);
    if (f.mu >= 0) cfg.mu = f.mu;
    if (f.cfl >= 0) cfg.cfl = f.cfl;
    if (f.n_cells >= 0) cfg.n_cells = f.n_cells;
    if (f.delta >= 0) cfg.delta = f.delta;
    if (f.t_end >= 0) cfg.t_end = f.t_end;
    if (f.output_every >= 0) cfg.output_every = f.output_every;
    if (!f.init.empty()) cfg.init = f.init;
    return cfg;
}

void print_report(const relvac::RateReport& rep) {
    std::printf("%-12s %14s\n", "parameter", "error");
    for (const auto& [p, e] : rep.pairs)
        std::printf("%-12g %14.6e\n", p, e);
    std::printf("slope = %.4f  (target [%.2f, %.2f])  fit residual = %.3e\n",
                rep.slope, rep.target_low, rep.target_high, rep.fit_residual);
    for (double v : rep.aborted_values)
        std::printf("member %g aborted\n", v);
    std::printf("%s\n", rep.pass ? "PASS" : "FAIL");
}

int finish_run(const relvac::RunRecord& rec, const relvac::Config& cfg,
               const std::string& out_dir) {
    if (!out_dir.empty()) {
        const relvac::Problem p = relvac::make_problem(cfg);
        relvac::save_run_record(out_dir, rec, &p.ws);
    }
    if (!rec.completed) {
        std::fprintf(stderr, "run aborted: %s at node %d, t=%.6g (%s)\n",
                     relvac::fault_name(rec.abort_kind), rec.abort_node,
                     rec.abort_time, rec.abort_message.c_str());
        return 2;
    }
    const relvac::DiagRow& last = rec.rows.back();
    std::printf("t=%.6g  theta_sq_min=%.6f  vel_sup_ratio=%.4f  baryon_residual=%.3e\n",
                last.t, last.theta_sq_min, last.vel_sup_ratio, last.baryon_residual);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cylindrical free-boundary gas dynamics lab"};
    app.require_subcommand(1);

    CommonFlags f_sim, f_limit, f_visc, f_refine, f_stab, f_energy;
    std::string limit_values = "8,16,32,64,128";
    std::string visc_values = "0.0025,0.005,0.01";
    std::string refine_values = "64,128,256";
    std::string norm = "sup";
    double epsilon = 1e-6;

    CLI::App* sim = app.add_subcommand("simulate", "run one configuration");
    add_common(sim, f_sim);

    CLI::App* limit = app.add_subcommand("limit-sweep",
                                         "error vs light speed against the classical reference");
    add_common(limit, f_limit);
    limit->add_option("--values", limit_values, "comma separated c values");
    limit->add_option("--norm", norm, "sup | weighted-l2");

    CLI::App* visc = app.add_subcommand("viscosity-sweep", "error vs regularization strength");
    add_common(visc, f_visc);
    visc->add_option("--values", visc_values, "comma separated mu values");

    CLI::App* refine = app.add_subcommand("refine", "self-convergence over nested grids");
    add_common(refine, f_refine);
    refine->add_option("--values", refine_values, "comma separated n_cells values");

    CLI::App* stab = app.add_subcommand("stability", "perturbation amplification probe");
    add_common(stab, f_stab);
    stab->add_option("--epsilon", epsilon, "initial max-norm perturbation");

    CLI::App* energy = app.add_subcommand("energy-report", "run and print the energy table");
    add_common(energy, f_energy);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            const relvac::Config cfg = build_config(f_sim);
            return finish_run(relvac::run_simulation(cfg), cfg, f_sim.out_dir);
        }
        if (limit->parsed()) {
            relvac::SweepSpec spec;
            spec.kind = relvac::SweepKind::light_speed;
            spec.base = build_config(f_limit);
            spec.values = parse_values(limit_values);
            spec.norm = norm;
            const relvac::RateReport rep = relvac::limit_sweep(spec);
            if (!f_limit.out_dir.empty()) {
                std::filesystem::create_directories(f_limit.out_dir);
                relvac::save_rate_report(f_limit.out_dir + "/rate_report.txt", rep);
            }
            print_report(rep);
            return rep.pass ? 0 : 1;
        }
        if (visc->parsed()) {
            relvac::SweepSpec spec;
            spec.kind = relvac::SweepKind::viscosity;
            spec.base = build_config(f_visc);
            spec.values = parse_values(visc_values);
            const relvac::RateReport rep = relvac::viscosity_sweep(spec);
            if (!f_visc.out_dir.empty()) {
                std::filesystem::create_directories(f_visc.out_dir);
                relvac::save_rate_report(f_visc.out_dir + "/rate_report.txt", rep);
            }
            print_report(rep);
            return rep.pass ? 0 : 1;
        }
        if (refine->parsed()) {
            relvac::SweepSpec spec;
            spec.kind = relvac::SweepKind::refinement;
            spec.base = build_config(f_refine);
            spec.values = parse_values(refine_values);
            const relvac::RateReport rep = relvac::refinement_study(spec);
            if (!f_refine.out_dir.empty()) {
                std::filesystem::create_directories(f_refine.out_dir);
                relvac::save_rate_report(f_refine.out_dir + "/rate_report.txt", rep);
            }
            print_report(rep);
            return rep.pass ? 0 : 1;
        }
        if (stab->parsed()) {
            const relvac::Config cfg = build_config(f_stab);
            const double amp = relvac::stability_probe(cfg, epsilon);
            std::printf("epsilon = %g  amplification = %.6g\n", epsilon, amp);
            return 0;
        }
        if (energy->parsed()) {
            const relvac::Config cfg = build_config(f_energy);
            const relvac::RunRecord rec = relvac::run_simulation(cfg);
            if (!f_energy.out_dir.empty()) {
                const relvac::Problem p = relvac::make_problem(cfg);
                relvac::save_run_record(f_energy.out_dir, rec, &p.ws);
            }
            if (rec.energy_times.empty()) {
                std::printf("no energy snapshots (run too short for the 5-point window)\n");
                return rec.completed ? 0 : 2;
            }
            const std::size_t last = rec.energy_times.size() - 1;
            std::printf("energy terms at t = %.6g:\n", rec.energy_times[last]);
            for (std::size_t j = 0; j < rec.energy_term_names.size(); ++j)
                std::printf("  %-32s %.6e\n", rec.energy_term_names[j].c_str(),
                            rec.energy_terms[last][j]);
            return rec.completed ? 0 : 2;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
