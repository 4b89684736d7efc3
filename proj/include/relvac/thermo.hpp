#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "relvac/errors.hpp"
#include "relvac/grid.hpp"

namespace relvac {

/// Sentinel selecting the formal c->infinity formulas everywhere.
inline constexpr double infinite_c = std::numeric_limits<double>::infinity();

/// gamma-law equation of state, p = rho^gamma.
inline double pressure(double rho, double gamma) {
    if (rho < 0.0)
        throw std::domain_error("pressure: negative density");
    return std::pow(rho, gamma);
}

inline double pressure_deriv(double rho, double gamma) {
    if (rho < 0.0)
        throw std::domain_error("pressure_deriv: negative density");
    return gamma * std::pow(rho, gamma - 1.0);
}

/// Lorentz factor Theta = sqrt(1 - (u^2+v^2+w^2)/c^2). Returns exactly 1 in
/// the infinite-c mode. Throws on |velocity| >= c.
inline double lorentz_theta(double u, double v, double w, double c) {
    if (!std::isfinite(c))
        return 1.0;
    const double s2 = (u * u + v * v + w * w) / (c * c);
    if (s2 >= 1.0)
        throw solver_error(fault::superluminal, -1, 0.0,
                           "speed " + std::to_string(std::sqrt(s2)) + "c");
    return std::sqrt(1.0 - s2);
}

struct PhysParams {
    double c = infinite_c;  // light speed, or infinite_c
    double gamma = 2.0;
    double mu = 0.0;        // parabolic regularization strength
    double cfl = 0.4;

    bool relativistic() const { return std::isfinite(c); }

    void validate() const {
        if (!(gamma > 1.0))
            throw std::invalid_argument("params: gamma must be > 1");
        if (!(mu >= 0.0))
            throw std::invalid_argument("params: mu must be >= 0");
        if (!(cfl > 0.0 && cfl < 1.0))
            throw std::invalid_argument("params: cfl must lie in (0,1)");
        if (relativistic() && !(c > 0.0))
            throw std::invalid_argument("params: c must be positive");
    }
};

/// Sampled initial data. rho0 vanishes at x=1 and stays positive inside;
/// the slope of rho0^(gamma-1) at x=1 must be finite and negative.
struct InitialData {
    field rho0, u0, v0, w0;
    double gamma = 2.0;

    /// Polynomial demo profile: rho0 = (1-x^2)^(1/(gamma-1)),
    /// u0 = v0 = 0.1 x(1-x), w0 = 0.05 (1-x^2).
    static InitialData demo(const Grid& g, double gamma) {
        InitialData d;
        d.gamma = gamma;
        const int m = g.n_nodes();
        d.rho0.resize(m);
        d.u0.resize(m);
        d.v0.resize(m);
        d.w0.resize(m);
        for (int i = 0; i < m; ++i) {
            const double x = g.x[i];
            d.rho0[i] = std::pow(1.0 - x * x, 1.0 / (gamma - 1.0));
            d.u0[i] = 0.1 * x * (1.0 - x);
            d.v0[i] = 0.1 * x * (1.0 - x);
            d.w0[i] = 0.05 * (1.0 - x * x);
        }
        d.rho0[m - 1] = 0.0;
        return d;
    }

    /// Demo density with zero velocities.
    static InitialData rest(const Grid& g, double gamma) {
        InitialData d = demo(g, gamma);
        std::fill(d.u0.begin(), d.u0.end(), 0.0);
        std::fill(d.v0.begin(), d.v0.end(), 0.0);
        std::fill(d.w0.begin(), d.w0.end(), 0.0);
        return d;
    }

    /// Test fixture with constant density; violates the vacuum condition on
    /// purpose, so it skips validation.
    static InitialData uniform(const Grid& g, double gamma, double rho,
                               double u = 0.0, double v = 0.0, double w = 0.0) {
        InitialData d;
        d.gamma = gamma;
        const int m = g.n_nodes();
        d.rho0.assign(m, rho);
        d.u0.assign(m, u);
        d.v0.assign(m, v);
        d.w0.assign(m, w);
        return d;
    }

    void validate(const Grid& g) const {
        require_nodal(rho0, g, "rho0");
        require_nodal(u0, g, "u0");
        require_nodal(v0, g, "v0");
        require_nodal(w0, g, "w0");
        if (!(gamma > 1.0))
            throw std::invalid_argument("initial data: gamma must be > 1");
        const int n = g.n_cells;
        for (int i = 0; i < n; ++i)
            if (!(rho0[i] > 0.0))
                throw std::invalid_argument("initial data: rho0 must be positive on [0,1)");
        if (rho0[n] != 0.0)
            throw std::invalid_argument("initial data: rho0(1) must vanish");
        if (u0[0] != 0.0 || v0[0] != 0.0)
            throw std::invalid_argument("initial data: u0(0) and v0(0) must vanish (axis regularity)");
        // physical vacuum: rho0^(gamma-1) behaves like the distance to x=1.
        // One-sided slope must be finite and negative, and the last-cells
        // ratio p(x_{n-2})/p(x_{n-1}) ~ 2^k for p ~ (1-x)^k must stay below 3
        // (scale-free rejection of higher-order degeneracy).
        field p(g.n_nodes());
        for (int i = 0; i < g.n_nodes(); ++i)
            p[i] = std::pow(rho0[i], gamma - 1.0);
        const double slope =
            (3.0 * p[n] - 4.0 * p[n - 1] + p[n - 2]) / (2.0 * g.dx);
        if (!std::isfinite(slope) || !(slope < 0.0))
            throw std::invalid_argument(
                "initial data: rho0^(gamma-1) must have a finite negative slope at x=1 "
                "(physical vacuum), got " + std::to_string(slope));
        const double order_ratio = p[n - 2] / p[n - 1];
        if (!(order_ratio <= 3.0))
            throw std::invalid_argument(
                "initial data: rho0^(gamma-1) degenerates faster than the distance "
                "function at x=1 (last-cell ratio " + std::to_string(order_ratio) +
                ", need <= 3)");
    }
};

/// Lagrangian flow state. r is the current radius of the shell labelled x;
/// u, v, w are the radial, angular and axial velocity components.
struct State {
    double t = 0.0;
    field r, u, v, w;

    static State initial(const Grid& g, const InitialData& d) {
        State s;
        s.t = 0.0;
        s.r = g.x;
        s.u = d.u0;
        s.v = d.v0;
        s.w = d.w0;
        return s;
    }
};

/// Admissibility of (params, data): velocity headroom 12 max|v0|^2 < c^2,
/// density headroom max rho0^(gamma-1) < c^2, and sound speed below c.
inline void check_admissibility(const PhysParams& params, const InitialData& init) {
    if (!params.relativistic())
        return;
    const double c2 = params.c * params.c;
    double v2max = 0.0, pmax = 0.0;
    for (std::size_t i = 0; i < init.rho0.size(); ++i) {
        const double v2 = init.u0[i] * init.u0[i] + init.v0[i] * init.v0[i] +
                          init.w0[i] * init.w0[i];
        v2max = std::max(v2max, v2);
        pmax = std::max(pmax, std::pow(init.rho0[i], init.gamma - 1.0));
    }
    if (!(12.0 * v2max < c2))
        throw std::invalid_argument("admissibility: 12 max|v0|^2 = " +
                                    std::to_string(12.0 * v2max) +
                                    " must be < c^2 = " + std::to_string(c2));
    if (!(pmax < c2))
        throw std::invalid_argument("admissibility: max rho0^(gamma-1) = " +
                                    std::to_string(pmax) +
                                    " must be < c^2 = " + std::to_string(c2));
    if (!(init.gamma * pmax < c2))
        throw std::invalid_argument("admissibility: sound speed sqrt(gamma rho0^(gamma-1)) "
                                    "must be < c");
}

inline field theta0_field(const InitialData& init, const PhysParams& params) {
    field th(init.rho0.size());
    for (std::size_t i = 0; i < th.size(); ++i)
        th[i] = lorentz_theta(init.u0[i], init.v0[i], init.w0[i], params.c);
    return th;
}

/// Lagrangian weight alpha_c(x) = rho0 / ((1+rho0^(gamma-1)/c^2)^(1/(gamma-1)) Theta0) * x.
/// Infinite c gives the classical alpha_0(x) = rho0 * x.
inline field alpha_c(const field& rho0, const field& theta0, double gamma, double c) {
    field a(rho0.size());
    if (!std::isfinite(c)) {
        for (std::size_t i = 0; i < a.size(); ++i)
            a[i] = rho0[i] * (double(i) / (a.size() - 1));
        return a;
    }
    const double c2 = c * c;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double z = std::pow(rho0[i], gamma - 1.0) / c2;
        if (!(z < 1.0) && rho0[i] > 0.0)
            throw std::domain_error("alpha_c: rho0^(gamma-1) >= c^2");
        const double x = double(i) / (a.size() - 1);
        a[i] = rho0[i] / (std::pow(1.0 + z, 1.0 / (gamma - 1.0)) * theta0[i]) * x;
    }
    return a;
}

/// Everything derived from (grid, data, params) that the solver reuses each
/// step. All fields are time independent.
struct Workspace {
    Grid grid;
    PhysParams params;
    InitialData init;

    field theta0;    // initial Lorentz factor
    field m;         // alpha/x: rho0/((1+z)^(1/(g-1)) Theta0), classical: rho0
    field alpha;     // m * x   (alpha_c, or alpha_0 when c is infinite)
    field dm;        // deriv of m
    field dalpha;    // deriv of alpha
    field P;         // rho0^(gamma-1)
    field dP;        // deriv of P (finite, negative at x=1: physical vacuum)
    field k0;        // 1/((1+z)^(1/(g-1)) Theta0), classical: 1
    field dk0;
    field q0;        // P/((1+z) Theta0^(gamma-1)): weight inside the density bracket
    field alpha0;    // classical weight rho0*x, used by the diagnostic norms
    field dalpha0;
    field xi, chi, d;
    double v0_sup = 0.0;  // max over nodes of max(|u0|,|v0|,|w0|)

    Workspace() = default;

    Workspace(const Grid& g, const InitialData& data, const PhysParams& p)
        : grid(g), params(p), init(data) {
        params.validate();
        const int nn = g.n_nodes();
        const double gamma = p.gamma;

        theta0 = theta0_field(data, p);
        m.resize(nn);
        k0.resize(nn);
        q0.resize(nn);
        P.resize(nn);
        alpha.resize(nn);
        alpha0.resize(nn);
        for (int i = 0; i < nn; ++i) {
            P[i] = std::pow(data.rho0[i], gamma - 1.0);
            if (p.relativistic()) {
                const double z = P[i] / (p.c * p.c);
                k0[i] = 1.0 / (std::pow(1.0 + z, 1.0 / (gamma - 1.0)) * theta0[i]);
                q0[i] = P[i] / ((1.0 + z) * std::pow(theta0[i], gamma - 1.0));
            } else {
                k0[i] = 1.0;
                q0[i] = P[i];
            }
            m[i] = k0[i] * data.rho0[i];
            alpha[i] = m[i] * g.x[i];
            alpha0[i] = data.rho0[i] * g.x[i];
            const double sup = std::max({std::fabs(data.u0[i]), std::fabs(data.v0[i]),
                                         std::fabs(data.w0[i])});
            v0_sup = std::max(v0_sup, sup);
        }
        dm = deriv4(m, g);
        dalpha = deriv(alpha, g);
        dP = deriv4(P, g);
        dk0 = deriv4(k0, g);
        dalpha0 = deriv(alpha0, g);
        xi = cutoff_interior(g);
        chi = cutoff_boundary(g);
        d = distance_to_boundary(g);
    }
};

/// Cut-off placement check: 2*delta must stay inside the region where
/// alpha_0' >= rho0(0)/2 (interior positivity radius of the weight).
inline void check_cutoff_radius(const Workspace& ws) {
    const Grid& g = ws.grid;
    double delta0 = 0.0;
    for (int i = 0; i < g.n_nodes(); ++i) {
        if (ws.dalpha0[i] >= 0.5 * ws.init.rho0[0])
            delta0 = g.x[i];
        else
            break;
    }
    if (2.0 * g.delta > delta0)
        throw std::invalid_argument(
            "grid: 2*delta = " + std::to_string(2.0 * g.delta) +
            " exceeds the interior positivity radius " + std::to_string(delta0));
}

/// x/r with the axis rule (x/r)(0) = 1/r_x(0).
inline field x_over_r(const State& s, const field& rx, const Grid& g) {
    field xr(g.n_nodes());
    xr[0] = 1.0 / rx[0];
    for (int i = 1; i < g.n_nodes(); ++i)
        xr[i] = g.x[i] / s.r[i];
    return xr;
}

struct Reconstruction {
    field n, rho;
    fault flag = fault::none;
    int fault_node = -1;
};

/// Baryon and mass-energy density from the flow map: n from the conservation
/// identity, rho from the density-baryon relation. Infinite c reduces to the
/// classical rho = rho0 * x / (r r_x).
inline Reconstruction reconstruct_density(const State& s, const Workspace& ws,
                                          const field& rx, const field& xr,
                                          const field& theta) {
    const Grid& g = ws.grid;
    const double gamma = ws.params.gamma;
    Reconstruction out;
    out.n.resize(g.n_nodes());
    out.rho.resize(g.n_nodes());
    const bool rel = ws.params.relativistic();
    const double ic2 = rel ? 1.0 / (ws.params.c * ws.params.c) : 0.0;
    for (int i = 0; i < g.n_nodes(); ++i) {
        if (!(rx[i] > 0.0) || (i > 0 && !(s.r[i] > 0.0))) {
            out.flag = fault::shell_crossing;
            out.fault_node = i;
            return out;
        }
        const double geom = xr[i] * theta[i] / rx[i];
        out.n[i] = ws.m[i] * geom;
        if (!rel) {
            out.rho[i] = ws.init.rho0[i] * xr[i] / rx[i];
            continue;
        }
        const double bracket = 1.0 - ic2 * ws.q0[i] * std::pow(geom, gamma - 1.0);
        if (!(bracket > 0.0)) {
            out.flag = fault::density_breakdown;
            out.fault_node = i;
            return out;
        }
        out.rho[i] = out.n[i] * std::pow(bracket, 1.0 / (1.0 - gamma));
    }
    return out;
}

/// Throwing wrapper around reconstruct_density for direct use.
inline Reconstruction density_reconstruct(const State& s, const Workspace& ws) {
    const field rx = deriv(s.r, ws.grid);
    const field xr = x_over_r(s, rx, ws.grid);
    field theta(ws.grid.n_nodes(), 1.0);
    if (ws.params.relativistic())
        for (int i = 0; i < ws.grid.n_nodes(); ++i)
            theta[i] = lorentz_theta(s.u[i], s.v[i], s.w[i], ws.params.c);
    Reconstruction rec = reconstruct_density(s, ws, rx, xr, theta);
    if (rec.flag != fault::none)
        throw solver_error(rec.flag, rec.fault_node, s.t, "density reconstruction");
    return rec;
}

// ---------------------------------------------------------------------------
// initial data ingestion (plain text columns: x rho0 u0 v0 w0)
// ---------------------------------------------------------------------------

inline InitialData load_initial_data(const std::string& path, const Grid& g, double gamma) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open initial data file: " + path);
    InitialData d;
    d.gamma = gamma;
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls(line);
        double x, rho, u, v, w;
        if (!(ls >> x))
            continue;  // blank or comment-only line
        if (!(ls >> rho >> u >> v >> w))
            throw std::runtime_error(path + ": row " + std::to_string(row) +
                                     ": expected 5 columns (x rho0 u0 v0 w0)");
        if (row >= g.n_nodes())
            throw std::runtime_error(path + ": more rows than grid nodes");
        if (std::fabs(x - g.x[row]) > 1e-12)
            throw std::runtime_error(path + ": row " + std::to_string(row) +
                                     ": x = " + std::to_string(x) +
                                     " does not match grid node " + std::to_string(g.x[row]));
        d.rho0.push_back(rho);
        d.u0.push_back(u);
        d.v0.push_back(v);
        d.w0.push_back(w);
        ++row;
    }
    if (row != g.n_nodes())
        throw std::runtime_error(path + ": got " + std::to_string(row) +
                                 " rows, grid needs " + std::to_string(g.n_nodes()));
    d.validate(g);
    return d;
}

inline void save_initial_data(const std::string& path, const InitialData& d, const Grid& g) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write initial data file: " + path);
    out << "# x rho0 u0 v0 w0\n";
    out.precision(17);
    for (int i = 0; i < g.n_nodes(); ++i)
        out << g.x[i] << ' ' << d.rho0[i] << ' ' << d.u0[i] << ' ' << d.v0[i]
            << ' ' << d.w0[i] << '\n';
}

}  // namespace relvac
