#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>
#include <utility>
#include <vector>

#include "relvac/coefficients.hpp"
#include "relvac/grid.hpp"
#include "relvac/thermo.hpp"

namespace relvac {

// ---------------------------------------------------------------------------
// weighted norms
// ---------------------------------------------------------------------------

/// Named weight functions for the weighted L2 norms. The 1/x and 1/sqrt(x)
/// factors are cancelled against alpha0 = rho0*x analytically, so every
/// weight is finite at the axis:
///   one, d, d2, alpha0, sqrt_alpha0, alpha0_over_sqrtx (= rho0 sqrt(x)),
///   alpha0_over_x (= rho0), alpha0_32, alpha0_3_over_x_12 (= rho0^(3/2) x),
/// plus "xi:<name>" and "chi:<name>" masked variants.
inline field weight_field(const std::string& name, const Workspace& ws) {
    const Grid& g = ws.grid;
    std::string base = name;
    const field* mask = nullptr;
    if (name.rfind("xi:", 0) == 0) {
        mask = &ws.xi;
        base = name.substr(3);
    } else if (name.rfind("chi:", 0) == 0) {
        mask = &ws.chi;
        base = name.substr(4);
    }
    field w(g.n_nodes());
    for (int i = 0; i < g.n_nodes(); ++i) {
        const double x = g.x[i];
        const double rho = ws.init.rho0[i];
        double v;
        if (base == "one")
            v = 1.0;
        else if (base == "d")
            v = ws.d[i];
        else if (base == "d2")
            v = ws.d[i] * ws.d[i];
        else if (base == "alpha0")
            v = rho * x;
        else if (base == "sqrt_alpha0")
            v = std::sqrt(rho * x);
        else if (base == "alpha0_over_sqrtx")
            v = rho * std::sqrt(x);
        else if (base == "alpha0_over_x")
            v = rho;
        else if (base == "alpha0_32")
            v = std::pow(rho * x, 1.5);
        else if (base == "alpha0_3_over_x_12")
            v = std::pow(rho, 1.5) * x;
        else
            throw std::invalid_argument("unknown weight name: " + name);
        w[i] = mask ? v * (*mask)[i] : v;
    }
    return w;
}

/// sqrt( integral of weight^2 f^2 ) by trapezoid.
inline double weighted_norm(const field& f, const std::string& weight, const Workspace& ws) {
    require_nodal(f, ws.grid, "weighted_norm");
    const field w = weight_field(weight, ws);
    field integrand(f.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        integrand[i] = w[i] * w[i] * f[i] * f[i];
    return std::sqrt(integrate(integrand, ws.grid));
}

// ---------------------------------------------------------------------------
// energy functional, truncated to time order <= 2 and space order <= 2
// ---------------------------------------------------------------------------

struct EnergySnapshot {
    double t = 0.0;
    double e_u = 0.0, e_v = 0.0, e_w = 0.0;
    double total = 0.0;
    std::vector<std::pair<std::string, double>> terms;
};

namespace detail {

inline field over_x(const field& f, const Grid& g) {
    field r(f.size());
    const field df = deriv(f, g);
    r[0] = df[0];  // f/x -> f_x(0) at the axis
    for (int i = 1; i < g.n_nodes(); ++i)
        r[i] = f[i] / g.x[i];
    return r;
}

inline double sup_sq(const field& f) {
    const double m = max_abs(f);
    return m * m;
}

}  // namespace detail

/// Squared-norm roster for one velocity component pair (L2 terms use
/// weighted_norm; sup terms store the squared max). `radial` selects the
/// richer u-roster.
inline double energy_component(const std::string& tag, const field& f,
                               const field& ft, const field& ftt,
                               const Workspace& ws, bool radial,
                               std::vector<std::pair<std::string, double>>& terms) {
    const Grid& g = ws.grid;
    auto l2 = [&](const std::string& name, const field& h, const char* weight) {
        const double v = weighted_norm(h, weight, ws);
        terms.emplace_back(tag + "." + name, v * v);
        return v * v;
    };
    auto sup = [&](const std::string& name, const field& h) {
        const double v = detail::sup_sq(h);
        terms.emplace_back(tag + "." + name, v);
        return v;
    };
    double e = 0.0;
    const field fx = deriv(f, g);
    const field ftx = deriv(ft, g);
    if (radial) {
        const field fxx = deriv2(f, g);
        const field fox = detail::over_x(f, g);
        const field ftox = detail::over_x(ft, g);
        const field ftxx = deriv2(ft, g);
        const field fttx = deriv(ftt, g);
        e += l2("L2", f, "one");
        e += l2("x.L2", fx, "one");
        e += l2("xx.L2", fxx, "one");
        e += l2("over_x.L2", fox, "one");
        e += l2("over_x.x.L2", deriv(fox, g), "one");
        e += l2("t.L2", ft, "one");
        e += l2("t.x.L2", ftx, "one");
        e += l2("t_over_x.L2", ftox, "one");
        e += l2("t.xx.sqrt_alpha0.L2", ftxx, "sqrt_alpha0");
        e += l2("t.xi.L2", ft, "xi:one");
        e += l2("tt.alpha0_over_sqrtx.L2", ftt, "alpha0_over_sqrtx");
        e += l2("tt.L2", ftt, "one");
        e += l2("tt.x.L2", fttx, "one");
    } else {
        const field fttx = deriv(ftt, g);
        const field fttxx = deriv2(ftt, g);
        e += l2("x.L2", fx, "one");
        e += l2("t.x.L2", ftx, "one");
        e += l2("tt.x.sqrt_alpha0.L2", fttx, "sqrt_alpha0");
        e += l2("tt.xx.alpha0_over_sqrtx.L2", fttxx, "alpha0_over_sqrtx");
        e += sup("t.sup2", ft);
        e += sup("tt.sup2", ftt);
        e += sup("t_over_x.sup2", detail::over_x(ft, g));
        e += sup("tt_over_x.sup2", detail::over_x(ftt, g));
        field w(ws.grid.n_nodes());
        for (int i = 0; i < ws.grid.n_nodes(); ++i)
            w[i] = ws.init.rho0[i] * ftx[i];  // (alpha0/x) d_x d_t f
        e += sup("t.x.alpha0_over_x.sup2", w);
    }
    return e;
}

/// Energy functional over a window of 5 states at uniform time spacing;
/// evaluated at the window centre with 3-point central time differences.
/// Throws if the window is malformed (callers treat "not enough history yet"
/// as a not-ready signal before calling).
inline EnergySnapshot energy_truncated(const std::deque<State>& window, const Workspace& ws) {
    if (window.size() < 5)
        throw std::invalid_argument("energy: need 5 stored snapshots");
    const double k = window[1].t - window[0].t;
    for (std::size_t j = 1; j < 5; ++j)
        if (std::fabs((window[j].t - window[j - 1].t) - k) > 1e-9 * std::max(1.0, std::fabs(k)))
            throw std::invalid_argument("energy: snapshots not uniformly spaced");
    const State& c = window[2];
    const State& p = window[1];
    const State& q = window[3];
    const int nn = ws.grid.n_nodes();

    auto dt1 = [&](const field& fp, const field& fq) {
        field r(nn);
        for (int i = 0; i < nn; ++i)
            r[i] = (fq[i] - fp[i]) / (2.0 * k);
        return r;
    };
    auto dt2 = [&](const field& fp, const field& fc, const field& fq) {
        field r(nn);
        for (int i = 0; i < nn; ++i)
            r[i] = (fq[i] - 2.0 * fc[i] + fp[i]) / (k * k);
        return r;
    };

    EnergySnapshot snap;
    snap.t = c.t;
    snap.e_u = energy_component("u", c.u, dt1(p.u, q.u), dt2(p.u, c.u, q.u), ws, true, snap.terms);
    snap.e_v = energy_component("v", c.v, dt1(p.v, q.v), dt2(p.v, c.v, q.v), ws, false, snap.terms);
    snap.e_w = energy_component("w", c.w, dt1(p.w, q.w), dt2(p.w, c.w, q.w), ws, false, snap.terms);
    snap.total = snap.e_u + snap.e_v + snap.e_w;
    return snap;
}

// ---------------------------------------------------------------------------
// short-time bounds monitor
// ---------------------------------------------------------------------------

/// Runtime mirror of the short-time a-priori estimates: Theta^2 >= 11/12,
/// velocity sup within 4x of the initial sup, and the geometry windows
/// 2/3 <= x/r <= 2, 1/2 <= r_x <= 3/2.
struct BoundsReport {
    double t = 0.0;
    double theta_sq_min = 1.0;
    double vel_sup_ratio = 0.0;
    double rx_min = 1.0, rx_max = 1.0;
    double x_over_r_min = 1.0, x_over_r_max = 1.0;
    bool lorentz_ok = true;
    bool velocity_ok = true;
    bool geometry_ok = true;
};

inline BoundsReport bounds_report(const State& s, const Workspace& ws) {
    const Grid& g = ws.grid;
    BoundsReport b;
    b.t = s.t;
    const field rx = deriv(s.r, g);
    const field xr = x_over_r(s, rx, g);
    double vel_sup = 0.0;
    double s2max = 0.0;
    b.rx_min = b.rx_max = rx[0];
    b.x_over_r_min = b.x_over_r_max = xr[0];
    for (int i = 0; i < g.n_nodes(); ++i) {
        vel_sup = std::max({vel_sup, std::fabs(s.u[i]), std::fabs(s.v[i]), std::fabs(s.w[i])});
        s2max = std::max(s2max, s.u[i] * s.u[i] + s.v[i] * s.v[i] + s.w[i] * s.w[i]);
        b.rx_min = std::min(b.rx_min, rx[i]);
        b.rx_max = std::max(b.rx_max, rx[i]);
        b.x_over_r_min = std::min(b.x_over_r_min, xr[i]);
        b.x_over_r_max = std::max(b.x_over_r_max, xr[i]);
    }
    b.theta_sq_min = ws.params.relativistic()
                         ? 1.0 - s2max / (ws.params.c * ws.params.c)
                         : 1.0;
    b.vel_sup_ratio = ws.v0_sup > 0.0 ? vel_sup / ws.v0_sup : 0.0;
    b.lorentz_ok = b.theta_sq_min >= 11.0 / 12.0;
    b.velocity_ok = b.vel_sup_ratio <= 4.0;
    b.geometry_ok = b.x_over_r_min >= 2.0 / 3.0 && b.x_over_r_max <= 2.0 &&
                    b.rx_min >= 0.5 && b.rx_max <= 1.5;
    return b;
}

// ---------------------------------------------------------------------------
// conserved-weight residual
// ---------------------------------------------------------------------------

/// max | (n/Theta) r_x r - alpha_c | / max alpha_c from caller-supplied
/// fields; the axis node uses the same limit convention as the
/// reconstruction and contributes exactly zero.
inline double baryon_residual_of(const field& n, const field& theta,
                                 const field& r, const field& rx,
                                 const Workspace& ws) {
    double worst = 0.0, amax = 0.0;
    for (int i = 0; i < ws.grid.n_nodes(); ++i)
        amax = std::max(amax, std::fabs(ws.alpha[i]));
    for (int i = 1; i < ws.grid.n_nodes(); ++i) {
        const double lhs = n[i] / theta[i] * rx[i] * r[i];
        worst = std::max(worst, std::fabs(lhs - ws.alpha[i]));
    }
    return amax > 0.0 ? worst / amax : worst;
}

inline double baryon_residual(const State& s, const Workspace& ws) {
    const field rx = deriv(s.r, ws.grid);
    const field xr = x_over_r(s, rx, ws.grid);
    field theta(ws.grid.n_nodes(), 1.0);
    if (ws.params.relativistic())
        for (int i = 0; i < ws.grid.n_nodes(); ++i)
            theta[i] = lorentz_theta(s.u[i], s.v[i], s.w[i], ws.params.c);
    const Reconstruction rec = reconstruct_density(s, ws, rx, xr, theta);
    if (rec.flag != fault::none)
        throw solver_error(rec.flag, rec.fault_node, s.t, "baryon_residual");
    return baryon_residual_of(rec.n, theta, s.r, rx, ws);
}

// ---------------------------------------------------------------------------
// first compatibility derivative
// ---------------------------------------------------------------------------

/// d_t u(x,0) evaluated directly from the initial data with the t=0 geometry
/// (r=x, r_x=1, Theta=Theta_0). Both flux kernels coincide at t=0, so the
/// degenerate combination reduces to 2 m' H0 + m H0'. This is the field the
/// solver's first step has to match.
inline field compat_first_derivative(const Workspace& ws) {
    const Grid& g = ws.grid;
    const int nn = g.n_nodes();
    const PhysParams& pp = ws.params;
    const InitialData& id = ws.init;
    const double gamma = pp.gamma;

    const field du0 = deriv(id.u0, g);
    const field dv0 = deriv(id.v0, g);
    field v2_over_x(nn), u0_over_x(nn);
    v2_over_x[0] = id.v0[0] * dv0[0];
    u0_over_x[0] = du0[0];
    for (int i = 1; i < nn; ++i) {
        v2_over_x[i] = id.v0[i] * id.v0[i] / g.x[i];
        u0_over_x[i] = id.u0[i] / g.x[i];
    }

    field out(nn);
    if (!pp.relativistic()) {
        // classical: u_t = v0^2/x - gamma/(gamma-1) d_x(rho0^(gamma-1))
        for (int i = 0; i < nn; ++i)
            out[i] = v2_over_x[i] - gamma / (gamma - 1.0) * ws.dP[i];
        out[0] = 0.0;  // axis boundary condition, as in the solver
        return out;
    }

    const double c2 = pp.c * pp.c;
    if (gamma == 2.0) {
        field h0(nn);
        for (int i = 0; i < nn; ++i) {
            const double dd = 1.0 - id.rho0[i] * ws.theta0[i] / c2;
            h0[i] = ws.theta0[i] * ws.theta0[i] / (dd * dd);
        }
        const field dh0 = deriv4(h0, g);
        for (int i = 0; i < nn; ++i) {
            const AKernels a = a_coeffs(id.u0[i], id.v0[i], id.w0[i], id.rho0[i], pp);
            const double flux = 2.0 * ws.dm[i] * h0[i] + ws.m[i] * dh0[i];
            const double third = a.a12 / c2 * ws.m[i] *
                                 (du0[i] + u0_over_x[i]) * id.u0[i];
            out[i] = v2_over_x[i] - (flux + third) / a.a11;
        }
        out[0] = 0.0;
        return out;
    }

    // general gamma at t=0: S = Theta0^gamma * B0^(gamma/(1-gamma)),
    // B0 = 1 - q0 Theta0^(gamma-1)/c^2
    field S(nn), B0(nn);
    for (int i = 0; i < nn; ++i) {
        B0[i] = 1.0 - ws.q0[i] * std::pow(ws.theta0[i], gamma - 1.0) / c2;
        S[i] = std::pow(ws.theta0[i], gamma) * std::pow(B0[i], gamma / (1.0 - gamma));
    }
    const field dS = deriv4(S, g);
    for (int i = 0; i < nn; ++i) {
        const AKernels a = a_coeffs(id.u0[i], id.v0[i], id.w0[i], id.rho0[i], pp);
        const GammaMultipliers mult = gamma_multipliers(id.rho0[i], ws.theta0[i], B0[i], pp);
        const double k0g1 = std::pow(ws.k0[i], gamma - 1.0);
        const double core = gamma * k0g1 * (ws.dk0[i] * ws.P[i] +
                                            ws.k0[i] * ws.dP[i] / (gamma - 1.0)) * S[i] +
                            k0g1 * ws.k0[i] * ws.P[i] * dS[i];
        const double third = a.a12 * mult.m12 / c2 * k0g1 * ws.k0[i] * ws.P[i] *
                             (du0[i] + u0_over_x[i]) * id.u0[i];
        out[i] = v2_over_x[i] - (core + third) / (a.a11 * mult.m11);
    }
    out[0] = 0.0;
    return out;
}

}  // namespace relvac
