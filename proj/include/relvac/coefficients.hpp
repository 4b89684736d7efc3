#pragma once

#include <cmath>

#include "relvac/errors.hpp"
#include "relvac/thermo.hpp"

namespace relvac {

/// Pointwise velocity-quadratic factors of the momentum system. All are 1 in
/// the rest state and in the infinite-c mode.
struct Lambdas {
    double l1 = 1.0, l2 = 1.0, l3 = 1.0, a0 = 1.0;
};

/// Lambda_1..3 and A_0 at one node. Requires p'(rho) < c^2; all Lambda_i must
/// come out positive, otherwise the state has left the hyperbolic regime.
inline Lambdas lambdas_a0(double u, double v, double w, double rho,
                          const PhysParams& params) {
    if (!params.relativistic())
        return {};
    const double c2 = params.c * params.c;
    const double pp = pressure_deriv(rho, params.gamma);
    if (!(pp < c2))
        throw solver_error(fault::positivity_loss, -1, 0.0, "p'(rho) >= c^2");
    const double th2 = 1.0 - (u * u + v * v + w * w) / c2;
    if (!(th2 > 0.0))
        throw solver_error(fault::superluminal, -1, 0.0, "lambdas_a0");
    const double k = (1.0 - pp / c2) / (c2 * th2);
    Lambdas lam;
    lam.l1 = 1.0 + k * u * u;
    lam.l2 = 1.0 - k * v * v;
    lam.l3 = 1.0 + k * w * w;
    if (!(lam.l1 > 0.0 && lam.l2 > 0.0 && lam.l3 > 0.0))
        throw solver_error(fault::positivity_loss, -1, 0.0, "Lambda_i <= 0");
    const double den = lam.l2 * lam.l3 + k * (1.0 / c2) * (w * w) * (v * v) / th2;
    if (!(den > 0.0))
        throw solver_error(fault::positivity_loss, -1, 0.0, "A_0 denominator <= 0");
    lam.a0 = 1.0 / den;
    return lam;
}

/// Momentum-equation kernels a11, a12 (the gamma=2 system uses these bare).
struct AKernels {
    double a11 = 1.0, a12 = 1.0;
};

inline AKernels a_coeffs(double u, double v, double w, double rho,
                         const PhysParams& params) {
    if (!params.relativistic())
        return {};
    const Lambdas lam = lambdas_a0(u, v, w, rho, params);
    const double c2 = params.c * params.c;
    const double pp = pressure_deriv(rho, params.gamma);
    const double th2 = 1.0 - (u * u + v * v + w * w) / c2;
    const double e = 1.0 - pp / c2;
    const double e2t4 = e * e / (c2 * c2 * th2 * th2);
    AKernels a;
    a.a11 = lam.l1 - e2t4 * lam.a0 * w * w * u * u + e2t4 * lam.a0 * v * v * u * u;
    a.a12 = 1.0 + e / (c2 * th2) * lam.a0 * (v * v - w * w);
    return a;
}

/// Multipliers turning the kernels into the general-gamma coefficients:
/// a11^g = a11 * m11, a12^g = a12 * m12. `bracket` is the density bracket
/// of the reconstruction at the same node.
struct GammaMultipliers {
    double m11 = 1.0, m12 = 1.0;
};

inline GammaMultipliers gamma_multipliers(double rho, double theta, double bracket,
                                          const PhysParams& params) {
    if (!params.relativistic())
        return {};
    const double g = params.gamma;
    const double zr = std::pow(rho, g - 1.0) / (params.c * params.c);
    GammaMultipliers mult;
    mult.m11 = std::pow(bracket, 1.0 / (1.0 - g)) * (1.0 + zr) / theta;
    mult.m12 = g * std::pow(theta, g - 2.0) * std::pow(bracket, g / (1.0 - g)) * (1.0 + zr);
    return mult;
}

/// b-coefficients of the angular/axial equations. For gamma=2 the first slot
/// is A0 p'(rho) (paired with alpha_c/x in the equations); b12 follows the
/// general-gamma form A0 (1 - gamma rho^(gamma-1)/c^2)/Theta for every gamma.
struct BSlots {
    double b11 = 0.0;       // A0 p'(rho)                         (gamma = 2 slot)
    double b11_gamma = 0.0; // gamma A0 ((x/r)(1/r_x) Theta)^(gamma-1) / bracket
    double b12 = 1.0;
};

inline BSlots b_coeffs(double u, double v, double w, double rho,
                       double xr, double rx, double rho0, double theta0,
                       const PhysParams& params) {
    const double g = params.gamma;
    BSlots b;
    if (!params.relativistic()) {
        b.b11 = pressure_deriv(rho, g);
        b.b11_gamma = g * std::pow(xr / rx, g - 1.0);
        b.b12 = 1.0;
        return b;
    }
    const Lambdas lam = lambdas_a0(u, v, w, rho, params);
    const double c2 = params.c * params.c;
    const double theta = std::sqrt(1.0 - (u * u + v * v + w * w) / c2);
    const double geom = xr * theta / rx;
    b.b11 = lam.a0 * pressure_deriv(rho, g);
    b.b12 = lam.a0 * (1.0 - g * std::pow(rho, g - 1.0) / c2) / theta;
    const double P0 = std::pow(rho0, g - 1.0);
    const double q0 = P0 / ((1.0 + P0 / c2) * std::pow(theta0, g - 1.0));
    const double bracket = 1.0 - q0 * std::pow(geom, g - 1.0) / c2;
    if (!(bracket > 0.0))
        throw solver_error(fault::density_breakdown, -1, 0.0, "b_coeffs bracket");
    b.b11_gamma = g * lam.a0 * std::pow(geom, g - 1.0) / bracket;
    return b;
}

/// J factor of the momentum flux:
/// J_gamma = (x/(r r_x))^(gamma-1) (1 - (rho0 (x/r) Theta / r_x)^(gamma-1)/c^2)^((2gamma-1)/(1-gamma)).
/// gamma=2 reduces to (x/(r r_x)) / (1 - (rho0/c^2)(x/r) Theta / r_x)^3.
/// Classical limit: (x/(r r_x))^(gamma-1).
inline field j_factor(const State& s, const InitialData& init,
                      const PhysParams& params, const Grid& g) {
    const double gamma = params.gamma;
    const field rx = deriv(s.r, g);
    const field xr = x_over_r(s, rx, g);
    field j(g.n_nodes());
    for (int i = 0; i < g.n_nodes(); ++i) {
        if (!(rx[i] > 0.0))
            throw solver_error(fault::shell_crossing, i, s.t, "j_factor");
        const double base = std::pow(xr[i] / rx[i], gamma - 1.0);
        if (!params.relativistic()) {
            j[i] = base;
            continue;
        }
        const double theta = lorentz_theta(s.u[i], s.v[i], s.w[i], params.c);
        const double br = 1.0 - std::pow(init.rho0[i] * xr[i] * theta / rx[i], gamma - 1.0) /
                                    (params.c * params.c);
        if (!(br > 0.0))
            throw solver_error(fault::density_breakdown, i, s.t, "j_factor bracket");
        j[i] = base * std::pow(br, (2.0 * gamma - 1.0) / (1.0 - gamma));
    }
    return j;
}

}  // namespace relvac
