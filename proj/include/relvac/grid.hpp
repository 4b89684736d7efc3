#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace relvac {

using field = std::vector<double>;

/// Uniform reference grid on [0,1] with nodes x_i = i/n_cells.
///
/// `delta` is the half-width of the boundary cut-off layers; the transition
/// zones of xi and chi live inside [delta/2, 2*delta].
struct Grid {
    int n_cells = 0;
    double dx = 0.0;
    double delta = 0.1;
    field x;

    Grid() = default;

    explicit Grid(int n, double delta_ = 0.1) : n_cells(n), delta(delta_) {
        if (n < 4)
            throw std::invalid_argument("grid: n_cells must be >= 4");
        if (!(delta > 0.0) || delta > 0.25)
            throw std::invalid_argument("grid: delta must lie in (0, 1/4]");
        dx = 1.0 / n;
        x.resize(n + 1);
        for (int i = 0; i <= n; ++i)
            x[i] = double(i) / n;
        x[n] = 1.0;
    }

    int n_nodes() const { return n_cells + 1; }
};

inline void require_nodal(const field& f, const Grid& g, const char* what) {
    if (int(f.size()) != g.n_nodes())
        throw std::invalid_argument(std::string(what) + ": field length " +
                                    std::to_string(f.size()) + " != n_cells+1 = " +
                                    std::to_string(g.n_nodes()));
}

/// First derivative: centered second-order stencils at interior nodes,
/// second-order one-sided stencils at the two ends. Exact on quadratics.
/// Stencils are grouped as node differences so constant fields map to
/// exact zeros.
inline field deriv(const field& f, const Grid& g) {
    require_nodal(f, g, "deriv");
    const int n = g.n_cells;
    const double h2 = 2.0 * g.dx;
    field d(n + 1);
    d[0] = (4.0 * (f[1] - f[0]) - (f[2] - f[0])) / h2;
    for (int i = 1; i < n; ++i)
        d[i] = (f[i + 1] - f[i - 1]) / h2;
    d[n] = (-4.0 * (f[n - 1] - f[n]) + (f[n - 2] - f[n])) / h2;
    return d;
}

/// Uniformly fourth-order first derivative (centered five-point stencils,
/// biased at the ends). Used where second-order pointwise consistency is not
/// enough, e.g. for the flow map whose derivative is divided by x next to
/// the axis.
inline field deriv4(const field& f, const Grid& g) {
    require_nodal(f, g, "deriv4");
    const int n = g.n_cells;
    if (n + 1 < 6)
        return deriv(f, g);
    const double h12 = 12.0 * g.dx;
    field d(n + 1);
    d[0] = (48.0 * (f[1] - f[0]) - 36.0 * (f[2] - f[0]) + 16.0 * (f[3] - f[0]) -
            3.0 * (f[4] - f[0])) / h12;
    d[1] = (-3.0 * (f[0] - f[1]) + 18.0 * (f[2] - f[1]) - 6.0 * (f[3] - f[1]) +
            (f[4] - f[1])) / h12;
    for (int i = 2; i < n - 1; ++i)
        d[i] = ((f[i - 2] - f[i]) - 8.0 * (f[i - 1] - f[i]) + 8.0 * (f[i + 1] - f[i]) -
                (f[i + 2] - f[i])) / h12;
    d[n - 1] = (3.0 * (f[n] - f[n - 1]) - 18.0 * (f[n - 2] - f[n - 1]) +
                6.0 * (f[n - 3] - f[n - 1]) - (f[n - 4] - f[n - 1])) / h12;
    d[n] = (-48.0 * (f[n - 1] - f[n]) + 36.0 * (f[n - 2] - f[n]) -
            16.0 * (f[n - 3] - f[n]) + 3.0 * (f[n - 4] - f[n])) / h12;
    return d;
}

/// Second derivative companion to deriv (same order, used by the viscous term).
inline field deriv2(const field& f, const Grid& g) {
    require_nodal(f, g, "deriv2");
    const int n = g.n_cells;
    const double hh = g.dx * g.dx;
    field d(n + 1);
    d[0] = (2.0 * (f[0] - f[1]) - 3.0 * (f[1] - f[2]) + (f[2] - f[3])) / hh;
    for (int i = 1; i < n; ++i)
        d[i] = ((f[i + 1] - f[i]) - (f[i] - f[i - 1])) / hh;
    d[n] = (2.0 * (f[n] - f[n - 1]) - 3.0 * (f[n - 1] - f[n - 2]) + (f[n - 2] - f[n - 3])) / hh;
    return d;
}

/// Composite trapezoid on the full interval; exact for affine integrands.
inline double integrate(const field& f, const Grid& g) {
    require_nodal(f, g, "integrate");
    const int n = g.n_cells;
    double s = 0.5 * (f[0] + f[n]);
    for (int i = 1; i < n; ++i)
        s += f[i];
    return s * g.dx;
}

/// d(x) = dist(x, {0,1}) = min(x, 1-x).
inline field distance_to_boundary(const Grid& g) {
    field d(g.n_nodes());
    for (int i = 0; i < g.n_nodes(); ++i)
        d[i] = std::min(g.x[i], 1.0 - g.x[i]);
    return d;
}

namespace detail {
// cubic smoothstep, 0 at 0 and 1 at 1, monotone, max slope 3/2
inline double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }
}  // namespace detail

/// Interior cut-off xi: 1 on [0,delta], 0 on [2*delta,1], C^1 transition.
/// max|xi'| = 1.5/delta.
inline field cutoff_interior(const Grid& g) {
    field xi(g.n_nodes());
    for (int i = 0; i < g.n_nodes(); ++i) {
        const double x = g.x[i];
        if (x <= g.delta)
            xi[i] = 1.0;
        else if (x >= 2.0 * g.delta)
            xi[i] = 0.0;
        else
            xi[i] = 1.0 - detail::smoothstep((x - g.delta) / g.delta);
    }
    return xi;
}

/// Boundary cut-off chi: 1 on [delta,1], 0 on [0,delta/2]. max|chi'| = 3/delta.
inline field cutoff_boundary(const Grid& g) {
    field chi(g.n_nodes());
    const double a = 0.5 * g.delta;
    for (int i = 0; i < g.n_nodes(); ++i) {
        const double x = g.x[i];
        if (x <= a)
            chi[i] = 0.0;
        else if (x >= g.delta)
            chi[i] = 1.0;
        else
            chi[i] = detail::smoothstep((x - a) / a);
    }
    return chi;
}

inline double max_abs(const field& f) {
    double m = 0.0;
    for (double v : f)
        m = std::max(m, std::fabs(v));
    return m;
}

inline double max_abs_diff(const field& a, const field& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

inline bool all_finite(const field& f) {
    for (double v : f)
        if (!std::isfinite(v))
            return false;
    return true;
}

}  // namespace relvac
