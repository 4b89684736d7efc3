#!/usr/bin/env python3
"""High-precision reference values for the coefficient algebra unit tests.

Evaluates the pointwise coefficient formulas (Lorentz factor, Lambda_i, A0,
a11/a12 kernels, the general-gamma multipliers, b-slots, the J factor, the
Lagrangian weight and the density reconstruction) at the sampled states used
by tests/test_coefficients.cpp and tests/test_thermo.cpp, with 50-digit
arithmetic, independently of the C++ implementation. Frozen outputs live in
the test sources; rerun this script to regenerate them.
"""

import mpmath as mp

mp.mp.dps = 50


def theta(u, v, w, c):
    return mp.sqrt(1 - (u * u + v * v + w * w) / (c * c))


def lambdas_a0(u, v, w, rho, gamma, c):
    c2 = c * c
    pp = gamma * rho ** (gamma - 1)
    th2 = 1 - (u * u + v * v + w * w) / c2
    k = (1 - pp / c2) / (c2 * th2)
    l1 = 1 + k * u * u
    l2 = 1 - k * v * v
    l3 = 1 + k * w * w
    a0 = 1 / (l2 * l3 + (1 - pp / c2) * w * w * v * v / (c2 * c2 * th2 * th2))
    return l1, l2, l3, a0


def a_kernels(u, v, w, rho, gamma, c):
    c2 = c * c
    pp = gamma * rho ** (gamma - 1)
    th2 = 1 - (u * u + v * v + w * w) / c2
    e = 1 - pp / c2
    l1, l2, l3, a0 = lambdas_a0(u, v, w, rho, gamma, c)
    e2t4 = e * e / (c2 * c2 * th2 * th2)
    a11 = l1 - e2t4 * a0 * w * w * u * u + e2t4 * a0 * v * v * u * u
    a12 = 1 + e / (c2 * th2) * a0 * (v * v - w * w)
    return a11, a12


def show(name, value):
    print(f"{name:28s} {mp.nstr(value, 20)}")


print("# state: gamma=2, c=10, rho=1/2 (p'=1), u=1, v=2, w=0")
l1, l2, l3, a0 = lambdas_a0(1, 2, 0, mp.mpf(1) / 2, 2, 10)
show("lambda1", l1)
show("lambda2", l2)
show("lambda3", l3)
show("a0", a0)
a11, a12 = a_kernels(1, 2, 0, mp.mpf(1) / 2, 2, 10)
show("a11", a11)
show("a12", a12)

print("\n# lorentz: (3,0,4), c=10")
show("theta", theta(3, 0, 4, 10))

print("\n# weight: gamma=2, c=10, rho0=1/2, theta0=1, x=1/2")
z = mp.mpf(1) / 2 / 100
show("alpha_c", mp.mpf(1) / 2 / ((1 + z) * 1) * mp.mpf(1) / 2)

print("\n# density: gamma=2, c=10, rho0=1/2, theta0=1, theta=1, x=1/2, r=3/5, rx=6/5")
rho0 = mp.mpf(1) / 2
c = mp.mpf(10)
x = mp.mpf(1) / 2
r = mp.mpf(3) / 5
rx = mp.mpf(6) / 5
gamma = 2
z = rho0 ** (gamma - 1) / c ** 2
m = rho0 / ((1 + z) ** (mp.mpf(1) / (gamma - 1)) * 1)
q0 = rho0 ** (gamma - 1) / ((1 + z) * 1)
geom = (x / r) / rx
bracket = 1 - q0 * geom ** (gamma - 1) / c ** 2
rho = m * geom * bracket ** (mp.mpf(1) / (1 - gamma))
show("n", m * geom)
show("rho", rho)

print("\n# J: gamma=2, c=10, rho0=1/2, theta=1, x=r=1/2, rx=1")
show("J", (1 / (1 - mp.mpf(1) / 2 / 100) ** 3))

print("\n# general-gamma multipliers: gamma=3/2, c=10, rho=0.37, theta=0.99, bracket=0.95")
gamma = mp.mpf(3) / 2
rho = mp.mpf("0.37")
th = mp.mpf("0.99")
br = mp.mpf("0.95")
zr = rho ** (gamma - 1) / 100
show("m11", br ** (1 / (1 - gamma)) * (1 + zr) / th)
show("m12", gamma * th ** (gamma - 2) * br ** (gamma / (1 - gamma)) * (1 + zr))

print("\n# b-slots: general gamma=3/2, c=10, state u=0.2, v=0.1, w=0.05,")
print("# rho=0.42, rho0=0.5, theta0=1, xr=0.9, rx=1.1")
u, v, w = mp.mpf("0.2"), mp.mpf("0.1"), mp.mpf("0.05")
rho = mp.mpf("0.42")
rho0 = mp.mpf("0.5")
xr, rx = mp.mpf("0.9"), mp.mpf("1.1")
c = mp.mpf(10)
_, _, _, a0 = lambdas_a0(u, v, w, rho, gamma, c)
th = theta(u, v, w, c)
P0 = rho0 ** (gamma - 1)
q0 = P0 / ((1 + P0 / c ** 2) * 1)
geom = xr * th / rx
bracket = 1 - q0 * geom ** (gamma - 1) / c ** 2
show("b11 (A0 p')", a0 * gamma * rho ** (gamma - 1))
show("b12", a0 * (1 - gamma * rho ** (gamma - 1) / c ** 2) / th)
show("b11_gamma", gamma * a0 * geom ** (gamma - 1) / bracket)
