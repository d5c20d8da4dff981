"""Reference values for the golden tests, computed with 50-digit mpmath.

Run with `python3 golden_values.py`; every number printed here is frozen
into a Rust test somewhere under crates/core.
"""
from mpmath import mp, mpf, ncdf, erfinv, sqrt, log, e

mp.dps = 50


def phi(t):
    return ncdf(t)


def phi_inv(p):
    return sqrt(2) * erfinv(2 * mpf(p) - 1)


def show(name, value):
    print(f"{name:<44} {mp.nstr(value, 20)}")


show("phi(-1)", phi(-1))
show("phi(1)", phi(1))
show("phi_inv(0.55)", phi_inv("0.55"))
show("0.25 * phi_inv(0.99)", mpf("0.25") * phi_inv("0.99"))
show("phi_inv(0.99)", phi_inv("0.99"))
show("0.25 * phi_inv(0.55)", mpf("0.25") * phi_inv("0.55"))

# concentration
m = mpf(100000)
alpha = mpf("0.001")
show("dkw eps (0.001, 1e5)", sqrt(log(2 / alpha) / (2 * m)))
show("hoeffding margin (0.001, 1e5)", sqrt(log(1 / alpha) / (2 * m)))
show("0.5 - hoeffding margin", mpf("0.5") - sqrt(log(1 / alpha) / (2 * m)))
a2 = 2 * e ** -2
show("alpha = 2e^-2", a2)
show("dkw eps (2e^-2, 50)", sqrt(log(2 / a2) / (2 * 50)))
a3 = 1 - mpf("1e-12")
show("dkw eps (1-1e-12, 10)", sqrt(log(2 / a3) / 20))

# naive / best baseline
show("best baseline (0.75, R=sigma)", phi(phi_inv("0.75") - 1))

# flat 0.55 classifier with a Hoeffding-corrected mean
p_flat = mpf("0.55") - sqrt(log(1 / alpha) / (2 * m))
show("flat: hoeffding lower mean", p_flat)
show("flat: naive radius / sigma", phi_inv(p_flat))
show("stated bracket lo / sigma (0.9 phi_inv(.494))", mpf("0.9") * phi_inv("0.494"))
show("stated bracket hi / sigma (1.1 phi_inv(.496))", mpf("1.1") * phi_inv("0.496"))
eps = sqrt(log(2 / alpha) / (2 * m))
show("flat: cdf radius / sigma (dkw)", phi_inv(1 - eps) - phi_inv(mpf("0.5") / mpf("0.55")))
