"""Tour of the constitutive layer: conversions, stability, eigenvalues.

Walks the five-constant law from engineering inputs, maps the stability
region in the (p, nu) plane, and shows how the smallest stiffness
eigenvalue (the pointwise coercivity constant) varies with fibre angle.
Saves two PNGs next to this script.
"""

import math
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from tidg import (EngineeringConstants, FiberDirection, derive_params,
                  derive_params_special, min_eigenvalue, stability_check,
                  voigt_matrix)

here = os.path.dirname(os.path.abspath(__file__))

# -- from engineering constants to the five-constant law ----------------------

ec = EngineeringConstants(E_t=250.0, p=10.0, q=1.0, nu_t=0.49995, nu_l=0.49995)
params = derive_params(ec)
print("engineering constants:", ec)
print(f"  lambda = {params.lam:10.3f}   mu_t = {params.mu_t:8.3f}")
print(f"  alpha  = {params.alpha:10.3f}   beta = {params.beta:8.3f}")
print(f"  gamma  = {params.gamma:10.3f}  (zero because q = 1)")
print()

# the extensional constant grows linearly with the stiffness ratio
for p in (1.0, 10.0, 100.0, 1000.0):
    beta = derive_params_special(1.0, p, 0.3).beta
    print(f"  p = {p:7.0f}  ->  beta / E_t = {beta:10.2f}")
print()

# -- stability region in the (p, nu) plane -----------------------------------

ps = np.logspace(-1.0, 2.0, 160)
nus = np.linspace(-0.9, 0.7, 160)
ok = np.zeros((len(nus), len(ps)))
for i, nu in enumerate(nus):
    for j, p in enumerate(ps):
        report = stability_check(
            EngineeringConstants(E_t=1.0, p=p, q=1.0, nu_t=nu, nu_l=nu))
        ok[i, j] = report.ok

fig, ax = plt.subplots(figsize=(5.2, 4.0))
ax.pcolormesh(ps, nus, ok, shading="auto", cmap="Greens")
ax.set_xscale("log")
ax.set_xlabel("stiffness ratio p")
ax.set_ylabel("Poisson ratio")
ax.set_title("pointwise stability region (green), q = 1")
fig.tight_layout()
fig.savefig(os.path.join(here, "material_stability_region.png"), dpi=150)
print("wrote material_stability_region.png")

# -- smallest stiffness eigenvalue over fibre angle ---------------------------

angles = np.linspace(0.0, math.pi, 181)
fig, ax = plt.subplots(figsize=(5.2, 4.0))
for p in (1.0, 10.0, 1000.0):
    params = derive_params_special(1.0, p, 0.3)
    lmin = [min_eigenvalue(voigt_matrix(params, FiberDirection(a)))
            for a in angles]
    ax.plot(angles, lmin, label=f"p = {p:g}")
ax.set_xlabel("fibre angle [rad]")
ax.set_ylabel("smallest stiffness eigenvalue")
ax.set_title("pointwise coercivity constant vs fibre angle")
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(here, "material_min_eigenvalue.png"), dpi=150)
print("wrote material_min_eigenvalue.png")
