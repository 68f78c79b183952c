"""Tapered-panel tip displacement across the anisotropy sweep.

Reproduces the shape of the tip-displacement curves: at moderate
stiffness ratios every method agrees; as the ratio grows, the methods
without under-integration stiffen artificially and their curves fall away
from the under-integrated ones.  Uses a coarsened grid (n = 8) so the
sweep finishes in seconds; bump COOK_N for production-quality curves.
"""

import math
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from tidg import CookConfig, run_cook, write_records_csv

here = os.path.dirname(os.path.abspath(__file__))

COOK_N = 8
P_VALUES = (1.0, 2.0, 5.0, 10.0, 1.0e2, 1.0e3, 1.0e4, 1.0e5)
ANGLE = math.pi / 3.0
METHODS = ("CG1", "CG2", "NIPG", "NIPG_UI")

config = CookConfig(p_values=P_VALUES, angles=(ANGLE,), methods=METHODS,
                    n=COOK_N)
records = run_cook(config)
write_records_csv(records, os.path.join(here, "panel_tip_sweep.csv"))

tips = {}
for r in records:
    tips.setdefault(r.method, []).append((r.p, r.tip_uy))

print(f"{'p':>10s}  " + "  ".join(f"{m:>8s}" for m in METHODS))
for i, p in enumerate(P_VALUES):
    row = "  ".join(f"{tips[m][i][1]:8.3f}" for m in METHODS)
    print(f"{p:10.0f}  {row}")

fig, ax = plt.subplots(figsize=(6.0, 4.2))
for method in METHODS:
    ps, uy = zip(*tips[method])
    ax.semilogx(ps, uy, marker="o", label=method)
ax.set_xlabel("stiffness ratio p")
ax.set_ylabel("vertical tip displacement")
ax.set_title(f"panel tip displacement, fibre angle pi/3, n = {COOK_N}")
ax.legend()
ax.grid(True, which="both", alpha=0.3)
fig.tight_layout()
fig.savefig(os.path.join(here, "panel_tip_sweep.png"), dpi=150)
print("wrote panel_tip_sweep.png and panel_tip_sweep.csv")
