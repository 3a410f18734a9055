"""
Entanglement dynamics from a Bell pair
======================================

Sites 1 and 2 start maximally entangled, everything else points up.  The
XYZ lattice then spreads and loses that entanglement while it relaxes to
its unique steady state.  A figure is saved if matplotlib is around.
"""

import numpy as np

from dissipative_lattice.evolve import EvolutionGrid
from dissipative_lattice.runner import RunConfig, SweepPoint, run_point

cfg = RunConfig(grid=EvolutionGrid(t_max=300.0, n_points=300))
point = SweepPoint("xyz", 0.5, 1.0, 0.1, 1.0, 0.0, "max_entangled")
r = run_point(cfg, point)
s = r.series

for t in (0, 10, 50, 100, 300):
    k = int(np.searchsorted(s.times, t))
    print(f"t={s.times[k]:5.0f}  C12={s['C_1_2'][k]:.5f}  C14={s['C_1_4'][k]:.5f}  "
          f"C15={s['C_1_5'][k]:.5f}  Sz_4={s['Sz_4'][k]:+.5f}")
print("steady   C12={:.5f}  C14={:.5f}  C15={:.5f}".format(
    *(r.steady["concurrences"][q] for q in [(1, 2), (1, 4), (1, 5)])))
print("distance to steady state at t=300:", r.steady["trace_distance_final"])
print("CPTP residuals:", {k: v for k, v in r.cptp.items()})

###############################################################################
# Plot

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for col in ("C_1_2", "C_1_4", "C_1_5"):
        ax.plot(s.times, s[col], label=col)
    ax.set_xlabel("t")
    ax.set_ylabel("concurrence")
    ax.legend()
    fig.tight_layout()
    fig.savefig("trajectory.png", dpi=120)
    print("saved trajectory.png")
