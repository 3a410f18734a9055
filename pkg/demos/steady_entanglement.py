"""
Steady-state entanglement on the seven-site lattice
===================================================

Weakening the field on the six border spins changes how much entanglement the
dissipative Ising lattice keeps at long times.  Only steady states are
computed here, so the script runs in seconds.
"""

from dataclasses import replace

from dissipative_lattice.runner import RunConfig, run_sweep

cfg = replace(RunConfig(), anisotropy=("ising", "xyz"), nbar=(0.0, 0.01),
              backend="steady-only")
res = run_sweep(cfg)

print("preset  (B1, B2)     nbar    C12       C14       C15       C17")
for r in sorted(res.points.values(), key=lambda r: r.point.label):
    p, c = r.point, r.steady["concurrences"]
    print(f"{p.anisotropy:6s}  ({p.B1:g}, {p.B2:g}){'':5s} {p.nbar:<6g} "
          + "  ".join(f"{c[q]:.6f}" for q in [(1, 2), (1, 4), (1, 5), (1, 7)]))

###############################################################################
# The global measure tau2 sums squared concurrences over all partners

for r in sorted(res.points.values(), key=lambda r: r.point.label):
    p = r.point
    print(f"{p.label:40s} tau2_1={r.steady['tau2'][1]:.6f} tau2_4={r.steady['tau2'][4]:.6f}")
