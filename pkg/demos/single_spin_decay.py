"""
A single damped spin
====================

The smallest open system the library handles: one spin in a field, coupled
to a thermal bath.  Its magnetization relaxes exponentially and the
stationary value is known in closed form, which makes it a good first
sanity check of the generator and the integrators.
"""

import numpy as np

from dissipative_lattice.evolve import EvolutionGrid, integrate, iter_states, steady_state
from dissipative_lattice.observables import spin_z
from dissipative_lattice.runner.validate import single_spin_generator

Gamma = 0.05

# Start tilted away from the pole, zero temperature bath
theta = 0.7
psi = np.array([np.cos(theta / 2), np.sin(theta / 2)], dtype=complex)
rho0 = np.outer(psi, psi.conj())
gen = single_spin_generator(Gamma, nbar=0.0, B=1.0)

grid = EvolutionGrid(t_max=100.0, n_points=10)
sz0 = spin_z(rho0, 1)
print("   t      <Sz> (rk)       <Sz> (krylov)    exact")
# iter_states streams (t, rho) pairs; integrate returns the states only
for (t, a), b in zip(iter_states(gen, rho0, grid), integrate(gen, rho0, grid, backend="krylov")):
    exact = -0.5 + np.exp(-Gamma * t) * (sz0 + 0.5)
    print(f"{t:6.1f}  {spin_z(a, 1):+.12f}  {spin_z(b, 1):+.12f}  {exact:+.12f}")

###############################################################################
# A warm bath pushes the stationary magnetization towards zero

for nbar in (0.0, 0.01, 0.05, 0.1):
    rho = steady_state(single_spin_generator(Gamma, nbar))
    print(f"nbar={nbar:<5g} <Sz>_ss={spin_z(rho, 1):+.10f}  "
          f"closed form={-1 / (2 * (2 * nbar + 1)):+.10f}")
