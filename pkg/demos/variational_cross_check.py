# %%
# Independent check: a Fourier-Galerkin ground state of the indefinite
# functional, minimized over the Nehari set, against the quadrature branch.
import math

import numpy as np

from yamabe_torus import ModelParams
from yamabe_torus import galerkin, solver

# %%
p = ModelParams(1.0, 1.0)
res = galerkin.minimize(p, N=64, restarts=8, seed=0, warm_starts=False)
for run in res.runs:
    print(f"{run.label:<10} E={run.energy:.15f} |E'|={run.gradient_norm:.1e} iters={run.iterations}")

# %%
sol = solver.solve(p, 1, 1024)
print("Galerkin energy     ", res.energy)
print("quadrature Vol1/8pi ", sol.volume / (8 * math.pi))
print("constant level      ", math.pi * p.lam**2 * p.ell / 2)
modulus = galerkin.aligned_modulus(res.state, sol.f)
print("max | |psi| - sqrt(f) | =", np.max(np.abs(modulus - np.sqrt(sol.f))))

# %%
# Below the first branch point only the constant solution remains.
for ell in (0.3, 0.45, 0.5, 0.55, 0.7):
    r = galerkin.minimize(ModelParams(1.0, ell), N=32, restarts=2, seed=0)
    print(f"ell={ell}: E={r.energy:.12f}, constant level={math.pi * ell / 2:.12f}")
