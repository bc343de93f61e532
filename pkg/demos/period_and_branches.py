# %%
# Half period of the first-integral orbits, and the branches it produces.
import math

import numpy as np

from yamabe_torus import ModelParams
from yamabe_torus import atlas, period, solver

# %%
lam = 1.0
p = ModelParams(lam, 1.0)
Ks = np.array([1e-8, 1e-4, 0.01, 0.1, 0.25, 0.4, 0.49, 0.5 - 1e-10])
for K in Ks:
    eta, err = period.eta(p, float(K))
    print(f"K={K:<12.6g} eta={eta:.12f}  err={err:.1e}")
print("limit pi/(2 lam) =", math.pi / (2 * lam))

# %%
# eta falls monotonically from +inf to pi/(2 lam), so eta = pi ell / k has a
# solution exactly when ell > k/(2 lam).
for ell in (0.4, 0.6, 1.0, 1.6, 2.2):
    diagram = atlas.enumerate_branches(ModelParams(lam, ell))
    names = [f"{b.kind}{'' if b.kind == 'constant' else b.k}" for b in diagram.branches]
    print(f"ell={ell}: d={diagram.d}, branches by energy: {names}")

# %%
# Profile of the single-winding solution at ell = 1.
sol = solver.solve(ModelParams(lam, 1.0), 1, 1024)
print("K* =", sol.K)
print("f range:", sol.f.min(), sol.f.max(), "roots:", period.roots(p, sol.K))
print("volume:", sol.volume, "< 8 pi =", 8 * math.pi)
print("ODE residual:", sol.residual_sup)
print(atlas.to_csv(atlas.enumerate_branches(ModelParams(lam, 1.6))))
