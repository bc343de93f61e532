# %%
# The single-winding volume climbs toward 8 pi lam as the circle grows.
import math

from yamabe_torus import ModelParams
from yamabe_torus import atlas

# %%
for lam in (0.5, 1.0):
    base = ModelParams(lam, 1.0)
    ells = [x / (2 * lam) for x in (1.01, 1.2, 2, 4, 10, 40, 2e4)]
    rows = atlas.volume_sweep(base, ells)
    print(f"lam = {lam}, ceiling 8 pi lam = {8 * math.pi * lam:.15f}")
    for r in rows:
        tag = " (small-K expansion)" if r.asymptotic else ""
        print(f"  ell={r.ell:<10.5g} log K={r.log_K:<14.6f} Vol1={r.volume:.15f}{tag}")

# %%
# Near the branch point the winding volume meets the constant one, 2 pi^2 lam.
lam = 1.0
for eps in (1e-2, 1e-4, 1e-6):
    p = ModelParams(lam, 1 / (2 * lam) + eps)
    d = atlas.enumerate_branches(p)
    print(f"ell - 1/(2 lam) = {eps:g}: Vol1 = {d.winding(1).volume:.10f}, 2 pi^2 lam = {2 * math.pi**2 * lam:.10f}")
