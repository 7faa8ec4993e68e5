"""Luxemburg norms on a truncated real line.

Run with ``python3 demos/01_orlicz_norms.py``.
"""

# %% a window and a few functions
import numpy as np

from orliczode.families import FAMILY_NAMES, test_family
from orliczode.orlicz import NFunction, delta2_check, luxemburg_norm, nabla2_check
from orliczode.realline import Grid, lp_norm

grid = Grid.uniform(40.0, 4001)
fam = test_family(grid)

# %% for N(u) = |u|^p the Luxemburg norm is the L_p norm
for p in (1.0, 2.0, 4.0):
    N = NFunction.power(p)
    err = max(abs(luxemburg_norm(f, N) / lp_norm(f, p) - 1) for f in fam)
    print(f"p = {p:g}: worst relative gap to |f|_p = {err:.1e}")

# %% a genuinely Orlicz example, u^1.5 log(e + u)
N = NFunction.power_log(1.5, 1.0)
print()
print(f"{'function':>16}  {'|f|_N':>10}  {'|f|_1.5':>10}")
for name, f in zip(FAMILY_NAMES, fam):
    print(f"{name:>16}  {luxemburg_norm(f, N):10.5f}  {lp_norm(f, 1.5):10.5f}")

# %% growth classes: doubling at infinity and its dual
for label, M in [("u^2", NFunction.power(2)), ("u", NFunction.power(1)), ("u^1.5 log(e+u)", N)]:
    d, n = delta2_check(M), nabla2_check(M)
    print(f"{label:>16}: Delta2 {d.member!s:5}  Nabla2 {n.member!s:5}")

# %% homogeneity is exact, up to the bisection tolerance
f = fam[0]
print()
print("|3f| / (3|f|) - 1 =", luxemburg_norm(f * 3.0, N) / (3 * luxemburg_norm(f, N)) - 1)
