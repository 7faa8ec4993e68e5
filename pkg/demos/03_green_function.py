"""Green's function of y'' - q0 y and the nonlinear Picard solver."""

# %%
import numpy as np

from orliczode.families import smooth_bump
from orliczode.realline import Grid, lp_norm
from orliczode.sturm import (
    Potential,
    geometry,
    green_build,
    kolmogorov_check,
    solve_nonlinear,
    verify_green_bounds,
)

grid = Grid.uniform(20.0, 2001)

# %% q0 = 1 has Gamma(x, t) = exp(-|x - t|)/2
G = green_build("1", grid)
for x, t in [(0.0, 0.0), (0.0, 1.0), (-3.0, 2.0)]:
    print(f"Gamma({x:g}, {t:g}) = {G(x, t):.12f}   exact {0.5 * np.exp(-abs(x - t)):.12f}")

# %% the diagonal follows the local length scale d(x)
for q0 in ("1", "1+x^2", "1+sin(x)^2", "4/(1+x^2)+0.1"):
    geo = geometry(q0, grid)
    rep = verify_green_bounds(green_build(q0, grid), geo)
    print(
        f"{q0:>14}: A={geo.A:.3f} B={geo.B:.3f} kappa(B)={geo.kappaB:.3f} "
        f"diagonal margins {rep['diagonal_lower_margin']:.2f}/{rep['diagonal_upper_margin']:.2f} "
        f"envelope margin {rep['upper_envelope_margin']:.2f}"
    )

# %% y'' - y - 0.05 sin(y) = g by Picard iteration
q0, v = "1", "0.05*sin(y)"
pot, geo = Potential.build(q0, v, grid), geometry(q0, grid)
g = smooth_bump(grid, 0.0, 1.0, 2.0)
sol = solve_nonlinear(pot, G, geo, g)
print()
print(f"|||v||| kappa(B) = {sol.contraction_bound:.3f}, iterations {sol.iterations}, rate {sol.contraction_rate:.3f}")
print("increments:", " ".join(f"{d:.1e}" for d in sol.increments))
print(f"|y|_2 = {lp_norm(sol.y, 2):.6f}, residual {sol.residual_inf:.1e}")
for p in (1.0, 2.0, 4.0):
    k = kolmogorov_check(sol.y, p)
    print(f"Kolmogorov p={p:g}: {k['lhs']:.4f} <= {k['rhs']:.4f}")

# %% a stronger nonlinearity is refused before any iteration
try:
    solve_nonlinear(Potential.build(q0, "0.2*sin(y)", grid), G, geo, g)
except Exception as exc:
    print()
    print(type(exc).__name__, "-", exc)
