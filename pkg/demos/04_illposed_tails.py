"""Data in L_2 whose solution escapes L_1.5.

With ``g(x) = (x log^2 x)^(-1/2)`` the decaying solution of
``y'' - y = g`` inherits the tail of ``g``.  Truncated norms on growing
windows show |y|_2 settling slowly while |y|_1.5 keeps climbing.
"""

# %%
from orliczode.illposed import SIGN_NOTE, IllposedConfig, demonstrate

rep = demonstrate(IllposedConfig())
print(SIGN_NOTE)
print()
print(f"{'X':>6} {'|y|_2':>10} {'|y|_1.5':>10} {'|g|_2':>10} {'|g|_1.5':>10} {'tail share':>11}")
for r in rep.rows:
    print(
        f"{r.radius:6.0f} {r.norm_beta:10.5f} {r.norm_lower:10.5f} "
        f"{r.data_norm_beta:10.5f} {r.data_norm_lower:10.5f} {r.tail_share:11.3f}"
    )

# %% relative growth per doubling of the window
print()
print("|y|_2   increments:", ", ".join(f"{v:.2%}" for v in rep.beta_increments))
print("|y|_1.5 increments:", ", ".join(f"{v:.2%}" for v in rep.lower_increments))
# |y|_2^2 - |y|_2^2(X) behaves like 1/log X, so the L_2 increments shrink only logarithmically

# %% far out the solution is g times the mass of Gamma(x, .)
print(f"|y(100)| / (g(100) int Gamma(100, t) dt) = {rep.probe_ratio:.5f}")
