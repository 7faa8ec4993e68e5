"""Exponential Orlicz norms against the sup of weighted L_p norms.

The EOS Luxemburg norm of ``f`` and ``sup_p |f|_p / psi(p)`` are
equivalent; here the two are computed side by side on the fixed family.
"""

# %%
import numpy as np

from orliczode.eos import PhiFunction, build_eos, equivalence_batch, fenchel, psi, verify_tail_bound
from orliczode.families import FAMILY_NAMES, test_family
from orliczode.realline import Grid

grid = Grid.uniform(40.0, 4001)
fam = test_family(grid)

# %% the conjugate of h(y) = exp(m y) has a closed form
phi = PhiFunction.power(2)
for w in (2.0, 10.0, 100.0):
    exact = (w / 2) * (np.log(w / 2) - 1)
    print(f"h*({w:g}) = {fenchel(phi, w).value:.12f}   closed form {exact:.12f}   psi = {psi(phi, w):.6f}")

# %% ratio of the two norms, function by function
for alpha, ph, label in [(1.0, PhiFunction.power(2), "alpha=1, Power(2)"), (2.0, PhiFunction.power(1), "alpha=2, Power(1)")]:
    eos = build_eos(alpha, ph)
    res = equivalence_batch(fam, eos)
    print()
    print(label, f"C1={eos.C1:.4f} C2={eos.C2:.4f}")
    for name, r in zip(FAMILY_NAMES, res["reports"]):
        print(f"  {name:>16}  Luxemburg {r.orlicz:9.4f}  G-norm {r.gnorm:9.4f}  ratio {r.ratio:.4f}")
    print(f"  observed constants [{res['C3']:.4f}, {res['C4']:.4f}]")

# %% the tail estimate behind the equivalence
eos = build_eos(1.0, PhiFunction.power(1))
print()
for name, f in zip(FAMILY_NAMES, fam):
    if f.decay.kind == "exponential":
        t = verify_tail_bound(f, eos)
        print(f"{name:>16}: Chebyshev margin {t.chebyshev_margin:.3f}  tail margin {t.theorem_margin:.3f}")
