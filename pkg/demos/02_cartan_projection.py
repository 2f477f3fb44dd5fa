"""Cartan and Jordan projections onto the closed Weyl chamber.

``mu(g) = (v1, v2)`` with ``v1 >= v2 >= 0`` records the log singular
values of ``g`` in a basis where the maximal compact subgroup is
orthogonal.  Elements of the embedded ``SO(n,1)`` land on the wall
``alpha2 = v2 = 0``.
"""
# %%
import random

import numpy as np

from son2lab.datasets import load_bundled, sl2_to_so21
from son2lab.liegroup import (
    ALPHA2,
    cartan_projection,
    cartan_projections,
    diagonal_element,
    embed_h,
    jordan_projection,
    rho_form,
)

# %% A torus element: mu reads off the sorted logs of the diagonal
print("mu(diag(8, 3)) =", cartan_projection(diagonal_element(2, 8, 3)))

# %% A hyperbolic element of SL2(Z) embedded through SO(2,1) < SO(2,2)
h = sl2_to_so21([[2, 1], [1, 1]])
g = embed_h(h)
mu = cartan_projection(g)
lam = jordan_projection(g)
print("mu =", mu, " lambda =", lam, " alpha2(mu) =", ALPHA2(mu))
print("translation length 2 acosh(3/2) =", 2 * np.arccosh(1.5))

# %% mu(g^k)/k converges to the Jordan projection
for k in (1, 4, 16, 64):
    gk = g
    for _ in range(k - 1):
        gk = gk @ g
    m = cartan_projection(gk)
    print(f"k={k:3d}  mu/k = ({m.v1 / k:.6f}, {m.v2 / k:.6f})")

# %% Random words in a Kleinian group of SO(3,1) stay on the wall
s = load_bundled("bianchi_n3")
rng = random.Random(0)
els = [s.evaluate([rng.randrange(len(s)) for _ in range(20)]) for _ in range(200)]
mu, failed = cartan_projections(els)
print("max |alpha2| over 200 words:", np.abs(ALPHA2(mu)).max(), " failures:", len(failed))
print("rho on the first five:", rho_form(3)(mu[:5]))
