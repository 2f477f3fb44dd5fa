"""Critical exponents, temperedness and directional growth for lattices of H.

For ``SO(n,1) < SO(n,2)`` the rho-critical exponent of a lattice of H is
``2(n-1)/n``: 1 for ``n = 2`` (tempered, on the boundary) and 4/3 for
``n = 3`` (not tempered, almost ``L^3``).
"""
# %%
from son2lab.asymptotics import (
    critical_exponent,
    directional_growth,
    limit_cone,
    temperedness_verdict,
)
from son2lab.datasets import load_bundled
from son2lab.enumeration import stream_cloud
from son2lab.liegroup import rho_form

for name, R in (("sl2z_n2", 18), ("bianchi_n3", 11)):
    cloud = stream_cloud(load_bundled(name), R)
    fit = critical_exponent(cloud, rho_form(cloud.n))
    v = temperedness_verdict(fit.delta, fit.stderr)
    print(f"{name}: {len(cloud)} points, delta_rho = {fit.delta:.3f} +- {fit.stderr:.3f}, "
          f"{v.verdict}, p_hat = {v.p_hat:.2f}")
    cone = limit_cone(cloud)
    print(f"  limit cone half-opening c_hat = {cone.c_hat:.2e}")
    for d in ((1, 0), (1, 1)):
        s = directional_growth(cloud, d)
        msg = "insufficient data" if s.insufficient else f"psi = {s.psi:.3f} +- {s.stderr:.3f}"
        print(f"  direction {d}: {msg}")
