"""Bending an amalgam of SO(3,1) groups into SO(3,2).

``a_q`` centralizes the embedded ``SO(2,1)`` factor containing the
amalgamated subgroup; conjugating the second factor by ``a_q`` leaves the
image discrete for q near 1 while pushing the Cartan cloud off the wall.

The Zariski proxy is the rank of the span of ``Ad(g)`` over a ball
holding at least ``8 D^2`` elements.
"""
# %%
from son2lab.asymptotics import critical_exponent, limit_cone, zariski_span_rank
from son2lab.bending import bend, bending_param
from son2lab.datasets import load_bundled
from son2lab.cli import zariski_ball
from son2lab.enumeration import stream_cloud
from son2lab.liegroup import rho_form

source = load_bundled("amalgam_n3")
print("a_{6/5} diagonal:", bending_param(3, "6/5").a.to_float().diagonal())

for q in ("1", "21/20", "11/10", "6/5"):
    s = bend(source, q)
    cloud = stream_cloud(s, 6)
    cone = limit_cone(cloud)
    fit = critical_exponent(cloud, rho_form(3))
    rank = zariski_span_rank(zariski_ball(s))
    print(f"q={q:6s} c_hat={cone.c_hat:.4f} delta_rho={fit.delta:.3f} zariski rank={rank}/100")
