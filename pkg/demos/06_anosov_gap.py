"""The Anosov gap: minimal alpha1(mu) on each word-length layer.

Schottky groups are Anosov, so the minima grow linearly; PSL2(Z) contains
a parabolic, whose powers keep alpha1 logarithmic, and is flagged.
"""
# %%
from son2lab.asymptotics import anosov_gap
from son2lab.datasets import load_bundled
from son2lab.enumeration import stream_cloud

for name, R in (("schottky_n2", 10), ("sl2z_n2", 16)):
    fit = anosov_gap(stream_cloud(load_bundled(name), R))
    print(f"{name}: slope {fit.slope:.3f} (R^2 {fit.r2:.3f}), early {fit.early_slope:.3f}, "
          f"late {fit.late_slope:.3f}, degenerate={fit.degenerate}")
