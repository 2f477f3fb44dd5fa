"""Word-metric balls and Cartan clouds.

A breadth-first search over exact matrices yields the ball ``B_R`` with
minimal word lengths and the per-layer counts; the Cartan cloud is the
list of ``mu(g)`` for ``g`` in the ball.
"""
# %%
import numpy as np

from son2lab.datasets import load_bundled
from son2lab.enumeration import ball, cartan_cloud, stream_cloud

# %% A free group of rank 2: layer k holds 4 * 3^(k-1) elements
schottky = load_bundled("schottky_n2")
b = ball(schottky, 7)
print("Schottky layers:", b.layer_counts)
print("word of element 100:", b.word(100))

# %% PSL2(Z) has relations, so layers grow slower than the free bound
sl2z = load_bundled("sl2z_n2")
b = ball(sl2z, 12, workers=2)
print("PSL2(Z) layers:", b.layer_counts)

# %% The cloud: one row (v1, v2) per non-identity element
cloud = cartan_cloud(b)
print(len(cloud), "points; v2 range", cloud.mu[:, 1].min(), cloud.mu[:, 1].max())
print("min alpha1 per layer:", [round(y, 3) for _, y in cloud.layer_minima(lambda m: m[..., 0] - m[..., 1])][:8])

# %% stream_cloud keeps only three layers in memory
big = stream_cloud(sl2z, 16)
print("R=16 stream cloud:", len(big), "points, median norm", np.median(np.hypot(*big.mu.T)))
