"""Exact arithmetic in Q(sqrt d) and the integral model of SO(n,2).

Generator matrices are stored as exact triples ``(a, b, den)`` meaning
``(a + b sqrt d)/den``.  Every product stays exact, so membership in
``G = SO(Q)`` is an identity check rather than a tolerance.

Run with ``python demos/01_exact_arithmetic.py``.
"""
# %%
from son2lab.datasets import load_bundled
from son2lab.liegroup import diagonal_element, gram_form
from son2lab.scalars import QMatrix, QuadRational

x = QuadRational(3, 2, 5, 2)          # (3 + 2 sqrt 2)/5
y = x.inverse()
print("x =", x.to_text(), " 1/x =", y.to_text(), " x*y =", (x * y).to_text())
print("float(x) =", float(x))

# %% The Gram matrix of Q = x1 x_{n+2} + x2 x_{n+1} + sum x_i^2
J = gram_form(3).J
print("J for n = 3:\n", J.to_float())

# %% Bundled generators are certified on load: g^T J g = J and det g = 1
s = load_bundled("amalgam_n3")
print(s.name, "with", len(s), "generators, tags:", sorted({g.tag for g in s.generators}))
g = s.evaluate([0, 1, 2, 3, 1, 0])
print("word of length 6 preserves the form:", g.T @ J @ g == J, " det:", g.det())

# %% Diagonal elements of the split torus A
a = diagonal_element(3, 4, 2)
print("a = diag(4, 2, 1, 1/2, 1/4):", a.to_float().diagonal())
print("a preserves J:", a.T @ J @ a == J)

# %% Exact inverse through QMatrix
m = QMatrix.from_rows([[2, 1], [1, 1]])
print("inverse of [[2,1],[1,1]]:", m.inverse().to_float().tolist())
