"""Bundled generator systems and the constructions that produce them.

Lattices and Schottky groups are written down in SL2 and pushed into
SO(n,1) < SO(n,2):

* n = 2: ``SL2(R) -> SO(2,1)`` through the adjoint action on traceless
  matrices ``[[u, x2], [x3, -u]]``, for which ``-det = u^2 + x2 x3 = Q0``.
* n = 3: ``SL2(C) -> SO(3,1)`` through ``X -> A X A^*`` on Hermitian
  matrices ``[[x2, x3 + i u], [x3 - i u, -x4]]``, for which
  ``-det = u^2 + x2 x4 + x3^2 = Q0``.

In both models real matrices fix the ``u`` axis, i.e. the direction
``e1 + e_{n+2}``; hence the images of SL2(R) (n = 3) or of the diagonal
subgroup (n = 2) lie in the SO(n-1,1) that commutes with the bending
subgroup.  Run ``python -m son2lab.datasets`` to regenerate ``data/``.
"""
from __future__ import annotations

import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .enumeration import load_generators, make_system
from .liegroup import embed_h
from .scalars import QMatrix

DATA_DIR = Path(__file__).resolve().parent / "data"


def _gauss(z):
    """Gaussian rational as ``(re, im)`` Fractions."""
    if isinstance(z, complex):
        return Fraction(z.real).limit_denominator(10**12), Fraction(z.imag).limit_denominator(10**12)
    if isinstance(z, tuple):
        return Fraction(z[0]), Fraction(z[1])
    return Fraction(z), Fraction(0)


def _cmul(x, y):
    return (x[0] * y[0] - x[1] * y[1], x[0] * y[1] + x[1] * y[0])


def _cadd(x, y):
    return (x[0] + y[0], x[1] + y[1])


def _mat2(A):
    return [[_gauss(v) for v in row] for row in A]


def _mm2(X, Y):
    return [[_cadd(_cmul(X[i][0], Y[0][j]), _cmul(X[i][1], Y[1][j])) for j in range(2)]
            for i in range(2)]


def _det2(A):
    return _cadd(_cmul(A[0][0], A[1][1]), tuple(-v for v in _cmul(A[0][1], A[1][0])))


def sl2_to_so21(A):
    """Adapted-coordinate matrix (u, x2, x3) of ``Ad(A)`` for real ``A`` in SL2."""
    A = [[Fraction(v) for v in row] for row in A]
    if A[0][0] * A[1][1] - A[0][1] * A[1][0] != 1:
        raise ValueError("matrix is not in SL2")
    Ai = [[A[1][1], -A[0][1]], [-A[1][0], A[0][0]]]
    basis = [[[1, 0], [0, -1]], [[0, 1], [0, 0]], [[0, 0], [1, 0]]]
    cols = []
    for E in basis:
        X = [[sum(A[i][k] * E[k][l] * Ai[l][j] for k in range(2) for l in range(2))
              for j in range(2)] for i in range(2)]
        cols.append([X[0][0], X[0][1], X[1][0]])
    return QMatrix.from_rows([[cols[c][r] for c in range(3)] for r in range(3)])


def sl2c_to_so31(A):
    """Adapted-coordinate matrix (u, x2, x3, x4) of ``X -> A X A^*``.

    Entries of ``A`` may be ints, Fractions, complex numbers with
    integral parts, or ``(re, im)`` pairs.
    """
    A = _mat2(A)
    if _det2(A) != (1, 0):
        raise ValueError("matrix is not in SL2(C)")
    Astar = [[(A[j][i][0], -A[j][i][1]) for j in range(2)] for i in range(2)]

    def herm(u, x2, x3, x4):
        z = (Fraction(x3), Fraction(u))
        return [[(Fraction(x2), Fraction(0)), z], [(z[0], -z[1]), (Fraction(-x4), Fraction(0))]]

    cols = []
    for k in range(4):
        coords = [0, 0, 0, 0]
        coords[k] = 1
        Y = _mm2(_mm2(A, herm(*coords)), Astar)
        z = Y[0][1]
        cols.append([z[1], Y[0][0][0], z[0], -Y[1][1][0]])
    return QMatrix.from_rows([[cols[c][r] for c in range(4)] for r in range(4)])


def so21_element(A):
    """SL2(R) matrix -> element of SO(2,2) through SO(2,1)."""
    return embed_h(sl2_to_so21(A), 2)


def so31_element(A):
    """SL2(C) matrix -> element of SO(3,2) through SO(3,1)."""
    return embed_h(sl2c_to_so31(A), 3)


# ---------------------------------------------------------------------------
# bundled systems
# ---------------------------------------------------------------------------

# disjoint isometric circles |z +- 3/2| = 1/2 and |z +- 3/8| = 1/8
SCHOTTKY_A = [[3, 4], [2, 3]]
SCHOTTKY_B = [[3, 1], [8, 3]]

SL2Z_S = [[0, -1], [1, 0]]
SL2Z_T = [[1, 1], [0, 1]]
BIANCHI_U = [[1, 1j], [0, 1]]

# n = 3 colored amalgam: delta is real (fixes the u axis), a and b are
# loxodromic with isometric spheres disjoint from each other and from delta's
AMALGAM3_DELTA = [[3, 4], [2, 3]]
AMALGAM3_A = [[3, -1j], [8j, 3]]
AMALGAM3_B = [[3, 1 - 1j], [4 + 4j, 3]]

# n = 2 colored amalgam: delta = diag(3, 1/3) acts on the x2/x3 plane only
AMALGAM2_DELTA = [[3, 0], [0, Fraction(1, 3)]]
AMALGAM2_A = [[6, Fraction(35, 4)], [4, 6]]
AMALGAM2_B = [[6, Fraction(7, 2)], [10, 6]]


def schottky_n2():
    return make_system(2, [("a", None, so21_element(SCHOTTKY_A)),
                           ("b", None, so21_element(SCHOTTKY_B))],
                       name="schottky_n2",
                       description="Rank-2 Schottky subgroup of SL2(Z) (isometric circles "
                                   "|z±3/2|=1/2, |z±3/8|=1/8) in SO(2,1) < SO(2,2)")


def sl2z_n2():
    return make_system(2, [("S", None, so21_element(SL2Z_S)),
                           ("T", None, so21_element(SL2Z_T))],
                       name="sl2z_n2",
                       description="PSL2(Z) = <S, T> in SO(2,1) < SO(2,2) (non-uniform lattice of H)")


def bianchi_n3():
    return make_system(3, [("S", None, so31_element(SL2Z_S)),
                           ("T", None, so31_element(SL2Z_T)),
                           ("U", None, so31_element(BIANCHI_U))],
                       name="bianchi_n3",
                       description="PSL2(Z[i]) = <S, T, U> in SO(3,1) < SO(3,2) "
                                   "(non-uniform lattice of H)")


def amalgam_n3():
    return make_system(3, [("d", "delta", so31_element(AMALGAM3_DELTA)),
                           ("a", "gamma1", so31_element(AMALGAM3_A)),
                           ("b", "gamma2", so31_element(AMALGAM3_B))],
                       name="amalgam_n3",
                       description="Kleinian Schottky amalgam <d,a> *_<d> <d,b> in SO(3,1) < SO(3,2); "
                                   "d lies in the SO(2,1) centralized by the bending subgroup")


def hnn_n3():
    return make_system(3, [("d", "delta", so31_element(AMALGAM3_DELTA)),
                           ("s", "stable", so31_element(AMALGAM3_A))],
                       name="hnn_n3",
                       description="Free group <d, s> as an HNN extension of <d> with stable "
                                   "letter s, in SO(3,1) < SO(3,2)")


def amalgam_n2():
    return make_system(2, [("d", "delta", so21_element(AMALGAM2_DELTA)),
                           ("a", "gamma1", so21_element(AMALGAM2_A)),
                           ("b", "gamma2", so21_element(AMALGAM2_B))],
                       name="amalgam_n2",
                       description="Fuchsian Schottky amalgam <d,a> *_<d> <d,b> in SO(2,1) < SO(2,2) "
                                   "over the hyperbolic cyclic group <d>")


def cyclic_n3():
    return make_system(3, [("g", None, so31_element(AMALGAM3_A))],
                       name="cyclic_n3", description="Cyclic loxodromic group in SO(3,1) < SO(3,2)")


BUILDERS = {
    "schottky_n2": schottky_n2,
    "sl2z_n2": sl2z_n2,
    "bianchi_n3": bianchi_n3,
    "amalgam_n3": amalgam_n3,
    "hnn_n3": hnn_n3,
    "amalgam_n2": amalgam_n2,
    "cyclic_n3": cyclic_n3,
}


def bundled_names():
    return sorted(BUILDERS)


def bundled_path(name):
    path = resources.files("son2lab") / "data" / f"{name}.json"
    return Path(str(path))


def load_bundled(name):
    """Load a bundled generator file by name (see :func:`bundled_names`)."""
    if name not in BUILDERS:
        raise KeyError(f"unknown bundled system {name!r}; choose from {bundled_names()}")
    return load_generators(bundled_path(name))


def write_bundled(directory=DATA_DIR):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name, build in BUILDERS.items():
        build().save(directory / f"{name}.json")
    return sorted(directory.glob("*.json"))


if __name__ == "__main__":
    for p in write_bundled(sys.argv[1] if len(sys.argv) > 1 else DATA_DIR):
        print(p)
