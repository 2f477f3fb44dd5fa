"""Bending deformations of colored generator systems.

The embedded SO(n-1,1) is the subgroup of H that fixes ``e1`` and
``e_{n+2}`` and acts on ``W = span(e2, ..., e_{n+1})``.  Its centralizer in
so(Q) contains the semisimple direction ``X = diag(1, 0, ..., 0, -1)``;
since ``X`` has eigenvalues 1, 0, -1 with a rational eigenbasis, the
one-parameter group ``a_q = exp(log(q) X)`` is exact for rational ``q``.

Amalgams ``Gamma1 *_Delta Gamma2`` are bent by conjugating the
``gamma2`` generators by ``a_q``; HNN extensions by replacing the stable
letter ``s`` with ``a_q s`` (the Johnson-Millson convention).
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from pathlib import Path

from .enumeration import Generator, GeneratorSystem, coloring_kind
from .liegroup import GMatrix, as_gmatrix, in_lie_algebra, lie_algebra_basis
from .scalars import QMatrix, rational_nullspace


class BendingError(ValueError):
    """Invalid bending input (missing coloring, non-commuting Delta, bad q)."""


@dataclass(frozen=True)
class BendingParam:
    """Exact bending data for one value of ``q = e^t``.

    Attributes
    ----------
    q : Fraction
    X : QMatrix
        Direction in so(Q), eigenvalues {1, 0, -1}.
    P : QMatrix
        Rational eigenbasis of ``X`` (columns: +1, 0, ..., 0, -1).
    a : GMatrix
        ``a_q = P diag(q, 1, ..., 1, 1/q) P^{-1}``.
    a_inv : GMatrix
    """

    q: Fraction
    X: QMatrix
    P: QMatrix
    a: GMatrix
    a_inv: GMatrix

    @property
    def n(self):
        return self.a.n

    @property
    def t(self):
        return math.log(self.q)


def subgroup_basis(n):
    """Exact basis of the embedded so(n-1,1) (acting on W, killing e1 and e_{n+2})."""
    N = n + 2
    inner = [(i, j) for i, j in combinations(range(N), 2) if 0 < i and j < N - 1]
    pairs = list(combinations(range(N), 2))
    basis = lie_algebra_basis(n)
    return [basis[pairs.index(p)] for p in inner]


def _bracket(X, Y):
    return X @ Y - Y @ X


def _flat(m):
    N = m.shape[0]
    return [m.entry(i, j).as_fraction() for i in range(N) for j in range(N)]


def _kernel_vectors(m):
    N = m.shape[0]
    rows = [[m.entry(i, j).as_fraction() for j in range(N)] for i in range(N)]
    return rational_nullspace(rows, N)


@lru_cache(maxsize=None)
def centralizer_generator(n):
    """Direction ``X`` of the one-parameter group centralizing SO(n-1,1).

    Solves ``X in so(Q)``, ``[X, h] = 0`` for the embedded so(n-1,1)
    exactly.  For n = 2 the embedded so(1,1) is abelian and the solution
    space is 2-dimensional; the extra constraint ``X|_W = 0`` selects the
    ray that moves the J-orthogonal line of V.

    Returns
    -------
    (X, P) : tuple of QMatrix
        ``X`` normalized to eigenvalues {1, 0, -1} and its exact
        eigenbasis ``P``.

    Raises
    ------
    BendingError
        If the solution space does not have the expected dimension.
    """
    if n < 2:
        raise BendingError("n must be >= 2")
    N = n + 2
    basis = lie_algebra_basis(n)
    hs = subgroup_basis(n)
    # linear conditions on the coordinates c of X = sum c_k basis_k
    cols = []
    for Xk in basis:
        col = []
        for h in hs:
            col.extend(_flat(_bracket(Xk, h)))
        cols.append(col)
    rows = [list(r) for r in zip(*cols)]
    sols = rational_nullspace(rows, len(basis))
    if len(sols) > 1:
        # restrict to X|_W = 0
        wrows = []
        for i in range(1, N - 1):
            for j in range(1, N - 1):
                wrows.append([Xk.entry(i, j).as_fraction() for Xk in basis])
        coeff_rows = [[sum(w[k] * s[k] for k in range(len(basis))) for s in sols] for w in wrows]
        sub = rational_nullspace(coeff_rows, len(sols))
        sols = [[sum(v[a] * sols[a][k] for a in range(len(sols))) for k in range(len(basis))]
                for v in sub]
    if len(sols) != 1:
        raise BendingError(f"centralizer direction space has dimension {len(sols)}, expected 1")
    X = QMatrix.zeros(N)
    for c, Xk in zip(sols[0], basis):
        if c:
            X = X + Xk.scale(c)
    # X^3 = lam^2 X for a semisimple X with eigenvalues {lam, 0, -lam}
    X = X.scale(1 / _rational_sqrt(_eigen_square(X)))
    if not in_lie_algebra(X, n):
        raise BendingError("centralizer solution is not in so(Q)")
    for h in hs:
        if not _bracket(X, h).is_zero():
            raise BendingError("centralizer solution does not commute with so(n-1,1)")
    I = QMatrix.identity(N)
    plus = _kernel_vectors(X - I)
    # sign convention: the +1 eigenline comes first in coordinate order
    if plus and min(i for i, v in enumerate(plus[0]) if v) == N - 1:
        X = -X
        plus = _kernel_vectors(X - I)
    zero = _kernel_vectors(X)
    minus = _kernel_vectors(X + I)
    if len(plus) != 1 or len(minus) != 1 or len(zero) != N - 2:
        raise BendingError("centralizer direction is not semisimple with eigenvalues {1, 0, -1}")
    vecs = plus + zero + minus
    P = QMatrix.from_rows([[vecs[c][r] for c in range(N)] for r in range(N)])
    return X, P


def _eigen_square(X):
    """``lam^2`` for ``X`` with ``X^3 = lam^2 X`` and ``X != 0``."""
    X3 = X @ X @ X
    N = X.shape[0]
    for i in range(N):
        for j in range(N):
            x = X.entry(i, j)
            if x != 0:
                val = X3.entry(i, j) / x
                if X3 != X.scale(val):
                    raise BendingError("centralizer direction is not semisimple")
                return val.as_fraction()
    raise BendingError("centralizer direction is zero")


def _rational_sqrt(x):
    x = Fraction(x)
    if x <= 0:
        raise BendingError("centralizer direction has no real nonzero eigenvalue")
    p, r = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if p * p != x.numerator or r * r != x.denominator:
        raise BendingError("eigenvalues of the centralizer direction are irrational")
    return Fraction(p, r)


def as_q(q):
    """Parse a positive rational ``q`` (int, Fraction or ``"21/20"``)."""
    if isinstance(q, float):
        raise BendingError("q must be an exact rational, not a float")
    try:
        q = Fraction(q)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise BendingError(f"invalid q {q!r}") from exc
    if q <= 0:
        raise BendingError(f"q must be positive, got {q}")
    return q


def bending_param(n, q):
    """:class:`BendingParam` for dimension ``n`` and rational ``q``."""
    q = as_q(q)
    X, P = centralizer_generator(n)
    N = n + 2
    diag = [[0] * N for _ in range(N)]
    for i in range(N):
        diag[i][i] = 1
    diag[0][0], diag[N - 1][N - 1] = q, 1 / q
    Pinv = P.inverse()
    a = as_gmatrix(P @ QMatrix.from_rows(diag) @ Pinv, n=n, label="a_q")
    return BendingParam(q, X, P, a, a.inv())


def _q_text(q):
    return f"{q.numerator}/{q.denominator}" if q.denominator != 1 else str(q.numerator)


def bend(gens, q):
    """Bent generator system ``sigma_q(gens)``.

    Parameters
    ----------
    gens : GeneratorSystem
        Must carry an amalgam (``gamma1``/``gamma2``/``delta``) or HNN
        (``stable`` plus ``gamma1``/``delta``) coloring.
    q : rational
        ``q = e^t > 0``.  ``q = 1`` returns an identical system.

    Raises
    ------
    BendingError
        If the system is untagged, or if some ``delta`` generator does
        not commute with ``a_q`` exactly.
    """
    kind = coloring_kind(gens)
    if kind == "untagged":
        raise BendingError(f"system {gens.name!r} has no amalgam/HNN coloring; cannot bend")
    q = as_q(q)
    bp = bending_param(gens.n, q)
    a, ai = bp.a.lift(gens.d), bp.a_inv.lift(gens.d)
    for g in gens.tagged("delta"):
        if a @ g.matrix != g.matrix @ a:
            raise BendingError(f"delta generator {g.label!r} does not commute with a_q")
    if q == 1:
        return GeneratorSystem(gens.n, gens.d, gens.generators, gens.name, gens.description,
                               gens.kind, dict(gens.meta))
    new = []
    for g in gens.generators:
        m = g.matrix
        if kind == "amalgam" and g.tag == "gamma2":
            m = a @ m @ ai
        elif kind == "hnn" and g.tag == "stable":
            m = a @ m if g.primary else m @ ai
        new.append(Generator(g.label, g.tag, GMatrix(m.A, m.B, m.den, m.d, reduced=True),
                             g.inverse, g.primary))
    meta = dict(gens.meta)
    meta["bending"] = {"q": _q_text(q), "source": gens.name, "source_sha256": gens.sha256(),
                       "rule": "conjugate gamma2" if kind == "amalgam" else "stable s -> a_q s"}
    name = f"{gens.name}_q{q.numerator}-{q.denominator}" if gens.name else ""
    out = GeneratorSystem(gens.n, gens.d, new, name, gens.description, kind, meta)
    return out.check()


def bend_sweep(gens, q_list, out_dir=None):
    """Bend ``gens`` for each ``q`` in ``q_list``.

    When ``out_dir`` is given, each system is written as
    ``<name>_q<num>-<den>.json`` together with ``manifest.json`` mapping
    q to file name and SHA-256.

    Returns
    -------
    list of GeneratorSystem
    """
    systems = [bend(gens, q) for q in q_list]
    if out_dir is not None:
        write_sweep_manifest(gens, q_list, systems, out_dir)
    return systems


def sweep_files(gens, q_list, systems):
    """File texts and manifest of a sweep: ``({file name: json text}, manifest dict)``."""
    X, _ = centralizer_generator(gens.n)
    files, entries = {}, []
    for q, s in zip(q_list, systems):
        q = as_q(q)
        fname = f"{gens.name or 'system'}_q{q.numerator}-{q.denominator}.json"
        text = s.to_json()
        files[fname] = text
        entries.append({"q": _q_text(q), "file": fname,
                        "sha256": hashlib.sha256(text.encode()).hexdigest()})
    manifest = {
        "source": gens.name,
        "source_sha256": gens.sha256(),
        "kind": gens.kind,
        "direction": [[list(t) for t in row] for row in X.triples()],
        "direction_choice": "centralizer of so(n-1,1) on span(e2..e_{n+1}); "
                            "ray vanishing on that span when the centralizer is larger",
        "systems": entries,
    }
    return files, manifest


def write_sweep_manifest(gens, q_list, systems, out_dir):
    """Write the bent systems and ``manifest.json`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files, manifest = sweep_files(gens, q_list, systems)
    for fname, text in files.items():
        (out / fname).write_text(text)
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return path
