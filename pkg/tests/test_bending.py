import hashlib
import json
import random
from fractions import Fraction

import numpy as np
import pytest
import sympy

from son2lab.bending import (
    BendingError,
    as_q,
    bend,
    bend_sweep,
    bending_param,
    centralizer_generator,
    subgroup_basis,
)
from son2lab.datasets import load_bundled
from son2lab.enumeration import GeneratorSystem, load_generators, make_system
from son2lab.liegroup import cartan_projection, gram_form, identity, in_lie_algebra
from son2lab.scalars import QMatrix

COLORED = ("amalgam_n3", "hnn_n3", "amalgam_n2")


def _J(n):
    N = n + 2
    J = sympy.zeros(N, N)
    J[0, N - 1] = J[N - 1, 0] = J[1, N - 2] = J[N - 2, 1] = sympy.Rational(1, 2)
    for i in range(2, n):
        J[i, i] = 1
    return J


def _sympy_centralizer(n):
    """Independent oracle: solve X^T J + J X = 0 and [X, h] = 0 with sympy.

    The embedded so(n-1,1) is solved for too: it is the part of so(Q)
    vanishing on e1 and e_{n+2} and on their rows.
    """
    N = n + 2
    J = _J(n)
    syms = sympy.symbols(f"x0:{N * N}")
    X = sympy.Matrix(N, N, syms)
    alg = list(X.T * J + J * X)
    # so(n-1,1): X with first/last rows and columns zero
    fix = [X[i, j] for i in range(N) for j in range(N) if i in (0, N - 1) or j in (0, N - 1)]
    sol_h = sympy.linsolve(alg + fix, syms)
    (gen_h,) = sol_h
    free = sorted(set().union(*[e.free_symbols for e in gen_h]), key=str)
    hs = []
    for f in free:
        sub = {g: (1 if g == f else 0) for g in free}
        hs.append(sympy.Matrix(N, N, [e.subs(sub) for e in gen_h]))
    conds = list(alg)
    for h in hs:
        conds += list(X * h - h * X)
    (gen,) = sympy.linsolve(conds, syms)
    free = sorted(set().union(*[e.free_symbols for e in gen]), key=str)
    basis = []
    for f in free:
        sub = {g: (1 if g == f else 0) for g in free}
        basis.append(sympy.Matrix(N, N, [e.subs(sub) for e in gen]))
    return basis


def _to_sympy(m):
    return sympy.Matrix(m.shape[0], m.shape[1],
                        lambda i, j: sympy.Rational(*m.entry(i, j).as_fraction().as_integer_ratio()))


# -- centralizer -----------------------------------------------------------

@pytest.mark.parametrize("n", [3, 4])
def test_centralizer_is_one_dimensional_against_sympy(n):
    basis = _sympy_centralizer(n)
    assert len(basis) == 1
    X, _ = centralizer_generator(n)
    Xs = _to_sympy(X)
    # X is proportional to the oracle solution
    B = basis[0]
    k = next((i, j) for i in range(n + 2) for j in range(n + 2) if B[i, j] != 0)
    assert Xs == B * (Xs[k] / B[k])


def test_n2_centralizer_is_two_dimensional():
    assert len(_sympy_centralizer(2)) == 2
    X, _ = centralizer_generator(2)
    # the selected ray vanishes on W = span(e2, e3)
    assert all(X.entry(i, j) == 0 for i in (1, 2) for j in (1, 2))


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_centralizer_properties(n):
    X, P = centralizer_generator(n)
    assert in_lie_algebra(X, n)
    for h in subgroup_basis(n):
        assert (X @ h - h @ X).is_zero()
    N = n + 2
    diag = QMatrix.from_rows([[(1 if i == j == 0 else -1 if i == j == N - 1 else 0)
                               for j in range(N)] for i in range(N)])
    assert P.inverse() @ X @ P == diag
    # eigenvalues {1, 0, -1}: X^3 = X
    assert X @ X @ X == X


def test_direction_is_diagonal():
    X, _ = centralizer_generator(3)
    expected = QMatrix.from_rows([[1 if i == j == 0 else -1 if i == j == 4 else 0
                                   for j in range(5)] for i in range(5)])
    assert X == expected


def test_subgroup_basis_dimension():
    for n in (2, 3, 4):
        assert len(subgroup_basis(n)) == n * (n - 1) // 2


@pytest.mark.parametrize("n", [2, 3, 4])
def test_one_parameter_group(n):
    for q in ("21/20", "6/5", 3):
        p = bending_param(n, q)
        pinv = bending_param(n, 1 / as_q(q))
        assert (p.a @ pinv.a).is_identity()
        assert (p.a @ p.a_inv).is_identity()
    assert bending_param(n, 1).a.is_identity()
    # a_q a_r = a_{qr}
    assert bending_param(n, "3/2").a @ bending_param(n, "4/3").a == bending_param(n, 2).a


def test_a_q_is_in_G():
    p = bending_param(3, "11/10")
    J = gram_form(3).J
    assert p.a.T @ J @ p.a == J and p.a.det() == 1
    F = p.a.to_float()
    assert np.allclose(F, np.diag([1.1, 1, 1, 1, 1 / 1.1]))


@pytest.mark.parametrize("bad", [0, -1, "-2/3", 1.05, "abc"])
def test_invalid_q(bad):
    with pytest.raises(BendingError):
        as_q(bad)


# -- bend ------------------------------------------------------------------

@pytest.mark.parametrize("name", COLORED)
def test_q_one_is_identity(name):
    s = load_bundled(name)
    b = bend(s, 1)
    assert b.to_json() == s.to_json()
    assert bend_sweep(s, [1])[0].to_json() == s.to_json()


@pytest.mark.parametrize("name", COLORED)
def test_delta_commutes_with_a_q(name):
    s = load_bundled(name)
    for q in ("21/20", "11/10", "6/5"):
        p = bending_param(s.n, q)
        for g in s.tagged("delta"):
            assert p.a @ g.matrix @ p.a_inv == g.matrix


@pytest.mark.parametrize("name", COLORED)
def test_bent_generators_preserve_form(name):
    s = load_bundled(name)
    J = gram_form(s.n).J
    for q in ("21/20", "6/5", 5):
        b = bend(s, q)
        for g in b.generators:
            assert g.matrix.T @ J @ g.matrix == J
            assert g.matrix.det() == 1
            assert (g.matrix @ b[g.inverse].matrix).is_identity()


def test_bending_rules():
    s = load_bundled("amalgam_n3")
    p = bending_param(3, "6/5")
    b = bend(s, "6/5")
    for g, h in zip(s.generators, b.generators):
        if g.tag == "gamma2":
            assert h.matrix == p.a @ g.matrix @ p.a_inv
            assert h.matrix != g.matrix
        else:
            assert h.matrix == g.matrix
    assert b.meta["bending"]["q"] == "6/5"
    assert b.name == "amalgam_n3_q6-5"
    hnn = load_bundled("hnn_n3")
    bh = bend(hnn, "6/5")
    s_old, s_new = hnn["s"].matrix, bh["s"].matrix
    assert s_new == p.a @ s_old
    assert bh[bh["s"].inverse].matrix == s_old.inv() @ p.a_inv


def test_untagged_system_rejected():
    with pytest.raises(BendingError, match="coloring"):
        bend(load_bundled("bianchi_n3"), 2)


def test_non_commuting_delta_rejected():
    s = load_bundled("amalgam_n3")
    gens = [("d", "gamma1", s["d"].matrix), ("a", "delta", s["a"].matrix),
            ("b", "gamma2", s["b"].matrix)]
    bad = make_system(3, gens, name="bad")
    with pytest.raises(BendingError, match="commute"):
        bend(bad, 2)


def _split_eval(system, word, p):
    """Evaluate sigma_q(word) in the source system, conjugating gamma2 blocks."""
    g = identity(system.n, system.d)
    block = None
    for w in word:
        gen = system.generators[w]
        if gen.tag == "gamma2":
            block = gen.matrix if block is None else block @ gen.matrix
            continue
        if block is not None:
            g = g @ p.a @ block @ p.a_inv
            block = None
        g = g @ gen.matrix
    if block is not None:
        g = g @ p.a @ block @ p.a_inv
    return g


def test_homomorphism_on_random_words():
    s = load_bundled("amalgam_n3")
    q = "11/10"
    b, p = bend(s, q), bending_param(3, q)
    rng = random.Random(0)
    for _ in range(1000):
        word = [rng.randrange(len(s)) for _ in range(rng.randint(1, 10))]
        assert b.evaluate(word) == _split_eval(s, word, p)


def test_hnn_homomorphism_on_random_words():
    s = load_bundled("hnn_n3")
    q = "6/5"
    b, p = bend(s, q), bending_param(3, q)
    rng = random.Random(1)
    for _ in range(300):
        word = [rng.randrange(len(s)) for _ in range(rng.randint(1, 8))]
        g = identity(3)
        for w in word:
            gen = s.generators[w]
            if gen.tag == "stable":
                g = g @ (p.a @ gen.matrix if gen.primary else gen.matrix @ p.a_inv)
            else:
                g = g @ gen.matrix
        assert b.evaluate(word) == g


def test_gamma1_is_fixed():
    s = load_bundled("amalgam_n3")
    rng = random.Random(2)
    g1 = [i for i, g in enumerate(s.generators) if g.tag in ("gamma1", "delta")]
    words = [[rng.choice(g1) for _ in range(rng.randint(1, 12))] for _ in range(50)]
    for q in ("21/20", "11/10", "6/5"):
        b = bend(s, q)
        for w in words:
            gamma = s.evaluate(w)
            assert b.evaluate(w) == gamma
            assert cartan_projection(b.evaluate(w)) == cartan_projection(gamma)


def test_entries_continuous_in_q():
    s = load_bundled("amalgam_n3")
    base = np.array([g.matrix.to_float() for g in s.generators])
    errs = []
    for k in (10, 100, 1000, 10000):
        b = bend(s, Fraction(k + 1, k))
        errs.append(np.max(np.abs(np.array([g.matrix.to_float() for g in b.generators]) - base)))
    assert all(e2 < e1 for e1, e2 in zip(errs, errs[1:]))
    assert errs[-1] < 1e-2


def test_sweep_writes_manifest(tmp_path):
    s = load_bundled("amalgam_n3")
    qs = [1, "21/20", "11/10"]
    systems = bend_sweep(s, qs, tmp_path)
    assert len(systems) == 3
    assert systems[0].to_json() == s.to_json()
    doc = json.loads((tmp_path / "manifest.json").read_text())
    assert doc["source"] == "amalgam_n3" and doc["source_sha256"] == s.sha256()
    assert [e["q"] for e in doc["systems"]] == ["1", "21/20", "11/10"]
    assert doc["direction"] and doc["direction_choice"]
    for e, sys_ in zip(doc["systems"], systems):
        text = (tmp_path / e["file"]).read_text()
        assert hashlib.sha256(text.encode()).hexdigest() == e["sha256"]
        back = load_generators(tmp_path / e["file"])
        assert isinstance(back, GeneratorSystem)
        assert back.matrices == sys_.matrices
