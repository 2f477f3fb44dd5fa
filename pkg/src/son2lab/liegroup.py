"""Explicit model of G = SO(n,2) and H = SO(n,1).

G is realized as the special orthogonal group of

    Q(x) = x_1 x_{n+2} + x_2 x_{n+1} + x_3^2 + ... + x_n^2,

whose Gram matrix ``J`` has 1/2 on the two anti-diagonal hyperbolic cells
and 1 on the middle block.  The diagonal torus
``diag(e^{v1}, e^{v2}, 1, ..., 1, e^{-v2}, e^{-v1})`` is a maximal split
torus.  Transposition preserves G only when ``J^2`` is scalar, which
fails for n >= 3, so Cartan projections are computed after the diagonal
change of basis ``C = diag(√2, √2, 1, ..., 1, √2, √2)``: ``C J C`` squares to
the identity, ``C^{-1} G C`` is stable under transposition, and ``K`` is
``G ∩ C SO(n+2) C^{-1}``.  C commutes with the torus, so chamber
coordinates are unchanged and ``mu(g)`` is read off the two largest
singular values of ``C^{-1} g C``.  For n = 2, C is scalar and
``K = G ∩ SO(4)``.

H is the stabilizer of the hyperplane ``V = {x_1 = x_{n+2}}``; it is
handled in the adapted basis ``(e_1 + e_{n+2}, e_2, ..., e_{n+1})`` of V,
where the restricted form is ``Q0 = u^2 + x_2 x_{n+1} + x_3^2 + ...``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import mpmath
import numpy as np

from .scalars import EPS, QMatrix, QuadRational, _int_scaled

CHAMBER_TOL = 1e-8

# above this top singular value the second one is taken from the exterior square
_EXTERIOR_SWITCH = 1e4
# above this norm Jordan projections go through the exact characteristic polynomial
_EIG_SWITCH = 1e4


class FormError(ValueError):
    """A matrix fails to preserve the quadratic form (or has det != 1)."""


class ProjectionError(ArithmeticError):
    """Singular-value or eigenvalue pairing violated beyond tolerance."""


@dataclass(frozen=True)
class ChamberVec:
    """Element ``diag(v1, v2, 0, ..., 0, -v2, -v1)`` of the Cartan subspace."""

    v1: float
    v2: float

    def norm(self):
        return math.hypot(self.v1, self.v2)

    def angle(self):
        return math.atan2(self.v2, self.v1)

    def as_array(self):
        return np.array([self.v1, self.v2])

    def unit(self):
        r = self.norm()
        return ChamberVec(self.v1 / r, self.v2 / r)

    def in_chamber(self, tol=CHAMBER_TOL):
        return self.v1 >= self.v2 - tol and self.v2 >= -tol


@dataclass(frozen=True)
class LinearForm:
    """Linear functional ``c1*v1 + c2*v2`` on the Cartan subspace."""

    c1: float
    c2: float
    name: str = ""

    def __call__(self, v):
        if isinstance(v, ChamberVec):
            return self.c1 * v.v1 + self.c2 * v.v2
        arr = np.asarray(v, dtype=float)
        return self.c1 * arr[..., 0] + self.c2 * arr[..., 1]

    def __add__(self, other):
        return LinearForm(self.c1 + other.c1, self.c2 + other.c2)

    def __sub__(self, other):
        return LinearForm(self.c1 - other.c1, self.c2 - other.c2)

    def __mul__(self, s):
        return LinearForm(self.c1 * s, self.c2 * s)

    __rmul__ = __mul__


ALPHA1 = LinearForm(1, -1, "alpha1")
ALPHA2 = LinearForm(0, 1, "alpha2")


def rho_form(n):
    """Half-sum of positive restricted roots with multiplicity: ``(n v1 + (n-2) v2)/2``.

    Coefficients are exact binary fractions, so evaluation on integer
    vectors is exact.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    return LinearForm(n / 2, (n - 2) / 2, "rho")


def property_T_form(n):
    """Growth bound ``(n-1) v1 + (n-2) v2`` for non-lattice discrete subgroups.

    Equal to ``2*rho - Theta`` where ``Theta(v) = v1`` is the half-sum of the
    strongly orthogonal system ``{alpha1, alpha1 + 2 alpha2}``.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    return LinearForm(n - 1, n - 2, "property_T")


def theta_form():
    return LinearForm(1, 0, "theta")


@dataclass(frozen=True)
class GramForm:
    """Gram matrices of Q on R^{n+2} and of Q0 on V, plus the adapted basis.

    ``P`` has columns ``e1+e_{n+2}, e2, ..., e_{n+1}, e1-e_{n+2}``: the first
    ``n+1`` span V and the last spans its J-orthogonal complement.
    """

    n: int
    J: QMatrix
    J0: QMatrix
    P: QMatrix
    P_inv: QMatrix

    @property
    def size(self):
        return self.n + 2


@lru_cache(maxsize=None)
def gram_form(n):
    if n < 2:
        raise ValueError("n must be >= 2")
    N = n + 2
    half = QuadRational(1, 0, 2)
    J = [[0] * N for _ in range(N)]
    J[0][N - 1] = J[N - 1][0] = half
    J[1][N - 2] = J[N - 2][1] = half
    for i in range(2, n):
        J[i][i] = 1
    Jm = QMatrix.from_rows(J)
    P = [[0] * N for _ in range(N)]
    P[0][0] = P[N - 1][0] = 1
    for i in range(1, N - 1):
        P[i][i] = 1
    P[0][N - 1] = 1
    P[N - 1][N - 1] = -1
    Pm = QMatrix.from_rows(P)
    PV = QMatrix.from_rows([row[: N - 1] for row in P])
    J0 = PV.T @ Jm @ PV
    return GramForm(n, Jm, J0, Pm, Pm.inverse())


class GMatrix(QMatrix):
    """Exact element of SO(Q).

    Construct through :func:`as_gmatrix` to certify ``g^T J g = J`` and
    ``det g = 1``; products of GMatrix values stay GMatrix without
    re-checking.
    """

    __slots__ = ()

    @property
    def n(self):
        return self.shape[0] - 2

    def inv(self):
        """Exact inverse ``J^{-1} g^T J``."""
        form = gram_form(self.n)
        return GMatrix._make(*_triple(_jinv(self.n) @ self.T @ form.J))

    def conj(self, h):
        """``h g h^{-1}`` for another GMatrix ``h``."""
        return h @ self @ h.inv()


def _triple(m):
    return m.A, m.B, m.den, m.d


@lru_cache(maxsize=None)
def _jinv(n):
    return gram_form(n).J.inverse()


def preserves_form(m, J):
    """Exact test of ``m^T J m == J``."""
    J = J.lift(m.d)
    return m.T @ J @ m == J


def as_gmatrix(m, n=None, d=None, label=None):
    """Certify ``m`` as an element of SO(Q) and return it as a :class:`GMatrix`.

    ``m`` may be a QMatrix or nested rows of scalars.
    """
    if not isinstance(m, QMatrix):
        m = QMatrix.from_rows(m, 1 if d is None else d)
    N = m.shape[0]
    if m.shape != (N, N) or (n is not None and N != n + 2) or N < 4:
        raise FormError(f"{label or 'matrix'} has shape {m.shape}, expected square of size n+2")
    form = gram_form(N - 2)
    if not preserves_form(m, form.J):
        raise FormError(f"{label or 'matrix'} does not preserve the quadratic form Q")
    det = m.det()
    if det != 1:
        raise FormError(f"{label or 'matrix'} has determinant {det}, expected 1")
    return GMatrix(m.A, m.B, m.den, m.d, reduced=True)


def identity(n, d=1):
    I = QMatrix.identity(n + 2, d)
    return GMatrix(I.A, I.B, 1, d, reduced=True)


def diagonal_element(n, t1, t2, d=1):
    """``diag(t1, t2, 1, ..., 1, 1/t2, 1/t1)`` for exact nonzero scalars."""
    N = n + 2
    t1 = QuadRational.coerce(t1, d)
    t2 = QuadRational.coerce(t2, d)
    rows = [[0] * N for _ in range(N)]
    for i in range(N):
        rows[i][i] = 1
    rows[0][0], rows[N - 1][N - 1] = t1, t1.inverse()
    rows[1][1], rows[N - 2][N - 2] = t2, t2.inverse()
    m = QMatrix.from_rows(rows, d)
    return GMatrix(m.A, m.B, m.den, m.d, reduced=True)


# ---------------------------------------------------------------------------
# H = SO(n,1) inside G
# ---------------------------------------------------------------------------

def preserves_J0(h, n):
    form = gram_form(n)
    return preserves_form(h, form.J0)


def embed_h(h, n=None):
    """Extend ``h`` in SO(Q0) (adapted coordinates on V) to an element of G.

    The extension acts as ``h`` on V and trivially on the J-orthogonal line
    spanned by ``e1 - e_{n+2}``.

    Raises
    ------
    FormError
        If ``h`` does not preserve ``J0`` exactly or has determinant != 1.
    """
    if not isinstance(h, QMatrix):
        h = QMatrix.from_rows(h)
    n = h.shape[0] - 1 if n is None else n
    if h.shape != (n + 1, n + 1):
        raise FormError(f"expected a {n + 1}x{n + 1} matrix, got {h.shape}")
    form = gram_form(n)
    if not preserves_form(h, form.J0):
        raise FormError("matrix does not preserve Q0 on V")
    if h.det() != 1:
        raise FormError("matrix has determinant != 1")
    g = form.P @ h.block_diag(QMatrix.identity(1, h.d)) @ form.P_inv
    return GMatrix(g.A, g.B, g.den, g.d, reduced=True)


def restrict_to_v(g):
    """Inverse of :func:`embed_h` for elements that preserve V."""
    form = gram_form(g.n)
    m = form.P_inv @ g @ form.P
    N = g.shape[0]
    tail = QMatrix(m.A[N - 1:, N - 1:].copy(), None if m.B is None else m.B[N - 1:, N - 1:].copy(),
                   m.den, m.d)
    if not (tail.is_identity()
            and all(v == 0 for v in m.A[: N - 1, N - 1].tolist())
            and all(v == 0 for v in m.A[N - 1, : N - 1].tolist())):
        raise FormError("element does not preserve V")
    return QMatrix(m.A[: N - 1, : N - 1].copy(),
                   None if m.B is None else m.B[: N - 1, : N - 1].copy(), m.den, m.d)


# ---------------------------------------------------------------------------
# Cartan and Jordan projections
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _pair_index(N):
    pairs = list(combinations(range(N), 2))
    return np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs])


def _qmul(A1, B1, A2, B2, d):
    if B1 is None:
        return A1 * A2, None
    return A1 * A2 + d * (B1 * B2), A1 * B2 + B1 * A2


def exterior_square_numerators(g):
    """Exact numerators of the second exterior power (denominator ``den**2``)."""
    I, Jx = _pair_index(g.shape[0])
    A, B, d = g.A, g.B, g.d
    sel = lambda M, r, c: None if M is None else M[np.ix_(r, c)]
    a1, b1 = _qmul(sel(A, I, I), sel(B, I, I), sel(A, Jx, Jx), sel(B, Jx, Jx), d)
    a2, b2 = _qmul(sel(A, I, Jx), sel(B, I, Jx), sel(A, Jx, I), sel(B, Jx, I), d)
    return a1 - a2, (None if b1 is None else b1 - b2)


@lru_cache(maxsize=None)
def _balance(N):
    """Entrywise factors turning ``g`` and its exterior square into ``C^{-1} g C``."""
    c = np.ones(N)
    c[[0, 1, N - 2, N - 1]] = math.sqrt(2.0)
    r1 = c[None, :] / c[:, None]
    I, Jx = _pair_index(N)
    c2 = c[I] * c[Jx]
    r2 = c2[None, :] / c2[:, None]
    return r1, r2


def balanced_float(g):
    """Float copy of ``C^{-1} g C``, the representative whose SVD is a Cartan decomposition."""
    return g.to_float() * _balance(g.shape[0])[0]


def _pairing_violation(logs, log_top, tol):
    """Largest defect in the ``{s, 1/s}`` pairing of sorted log-values."""
    N = len(logs)
    allowed = tol + 8 * EPS * math.exp(min(2 * log_top, 700.0))
    worst = 0.0
    for i in range(N // 2):
        worst = max(worst, abs(logs[i] + logs[N - 1 - i]))
    return worst, allowed


def cartan_projection(g, tol=CHAMBER_TOL):
    """Cartan projection ``mu(g) = (log s1, log s2)`` from singular values.

    Singular values are taken of ``C^{-1} g C`` (see the module notes), for
    which the maximal compact subgroup consists of orthogonal matrices.  For large elements the second coordinate comes from the top
    singular value of the exact exterior square, so it stays accurate when
    ``s2 << eps * s1``.

    Raises
    ------
    ProjectionError
        If the singular values fail to pair as ``{s, 1/s}`` (with ``n-2``
        values near 1) beyond ``tol`` plus the expected rounding error.
    """
    mu, err = cartan_projections([g], tol=tol)
    if err:
        raise ProjectionError(err[0][1])
    return ChamberVec(float(mu[0, 0]), float(mu[0, 1]))


def cartan_projections(elements, tol=CHAMBER_TOL):
    """Batched Cartan projections.

    Returns ``(mu, errors)`` where ``mu`` is an ``(m, 2)`` float array (NaN
    rows for failures) and ``errors`` lists ``(index, message)`` pairs.
    """
    m = len(elements)
    mu = np.full((m, 2), np.nan)
    errors = []
    if m == 0:
        return mu, errors
    N = elements[0].shape[0]
    r1, r2 = _balance(N)
    F = np.empty((m, N, N))
    shift = np.empty(m)
    for k, g in enumerate(elements):
        Fk, e = _int_scaled(g.A, g.B, g.d)
        F[k] = Fk * r1
        shift[k] = e * math.log(2.0) - math.log(g.den)
    s = np.linalg.svd(F, compute_uv=False)
    with np.errstate(divide="ignore"):
        logs = np.log(s) + shift[:, None]
    mu[:, 0] = logs[:, 0]
    mu[:, 1] = logs[:, 1]
    big = np.nonzero(logs[:, 0] > math.log(_EXTERIOR_SWITCH))[0]
    if len(big):
        P = len(_pair_index(N)[0])
        F2 = np.empty((len(big), P, P))
        shift2 = np.empty(len(big))
        for r, k in enumerate(big):
            g = elements[k]
            A2, B2 = exterior_square_numerators(g)
            Fk, e = _int_scaled(A2, B2, g.d)
            F2[r] = Fk * r2
            shift2[r] = e * math.log(2.0) - 2 * math.log(g.den)
        top2 = np.linalg.svd(F2, compute_uv=False)[:, 0]
        mu[big, 1] = np.log(top2) + shift2 - logs[big, 0]
    for k in range(m):
        v1, v2 = mu[k]
        worst, allowed = _pairing_violation(logs[k], logs[k, 0], tol)
        mid = logs[k, 2:N - 2]
        mid_bad = mid.size and np.max(np.abs(mid)) > tol + 8 * EPS * math.exp(min(logs[k, 0], 700.0))
        if not np.isfinite(v1) or worst > allowed or mid_bad or v2 < -tol or v1 < v2 - tol:
            errors.append((k, f"singular values fail to pair as (s, 1/s): logs={logs[k].tolist()}"))
            mu[k] = np.nan
    # clip tiny negative rounding into the chamber
    ok = ~np.isnan(mu[:, 0])
    mu[ok, 1] = np.clip(mu[ok, 1], 0.0, None)
    mu[ok, 0] = np.maximum(mu[ok, 0], mu[ok, 1])
    return mu, errors


def _to_mpf(x, prec):
    with mpmath.workprec(prec):
        return (mpmath.mpf(x.a) + mpmath.mpf(x.b) * mpmath.sqrt(x.d)) / x.den


def _eigen_log_moduli_exact(m, prec=256):
    """Sorted log-moduli of the eigenvalues, from a big-float QR solve.

    The working precision grows with the entry size so that eigenvalues
    near ``1/|m|`` keep ``prec`` bits; QR copes with the repeated
    eigenvalue 1 that every element of H carries.
    """
    F, log_scale = m.scaled_float()
    bits = prec + 2 * int(max(log_scale + math.log(max(np.abs(F).max(), 1e-300)), 0) / math.log(2))
    with mpmath.workprec(bits):
        M = mpmath.matrix([[_to_mpf(m.entry(i, j), bits) for j in range(m.shape[1])]
                           for i in range(m.shape[0])])
        ev = mpmath.eig(M, left=False, right=False)
        logs = sorted((float(mpmath.log(abs(r))) for r in ev), reverse=True)
    return np.array(logs)


def jordan_projection(g, tol=CHAMBER_TOL, exact=None):
    """Jordan projection: top two log-moduli of eigenvalues.

    Uses floating eigenvalues for small, well-separated elements and a
    big-float eigensolver on the exact entries otherwise
    (``exact=True`` forces the latter).

    Raises
    ------
    ProjectionError
        If the moduli fail to pair as ``{r, 1/r}``.
    """
    F = g.to_float()
    nrm = float(np.linalg.norm(F)) if np.all(np.isfinite(F)) else math.inf
    logs = None
    if not exact and nrm < _EIG_SWITCH:
        ev = np.linalg.eigvals(F)
        logs = np.sort(np.log(np.abs(ev)))[::-1]
        worst, _ = _pairing_violation(logs, logs[0], 0.0)
        if worst > tol:
            logs = None
    if logs is None:
        logs = _eigen_log_moduli_exact(g)
        worst, _ = _pairing_violation(logs, 0.0, 0.0)
        if worst > tol:
            raise ProjectionError(f"eigenvalue moduli fail to pair: {logs.tolist()}")
    v1, v2 = float(logs[0]), float(logs[1])
    if v2 < -tol:
        raise ProjectionError(f"second log-modulus negative: {logs.tolist()}")
    v2 = max(v2, 0.0)
    return ChamberVec(max(v1, v2), v2)


# ---------------------------------------------------------------------------
# Lie algebra and adjoint representation
# ---------------------------------------------------------------------------

def lie_dim(n):
    return (n + 2) * (n + 1) // 2


@lru_cache(maxsize=None)
def lie_algebra_basis(n):
    """Ordered basis ``X_ij = J^{-1}(E_ij - E_ji)``, ``i < j``, of so(Q).

    Each ``X_ij`` is a weight vector for the diagonal torus (a restricted
    root vector or an element of the centralizer of the torus), and the
    coordinates of ``Y`` in this basis are the entries ``(J Y)[i, j]``.
    """
    N = n + 2
    Jinv = _jinv(n)
    basis = []
    for i, j in combinations(range(N), 2):
        rows = [[0] * N for _ in range(N)]
        rows[i][j] = 1
        rows[j][i] = -1
        basis.append(Jinv @ QMatrix.from_rows(rows))
    return tuple(basis)


def in_lie_algebra(X, n):
    J = gram_form(n).J.lift(X.d)
    return (X.T @ J + J @ X).is_zero()


def lie_coordinates(Y, n):
    """Exact coordinates of ``Y`` in :func:`lie_algebra_basis`."""
    S = gram_form(n).J @ Y
    return [S.entry(i, j) for i, j in combinations(range(n + 2), 2)]


def adjoint(g):
    """Float matrix of ``X -> g X g^{-1}`` on so(Q), size D x D.

    In the basis ``X_ij = J^{-1}(E_ij - E_ji)`` the coordinates of
    ``g X_ij g^{-1}`` are the ``(i, j)`` row of the exterior square of
    ``g^{-1}``, so ``Ad(g)`` is that exterior square transposed.  It is
    formed exactly and rounded once; a float product ``G X G^{-1}``
    would lose ``log10 |g|`` digits to cancellation.
    """
    gi = g.inv()
    A2, B2 = exterior_square_numerators(gi)
    m = QMatrix(A2.T.copy(), None if B2 is None else B2.T.copy(), gi.den ** 2, g.d)
    return np.array(m.to_float())


def adjoint_exact(g):
    """Exact adjoint matrix as a :class:`QMatrix`."""
    n = g.n
    gi = g.inv()
    cols = [lie_coordinates(g @ X @ gi, n) for X in lie_algebra_basis(n)]
    D = len(cols)
    return QMatrix.from_rows([[cols[k][r] for k in range(D)] for r in range(D)], g.d)
