"""Exact arithmetic in a real quadratic field Q(sqrt d).

Scalars are stored as integer triples ``(a, b, den)`` meaning
``(a + b*sqrt(d)) / den``.  ``d = 1`` is the plain rational mode, where
``b`` is always zero.  Matrices (:class:`QMatrix`) keep a single common
denominator and two object-dtype integer arrays, which keeps products,
hashing and equality tests exact at numpy speed.

Integers are Python ints throughout: word-ball entries grow exponentially
with the radius and fixed-width integers would silently corrupt
deduplication.
"""
from __future__ import annotations

import math
from functools import lru_cache
from fractions import Fraction
from numbers import Rational

import numpy as np

EPS = float(np.finfo(float).eps)

# bits of headroom used when converting exact values to doubles
_GUARD_BITS = 80
# target magnitude (in bits) of the integer matrices handed to LAPACK
_FLOAT_TARGET_BITS = 600


def _check_d(d):
    if not isinstance(d, int) or d < 1:
        raise ValueError(f"field parameter d must be a positive integer, got {d!r}")
    if d > 1:
        r = math.isqrt(d)
        if r * r == d:
            raise ValueError(f"d={d} is a perfect square; use d=1 for rationals")
        for p in range(2, math.isqrt(d) + 1):
            if d % (p * p) == 0:
                raise ValueError(f"d={d} is not square-free")
    return d


_valid_d = lru_cache(maxsize=64)(_check_d)


class QuadRational:
    """Immutable element ``(a + b*sqrt(d)) / den`` of Q(sqrt d).

    Instances are always normalized: ``den > 0`` and
    ``gcd(a, b, den) == 1``.  Two values are equal iff their triples
    (and ``d``) agree.
    """

    __slots__ = ("a", "b", "den", "d", "_float")

    def __init__(self, a=0, b=0, den=1, d=1):
        a, b, den = int(a), int(b), int(den)
        if den == 0:
            raise ZeroDivisionError("denominator is zero")
        if d != 1:
            _valid_d(d)
        if d == 1 and b != 0:
            raise ValueError("b must be 0 in the rational field (d = 1)")
        if den < 0:
            a, b, den = -a, -b, -den
        g = math.gcd(a, b, den)
        if g > 1:
            a, b, den = a // g, b // g, den // g
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "den", den)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "_float", None)

    def __setattr__(self, name, value):
        raise AttributeError("QuadRational is immutable")

    # -- construction -------------------------------------------------
    @classmethod
    def coerce(cls, x, d=1):
        if isinstance(x, QuadRational):
            if x.d != d and not (x.b == 0):
                raise ValueError(f"cannot mix Q(sqrt {x.d}) with Q(sqrt {d})")
            return x if x.d == d else cls(x.a, 0, x.den, d)
        if isinstance(x, (int, np.integer)):
            return cls(int(x), 0, 1, d)
        if isinstance(x, Rational):
            return cls(x.numerator, 0, x.denominator, d)
        if isinstance(x, (tuple, list)) and len(x) == 3:
            return cls(x[0], x[1], x[2], d)
        raise TypeError(f"cannot convert {type(x).__name__} to QuadRational")

    @classmethod
    def from_text(cls, text, d=1):
        a, b, den = (int(t) for t in text.split())
        return cls(a, b, den, d)

    def to_text(self):
        return f"{self.a} {self.b} {self.den}"

    @property
    def triple(self):
        return (self.a, self.b, self.den)

    def as_fraction(self):
        """The value as a Fraction; raises ValueError if irrational."""
        if self.b:
            raise ValueError(f"{self!r} is not rational")
        return Fraction(self.a, self.den)

    # -- arithmetic ---------------------------------------------------
    def _other(self, other):
        try:
            return QuadRational.coerce(other, self.d)
        except TypeError:
            return None

    def __add__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return QuadRational(
            self.a * o.den + o.a * self.den,
            self.b * o.den + o.b * self.den,
            self.den * o.den,
            self.d,
        )

    __radd__ = __add__

    def __neg__(self):
        return QuadRational(-self.a, -self.b, self.den, self.d)

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return QuadRational(
            self.a * o.a + self.d * self.b * o.b,
            self.a * o.b + self.b * o.a,
            self.den * o.den,
            self.d,
        )

    __rmul__ = __mul__

    def norm_numerator(self):
        """Integer ``a^2 - d*b^2`` (field norm of the numerator)."""
        return self.a * self.a - self.d * self.b * self.b

    def inverse(self):
        nrm = self.norm_numerator()
        if nrm == 0:
            raise ZeroDivisionError("inverse of zero")
        return QuadRational(self.a * self.den, -self.b * self.den, nrm, self.d)

    def __truediv__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        out = QuadRational(1, 0, 1, self.d)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conjugate(self):
        """Galois conjugate ``(a - b*sqrt d)/den``."""
        return QuadRational(self.a, -self.b, self.den, self.d)

    # -- comparison ---------------------------------------------------
    def sign(self):
        """Exact sign of the real embedding."""
        a, b = self.a, self.b
        if b == 0 or (a >= 0 and b >= 0) or (a <= 0 and b <= 0):
            return (a > 0) - (a < 0) if a != 0 else (b > 0) - (b < 0)
        # opposite signs: compare a^2 with d*b^2
        nrm = self.norm_numerator()
        return (1 if a > 0 else -1) if nrm > 0 else (1 if b > 0 else -1)

    def __eq__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return self.triple == o.triple and (self.d == o.d or self.b == 0)

    def __hash__(self):
        if self.b == 0:
            return hash(Fraction(self.a, self.den))
        return hash((self.a, self.b, self.den, self.d))

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __bool__(self):
        return self.a != 0 or self.b != 0

    # -- real embedding ------------------------------------------------
    def __float__(self):
        if self._float is None:
            object.__setattr__(self, "_float", embed_real(self)[0])
        return self._float

    def __repr__(self):
        if self.d == 1:
            return f"QuadRational({self.a}/{self.den})"
        return f"QuadRational(({self.a} + {self.b}*sqrt({self.d}))/{self.den})"


def normalize(a, b, den, d=1):
    """Canonical :class:`QuadRational` for the triple ``(a, b, den)``.

    Raises
    ------
    ZeroDivisionError
        If ``den == 0``.
    """
    return QuadRational(a, b, den, d)


def _scaled_sqrt_term(b, d, k):
    """floor(|b| * sqrt(d) * 2**k) with sign of b (k >= 0)."""
    t = math.isqrt(d * b * b << (2 * k))
    return t if b > 0 else -t


def embed_real(x):
    """Double-precision value of ``x`` and an absolute error bound.

    The conversion goes through exact integer arithmetic (``isqrt`` with
    guard bits, and the conjugate trick when ``a`` and ``b*sqrt d`` have
    opposite signs), so the only real rounding is the final correctly
    rounded int-to-float division.  The returned bound is at most
    ``EPS * |value|`` and is zero when the value is represented exactly.
    """
    a, b, den, d = x.a, x.b, x.den, x.d
    if b == 0:
        q = Fraction(a, den)
        f = float(q)
        return f, (0.0 if Fraction(f) == q else EPS * abs(f))
    if a == 0 or (a > 0) == (b > 0):
        size = max(abs(a), abs(b) * math.isqrt(d) + 1)
        k = max(0, _GUARD_BITS - size.bit_length())
        num = (a << k) + _scaled_sqrt_term(b, d, k)
        f = float(Fraction(num, den << k))
    else:
        # (a + b r) = (a^2 - d b^2) / (a - b r), and a, -b share a sign
        nrm = a * a - d * b * b
        size = max(abs(a), abs(b) * math.isqrt(d) + 1)
        k = max(0, _GUARD_BITS - size.bit_length())
        m = (a << k) - _scaled_sqrt_term(b, d, k)
        f = float(Fraction(nrm << k, m * den))
    return f, EPS * abs(f)


def _object_array(rows):
    arr = np.empty((len(rows), len(rows[0]) if rows else 0), dtype=object)
    for i, r in enumerate(rows):
        for j, v in enumerate(r):
            arr[i, j] = int(v)
    return arr


def _int_scaled(A, B, d, target_bits=_FLOAT_TARGET_BITS):
    """Float array F and exponent e with ``(A + B sqrt d) ~ F * 2**e``.

    The approximation is accurate to double precision in the normwise
    sense, which is what singular values need.
    """
    flat_a = A.ravel().tolist()
    if B is None:
        top = max((abs(v) for v in flat_a), default=0)
        bits = top.bit_length()
        if bits <= 1000:
            return A.astype(float), 0
        s = bits - target_bits
        return np.array([v >> s for v in flat_a], dtype=float).reshape(A.shape), s
    flat_b = B.ravel().tolist()
    r = math.isqrt(d) + 1
    top = max(max(abs(u) for u in flat_a), max(abs(v) for v in flat_b) * r)
    k = target_bits - top.bit_length()
    out = np.empty(len(flat_a), dtype=float)
    if k >= 0:
        for i, (u, v) in enumerate(zip(flat_a, flat_b)):
            out[i] = float((u << k) + _scaled_sqrt_term(v, d, k))
    else:
        s = -k
        for i, (u, v) in enumerate(zip(flat_a, flat_b)):
            out[i] = float((u + _scaled_sqrt_term(v, d, 0)) >> s)
    return out.reshape(A.shape), -k


class QMatrix:
    """Exact square (or rectangular) matrix over Q(sqrt d).

    The value is ``(A + B*sqrt(d)) / den`` with ``A``, ``B`` object arrays
    of Python ints (``B is None`` when ``d == 1``) and a positive common
    denominator; ``gcd`` of all entries and ``den`` is 1.
    """

    __slots__ = ("A", "B", "den", "d", "_float", "_key")

    def __init__(self, A, B=None, den=1, d=1, *, reduced=False):
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        if d == 1:
            if B is not None and any(v != 0 for v in B.ravel().tolist()):
                raise ValueError("b-part must vanish when d = 1")
            B = None
        elif B is None:
            B = np.zeros(A.shape, dtype=object)
        if den < 0:
            A, den = -A, -den
            if B is not None:
                B = -B
        if not reduced:
            vals = A.ravel().tolist()
            if B is not None:
                vals += B.ravel().tolist()
            g = math.gcd(den, *vals)
            if g > 1:
                A = A // g
                if B is not None:
                    B = B // g
                den //= g
        self.A = A
        self.B = B
        self.den = den
        self.d = d
        self._float = None
        self._key = None

    # -- construction -------------------------------------------------
    @classmethod
    def _make(cls, A, B, den, d):
        return cls(A, B, den, d)

    @classmethod
    def from_rows(cls, rows, d=1):
        """Build from nested rows of ints, Fractions, QuadRationals or triples."""
        q = [[QuadRational.coerce(v, d) for v in r] for r in rows]
        den = 1
        for r in q:
            for v in r:
                den = den * v.den // math.gcd(den, v.den)
        A = _object_array([[v.a * (den // v.den) for v in r] for r in q])
        B = _object_array([[v.b * (den // v.den) for v in r] for r in q]) if d > 1 else None
        return cls(A, B, den, d)

    @classmethod
    def identity(cls, size, d=1):
        A = np.zeros((size, size), dtype=object)
        for i in range(size):
            A[i, i] = 1
        return cls(A, None, 1, d, reduced=True)

    @classmethod
    def zeros(cls, rows, cols=None, d=1):
        A = np.zeros((rows, rows if cols is None else cols), dtype=object)
        A[...] = 0
        return cls(A, None, 1, d, reduced=True)

    # -- basic protocol ------------------------------------------------
    @property
    def shape(self):
        return self.A.shape

    def entry(self, i, j):
        b = 0 if self.B is None else self.B[i, j]
        return QuadRational(self.A[i, j], b, self.den, self.d)

    def entries(self):
        return [[self.entry(i, j) for j in range(self.shape[1])] for i in range(self.shape[0])]

    def triples(self):
        return [[self.entry(i, j).triple for j in range(self.shape[1])]
                for i in range(self.shape[0])]

    @property
    def key(self):
        """Hashable canonical form (exact)."""
        if self._key is None:
            k = (self.den,) + tuple(self.A.ravel().tolist())
            if self.B is not None:
                k += tuple(self.B.ravel().tolist())
            self._key = k
        return self._key

    def __eq__(self, other):
        if not isinstance(other, QMatrix):
            return NotImplemented
        return self.d == other.d and self.shape == other.shape and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"{type(self).__name__}({self.entries()!r})"

    # -- arithmetic ---------------------------------------------------
    def lift(self, d):
        """Same matrix viewed over Q(sqrt d) (only from the rational field)."""
        if d == self.d:
            return self
        if self.d != 1:
            raise ValueError("matrices live over different quadratic fields")
        return type(self)(self.A, None, self.den, d, reduced=True)

    def _align(self, other):
        if self.d == other.d:
            return self, other
        if self.d == 1:
            return self.lift(other.d), other
        return self, other.lift(self.d)

    def __matmul__(self, other):
        if not isinstance(other, QMatrix):
            return NotImplemented
        self, other = self._align(other)
        if self.d == 1:
            A = self.A @ other.A
            B = None
        else:
            A = self.A @ other.A + self.d * (self.B @ other.B)
            B = self.A @ other.B + self.B @ other.A
        return self._make(A, B, self.den * other.den, self.d)

    def __add__(self, other):
        if not isinstance(other, QMatrix):
            return NotImplemented
        self, other = self._align(other)
        A = self.A * other.den + other.A * self.den
        B = None if self.d == 1 else self.B * other.den + other.B * self.den
        return QMatrix(A, B, self.den * other.den, self.d)

    def __neg__(self):
        return QMatrix(-self.A, None if self.B is None else -self.B, self.den, self.d,
                       reduced=True)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        """Multiply by a scalar (int, Fraction or QuadRational)."""
        c = QuadRational.coerce(c, self.d)
        if self.d == 1:
            return QMatrix(self.A * c.a, None, self.den * c.den, 1)
        A = self.A * c.a + self.d * c.b * self.B
        B = self.A * c.b + self.B * c.a
        return QMatrix(A, B, self.den * c.den, self.d)

    @property
    def T(self):
        return QMatrix(self.A.T.copy(), None if self.B is None else self.B.T.copy(),
                       self.den, self.d, reduced=True)

    def is_zero(self):
        return all(v == 0 for v in self.A.ravel().tolist()) and (
            self.B is None or all(v == 0 for v in self.B.ravel().tolist()))

    def is_identity(self):
        n, m = self.shape
        return n == m and self == QMatrix.identity(n, self.d)

    def block_diag(self, other):
        self, other = self._align(other)
        n1, n2 = self.shape[0], other.shape[0]
        A = np.zeros((n1 + n2, n1 + n2), dtype=object)
        A[...] = 0
        A[:n1, :n1] = self.A * other.den
        A[n1:, n1:] = other.A * self.den
        B = None
        if self.d > 1:
            B = np.zeros_like(A)
            B[...] = 0
            B[:n1, :n1] = self.B * other.den
            B[n1:, n1:] = other.B * self.den
        return QMatrix(A, B, self.den * other.den, self.d)

    # -- exact linear algebra ------------------------------------------
    def det(self):
        """Exact determinant as a :class:`QuadRational`."""
        n, m = self.shape
        if n != m:
            raise ValueError("determinant of a non-square matrix")
        if self.d == 1:
            num = _bareiss_det(self.A)
            return QuadRational(num, 0, self.den ** n, 1)
        rows = self.entries()
        return _gauss_det(rows, self.d)

    def inverse(self):
        """Exact inverse by Gauss-Jordan elimination over the field."""
        n, m = self.shape
        if n != m:
            raise ValueError("inverse of a non-square matrix")
        one = QuadRational(1, 0, 1, self.d)
        zero = QuadRational(0, 0, 1, self.d)
        aug = [r + [one if i == j else zero for j in range(n)]
               for i, r in enumerate(self.entries())]
        for c in range(n):
            p = next((r for r in range(c, n) if aug[r][c]), None)
            if p is None:
                raise ZeroDivisionError("matrix is singular")
            aug[c], aug[p] = aug[p], aug[c]
            inv = aug[c][c].inverse()
            aug[c] = [v * inv for v in aug[c]]
            for r in range(n):
                if r != c and aug[r][c]:
                    f = aug[r][c]
                    aug[r] = [v - f * w for v, w in zip(aug[r], aug[c])]
        return type(self).from_rows([r[n:] for r in aug], self.d)

    # -- floating views -------------------------------------------------
    def scaled_float(self):
        """``(F, log_scale)`` with the matrix equal to ``F * exp(log_scale)``.

        Works for entries of any size; ``F`` is normwise accurate to
        double precision.
        """
        F, e = _int_scaled(self.A, self.B, self.d)
        return F, e * math.log(2.0) - math.log(self.den)

    def to_float(self):
        """Double-precision copy (cached; the matrix is immutable)."""
        if self._float is None:
            F, e = _int_scaled(self.A, self.B, self.d)
            scale = 2.0 ** e / self.den if e < 1000 else math.inf
            self._float = F * scale
            self._float.setflags(write=False)
        return self._float


def _bareiss_det(M):
    """Fraction-free determinant of an integer object array."""
    a = [list(r) for r in M.tolist()]
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if a[r][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
        prev = akk
    return sign * a[n - 1][n - 1] if n else 1


def _gauss_det(rows, d):
    rows = [list(r) for r in rows]
    n = len(rows)
    det = QuadRational(1, 0, 1, d)
    for c in range(n):
        p = next((r for r in range(c, n) if rows[r][c]), None)
        if p is None:
            return QuadRational(0, 0, 1, d)
        if p != c:
            rows[c], rows[p] = rows[p], rows[c]
            det = -det
        piv = rows[c][c]
        det = det * piv
        inv = piv.inverse()
        for r in range(c + 1, n):
            if rows[r][c]:
                f = rows[r][c] * inv
                rows[r] = [v - f * w for v, w in zip(rows[r], rows[c])]
    return det


def rational_nullspace(rows, ncols):
    """Basis of the right nullspace of a rational matrix.

    ``rows`` is an iterable of length-``ncols`` sequences of ints or
    Fractions.  Returns a list of Fraction vectors in reduced form (each
    has a 1 in its own free column).
    """
    mat = [[Fraction(v) for v in r] for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if p is None:
            continue
        mat[r], mat[p] = mat[p], mat[r]
        inv = 1 / mat[r][c]
        mat[r] = [v * inv for v in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [v - f * w for v, w in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -mat[i][fc]
        basis.append(v)
    return basis
