"""Asymptotic estimators on Cartan clouds.

Everything here is a finite-radius estimate: counts are taken inside the
completeness radius ``T_comp = min{psi(mu(g)) : |g| = R}``, below which a
word ball of radius R is assumed to contain every group element (exact
under a uniform lower Anosov gap, a heuristic otherwise).  Exponents are
ordinary least-squares slopes of log-counts on the window
``[T_comp/2, T_comp]``.

Cone apertures are half-angles: a point ``mu`` lies in the cone of aperture
``a`` around the unit vector ``v`` when the angle between them is below
``a``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .liegroup import ALPHA1, LinearForm, adjoint, lie_dim, property_T_form, rho_form

DEFAULT_APERTURES = (0.3, 0.2, 0.1)
MIN_CONE_POINTS = 50
MIN_GRID_POINTS = 8
GRID_POINTS = 32
RANK_TOL = 1e-8
# finite-radius fits cannot separate delta = 1 from 1 + BOUNDARY_TOL
BOUNDARY_TOL = 0.05
GAP_R2 = 0.9
GAP_RATIO = 0.5
MIN_GAP_LAYERS = 5
# relative part of the KMO / property-(T) tolerance
BOUND_REL_TOL = 0.2
CONTINUITY_ABS_TOL = 0.05


class InsufficientData(ValueError):
    """Not enough cloud points or layers for the requested estimate."""


class NonPositiveForm(ValueError):
    """The linear form is not positive on the estimated limit cone."""


@dataclass
class LinearFit:
    slope: float
    intercept: float
    stderr: float
    r2: float
    npts: int


def fit_line(x, y):
    """OLS fit ``y = slope*x + intercept`` with slope standard error and R^2."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    m = len(x)
    if m < 2:
        raise InsufficientData("need at least two points for a line fit")
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    if sxx == 0:
        raise InsufficientData("degenerate abscissae")
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = float(ym - slope * xm)
    res = y - (slope * x + intercept)
    sse = float(np.sum(res ** 2))
    sst = float(np.sum((y - ym) ** 2))
    stderr = math.sqrt(sse / (m - 2) / sxx) if m > 2 else math.inf
    r2 = 1.0 - sse / sst if sst > 0 else 1.0
    return LinearFit(slope, intercept, stderr, r2, m)


def _cloud_arrays(cloud):
    mu = np.asarray(cloud.mu, dtype=float)
    return mu, np.asarray(cloud.wordlen)


# ---------------------------------------------------------------------------
# limit cone
# ---------------------------------------------------------------------------

@dataclass
class ConeEstimate:
    """Estimated limit cone ``{0 <= v2 <= c_hat v1}``.

    ``directions`` are the unit vectors of the extremal points (largest
    ``v2/v1``) beyond ``T_min``; ``eta`` is the matching half-opening
    ``c_hat / sqrt(1 + c_hat^2)`` under the Euclidean norm.
    """

    c_hat: float
    directions: list
    T_min: float
    npoints: int
    jordan_c_hat: float | None = None

    @property
    def eta(self):
        return self.c_hat / math.hypot(1.0, self.c_hat)


def limit_cone(cloud, T_min=None, jordan=None, n_extremal=3):
    """Estimate the limit cone from cloud points with ``|mu| >= T_min``.

    Parameters
    ----------
    cloud : CartanCloud
    T_min : float, optional
        Norm cutoff; defaults to half the largest norm in the cloud.
    jordan : array_like, optional
        Jordan projections of sample elements; their largest ``v2/v1`` is
        reported as a certified interior ray.
    n_extremal : int
        Number of extremal directions returned.

    Raises
    ------
    InsufficientData
        If no cloud point lies beyond ``T_min``.
    """
    mu, _ = _cloud_arrays(cloud)
    norms = np.hypot(mu[:, 0], mu[:, 1]) if len(mu) else np.zeros(0)
    if T_min is None:
        T_min = 0.5 * float(norms.max()) if len(norms) else 0.0
    sel = norms >= T_min
    if len(mu) == 0 or not np.any(sel) or float(norms.max()) == 0.0:
        raise InsufficientData(f"no cloud points with |mu| >= {T_min}; enumerate a larger ball")
    pts = mu[sel]
    ratio = pts[:, 1] / pts[:, 0]
    order = np.lexsort((pts[:, 0], -ratio))[:n_extremal]
    dirs = [[float(v) for v in pts[i] / np.hypot(*pts[i])] for i in order]
    jc = None
    if jordan is not None:
        lam = np.asarray(jordan, dtype=float)
        lam = lam[lam[:, 0] > 0]
        if len(lam):
            jc = float(np.max(lam[:, 1] / lam[:, 0]))
    return ConeEstimate(float(ratio.max()), dirs, float(T_min), int(sel.sum()), jc)


# ---------------------------------------------------------------------------
# completeness radius and counting
# ---------------------------------------------------------------------------

def completeness_radius(cloud, form=None):
    """``min form(mu(g))`` over the outermost layer (Euclidean norm if ``form`` is None)."""
    mu, wl = _cloud_arrays(cloud)
    last = wl == cloud.radius
    if not np.any(last):
        raise InsufficientData("outermost layer is empty (finite group or radius 0)")
    vals = np.hypot(mu[last, 0], mu[last, 1]) if form is None else form(mu[last])
    return float(vals.min())


def default_grid(T_comp, points=GRID_POINTS):
    return np.linspace(T_comp / 2.0, T_comp, points)


def count_table(values, grid):
    """``N(T) = #{values <= T}`` for each T in ``grid`` (exact integer counts)."""
    values = np.sort(np.asarray(values, dtype=float))
    return np.searchsorted(values, np.asarray(grid, dtype=float), side="right").astype(np.int64)


def _log_fit(grid, counts):
    ok = counts > 0
    if ok.sum() < MIN_GRID_POINTS:
        raise InsufficientData(f"only {int(ok.sum())} grid points with nonzero counts")
    return fit_line(np.asarray(grid)[ok], np.log(counts[ok]))


# ---------------------------------------------------------------------------
# growth indicator and critical exponents
# ---------------------------------------------------------------------------

@dataclass
class ApertureFit:
    aperture: float
    counts: list
    npoints: int
    slope: float | None
    stderr: float | None
    r2: float | None


@dataclass
class DirectionalSample:
    """Growth-indicator estimate in one direction.

    ``psi`` is the slope at the smallest aperture with at least
    ``MIN_CONE_POINTS`` points inside the grid; None when insufficient.
    """

    direction: tuple
    grid: list
    fits: list
    psi: float | None
    stderr: float | None
    aperture: float | None
    insufficient: bool
    note: str = ""


def _angles(mu):
    return np.arctan2(mu[:, 1], mu[:, 0])


def directional_growth(cloud, v, apertures=DEFAULT_APERTURES, T_grid=None):
    """Estimate ``psi(v)`` by counting cloud points in cones around ``v``.

    Parameters
    ----------
    cloud : CartanCloud
    v : ChamberVec or pair
        Direction (normalized internally).
    apertures : sequence of float
        Cone half-angles in radians, any order; reported largest first.
    T_grid : array_like, optional
        Norm thresholds; defaults to 32 points on ``[T_comp/2, T_comp]``
        with ``T_comp`` the Euclidean completeness radius.
    """
    if any(a <= 0 for a in apertures):
        raise ValueError("apertures must be positive")
    v = np.array([v.v1, v.v2] if hasattr(v, "v1") else v, dtype=float)
    v = v / np.hypot(*v)
    mu, _ = _cloud_arrays(cloud)
    if T_grid is None:
        T_grid = default_grid(completeness_radius(cloud))
    T_grid = np.asarray(T_grid, dtype=float)
    norms = np.hypot(mu[:, 0], mu[:, 1])
    off = np.abs(_angles(mu) - math.atan2(v[1], v[0])) if len(mu) else np.zeros(0)
    fits = []
    for a in sorted(apertures, reverse=True):
        counts = count_table(norms[off < a], T_grid)
        try:
            f = _log_fit(T_grid, counts)
            fits.append(ApertureFit(float(a), counts.tolist(), int(counts[-1]),
                                    f.slope, f.stderr, f.r2))
        except InsufficientData:
            fits.append(ApertureFit(float(a), counts.tolist(), int(counts[-1]), None, None, None))
    usable = [f for f in fits if f.slope is not None and f.npoints >= MIN_CONE_POINTS]
    direction = (float(v[0]), float(v[1]))
    if not usable:
        return DirectionalSample(direction, T_grid.tolist(), fits, None, None, None, True,
                                 "cone misses the cloud or holds too few points")
    best = usable[-1]
    return DirectionalSample(direction, T_grid.tolist(), fits, best.slope, best.stderr,
                             best.aperture, False)


def direction_grid(m=9):
    """``m`` unit vectors from (1, 0) to (1, 1)/sqrt(2), in lexicographic (v1, v2) order."""
    th = np.linspace(0.0, math.pi / 4, m)
    dirs = [(float(math.cos(t)), float(math.sin(t))) for t in th]
    return sorted(dirs)


@dataclass
class ExponentFit:
    """Critical-exponent estimate for one linear form."""

    form: str
    coefficients: tuple
    delta: float
    stderr: float
    r2: float
    T_comp: float
    window: tuple
    grid: list
    counts: list


def critical_exponent(cloud, form, cone=None, grid_points=GRID_POINTS):
    """Slope of ``log #{g : form(mu(g)) <= T}`` over ``[T_comp/2, T_comp]``.

    Raises
    ------
    NonPositiveForm
        If ``form`` is not positive on the estimated cone.
    InsufficientData
        If the window holds fewer than 8 grid points with nonzero counts.
    """
    c_hat = 0.0 if cone is None else cone.c_hat
    if form.c1 <= 0 or form.c1 + c_hat * form.c2 <= 0:
        raise NonPositiveForm(f"form {form.name or (form.c1, form.c2)} is not positive "
                              f"on the cone v2 <= {c_hat:.4g} v1")
    mu, _ = _cloud_arrays(cloud)
    T_comp = completeness_radius(cloud, form)
    if not T_comp > 0:
        raise InsufficientData("completeness radius is zero")
    grid = default_grid(T_comp, grid_points)
    counts = count_table(form(mu), grid)
    f = _log_fit(grid, counts)
    return ExponentFit(form.name, (form.c1, form.c2), f.slope, f.stderr, f.r2, T_comp,
                       (float(grid[0]), float(grid[-1])), grid.tolist(), counts.tolist())


# ---------------------------------------------------------------------------
# verdicts and bounds
# ---------------------------------------------------------------------------

@dataclass
class Verdict:
    verdict: str
    delta: float
    stderr: float
    margin: float
    eta: float
    p_hat: float


def integrability_exponent(delta):
    """``2/(1 - eta)`` with ``eta = max(delta - 1, 0)``; infinite once ``eta >= 1``."""
    eta = max(delta - 1.0, 0.0)
    return math.inf if eta >= 1.0 else 2.0 / (1.0 - eta)


def temperedness_verdict(delta, stderr, boundary_tol=BOUNDARY_TOL):
    """Classify ``delta_rho`` against the tempered range ``delta <= 1``.

    ``non-tempered`` when ``delta - 2 stderr > 1``; ``tempered`` when the
    upper band ``delta + 2 stderr`` stays within ``1 + boundary_tol``;
    ``inconclusive`` otherwise.  Temperedness is a closed condition, so a
    fit that sits on the boundary with a tight error band counts as
    tempered; ``boundary_tol`` is the resolution of finite-radius fits.

    ``margin`` is ``1 - delta`` (positive on the tempered side).
    """
    if not (math.isfinite(delta) and math.isfinite(stderr)):
        verdict = "inconclusive"
    elif delta - 2 * stderr > 1.0:
        verdict = "non-tempered"
    elif delta + 2 * stderr <= 1.0 + boundary_tol:
        verdict = "tempered"
    else:
        verdict = "inconclusive"
    eta = max(delta - 1.0, 0.0) if math.isfinite(delta) else math.nan
    p = integrability_exponent(delta) if math.isfinite(delta) else math.nan
    return Verdict(verdict, float(delta), float(stderr), float(1.0 - delta), eta, p)


def bound_tolerance(rhs, se):
    """Tolerance used for inequality checks on fitted exponents."""
    return BOUND_REL_TOL * abs(rhs) + 2.0 * se


@dataclass
class BoundRecord:
    direction: tuple
    psi: float | None
    stderr: float | None
    rho: float
    ratio: float | None
    kmo_rhs: float | None
    kmo_ok: bool | None
    bound_T: float | None
    bound_T_ok: bool | None
    skipped: bool


@dataclass
class BoundsSummary:
    records: list
    v_sigma: tuple | None
    max_ratio: float | None
    kmo_ok: bool
    property_T_ok: bool | None
    skipped: list


def bounds_check(samples, n, exponent=None, check_property_T=None):
    """Check sampled ``psi`` against the KMO inequality and the property-(T) bound.

    Parameters
    ----------
    samples : list of DirectionalSample
    n : int
    exponent : ExponentFit, optional
        ``delta_rho`` fit for the KMO inequality ``psi <= delta_rho * rho``.
    check_property_T : bool, optional
        Defaults to ``n >= 3`` (the bound needs property (T)).  Lattices
        of G violate it by design, so callers disable it for those.

    Returns
    -------
    BoundsSummary
        ``v_sigma`` is the first maximizer of ``psi/rho`` in
        lexicographic (v1, v2) order.
    """
    if check_property_T is None:
        check_property_T = n >= 3
    rho = rho_form(n)
    ptf = property_T_form(n)
    records = []
    for s in sorted(samples, key=lambda s: s.direction):
        r = float(rho(s.direction))
        if s.insufficient:
            records.append(BoundRecord(s.direction, None, None, r, None, None, None, None, None, True))
            continue
        kmo_rhs = kmo_ok = None
        if exponent is not None:
            kmo_rhs = exponent.delta * r
            se = math.hypot(s.stderr, r * exponent.stderr)
            kmo_ok = bool(s.psi <= kmo_rhs + bound_tolerance(kmo_rhs, se))
        bT = bT_ok = None
        if check_property_T:
            bT = float(ptf(s.direction))
            bT_ok = bool(s.psi <= bT + bound_tolerance(bT, s.stderr))
        records.append(BoundRecord(s.direction, s.psi, s.stderr, r, s.psi / r, kmo_rhs, kmo_ok,
                                   bT, bT_ok, False))
    live = [rec for rec in records if not rec.skipped]
    v_sigma = max_ratio = None
    if live:
        max_ratio = max(rec.ratio for rec in live)
        v_sigma = next(rec.direction for rec in live if rec.ratio == max_ratio)
    kmo = all(rec.kmo_ok is not False for rec in live)
    pt = None if not check_property_T else all(rec.bound_T_ok for rec in live)
    skipped = [rec.direction for rec in records if rec.skipped]
    return BoundsSummary(records, v_sigma, max_ratio, kmo, pt, skipped)


def apertures_nested(samples):
    """Exact check that count tables shrink with the aperture."""
    for s in samples:
        tables = [np.asarray(f.counts) for f in s.fits]
        for wide, narrow in zip(tables, tables[1:]):
            if np.any(narrow > wide):
                return False
    return True


# ---------------------------------------------------------------------------
# Anosov gap
# ---------------------------------------------------------------------------

@dataclass
class AnosovFit:
    """OLS fit of per-layer minima of ``alpha1(mu)`` against word length.

    ``degenerate`` flags sublinear or poorly linear minima (slope <= 0,
    R^2 below 0.9, or the late-half slope under half the early-half
    slope), the signature of unipotent elements.
    """

    slope: float
    intercept: float
    r2: float
    stderr: float
    early_slope: float
    late_slope: float
    degenerate: bool
    layers: list
    minima: list


def anosov_gap(cloud, form=ALPHA1):
    """Fit ``min{alpha1(mu(g)) : |g| = k}`` against ``k``.

    Raises
    ------
    InsufficientData
        With fewer than 5 nonempty layers.
    """
    mins = cloud.layer_minima(form)
    if len(mins) < MIN_GAP_LAYERS:
        raise InsufficientData(f"need at least {MIN_GAP_LAYERS} layers, got {len(mins)}")
    k = np.array([m[0] for m in mins], dtype=float)
    y = np.array([m[1] for m in mins])
    f = fit_line(k, y)
    h = len(k) // 2
    early = fit_line(k[: h + 1], y[: h + 1]).slope
    late = fit_line(k[h:], y[h:]).slope
    if early > 0:
        ratio = late / early
    else:
        ratio = math.inf if late > 0 else -math.inf
    degenerate = bool(f.slope <= 0 or f.r2 < GAP_R2 or ratio < GAP_RATIO)
    return AnosovFit(f.slope, f.intercept, f.r2, f.stderr, early, late, degenerate,
                     [int(v) for v in k], y.tolist())


# ---------------------------------------------------------------------------
# Zariski-density proxy
# ---------------------------------------------------------------------------

def _sample_pool(ball, sample_size):
    counts = list(ball.layer_counts)
    total = 0
    for c in counts:
        total += c
        if total >= 4 * sample_size:
            break
    return total


def zariski_span_rank(ball, sample_size=None, seed=0, rel_tol=RANK_TOL):
    """Numerical rank of the span of ``Ad(g)`` over a sample of ball elements.

    The sample is drawn (seeded) from the lowest layers holding at least
    ``4 * sample_size`` elements.  Each flattened ``Ad(g)`` is scaled to
    unit norm and the rank counts singular values above
    ``rel_tol * s_max``.  A Zariski-dense subgroup of the simple group
    SO(n,2) reaches ``D^2`` with ``D = dim so(n,2)``.

    Parameters
    ----------
    sample_size : int, optional
        Defaults to ``2 * D^2``.
    """
    D = lie_dim(ball.system.n)
    if sample_size is None:
        sample_size = 2 * D * D
    pool = _sample_pool(ball, sample_size)
    rng = np.random.default_rng(seed)
    m = min(sample_size, pool)
    idx = np.sort(rng.choice(pool, size=m, replace=False))
    rows = np.array([adjoint(ball.elements[i]).ravel() for i in idx])
    rows /= np.linalg.norm(rows, axis=1, keepdims=True)
    s = np.linalg.svd(rows, compute_uv=False)
    return int(np.sum(s > rel_tol * s[0]))


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

def _clean(x):
    """JSON-safe copy: non-finite floats become strings, tuples become lists."""
    if isinstance(x, float):
        return x if math.isfinite(x) else str(x)
    if isinstance(x, (np.floating,)):
        return _clean(float(x))
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


@dataclass
class GrowthReport:
    """All asymptotic estimates for one cloud."""

    name: str
    n: int
    radius: int
    npoints: int
    cone: ConeEstimate | None
    samples: list
    exponents: dict
    verdict: Verdict | None
    bounds: BoundsSummary | None
    anosov: AnosovFit | None
    zariski_rank: int | None = None
    zariski_dim: int | None = None
    apertures_nested: bool = True
    notes: list = field(default_factory=list)

    @property
    def delta_rho(self):
        e = self.exponents.get("rho")
        return None if e is None else e.delta

    def to_dict(self):
        return _clean({
            "name": self.name, "n": self.n, "radius": self.radius, "npoints": self.npoints,
            "cone": None if self.cone is None else dict(asdict(self.cone), eta=self.cone.eta),
            "samples": [asdict(s) for s in self.samples],
            "exponents": {k: asdict(v) for k, v in sorted(self.exponents.items())},
            "verdict": None if self.verdict is None else asdict(self.verdict),
            "bounds": None if self.bounds is None else asdict(self.bounds),
            "anosov": None if self.anosov is None else asdict(self.anosov),
            "zariski_rank": self.zariski_rank, "zariski_dim": self.zariski_dim,
            "apertures_nested": self.apertures_nested,
            "notes": list(self.notes),
        })

    def to_json(self):
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    def counts_csv(self):
        """Per-direction count tables: ``v1,v2,aperture,T,count``."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["v1", "v2", "aperture", "T", "count"])
        for s in sorted(self.samples, key=lambda s: s.direction):
            for f in s.fits:
                for T, c in zip(s.grid, f.counts):
                    w.writerow([repr(s.direction[0]), repr(s.direction[1]), repr(f.aperture),
                                repr(T), c])
        return buf.getvalue()

    def gap_csv(self):
        """Per-layer minima of ``alpha1(mu)``: ``layer,min_alpha1``."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["layer", "min_alpha1"])
        if self.anosov is not None:
            for k, y in zip(self.anosov.layers, self.anosov.minima):
                w.writerow([k, repr(y)])
        return buf.getvalue()

    def summary_lines(self):
        out = [f"system: {self.name} (n={self.n}, R={self.radius}, {self.npoints} points)"]
        e = self.exponents.get("rho")
        if e is not None:
            out.append(f"delta_rho: {e.delta:.4f} +- {e.stderr:.4f} "
                       f"(window [{e.window[0]:.3f}, {e.window[1]:.3f}], R^2={e.r2:.4f})")
        if self.verdict is not None:
            out.append(f"verdict: {self.verdict.verdict} (p_hat={self.verdict.p_hat:.4g})")
        if self.cone is not None:
            out.append(f"c_hat: {self.cone.c_hat:.6g} (T_min={self.cone.T_min:.3f})")
        if self.bounds is not None and self.bounds.v_sigma is not None:
            out.append(f"v_sigma: ({self.bounds.v_sigma[0]:.4f}, {self.bounds.v_sigma[1]:.4f}) "
                       f"max psi/rho={self.bounds.max_ratio:.4f}")
        if self.anosov is not None:
            tag = " [gap-degenerate]" if self.anosov.degenerate else ""
            out.append(f"anosov slope: {self.anosov.slope:.4f} (R^2={self.anosov.r2:.4f}){tag}")
        if self.zariski_rank is not None:
            out.append(f"zariski rank: {self.zariski_rank} / {self.zariski_dim}")
        out.extend(f"note: {s}" for s in self.notes)
        return out


def analyze(cloud, name="", directions=None, apertures=DEFAULT_APERTURES, T_min=None,
            check_property_T=None, boundary_tol=BOUNDARY_TOL, ball=None, sample_size=None,
            seed=0, rank_tol=RANK_TOL):
    """Run every estimator on ``cloud`` and collect a :class:`GrowthReport`.

    Estimators that lack data are recorded in ``notes`` rather than
    raised.  The Zariski rank is computed only when ``ball`` is given.
    """
    n = cloud.n
    notes = []
    if getattr(cloud, "diagnostics", None):
        notes.append(f"{len(cloud.diagnostics)} elements failed projection checks and were dropped")
    if not getattr(cloud, "complete", True):
        notes.append("cloud comes from an incomplete ball; counts are unreliable")
    try:
        cone = limit_cone(cloud, T_min)
    except InsufficientData as exc:
        cone = None
        notes.append(f"limit cone: {exc}")
    exponents = {}
    for form in (rho_form(n), ALPHA1, LinearForm(1, 0, "v1")):
        try:
            exponents[form.name] = critical_exponent(cloud, form, cone)
        except (InsufficientData, NonPositiveForm) as exc:
            notes.append(f"critical exponent ({form.name}): {exc}")
    verdict = None
    if "rho" in exponents:
        e = exponents["rho"]
        verdict = temperedness_verdict(e.delta, e.stderr, boundary_tol)
    samples = []
    try:
        grid = default_grid(completeness_radius(cloud))
        for v in directions or direction_grid():
            samples.append(directional_growth(cloud, v, apertures, grid))
    except InsufficientData as exc:
        notes.append(f"directional growth: {exc}")
    bounds = bounds_check(samples, n, exponents.get("rho"), check_property_T) if samples else None
    try:
        gap = anosov_gap(cloud)
    except InsufficientData as exc:
        gap = None
        notes.append(f"anosov gap: {exc}")
    rank = dim = None
    if ball is not None:
        rank = zariski_span_rank(ball, sample_size, seed, rank_tol)
        dim = lie_dim(n) ** 2
    return GrowthReport(name, n, cloud.radius, len(cloud), cone, samples, exponents, verdict,
                        bounds, gap, rank, dim, apertures_nested(samples), notes)
