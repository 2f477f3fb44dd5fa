import json
import math
import random
from pathlib import Path

import numpy as np
import pytest
from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from son2lab.asymptotics import (
    BOUNDARY_TOL,
    InsufficientData,
    NonPositiveForm,
    analyze,
    anosov_gap,
    apertures_nested,
    bound_tolerance,
    bounds_check,
    completeness_radius,
    count_table,
    critical_exponent,
    direction_grid,
    directional_growth,
    fit_line,
    integrability_exponent,
    limit_cone,
    temperedness_verdict,
    zariski_span_rank,
)
from son2lab.bending import bend
from son2lab.cli import zariski_ball
from son2lab.datasets import load_bundled
from son2lab.enumeration import ball, cartan_cloud, stream_cloud
from son2lab.liegroup import (
    ALPHA1,
    ALPHA2,
    LinearForm,
    adjoint_exact,
    as_gmatrix,
    jordan_projection,
    lie_algebra_basis,
    rho_form,
)
from son2lab.scalars import QMatrix

FIXTURES = Path(__file__).parent / "fixtures"


# -- fitting and counting --------------------------------------------------

def test_fit_line_exact():
    x = np.arange(10.0)
    f = fit_line(x, 3 * x - 2)
    assert f.slope == pytest.approx(3) and f.intercept == pytest.approx(-2)
    assert f.r2 == pytest.approx(1.0) and f.stderr == pytest.approx(0, abs=1e-12)


def test_fit_line_needs_points():
    with pytest.raises(InsufficientData):
        fit_line([1.0], [2.0])


def test_count_table_is_exact():
    vals = [0.5, 1.0, 1.0, 2.5]
    assert count_table(vals, [0.4, 1.0, 2.0, 3.0]).tolist() == [0, 3, 3, 4]


def test_direction_grid_lexicographic():
    d = direction_grid(9)
    assert d == sorted(d) and len(d) == 9
    assert d[-1] == (1.0, 0.0)
    assert d[0] == pytest.approx((math.sqrt(0.5), math.sqrt(0.5)))


# -- limit cone ------------------------------------------------------------

def test_cone_of_h_clouds(sl2z_cloud, bianchi_cloud):
    for cloud in (sl2z_cloud, bianchi_cloud):
        cone = limit_cone(cloud)
        assert cone.c_hat < 1e-8
        assert cone.eta < 1e-8


def test_cone_contains_all_points_beyond_T_min(bundled_run):
    run = bundled_run("bending_sweep")
    cloud = run.cloud("q6-5/")
    cone = limit_cone(cloud, T_min=3.0)
    norms = np.hypot(cloud.mu[:, 0], cloud.mu[:, 1])
    sel = norms >= 3.0
    assert np.all(cloud.mu[sel, 1] <= (cone.c_hat + 1e-12) * cloud.mu[sel, 0])
    assert cone.npoints == int(sel.sum())
    assert len(cone.directions) == 3


def test_cone_of_identity_cloud_fails():
    cloud = cartan_cloud(ball(load_bundled("schottky_n2"), 0))
    with pytest.raises(InsufficientData):
        limit_cone(cloud)


def test_cone_opens_with_q(bundled_run):
    reps = bundled_run("bending_sweep").by_q()
    chats = [reps[q].cone.c_hat for q in ("21/20", "11/10", "6/5")]
    assert reps["1"].cone.c_hat < 1e-8
    assert all(c > 1e-3 for c in chats)
    assert all(b >= a - 0.02 for a, b in zip(chats, chats[1:]))


def test_jordan_cross_check_lies_inside_cone():
    bent = bend(load_bundled("amalgam_n3"), "6/5")
    cloud = stream_cloud(bent, 6)
    lam = [jordan_projection(bent.evaluate(w)).as_array() for w in ("ab", "aB", "abab", "bdA")]
    cone = limit_cone(cloud, jordan=lam)
    assert cone.jordan_c_hat is not None and 0 < cone.jordan_c_hat <= cone.c_hat + 1e-9


# -- directional growth ----------------------------------------------------

def test_lattice_growth_on_the_wall(sl2z_cloud):
    s = directional_growth(sl2z_cloud, (1, 0))
    assert not s.insufficient
    assert 0.8 <= s.psi <= 1.2
    assert s.aperture == 0.1


def test_lattice_growth_off_the_wall(sl2z_cloud):
    s = directional_growth(sl2z_cloud, (1, 1))
    assert s.insufficient and s.psi is None


def test_cyclic_growth_is_zero(cyclic_cloud):
    g = load_bundled("cyclic_n3").generators[0].matrix
    lam = jordan_projection(g)
    s = directional_growth(cyclic_cloud, (lam.v1, lam.v2))
    assert not s.insufficient
    assert abs(s.psi) < 0.05


def test_apertures_are_nested(sl2z_cloud):
    samples = [directional_growth(sl2z_cloud, v, (0.1, 0.3, 0.2)) for v in direction_grid()]
    assert apertures_nested(samples)
    for s in samples:
        assert [f.aperture for f in s.fits] == [0.3, 0.2, 0.1]


def test_invalid_aperture(sl2z_cloud):
    with pytest.raises(ValueError):
        directional_growth(sl2z_cloud, (1, 0), (0.1, 0.0))


# -- critical exponents ----------------------------------------------------

def test_sl2z_exponent(sl2z_cloud):
    e = critical_exponent(sl2z_cloud, rho_form(2))
    assert abs(e.delta - 1.0) <= 0.2
    assert e.window == (e.T_comp / 2, e.T_comp)
    assert len(e.grid) == 32 and e.counts == sorted(e.counts)


def test_bianchi_exponent(bianchi_cloud):
    e = critical_exponent(bianchi_cloud, rho_form(3))
    assert abs(e.delta - 4 / 3) <= 0.3


def test_schottky_below_lattice(schottky_cloud, sl2z_cloud):
    d_s = critical_exponent(schottky_cloud, rho_form(2)).delta
    d_l = critical_exponent(sl2z_cloud, rho_form(2)).delta
    assert d_s < d_l


def test_non_positive_form_rejected(sl2z_cloud):
    with pytest.raises(NonPositiveForm):
        critical_exponent(sl2z_cloud, LinearForm(-1, 0))
    # alpha2 vanishes on the wall, where the H-cloud lives
    with pytest.raises(NonPositiveForm):
        critical_exponent(sl2z_cloud, ALPHA2, limit_cone(sl2z_cloud))


def test_small_ball_is_insufficient():
    # at R = 1 every point sits at T_comp: one populated grid point
    cloud = stream_cloud(load_bundled("schottky_n2"), 1)
    with pytest.raises(InsufficientData):
        critical_exponent(cloud, rho_form(2))


def test_completeness_radius(sl2z_cloud):
    T = completeness_radius(sl2z_cloud, rho_form(2))
    last = sl2z_cloud.wordlen == sl2z_cloud.radius
    assert T == pytest.approx(rho_form(2)(sl2z_cloud.mu[last]).min())


# -- verdicts --------------------------------------------------------------

def test_verdict_rules():
    assert temperedness_verdict(1.4, 0.02).verdict == "non-tempered"
    assert temperedness_verdict(0.8, 0.05).verdict == "tempered"
    assert temperedness_verdict(1.0, 0.01).verdict == "tempered"
    assert temperedness_verdict(1.0, 0.03).verdict == "inconclusive"
    assert temperedness_verdict(1.1, 0.1).verdict == "inconclusive"
    assert temperedness_verdict(math.nan, 0.1).verdict == "inconclusive"


def test_verdict_boundary_band():
    # the tempered side reaches 1 + BOUNDARY_TOL, the other side needs two stderr
    assert temperedness_verdict(1.0, (BOUNDARY_TOL - 0.002) / 2).verdict == "tempered"
    assert temperedness_verdict(1.0, (BOUNDARY_TOL + 0.002) / 2).verdict == "inconclusive"
    assert temperedness_verdict(1.0 + BOUNDARY_TOL, 0.01).verdict == "non-tempered"
    assert temperedness_verdict(1.03, 0.02).verdict == "inconclusive"


def test_integrability_exponent():
    v = temperedness_verdict(1.4, 0.02)
    assert v.p_hat == pytest.approx(2 / 0.6) and v.eta == pytest.approx(0.4)
    assert v.margin == pytest.approx(-0.4)
    assert temperedness_verdict(0.9, 0.02).p_hat == 2
    assert integrability_exponent(4 / 3) == pytest.approx(3.0)
    assert integrability_exponent(2.5) == math.inf


def test_lattice_verdicts(bundled_run):
    v2 = bundled_run("sl2z_n2").report.verdict
    assert v2.verdict == "tempered"
    assert v2.p_hat == pytest.approx(2, abs=0.05)
    v3 = bundled_run("bianchi_n3").report.verdict
    assert v3.verdict == "non-tempered"
    assert 2.2 <= v3.p_hat <= 4.5


# -- bounds ----------------------------------------------------------------

def test_property_T_bound_on_bianchi(bundled_run):
    rep = bundled_run("bianchi_n3").report
    rec = next(r for r in rep.bounds.records if r.direction == (1.0, 0.0))
    assert rec.bound_T == 2.0
    assert rec.psi == pytest.approx(2.0, abs=0.2)
    assert rec.bound_T_ok
    assert rep.bounds.property_T_ok and rep.bounds.kmo_ok


def test_insufficient_directions_are_skipped(bundled_run):
    rep = bundled_run("sl2z_n2").report
    assert any(abs(d[0] - d[1]) < 1e-12 for d in rep.bounds.skipped)
    assert all(r.skipped == (r.psi is None) for r in rep.bounds.records)
    assert rep.bounds.property_T_ok is None  # n = 2: bound needs property (T)


def test_v_sigma_tie_break():
    from son2lab.asymptotics import DirectionalSample
    mk = lambda d, p: DirectionalSample(d, [], [], p, 0.01, 0.1, False)
    a, b = (0.9, 0.1), (1.0, 0.0)
    rho = rho_form(3)
    # same ratio in both directions: the lexicographically first wins
    s = bounds_check([mk(b, rho(b)), mk(a, rho(a))], 3)
    assert s.v_sigma == a


def test_bounds_flag_violations():
    from son2lab.asymptotics import DirectionalSample
    s = bounds_check([DirectionalSample((1.0, 0.0), [], [], 3.0, 0.01, 0.1, False)], 3)
    assert s.property_T_ok is False
    assert bound_tolerance(2.0, 0.01) == pytest.approx(0.42)


def test_kmo_and_v_sigma_on_bent_system(bundled_run):
    rep = bundled_run("bending_sweep").by_q()["21/20"]
    assert rep.bounds.kmo_ok
    v = rep.bounds.v_sigma
    assert math.atan2(v[1], v[0]) <= 0.3


def test_cone_indicator_consistency(bundled_run):
    for name in ("sl2z_n2", "bianchi_n3", "schottky_n2"):
        rep = bundled_run(name).report
        edge = math.atan(rep.cone.c_hat)
        for s in rep.samples:
            if not s.insufficient:
                assert math.atan2(s.direction[1], s.direction[0]) <= edge + s.aperture


# -- Anosov gap ------------------------------------------------------------

def test_schottky_gap(schottky_cloud):
    g = anosov_gap(schottky_cloud)
    assert g.slope > 0 and g.r2 >= 0.9 and not g.degenerate


def test_sl2z_gap_degenerate(sl2z_cloud):
    assert anosov_gap(sl2z_cloud).degenerate


def test_cyclic_gap_slope_is_translation_length(cyclic_cloud):
    g = load_bundled("cyclic_n3").generators[0].matrix
    lam = jordan_projection(g)
    gap = anosov_gap(cyclic_cloud)
    assert gap.slope == pytest.approx(ALPHA1((lam.v1, lam.v2)), rel=1e-3)
    assert ALPHA1((lam.v1, lam.v2)) == pytest.approx(2 * math.acosh(3), rel=1e-12)


def test_gap_needs_layers():
    cloud = stream_cloud(load_bundled("schottky_n2"), 3)
    with pytest.raises(InsufficientData):
        anosov_gap(cloud)


# -- Zariski proxy ---------------------------------------------------------

def test_identity_ball_rank_one():
    assert zariski_span_rank(ball(load_bundled("amalgam_n3"), 0)) == 1


def _exact_rank(elements):
    rows = []
    for g in elements:
        A = adjoint_exact(g)
        rows.append([QQ(*x.as_fraction().as_integer_ratio()) for r in A.entries() for x in r])
    return DomainMatrix(rows, (len(rows), len(rows[0])), QQ).rank()


def test_unbent_rank_matches_fixture():
    fx = json.loads((FIXTURES / "zariski_r0.json").read_text())
    s = load_bundled(fx["system"])
    small = ball(s, fx["radius"])
    assert len(small) == fx["elements"]
    assert _exact_rank(small.elements) == fx["r0"]
    r = zariski_span_rank(zariski_ball(s))
    assert r == fx["r0"] < fx["D"] ** 2


def _random_ambient_elements(n, count, rng):
    """Exact elements of G from Cayley transforms of random rational so(Q) elements."""
    basis = lie_algebra_basis(n)
    N = n + 2
    out = []
    I = QMatrix.identity(N)
    while len(out) < count:
        X = QMatrix.zeros(N)
        for B in basis:
            X = X + B.scale(rng.randint(-2, 2))
        try:
            g = (I - X) @ (I + X).inverse()
        except ZeroDivisionError:
            continue
        out.append(as_gmatrix(g, n=n))
    return out


def test_full_span_reachable_by_ambient_sampling():
    """Burnside oracle: Ad of random elements of G spans all of End(so(Q))."""
    els = _random_ambient_elements(3, 120, random.Random(0))
    assert _exact_rank(els) == 100


def test_bent_rank_is_full():
    fx = json.loads((FIXTURES / "zariski_r0.json").read_text())
    bent = bend(load_bundled(fx["system"]), "21/20")
    assert zariski_span_rank(zariski_ball(bent)) == fx["D"] ** 2


def test_rank_stable_under_seed():
    zb = zariski_ball(bend(load_bundled("amalgam_n3"), "11/10"))
    assert {zariski_span_rank(zb, seed=s) for s in range(4)} == {100}
    zb0 = zariski_ball(load_bundled("amalgam_n3"))
    assert {zariski_span_rank(zb0, seed=s) for s in range(4)} == {34}


# -- report ----------------------------------------------------------------

def test_analyze_report_serializes(schottky_cloud):
    rep = analyze(schottky_cloud, "schottky_n2")
    doc = json.loads(rep.to_json())
    assert doc["verdict"]["verdict"] == "tempered"
    assert doc["exponents"]["rho"]["delta"] == rep.delta_rho
    assert rep.counts_csv().startswith("v1,v2,aperture,T,count\n")
    assert rep.gap_csv().startswith("layer,min_alpha1\n")
    assert rep.apertures_nested
    assert rep.to_json() == analyze(schottky_cloud, "schottky_n2").to_json()


def test_verdict_stable_under_seed():
    bent = bend(load_bundled("amalgam_n3"), "6/5")
    cloud = stream_cloud(bent, 5)
    zb = zariski_ball(bent)
    reps = [analyze(cloud, "x", ball=zb, seed=s) for s in (0, 1, 2)]
    assert len({r.verdict.verdict for r in reps}) == 1
    assert len({r.zariski_rank for r in reps}) == 1
