import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from convexlab import (
    DomainError,
    Mat2,
    RankOneDir,
    ScalarFunction,
    SmoothnessError,
    VolIsoSplitEnergy,
    adm,
    aubert,
    convexity_scan,
    frobenius_squared,
    h_function,
    infimum_t2_g2,
    rank_one_scan,
    rank_one_second_difference,
    rot,
    split_rank_one_criterion,
    w0,
)


def test_w0_infima():
    W = w0()
    h0 = infimum_t2_g2(h_function(W), closed_form=1.0)
    f0 = infimum_t2_g2(W.f, closed_form=-1.0)
    assert h0.value == pytest.approx(1.0, abs=1e-6) and h0.agrees
    assert f0.value == pytest.approx(-1.0, abs=1e-6) and f0.agrees
    assert not h0.unbounded and not f0.unbounded


def test_infimum_at_boundary_for_square():
    sq = ScalarFunction(lambda t: t * t, lambda t: 2 * t, lambda t: 2.0 + 0.0 * t)
    r = infimum_t2_g2(sq)
    assert r.at_boundary and not r.unbounded
    assert 0.0 <= r.value < 1e-12
    assert r.argmin == pytest.approx(1e-8)


def test_infimum_unbounded_below():
    g = ScalarFunction(lambda t: -t * t, lambda t: -2 * t, lambda t: -2.0 + 0.0 * t)
    r = infimum_t2_g2(g, closed_form=-math.inf)
    assert r.unbounded and r.value == -math.inf and r.agrees


def test_infimum_refuses_non_c2():
    g = ScalarFunction(abs, smoothness=0)
    with pytest.raises(SmoothnessError):
        infimum_t2_g2(g)


def test_w0_split_criterion():
    rep = split_rank_one_criterion(w0())
    assert rep.passed
    iii = rep.condition_iii
    assert np.max(np.abs(iii.first)) <= 1e-10
    assert np.any(iii.t < 1) and np.any(iii.t > 1)
    assert rep.condition_iv.worst_margin >= -1e-9


def test_w0_condition_iv_first_disjunct_closed_form():
    rep = split_rank_one_criterion(w0())
    iv = rep.condition_iv
    t = iv.t
    expected = np.where(t >= 1, 2 * ((t - 1) / (t + 1) + 1), 4 / (t + 1))
    assert np.allclose(iv.first, expected, rtol=1e-6, atol=1e-6)
    assert np.all(iv.first >= 0)


def test_bad_split_energy_fails_condition_i():
    hh = ScalarFunction(lambda t: t, lambda t: 1.0 + 0.0 * t, lambda t: 0.0 * t, domain=(1.0, math.inf))
    f = ScalarFunction(lambda t: -t * t, lambda t: -2 * t, lambda t: -2.0 + 0.0 * t)
    rep = split_rank_one_criterion(VolIsoSplitEnergy("bad", hh, f))
    assert rep.f0.unbounded
    assert not rep.condition_i.passed
    assert not rep.passed


def test_split_criterion_refuses_non_c2():
    hh = ScalarFunction(lambda t: t, smoothness=1, domain=(1.0, math.inf))
    with pytest.raises(SmoothnessError):
        split_rank_one_criterion(VolIsoSplitEnergy("c1", hh, w0().f))


angles = st.floats(0.0, math.pi)


@settings(max_examples=200)
@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), angles, angles, angles, angles, st.floats(-0.5, 0.5))
def test_frobenius_second_difference_nonnegative(u, v, a, b, p, q, t):
    F = rot(a) @ Mat2.diag(math.exp(u), math.exp(v)) @ rot(b)
    d = RankOneDir(p, q)
    assert rank_one_second_difference(frobenius_squared(), F, d, t, unrestricted=True) >= -1e-8


def test_w0_random_rank_one_lines():
    rng = np.random.default_rng(42)
    W = w0()
    done = 0
    worst = math.inf
    while done < 10_000:
        u, v = rng.uniform(-1.5, 1.5, 2)
        a, b, p, q = rng.uniform(0.0, 2 * math.pi, 4)
        F = rot(a) @ Mat2.diag(math.exp(u), math.exp(v)) @ rot(b)
        d = RankOneDir(p, q, rng.uniform(0.1, 1.0))
        t = rng.uniform(-0.2, 0.2)
        try:
            val = rank_one_second_difference(W, F, d, t)
        except DomainError:
            continue
        worst = min(worst, val)
        done += 1
    assert worst >= -1e-8


def test_second_difference_names_offending_endpoint():
    F = Mat2.diag(1.0, 0.01)
    with pytest.raises(DomainError, match="det"):
        rank_one_second_difference(w0(), F, RankOneDir(math.pi / 2, math.pi / 2), t=-0.0105, step=1e-3)


def test_adm_rank_one_second_difference_witness():
    res = rank_one_scan(adm(1.2))
    assert res.violation and res.witness.value < -1e-6
    w = res.witness
    val = rank_one_second_difference(adm(1.2), w.base, w.direction, step=1e-3 * w.base.opnorm())
    assert val < -1e-6


def test_rank_one_scan_examples():
    assert not rank_one_scan(adm(1.0)).violation
    assert not rank_one_scan(adm(1.1)).violation
    assert rank_one_scan(adm(1.2)).violation
    res = rank_one_scan(aubert())
    assert not res.violation
    assert "no violation found at resolution" in res.verdict
    assert res.evaluations >= 10_000


def test_convexity_scan_brackets_threshold():
    assert convexity_scan(adm(0.95)).violation
    assert not convexity_scan(adm(0.94)).violation
    assert not convexity_scan(frobenius_squared()).violation


def test_scan_witness_is_deterministic():
    a = rank_one_scan(adm(1.3))
    b = rank_one_scan(adm(1.3), base_grid=None, direction_grid=None)
    assert a.witness.to_dict() == b.witness.to_dict()


def test_scan_rejects_empty_grids():
    with pytest.raises(DomainError):
        rank_one_scan(w0(), base_grid=[])
