import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from convexlab import (
    DomainError,
    DomainGrid,
    Mat2,
    PreconditionError,
    ScalarFunction,
    VolIsoSplitEnergy,
    adm,
    aubert,
    aubert_connect_path,
    compactness_check,
    connect_path,
    eval_entries,
    eval_matrix,
    grid_connectivity,
    growth_check,
    q_convexity_1d,
    rot,
    silhavy_energy,
    singular_values,
    w0,
)


def tampered_w0():
    W = w0()
    f = ScalarFunction(np.log, lambda t: 1.0 / t, lambda t: -1.0 / (t * t), name="log t")
    return VolIsoSplitEnergy("w0-tampered", W.hhat, f)


def random_in_level(E, c, rng, n):
    out = []
    while len(out) < n:
        u, v = rng.uniform(-2.0, 2.0, 2)
        F = rot(rng.uniform(-math.pi, math.pi)) @ Mat2.diag(math.exp(u), math.exp(v)) @ rot(rng.uniform(-math.pi, math.pi))
        if eval_matrix(E, F) <= c:
            out.append(F)
    return out


# growth


def test_growth_examples():
    W = w0()
    g = growth_check(W.hhat, "inf")
    assert g.passed and "numeric evidence at scale" in g.message
    assert growth_check(W.f, "0").passed
    assert growth_check(W.f, "inf").passed
    bad = growth_check(lambda t: t, "0")
    assert not bad.passed and bad.counter_sample is not None


def test_growth_rejects_bounded_tails():
    assert not growth_check(lambda t: 1.0 - 1.0 / t, "inf").passed
    assert not growth_check(np.sin, "inf").passed


def test_growth_threshold_schedule():
    assert growth_check(lambda t: t, "inf", thresholds=[10, 100, 1000]).passed
    assert not growth_check(np.log, "inf", thresholds=[10, 100, 1000]).passed
    with pytest.raises(DomainError):
        growth_check(lambda t: t, "inf", thresholds=[100, 10])


# compactness


@pytest.mark.parametrize("c", [3.0, 5.0, 10.0])
def test_w0_compactness_passes(c):
    rep = compactness_check(w0(), c)
    assert rep.verdict == "pass" and rep.passed
    assert rep.margin > 0 and math.isfinite(rep.radius)
    assert rep.lower_bound == pytest.approx(1.0, abs=1e-9)
    assert all(g.agrees for g in rep.growth)


@pytest.mark.parametrize("c", [3.0, 5.0])
def test_w0_compactness_bounds_against_grid_sweep(c):
    rep = compactness_check(w0(), c)
    # brute force over the ordered cone in log coordinates
    u = np.linspace(-12.0, 12.0, 2401)
    U, V = np.meshgrid(u, u, indexing="ij")
    L1, L2 = np.exp(np.maximum(U, V)), np.exp(np.minimum(U, V))
    W = np.asarray(w0()(L1, L2))
    inside = W <= c
    assert inside.any()
    assert L1[inside].max() <= rep.radius
    assert L2[inside].min() >= rep.margin


def test_noncompact_energies_fail():
    rep = compactness_check(adm(1.1), 1.0)
    assert rep.verdict == "fail" and rep.margin == 0.0
    assert any("(1/n) id" in s["family"] for s in rep.counter_samples)

    rep = compactness_check(aubert(), 0.0)
    assert rep.verdict == "fail"
    assert any("diagonal ray" in s["family"] for s in rep.counter_samples)

    rep = compactness_check(silhavy_energy(), 1.0)
    assert rep.verdict == "fail"
    assert any(s["kind"] == "boundary" for s in rep.counter_samples)


def test_tampered_w0_fails_growth():
    rep = compactness_check(tampered_w0(), 3.0)
    assert rep.verdict == "fail"
    assert any(s["family"] == "f as t -> 0" for s in rep.counter_samples)


# paths


def test_identity_path_has_constant_energy():
    I = Mat2.identity()
    path = connect_path(w0(), I, I, 2.0)
    chk = path.check(w0())
    assert chk.valid
    for w in path.energies(w0()):
        assert np.allclose(w, 2.0, atol=1e-14)


def test_diagonal_path_example():
    F, Ft = Mat2.diag(4.0, 1.0), Mat2.diag(2.0, 1.0)
    c = max(eval_matrix(w0(), F), eval_matrix(w0(), Ft))
    path = connect_path(w0(), F, Ft, c)
    assert path.check(w0()).valid
    assert [s.name for s in path.segments] == ["X1 rotation", "X2 det-constant", "X3 K-constant", "X4 rotation"]
    x2 = path.segments[1].entries(np.linspace(0, 1, 200))
    det = x2[0] * x2[3] - x2[1] * x2[2]
    assert np.max(np.abs(det - 4.0)) <= 1e-12


def test_rotated_endpoints_example():
    F = rot(0.7) @ Mat2.diag(3.0, 1.0) @ rot(-2.1)
    Ft = Mat2.diag(1.0, 0.5)
    c = max(eval_matrix(w0(), F), eval_matrix(w0(), Ft))
    path = connect_path(w0(), F, Ft, c)
    ws = np.concatenate(path.energies(w0(), 200))
    assert ws.size == 800
    assert np.all(ws <= c + 1e-9)


def test_swap_when_target_more_distorted():
    F, Ft = Mat2.diag(2.0, 1.0), Mat2.diag(4.0, 1.0)
    c = eval_matrix(w0(), Ft)
    path = connect_path(w0(), F, Ft, c)
    assert path.meta["swapped"]
    chk = path.check(w0())
    assert chk.valid and chk.start_error <= 1e-12 and chk.end_error <= 1e-12


def test_path_invariants_on_random_pairs():
    rng = np.random.default_rng(11)
    W = w0()
    for c in (3.0, 5.0):
        pts = random_in_level(W, c, rng, 40)
        for F, Ft in zip(pts[::2], pts[1::2]):
            path = connect_path(W, F, Ft, c)
            chk = path.check(W)
            assert chk.valid, chk
            u = np.linspace(0, 1, 200)
            names = [s.name for s in path.segments]
            x2 = path.segments[names.index("X2 det-constant")].entries(u)
            det = x2[0] * x2[3] - x2[1] * x2[2]
            assert np.ptp(det) <= 1e-12 * max(1.0, abs(det[0]))
            x3 = path.segments[names.index("X3 K-constant")].entries(u)
            l1, l2 = singular_values(*x3)
            K = l1 / l2
            assert np.ptp(K) <= 1e-12 * K[0]


def test_path_preconditions():
    with pytest.raises(PreconditionError):
        connect_path(w0(), Mat2.diag(10.0, 1.0), Mat2.identity(), 3.0)
    with pytest.raises(PreconditionError):
        connect_path(w0(), Mat2.identity(), Mat2.diag(1.0, -1.0), 3.0)
    dec = ScalarFunction(lambda t: 1.0 / t, lambda t: -1.0 / t**2, lambda t: 2.0 / t**3, domain=(1.0, math.inf))
    with pytest.raises(PreconditionError):
        connect_path(VolIsoSplitEnergy("dec", dec, w0().f), Mat2.identity(), Mat2.identity(), 10.0)
    wavy = ScalarFunction(lambda t: np.sin(3 * t) + 2.0, lambda t: 3 * np.cos(3 * t), lambda t: -9 * np.sin(3 * t))
    with pytest.raises(PreconditionError):
        connect_path(VolIsoSplitEnergy("wavy", w0().hhat, wavy), Mat2.identity(), Mat2.identity(), 10.0)
    with pytest.raises(DomainError):
        connect_path(aubert(), Mat2.identity(), Mat2.identity(), 1.0)


def test_reversed_path_swaps_ends():
    F, Ft = Mat2.diag(4.0, 1.0), rot(0.3) @ Mat2.diag(2.0, 1.0)
    c = max(eval_matrix(w0(), F), eval_matrix(w0(), Ft))
    p = connect_path(w0(), F, Ft, c)
    r = p.reversed_path()
    assert r.start == p.end and r.end == p.start
    assert r.check(w0()).valid


# Aubert paths


def aubert_segment(path, prefix):
    return next(s for s in path.segments if s.name.startswith(prefix))


def test_aubert_example_path():
    F, Ft = Mat2.diag(1.0, 0.5), Mat2.diag(2.0, 1.0)
    c = max(eval_matrix(aubert(), F), eval_matrix(aubert(), Ft))
    path = aubert_connect_path(F, Ft, c)
    assert path.check(aubert()).valid
    x1 = aubert_segment(path, "X1")
    s = x1.param(np.linspace(0, 1, 200))[1:-1]
    assert np.all(x1.derivative(s) < 0)


def test_aubert_endpoints_outside_level_rejected():
    with pytest.raises(PreconditionError):
        aubert_connect_path(Mat2.diag(1.0, 0.5), Mat2.diag(2.0, 1.0), 0.0)


def test_aubert_degenerate_path():
    t = 1.7
    F = Mat2.diag(t, t)
    path = aubert_connect_path(F, F, -t**4 / 6)
    for w in path.energies(aubert()):
        assert np.allclose(w, -t**4 / 6, rtol=1e-12)


def test_aubert_x3_derivative_sign_by_finite_differences():
    F, Ft = Mat2.diag(1.0, 0.5), Mat2.diag(3.0, 1.0)
    c = max(eval_matrix(aubert(), F), eval_matrix(aubert(), Ft))
    x3 = aubert_segment(aubert_connect_path(F, Ft, c), "X3")
    s = np.linspace(x3.s_range[0], x3.s_range[1], 200)
    h = 1e-6
    fd = (eval_entries(aubert(), *x3.curve(s + h)) - eval_entries(aubert(), *x3.curve(s - h))) / (2 * h)
    assert np.all(fd >= -1e-6)
    assert np.allclose(fd, x3.derivative(s), rtol=1e-6, atol=1e-6)


def test_aubert_random_pairs_derivative_signs():
    rng = np.random.default_rng(5)
    for _ in range(50):
        a = np.sort(rng.uniform(0.2, 3.0, 2))[::-1]
        b = np.sort(rng.uniform(0.2, 3.0, 2))[::-1]
        F = rot(rng.uniform(-3, 3)) @ Mat2.diag(*a) @ rot(rng.uniform(-3, 3))
        Ft = rot(rng.uniform(-3, 3)) @ Mat2.diag(*b) @ rot(rng.uniform(-3, 3))
        c = max(eval_matrix(aubert(), F), eval_matrix(aubert(), Ft))
        path = aubert_connect_path(F, Ft, c)
        assert path.check(aubert()).valid
        u = np.linspace(0, 1, 101)[1:-1]
        for prefix, sign in (("X1", -1), ("X2", -1), ("X3", 1)):
            seg = aubert_segment(path, prefix)
            lo, hi = sorted(seg.s_range)
            if hi - lo < 1e-12:
                continue
            d = seg.derivative(lo + u * (hi - lo))
            assert np.all(d < 0) if sign < 0 else np.all(d >= 0)


# q-convexity


def test_q_convexity_examples():
    t = np.logspace(-4, 4, 2001)
    assert q_convexity_1d(lambda x: np.log(x) ** 2, t).passed
    assert q_convexity_1d(w0().f, t).passed
    res = q_convexity_1d(np.sin, np.linspace(1e-3, 4 * math.pi, 1000))
    assert not res.passed
    a, m, b = res.witness
    assert a < m < b and math.sin(m) > max(math.sin(a), math.sin(b))


@settings(max_examples=100)
@given(st.lists(st.floats(-10, 10), min_size=3, max_size=40))
def test_q_convexity_matches_brute_force(vals):
    t = np.arange(len(vals), dtype=float)
    v = np.array(vals)
    res = q_convexity_1d(lambda x: v[x.astype(int)], t, tol=0.0)
    brute = any(v[j] > max(v[i], v[k]) for i in range(len(v)) for j in range(i + 1, len(v))
                for k in range(j + 1, len(v)))
    assert res.passed == (not brute)


# connectivity


@pytest.mark.parametrize("c", [2.1, 3.0, 5.0])
def test_w0_single_component(c):
    g = DomainGrid()
    assert grid_connectivity(w0(), c, g).count == 1
    assert grid_connectivity(w0(), c, g.refined()).count == 1


def test_w0_below_minimum_is_empty():
    r = grid_connectivity(w0(), 1.9)
    assert r.count == 0 and r.component_sizes() == []


def test_aubert_level_zero_connected():
    assert grid_connectivity(aubert(), 0.0).count == 1
    assert grid_connectivity(aubert(), 0.0, DomainGrid().refined()).count == 1


def test_disconnected_level_set_detected():
    # wells at ln det = +-2 separated by a ridge at det = 1
    from convexlab import OrderedSVEnergy
    E = OrderedSVEnergy("wells", lambda a, b: (np.log(a * b) ** 2 - 4.0) ** 2 + np.log(a / b))
    res = grid_connectivity(E, 0.5)
    assert res.count == 2
    assert grid_connectivity(E, 0.5, DomainGrid().refined()).count == 2
    assert grid_connectivity(E, 20.0).count == 1
