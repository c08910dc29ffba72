import math
import random
from decimal import Decimal, getcontext

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from convexlab import (
    DomainError,
    OrderedSVEnergy,
    SeamError,
    SeparationError,
    adm,
    aubert,
    c_interval,
    determinant_energy,
    feasible_interval,
    frobenius_squared,
    minorant_residual,
    polyconvexity_falsify,
    required_c_bound,
    silhavy_energy,
    w0,
)
from convexlab.polyconvexity import log_pair_grid

getcontext().prec = 50
DE = Decimal(1).exp()
E = math.e
GAMMA = (E**4, E**3)
NU = (E, 1.0)

# closed forms evaluated in 50-digit arithmetic
C_LO = float(-(1 + DE**8) / DE**14)
C_HI = float(-(1 + DE - 3 * DE**8 + DE**9) / (DE**14 * (1 + DE)))
BOUND = float((2 - 3 * DE**3 - 2 * DE**7 + DE**9 - 4 * DE**10) / (DE**11 * (DE**3 - 1) ** 2))


def linear():
    return OrderedSVEnergy("linear", lambda a, b: a + b, lambda a, b: (1.0 + 0.0 * a, 1.0 + 0.0 * b))


def test_w0_c_interval():
    iv = c_interval(w0(), *GAMMA)
    assert iv.c_lo == pytest.approx(-0.00247958, abs=1e-8)
    assert iv.c_lo == pytest.approx(C_LO, rel=1e-12)
    assert iv.c_hi == pytest.approx(C_HI, rel=1e-12)
    assert not iv.empty


def test_w0_required_bound():
    theta, orient = required_c_bound(w0(), GAMMA, NU)
    assert orient == "<="
    assert theta == pytest.approx(-0.00377147, abs=1e-8)
    assert theta == pytest.approx(BOUND, rel=1e-12)
    assert theta < C_LO


def test_w0_minorant_fails_at_c_lo():
    assert minorant_residual(w0(), GAMMA, NU, C_LO) < 0
    assert minorant_residual(w0(), GAMMA, NU, BOUND) == pytest.approx(0.0, abs=1e-12)


def test_w0_targeted_falsification():
    res = polyconvexity_falsify(w0(), [GAMMA], [NU])
    assert res.falsified
    w = res.witness
    assert w.gamma == GAMMA and w.nu == NU
    assert w.margin >= 0.00129
    assert w.margin == pytest.approx(C_LO - BOUND, abs=1e-6)
    assert w.residual < 0


def test_w0_default_grids_falsify():
    res = polyconvexity_falsify(w0())
    assert res.falsified and res.witness is not None
    assert res.verdict == "falsified"


def test_det_is_polyaffine():
    D = determinant_energy()
    iv = c_interval(D, 3.0, 2.0)
    assert (iv.c_lo, iv.c_hi) == pytest.approx((1.0, 1.0))
    for nu in [(5.0, 0.1), (0.3, 0.2), (2.0, 2.0)]:
        assert minorant_residual(D, (3.0, 2.0), nu, 1.0) == pytest.approx(0.0, abs=1e-12)
    assert not polyconvexity_falsify(D).falsified


def test_frobenius_tangent_bound_with_c_zero():
    F = frobenius_squared()
    rng = np.random.default_rng(0)
    for _ in range(200):
        g = np.sort(rng.uniform(0.1, 5.0, 2))[::-1]
        n = np.sort(rng.uniform(0.1, 5.0, 2))[::-1]
        if g[0] - g[1] < 1e-3:
            continue
        assert minorant_residual(F, tuple(g), tuple(n), 0.0) >= 0.0
        iv = c_interval(F, *g)
        assert iv.c_lo <= 0.0 <= iv.c_hi
    res = polyconvexity_falsify(F)
    assert not res.falsified
    assert "no violation found at resolution" in res.verdict


def test_linear_interval_and_bound():
    L = linear()
    for g in [(3.0, 1.0), (2.0, 0.5), (10.0, 9.0)]:
        iv = c_interval(L, *g)
        assert (iv.c_lo, iv.c_hi) == pytest.approx((0.0, 2.0 / sum(g)), abs=1e-15)
        theta, orient = required_c_bound(L, g, (g[0] + 1.0, g[1] + 0.5))
        assert orient == "<=" and theta == pytest.approx(0.0, abs=1e-14)
        # c = 0 (the lower interval endpoint) satisfies the bound
        assert minorant_residual(L, g, (g[0] + 1.0, g[1] + 0.5), iv.c_lo) >= -1e-14


def test_degenerate_cross_term():
    with pytest.raises(DomainError):
        required_c_bound(w0(), GAMMA, (GAMMA[0] + 0.5, GAMMA[1]))


def test_separation_and_seam_errors():
    with pytest.raises(SeparationError):
        c_interval(w0(), 2.0, 2.0)
    with pytest.raises(SeamError):
        c_interval(silhavy_energy(), 1.0, 0.5)
    with pytest.raises(DomainError):
        c_interval(w0(), 1.0, 2.0)


@given(st.floats(0.2, 20.0), st.floats(0.05, 0.99), st.floats(-5.0, 5.0))
def test_tangency(l1, ratio, c):
    g = (l1, l1 * ratio)
    assert minorant_residual(w0(), g, g, c) == pytest.approx(0.0, abs=1e-12 * max(1.0, float(w0()(*g))))


def test_known_verdicts():
    assert polyconvexity_falsify(aubert()).falsified
    assert polyconvexity_falsify(adm(1.1)).falsified
    assert not polyconvexity_falsify(adm(0.9)).falsified
    res = polyconvexity_falsify(silhavy_energy())
    assert res.falsified and res.skipped > 0


def test_witness_independent_of_grid_order():
    gammas = log_pair_grid(-1, 5, 12, strict=True)
    nus = log_pair_grid(-1, 3, 12)
    a = polyconvexity_falsify(w0(), gammas, nus)
    rnd = random.Random(3)
    rnd.shuffle(gammas)
    rnd.shuffle(nus)
    b = polyconvexity_falsify(w0(), gammas, nus)
    assert a.falsified and a.witness.to_dict() == b.witness.to_dict()


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 399), min_size=1, max_size=40, unique=True), st.data())
def test_refining_nu_never_enlarges_feasible_interval(idx, data):
    nus = log_pair_grid(-2, 3, 28)
    sub = [nus[i % len(nus)] for i in idx]
    extra = data.draw(st.lists(st.sampled_from(nus), max_size=30))
    g = data.draw(st.sampled_from([(E**2, E), (5.0, 0.5), GAMMA]))
    lo1, hi1 = feasible_interval(w0(), g, sub)
    lo2, hi2 = feasible_interval(w0(), g, sub + extra)
    assert lo2 >= lo1 and hi2 <= hi1


def test_log_pair_grid_contains_integer_exponents():
    pts = log_pair_grid(-2, 5, 40, strict=True)
    assert (math.exp(4.0), math.exp(3.0)) in pts
    assert all(a > b for a, b in pts)
    with pytest.raises(DomainError):
        log_pair_grid(1, 1, 3)
