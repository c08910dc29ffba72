"""Polyconvexity falsification in ordered singular values.

For C^1 energies ``g`` on ``l1 >= l2 > 0``, W is polyconvex iff for every
``gamma`` some ``c`` in

    [ -(g_1 - g_2)/(gamma1 - gamma2),  (g_1 + g_2)/(gamma1 + gamma2) ]

(partials at gamma) makes the polyaffine minorant

    g(nu) >= g(gamma) + g_1 (nu1 - gamma1) + g_2 (nu2 - gamma2)
             + c (nu1 - gamma1)(nu2 - gamma2)

hold for every ``nu``.  Each ``nu`` turns the minorant into a half-line
condition on ``c`` (direction given by the sign of the cross term), so on a
finite grid the existence of ``c`` is an interval-intersection question
and the falsification is exact for that grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .energy import as_ordered, ordered_partials
from .errors import DomainError, SeparationError

__all__ = [
    "CInterval",
    "PolyWitness",
    "FalsifyResult",
    "SEPARATION",
    "c_interval",
    "minorant_residual",
    "required_c_bound",
    "polyconvexity_falsify",
    "default_gamma_grid",
    "default_nu_grid",
    "log_pair_grid",
    "feasible_interval",
]

SEPARATION = 1e-6
# relative slack before an empty intersection counts as a violation
EMPTY_RTOL = 1e-9


@dataclass(frozen=True)
class CInterval:
    gamma: tuple
    c_lo: float
    c_hi: float

    @property
    def empty(self) -> bool:
        return self.c_lo > self.c_hi

    def to_dict(self) -> dict:
        return {"gamma": list(self.gamma), "c_lo": self.c_lo, "c_hi": self.c_hi}


def _check_point(p, what):
    p1, p2 = float(p[0]), float(p[1])
    if not (p1 >= p2 > 0):
        raise DomainError(f"{what} = ({p1!r}, {p2!r}) is not an ordered pair l1 >= l2 > 0")
    return p1, p2


def c_interval(E, gamma1: float, gamma2: float, separation: float = SEPARATION) -> CInterval:
    E = as_ordered(E)
    g1, g2 = _check_point((gamma1, gamma2), "gamma")
    if g1 - g2 < separation:
        raise SeparationError(f"gamma1 - gamma2 = {g1 - g2!r} below the separation margin {separation!r}")
    p1, p2 = ordered_partials(E, g1, g2)
    return CInterval((g1, g2), -(p1 - p2) / (g1 - g2), (p1 + p2) / (g1 + g2))


def minorant_residual(E, gamma, nu, c: float) -> float:
    """g(nu) minus the polyaffine minorant at gamma; >= 0 means it holds at nu."""
    E = as_ordered(E)
    g1, g2 = _check_point(gamma, "gamma")
    n1, n2 = _check_point(nu, "nu")
    p1, p2 = ordered_partials(E, g1, g2)
    rhs = float(E.value(g1, g2)) + p1 * (n1 - g1) + p2 * (n2 - g2) + c * (n1 - g1) * (n2 - g2)
    return float(E.value(n1, n2)) - rhs


def required_c_bound(E, gamma, nu) -> tuple:
    """Solve the minorant at (gamma, nu) for c.

    Returns ``(theta, orientation)``: the minorant holds iff ``c <= theta``
    (orientation ``"<="``, positive cross term) or ``c >= theta``
    (orientation ``">="``, negative cross term).
    """
    g1, g2 = _check_point(gamma, "gamma")
    n1, n2 = _check_point(nu, "nu")
    cross = (n1 - g1) * (n2 - g2)
    if cross == 0.0:
        raise DomainError("cross term (nu1 - gamma1)(nu2 - gamma2) vanishes; no bound on c")
    slack = minorant_residual(E, gamma, nu, 0.0)
    return slack / cross, ("<=" if cross > 0 else ">=")


@dataclass
class PolyWitness:
    gamma: tuple
    nu: tuple
    required_bound: float
    orientation: str
    interval: CInterval
    residual: float
    margin: float
    nu_other: Optional[tuple] = None
    other_bound: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "gamma": list(self.gamma),
            "nu": list(self.nu),
            "required_bound": self.required_bound,
            "orientation": self.orientation,
            "interval": self.interval.to_dict(),
            "residual": self.residual,
            "margin": self.margin,
            "nu_other": None if self.nu_other is None else list(self.nu_other),
            "other_bound": self.other_bound,
        }


@dataclass
class FalsifyResult:
    falsified: bool
    witness: Optional[PolyWitness]
    gamma_points: int
    nu_points: int
    skipped: int
    worst_margin: float

    @property
    def resolution(self) -> str:
        return f"{self.gamma_points} gamma x {self.nu_points} nu points"

    @property
    def verdict(self) -> str:
        if self.falsified:
            return "falsified"
        return f"no violation found at resolution {self.resolution}"

    def to_dict(self) -> dict:
        return {
            "verdict": "fail" if self.falsified else "no-violation-found",
            "message": self.verdict,
            "witness": None if self.witness is None else self.witness.to_dict(),
            "gamma_points": self.gamma_points,
            "nu_points": self.nu_points,
            "skipped": self.skipped,
            "worst_margin": self.worst_margin,
        }


def _ordered_pairs(axis: np.ndarray, strict: bool) -> list:
    vals = np.exp(axis)
    return [(float(a), float(b)) for a in vals for b in vals if (a > b if strict else a >= b)]


def log_pair_grid(lo: float, hi: float, n: int, strict: bool = False) -> list:
    """Ordered pairs (l1 >= l2, or l1 > l2 if ``strict``) over [e^lo, e^hi]^2.

    The axis has ``n`` equally spaced log nodes plus every integer exponent
    in range.
    """
    if not lo < hi:
        raise DomainError(f"log grid needs lo < hi, got {lo!r}, {hi!r}")
    ints = np.arange(math.ceil(lo), math.floor(hi) + 1, dtype=float)
    axis = np.unique(np.concatenate([np.linspace(lo, hi, n), ints]))
    return _ordered_pairs(axis, strict)


def default_gamma_grid(n: int = 40) -> list:
    """Ordered pairs over [e^-2, e^5]^2 (nodes e^k included)."""
    return log_pair_grid(-2, 5, n, strict=True)


def default_nu_grid(n: int = 60) -> list:
    """Ordered pairs over [e^-2, e^3]^2 (nodes e^k included)."""
    return log_pair_grid(-2, 3, n)


@dataclass
class _GammaBounds:
    interval: CInterval
    lo: float
    hi: float
    i_lo: Optional[int]
    i_hi: Optional[int]
    slack: np.ndarray
    cross: np.ndarray
    theta: np.ndarray
    flat: np.ndarray
    value: float


def _nu_arrays(E, nus):
    N = np.asarray(nus, dtype=float).reshape(-1, 2)
    n1, n2 = N[:, 0], N[:, 1]
    with np.errstate(all="ignore"):
        gN = np.asarray(E.value(n1, n2), dtype=float) * np.ones_like(n1)
    ok = (n1 >= n2) & (n2 > 0) & np.isfinite(gN)
    return n1, n2, gN, ok


def _gamma_bounds(E, g1, g2, n1, n2, gN, nu_ok, separation) -> _GammaBounds:
    """Intersect the c-interval at gamma with the half-line of every nu."""
    iv = c_interval(E, g1, g2, separation)
    p1, p2 = ordered_partials(E, g1, g2)
    gv = float(E.value(g1, g2))
    cross = (n1 - g1) * (n2 - g2)
    slack = gN - (gv + p1 * (n1 - g1) + p2 * (n2 - g2))
    with np.errstate(divide="ignore", invalid="ignore"):
        theta = slack / cross
    upper = nu_ok & (cross > 0)
    lower = nu_ok & (cross < 0)
    lo, hi = iv.c_lo, iv.c_hi
    i_hi = i_lo = None
    if upper.any():
        k = int(np.flatnonzero(upper)[np.argmin(theta[upper])])
        if theta[k] < hi:
            hi, i_hi = float(theta[k]), k
    if lower.any():
        k = int(np.flatnonzero(lower)[np.argmax(theta[lower])])
        if theta[k] > lo:
            lo, i_lo = float(theta[k]), k
    return _GammaBounds(iv, lo, hi, i_lo, i_hi, slack, cross, theta, nu_ok & (cross == 0), gv)


def feasible_interval(E, gamma, nu_grid: Sequence, separation: float = SEPARATION) -> tuple:
    """``(lo, hi)``: the c-interval at gamma cut down by every nu in the grid.

    Empty when ``lo > hi``.  Flat nu (zero cross term) do not constrain c
    and are ignored here.
    """
    E = as_ordered(E)
    g1, g2 = _check_point(gamma, "gamma")
    b = _gamma_bounds(E, g1, g2, *_nu_arrays(E, list(nu_grid)), separation)
    return b.lo, b.hi


def polyconvexity_falsify(E, gamma_grid: Optional[Sequence] = None, nu_grid: Optional[Sequence] = None,
                          separation: float = SEPARATION) -> FalsifyResult:
    """Look for a gamma at which no admissible c survives all nu constraints.

    Grids are sorted first, so the returned witness (lexicographically
    first gamma, then the binding nu) does not depend on input order.
    """
    E = as_ordered(E)
    gammas = sorted({tuple(map(float, g)) for g in (default_gamma_grid() if gamma_grid is None else gamma_grid)})
    nus = sorted({tuple(map(float, v)) for v in (default_nu_grid() if nu_grid is None else nu_grid)})
    arrays = _nu_arrays(E, nus)
    skipped = 0
    worst = math.inf
    witness = None
    for g1, g2 in gammas:
        if not (g1 - g2 >= separation and g2 > 0) or bool(E.on_seam(g1, g2)):
            skipped += 1
            continue
        b = _gamma_bounds(E, g1, g2, *arrays, separation)
        iv, lo, hi = b.interval, b.lo, b.hi
        scale = max(1.0, abs(lo), abs(hi))
        margin = lo - hi
        flat_fail = b.flat & (b.slack < -EMPTY_RTOL * max(1.0, abs(b.value)))
        worst = min(worst, -margin)
        if witness is not None or not (margin > EMPTY_RTOL * scale or flat_fail.any()):
            continue
        if flat_fail.any():
            k = int(np.flatnonzero(flat_fail)[0])
            witness = PolyWitness((g1, g2), nus[k], math.nan, "==", iv, float(b.slack[k]), float(margin))
        elif b.i_hi is None and b.i_lo is None:
            # the c-interval is empty on its own
            witness = PolyWitness((g1, g2), (g1, g2), math.nan, "empty-interval", iv,
                                  float(iv.c_hi - iv.c_lo), float(margin))
        else:
            # report the binding nu whose bound is furthest outside the interval;
            # the residual is the best case over the surviving c range
            if b.i_hi is not None and (b.i_lo is None or iv.c_lo - hi >= lo - iv.c_hi):
                k, other = b.i_hi, b.i_lo
                res = float(b.slack[k] - lo * b.cross[k])
                orient = "<="
            else:
                k, other = b.i_lo, b.i_hi
                res = float(b.slack[k] - hi * b.cross[k])
                orient = ">="
            witness = PolyWitness(
                gamma=(g1, g2),
                nu=nus[k],
                required_bound=float(b.theta[k]),
                orientation=orient,
                interval=iv,
                residual=res,
                margin=float(margin),
                nu_other=None if other is None else nus[other],
                other_bound=None if other is None else float(b.theta[other]),
            )
    return FalsifyResult(witness is not None, witness, len(gammas), len(nus), skipped,
                         float(worst) if math.isfinite(worst) else math.nan)
