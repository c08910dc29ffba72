"""Rank-one convexity checks.

Two independent routes:

* :func:`split_rank_one_criterion` -- closed-form conditions i)-iv) for
  energies ``h(l1/l2) + f(l1 l2)`` with ``h(1/t) = h(t)``, evaluated on a
  t-grid with margins;
* :func:`rank_one_scan` -- brute-force second differences of
  ``s -> W(F + s H)`` along rank-one directions ``H = a (x) b``.

A scan can only falsify.  Its negative verdict is always reported as "no
violation found" together with the resolution used.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .energy import (
    ScalarFunction,
    VolIsoSplitEnergy,
    as_ordered,
    eval_entries,
    h_function,
)
from .errors import DomainError, SmoothnessError
from .planar import Mat2, RankOneDir, rank_one_matrix

__all__ = [
    "InfimumResult",
    "ConditionResult",
    "SplitCriterionReport",
    "LineScanWitness",
    "ScanResult",
    "ConvexityWitness",
    "infimum_t2_g2",
    "split_rank_one_criterion",
    "default_t_grid",
    "rank_one_second_difference",
    "default_base_grid",
    "default_direction_grid",
    "rank_one_scan",
    "convexity_scan",
    "default_convexity_grid",
]

PASS_TOL = 1e-9
CLOSED_FORM_TOL = 1e-6
SINGULAR_WINDOW = 1e-6


# --------------------------------------------------------------------------
# infimum of t^2 g''(t)


@dataclass
class InfimumResult:
    value: float
    argmin: float
    at_boundary: bool
    unbounded: bool
    closed_form: Optional[float] = None
    grid_min: float = math.nan

    @property
    def agrees(self) -> Optional[bool]:
        if self.closed_form is None:
            return None
        if self.unbounded or math.isinf(self.closed_form):
            return self.unbounded and self.closed_form == -math.inf
        return abs(self.value - self.closed_form) <= CLOSED_FORM_TOL

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "argmin": self.argmin,
            "at_boundary": self.at_boundary,
            "unbounded": self.unbounded,
            "closed_form": self.closed_form,
            "agrees": self.agrees,
        }


def _infimum_grid():
    return np.logspace(-8.0, 8.0, 4001)


def infimum_t2_g2(g: ScalarFunction, grid: Optional[Sequence[float]] = None,
                  closed_form: Optional[float] = None) -> InfimumResult:
    """Numeric ``inf_{t>0} t^2 g''(t)`` over a log-spaced grid, refined locally.

    If the minimum sits at the end of the grid and the values keep falling
    without levelling off (the drop over the last decade is at least half
    the drop over the decade before), the infimum is reported as -inf.
    """
    if g.smoothness < 2:
        raise SmoothnessError(f"{g.name or 'function'} claims C^{g.smoothness}, need C^2")
    t = np.asarray(_infimum_grid() if grid is None else grid, dtype=float)
    t = t[(t > g.domain[0]) & (t < g.domain[1]) & ~g.near_seam(t)]
    if t.size == 0:
        raise DomainError("empty grid for infimum")

    def q(x):
        return x * x * g.second_derivative(x)

    with np.errstate(all="ignore"):
        vals = np.asarray(q(t), dtype=float)
    vals = np.where(np.isnan(vals), np.inf, vals)
    i = int(np.argmin(vals))
    grid_min = float(vals[i])
    at_boundary = i in (0, t.size - 1)
    unbounded = False
    value, argmin = grid_min, float(t[i])

    if at_boundary:
        logt = np.log10(t)
        end = logt[i]
        direction = 1.0 if i == 0 else -1.0

        def v_at(decades):
            j = int(np.argmin(np.abs(logt - (end + direction * decades))))
            return vals[j]

        v0, v1, v2 = v_at(2.0), v_at(1.0), vals[i]
        d_last = v1 - v2
        d_prev = v0 - v1
        if d_last > 1e-6 * max(1.0, abs(v2)) and d_last >= 0.5 * d_prev:
            unbounded = True
            value = -math.inf
        elif d_prev > d_last > 0:
            # geometric tail: Aitken extrapolation of the decade samples
            limit = v2 - d_last * d_last / (d_prev - d_last)
            if limit <= v2 and v2 - limit <= 10.0 * d_last:
                value = float(limit)
    else:
        lo, hi = math.log(t[i - 1]), math.log(t[i + 1])
        res = minimize_scalar(lambda s: float(q(math.exp(s))), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12})
        if res.success and res.fun < value:
            value, argmin = float(res.fun), float(math.exp(res.x))
    return InfimumResult(value, argmin, at_boundary, unbounded, closed_form, grid_min)


# --------------------------------------------------------------------------
# closed-form split criterion


@dataclass
class ConditionResult:
    name: str
    passed: bool
    worst_margin: float
    worst_t: Optional[float]
    t: np.ndarray = field(repr=False, default_factory=lambda: np.empty(0))
    first: np.ndarray = field(repr=False, default_factory=lambda: np.empty(0))
    second: Optional[np.ndarray] = field(repr=False, default=None)
    held: Optional[np.ndarray] = field(repr=False, default=None)

    def to_dict(self) -> dict:
        out = {
            "passed": self.passed,
            "worst_margin": self.worst_margin,
            "worst_t": self.worst_t,
            "points": int(self.t.size),
        }
        if self.held is not None:
            out["first_disjunct_held"] = int(np.sum(self.held == 1))
            out["second_disjunct_held"] = int(np.sum(self.held == 2))
            out["neither_held"] = int(np.sum(self.held == 0))
        return out


@dataclass
class SplitCriterionReport:
    h0: InfimumResult
    f0: InfimumResult
    condition_i: ConditionResult
    condition_ii: ConditionResult
    condition_iii: ConditionResult
    condition_iv: ConditionResult
    skipped: list = field(default_factory=list)
    tolerance: float = PASS_TOL

    @property
    def passed(self) -> bool:
        return all(c.passed for c in (self.condition_i, self.condition_ii,
                                      self.condition_iii, self.condition_iv))

    def to_dict(self) -> dict:
        return {
            "h0": self.h0.to_dict(),
            "f0": self.f0.to_dict(),
            "condition_i": self.condition_i.to_dict(),
            "condition_ii": self.condition_ii.to_dict(),
            "condition_iii": self.condition_iii.to_dict(),
            "condition_iv": self.condition_iv.to_dict(),
            "skipped": list(self.skipped),
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def default_t_grid(n: int = 2000, lo: float = 1e-3, hi: float = 1e3) -> np.ndarray:
    return np.logspace(math.log10(lo), math.log10(hi), n)


def _disjunction(name, t, first, second, tol):
    margin = np.fmax(first, second)
    margin = np.where(np.isnan(margin), -np.inf, margin)
    held = np.where(first >= -tol, 1, np.where(second >= -tol, 2, 0))
    k = int(np.argmin(margin))
    return ConditionResult(name, bool(np.all(held > 0)), float(margin[k]), float(t[k]),
                           t, first, second, held)


def split_rank_one_criterion(E: VolIsoSplitEnergy, grid: Optional[Sequence[float]] = None,
                             tol: float = PASS_TOL) -> SplitCriterionReport:
    if E.smoothness < 2:
        raise SmoothnessError(f"{E.name} claims C^{E.smoothness}; the split criterion needs C^2")
    h = h_function(E)
    f = E.f
    t = np.asarray(default_t_grid() if grid is None else grid, dtype=float)
    skipped = []
    bad = h.near_seam(t) | f.near_seam(t)
    if np.any(bad):
        skipped.append(f"{int(bad.sum())} grid point(s) on a declared seam skipped")
        t = t[~bad]

    h0 = infimum_t2_g2(h, closed_form=E.h0)
    f0 = infimum_t2_g2(f, closed_form=E.f0)
    F0 = f0.value

    with np.errstate(all="ignore"):
        s = h0.value + F0
        cond_i = ConditionResult("i", bool(s >= -tol), float(s), None)

        t_ii = np.unique(np.append(t[t >= 1.0], 1.0))
        dh_ii = np.asarray(h.derivative(t_ii), dtype=float)
        k = int(np.argmin(dh_ii))
        cond_ii = ConditionResult("ii", bool(np.all(dh_ii >= -tol)), float(dh_ii[k]), float(t_ii[k]),
                                  t_ii, dh_ii)

        def parts(x):
            d1 = np.asarray(h.derivative(x), dtype=float)
            d2 = np.asarray(h.second_derivative(x), dtype=float)
            a = x * x * (x * x - 1.0) * d1 * d2 - 2.0 * x * d1 * d1
            b = (x * x + 3.0) * d1 + 2.0 * x * (x * x + 1.0) * d2
            c = 4.0 * x * (d1 + x * d2)
            return d1, d2, a, b, c

        t3 = t[np.abs(t - 1.0) > SINGULAR_WINDOW]
        d1, d2, a, b, c = parts(t3)
        first3 = 2.0 * t3 / (t3 - 1.0) * d1 - t3 * t3 * d2 + F0
        second3 = a + (b - c) * F0
        cond_iii = _disjunction("iii", t3, first3, second3, tol)

        t4 = np.unique(np.append(t, 1.0)) if not h.near_seam(1.0) else t
        d1, d2, a, b, c = parts(t4)
        first4 = 2.0 * t4 / (t4 + 1.0) * d1 + t4 * t4 * d2 - F0
        second4 = a + (b + c) * F0
        cond_iv = _disjunction("iv", t4, first4, second4, tol)

    if SINGULAR_WINDOW and np.any(np.abs(t - 1.0) <= SINGULAR_WINDOW):
        skipped.append("condition iii not evaluated within 1e-6 of t = 1")
    return SplitCriterionReport(h0, f0, cond_i, cond_ii, cond_iii, cond_iv, skipped, tol)


# --------------------------------------------------------------------------
# numeric scans


@dataclass
class LineScanWitness:
    base: Mat2
    direction: RankOneDir
    t: float
    value: float

    def to_dict(self) -> dict:
        return {
            "base": list(self.base.as_tuple()),
            "left_angle": self.direction.left_angle,
            "right_angle": self.direction.right_angle,
            "magnitude": self.direction.magnitude,
            "t": self.t,
            "second_difference": self.value,
        }


@dataclass
class ConvexityWitness:
    base: Mat2
    direction: Mat2
    value: float

    def to_dict(self) -> dict:
        return {
            "base": list(self.base.as_tuple()),
            "direction": list(self.direction.as_tuple()),
            "second_difference": self.value,
        }


@dataclass
class ScanResult:
    violation: bool
    witness: Optional[object]
    min_value: float
    evaluations: int
    resolution: str

    @property
    def verdict(self) -> str:
        if self.violation:
            return "violation"
        return f"no violation found at resolution {self.resolution}"

    def to_dict(self) -> dict:
        return {
            "verdict": "fail" if self.violation else "no-violation-found",
            "message": self.verdict,
            "witness": None if self.witness is None else self.witness.to_dict(),
            "min_value": self.min_value,
            "evaluations": self.evaluations,
            "resolution": self.resolution,
        }


def _energy_on_entries(E, unrestricted: bool):
    """Vectorised W(a11, a12, a21, a22) on GL+(2) or, if asked, on R^{2x2}."""
    if unrestricted:
        if not (getattr(E, "unrestricted", False) and E.matrix_value is not None):
            raise DomainError(f"{E.name} has no closed form on all of R^2x2")
        return E.matrix_value
    return lambda a11, a12, a21, a22: eval_entries(E, a11, a12, a21, a22)


def rank_one_second_difference(E, F: Mat2, d: RankOneDir, t: float = 0.0, step: float = 1e-3,
                               unrestricted: bool = False) -> float:
    """Central second difference of s -> W(F + s H) at s = t."""
    E = as_ordered(E)
    H = rank_one_matrix(d)
    pts = [F + (t + k * step) * H for k in (-1, 0, 1)]
    if not unrestricted:
        for k, P in zip((-1, 0, 1), pts):
            if not P.det() > 0:
                raise DomainError(f"segment leaves GL+(2): det(F + {t + k * step!r} H) = {P.det()!r}")
    W = _energy_on_entries(E, unrestricted)
    w = [float(W(*P.as_tuple())) for P in pts]
    return (w[2] - 2.0 * w[1] + w[0]) / (step * step)


def default_base_grid(lo: float = -1.5, hi: float = 1.5, n: int = 13) -> list:
    """Diagonal base points diag(e^u, e^v), u >= v.

    For isotropic energies every F is a rotated diagonal matrix, and the
    rotations are absorbed by the full direction grid.
    """
    u = np.linspace(lo, hi, n)
    return [Mat2.diag(math.exp(x), math.exp(y)) for x in u for y in u if x >= y]


def default_direction_grid(n: int = 24) -> list:
    ang = np.arange(n) * math.pi / n
    return [RankOneDir(float(a), float(b)) for a in ang for b in ang]


def _scaled_tol(w0, norm2, tol):
    return tol * np.maximum(1.0, np.abs(w0) / np.maximum(norm2, 1e-300))


def rank_one_scan(E, base_grid: Optional[Sequence[Mat2]] = None,
                  direction_grid: Optional[Sequence[RankOneDir]] = None,
                  steps: Sequence[float] = (1e-3,), tol: float = 1e-6,
                  unrestricted: bool = False) -> ScanResult:
    """Search for negative second differences along rank-one lines.

    ``steps`` are finite-difference steps relative to |||F|||.  A value
    counts as a violation when it is below ``-tol * max(1, |W(F)| / |||F|||^2)``.
    Iteration order (base, then direction, then step) fixes which witness is
    returned.
    """
    E = as_ordered(E)
    bases = list(default_base_grid() if base_grid is None else base_grid)
    dirs = list(default_direction_grid() if direction_grid is None else direction_grid)
    if not bases or not dirs:
        raise DomainError("rank_one_scan needs nonempty grids")
    W = _energy_on_entries(E, unrestricted)

    B = np.array([b.as_tuple() for b in bases])                       # (nb, 4)
    Hm = np.array([rank_one_matrix(d).as_tuple() for d in dirs])       # (nd, 4)
    norms = np.array([b.opnorm() for b in bases])
    min_val = math.inf
    count = 0
    hits = []
    for si, rel in enumerate(steps):
        delta = rel * np.maximum(norms, 1e-12)                         # (nb,)
        P0 = np.broadcast_to(B[:, None, :], (len(bases), len(dirs), 4))
        off = delta[:, None, None] * Hm[None, :, :]
        with np.errstate(all="ignore"):
            wp = np.asarray(W(*np.moveaxis(P0 + off, -1, 0)), dtype=float)
            wm = np.asarray(W(*np.moveaxis(P0 - off, -1, 0)), dtype=float)
            w0 = np.asarray(W(*np.moveaxis(P0, -1, 0)), dtype=float)
            sd = (wp - 2.0 * w0 + wm) / (delta[:, None] ** 2)
        ok = np.isfinite(sd)
        count += int(ok.sum())
        if ok.any():
            min_val = min(min_val, float(np.min(sd[ok])))
        bad = ok & (sd < -_scaled_tol(w0, norms[:, None] ** 2, tol))
        if bad.any():
            ib, idr = np.argwhere(bad)[0]
            hits.append((ib, idr, si, float(sd[ib, idr]), float(delta[ib])))
    resolution = f"{len(bases)} bases x {len(dirs)} directions x {len(steps)} steps"
    if hits:
        ib, idr, si, val, _ = min(hits, key=lambda h: (h[0], h[1], h[2]))
        w = LineScanWitness(bases[ib], dirs[idr], 0.0, val)
        return ScanResult(True, w, min_val, count, resolution)
    return ScanResult(False, None, min_val, count, resolution)


def default_convexity_grid(n: int = 720) -> list:
    """Unit-norm diagonal matrices diag(cos a, sin a) covering both signs of det."""
    return [Mat2.diag(math.cos(a), math.sin(a)) for a in np.arange(n) * 2.0 * math.pi / n]


def convexity_scan(E, base_grid: Optional[Sequence[Mat2]] = None, step: float = 1e-3,
                   tol: float = 1e-6, unrestricted: bool = True) -> ScanResult:
    """Full convexity check: second differences along arbitrary directions.

    At each base point the 4x4 Hessian is assembled from central
    differences; the eigenvector of its smallest eigenvalue is the worst
    direction, and the second difference along it is the reported value.
    """
    E = as_ordered(E)
    bases = list(default_convexity_grid() if base_grid is None else base_grid)
    W = _energy_on_entries(E, unrestricted)
    B = np.array([b.as_tuple() for b in bases])
    norms = np.array([max(b.opnorm(), 1e-12) for b in bases])
    delta = step * norms
    eye = np.eye(4)
    Hs = np.zeros((len(bases), 4, 4))
    with np.errstate(all="ignore"):
        w0 = np.asarray(W(*B.T), dtype=float)
        for i in range(4):
            for j in range(i, 4):
                ei = delta[:, None] * eye[i]
                ej = delta[:, None] * eye[j]
                val = (W(*(B + ei + ej).T) - W(*(B + ei - ej).T)
                       - W(*(B - ei + ej).T) + W(*(B - ei - ej).T)) / (4.0 * delta**2)
                Hs[:, i, j] = Hs[:, j, i] = val
    finite = np.all(np.isfinite(Hs), axis=(1, 2))
    evals = np.full(len(bases), np.inf)
    evecs = np.zeros((len(bases), 4))
    if finite.any():
        ev, vec = np.linalg.eigh(Hs[finite])
        evals[finite] = ev[:, 0]
        evecs[finite] = vec[:, :, 0]
    # confirm along the eigen-direction with a plain second difference
    off = delta[:, None] * evecs
    with np.errstate(all="ignore"):
        sd = (W(*(B + off).T) - 2.0 * w0 + W(*(B - off).T)) / delta**2
    sd = np.where(finite, sd, np.nan)
    ok = np.isfinite(sd)
    bad = ok & (sd < -_scaled_tol(w0, norms**2, tol))
    resolution = f"{len(bases)} bases x all directions (Hessian eigen-direction)"
    min_val = float(np.min(sd[ok])) if ok.any() else math.nan
    if bad.any():
        k = int(np.argmax(bad))
        w = ConvexityWitness(bases[k], Mat2(*evecs[k]), float(sd[k]))
        return ScanResult(True, w, min_val, int(ok.sum()), resolution)
    return ScanResult(False, None, min_val, int(ok.sum()), resolution)
