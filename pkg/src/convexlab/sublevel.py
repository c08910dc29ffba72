"""Sublevel sets S_c = {F in GL+(2) : W(F) <= c}.

* compactness from growth of the split parts, made constructive: an
  operator-norm radius ``r`` containing S_c and a margin ``r'`` to the
  singular matrices (distance there is l2 by Eckart-Young);
* explicit connecting paths for split energies (rotate, slide along
  det = const, scale along K = const, rotate back) and for Aubert's energy;
* q-convexity of scalar functions on samples;
* flood-fill component counts on a log grid as an independent check.

Growth verdicts are numeric evidence at a stated scale, never proofs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import ndimage

from .builtin import aubert
from .energy import DomainGrid, OrderedSVEnergy, VolIsoSplitEnergy, as_ordered, eval_entries
from .errors import DomainError, PreconditionError
from .planar import Mat2, svd_ordered

__all__ = [
    "GrowthVerdict",
    "growth_check",
    "CompactnessReport",
    "compactness_check",
    "Segment",
    "PathCheck",
    "SublevelPath",
    "connect_path",
    "aubert_connect_path",
    "QConvexityResult",
    "q_convexity_1d",
    "ConnectivityResult",
    "grid_connectivity",
    "PATH_TOL",
]

PATH_TOL = 1e-9
GROWTH_SCALE = 1e6
# the last tail increment must keep at least this fraction of the first;
# geometric decay (a finite limit) fails, logarithmic growth passes
GROWTH_KEEP = 0.1


# --------------------------------------------------------------------------
# growth and compactness


@dataclass
class GrowthVerdict:
    label: str
    direction: str
    passed: bool
    samples: list
    counter_sample: Optional[tuple] = None
    registered: Optional[bool] = None
    scale: float = GROWTH_SCALE

    @property
    def agrees(self) -> Optional[bool]:
        return None if self.registered is None else self.registered == self.passed

    @property
    def message(self) -> str:
        word = "grows without bound" if self.passed else "does not grow"
        return f"{self.label} {word} as t -> {self.direction} (numeric evidence at scale {self.scale:g})"

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "direction": self.direction,
            "passed": self.passed,
            "message": self.message,
            "samples": [list(s) for s in self.samples],
            "counter_sample": None if self.counter_sample is None else list(self.counter_sample),
            "registered": self.registered,
            "agrees": self.agrees,
        }


def _tail(direction: str, scale: float) -> np.ndarray:
    kmax = int(round(math.log10(scale)))
    k = np.arange(1, kmax + 1, dtype=float)
    if direction == "inf":
        return 10.0 ** k
    if direction == "0":
        return 10.0 ** (-k)
    raise DomainError(f"growth direction must be 'inf' or '0', got {direction!r}")


def growth_check(g: Callable, direction: str = "inf", thresholds: Optional[Sequence[float]] = None,
                 scale: float = GROWTH_SCALE, label: str = "g") -> GrowthVerdict:
    """Numeric evidence for g(t) -> +inf along t = 10^k (or 10^-k), k = 1..log10(scale).

    Without ``thresholds`` the tail values must increase strictly and the
    last increment must keep at least ``GROWTH_KEEP`` of the first, which
    rejects tails converging geometrically to a finite limit but accepts
    logarithmic growth.  With ``thresholds`` (an increasing schedule) the
    values must increase and the last one must exceed every threshold.
    """
    t = _tail(direction, scale)
    with np.errstate(all="ignore"):
        vals = np.asarray([float(g(x)) for x in t])
    samples = [(float(a), float(b)) for a, b in zip(t, vals)]
    d = np.diff(vals)
    bad = np.flatnonzero(~(d > 0) | ~np.isfinite(d))
    if bad.size:
        k = int(bad[0]) + 1
        return GrowthVerdict(label, direction, False, samples, samples[k], scale=scale)
    if thresholds is not None:
        th = [float(x) for x in thresholds]
        if not all(a < b for a, b in zip(th, th[1:])):
            raise DomainError("threshold schedule must be increasing")
        passed = bool(vals[-1] > th[-1])
    else:
        passed = bool(d[-1] >= GROWTH_KEEP * d[0])
    return GrowthVerdict(label, direction, passed, samples, None if passed else samples[-1], scale=scale)


@dataclass
class CompactnessReport:
    energy: str
    level: float
    method: str
    growth: list
    lower_bound: Optional[float]
    radius: float
    margin: float
    counter_samples: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def verdict(self) -> str:
        if self.counter_samples or any(not g.passed for g in self.growth):
            return "fail"
        return "pass" if self.method == "split" else "no-violation-found"

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        return {
            "energy": self.energy,
            "level": self.level,
            "method": self.method,
            "verdict": self.verdict,
            "growth": [g.to_dict() for g in self.growth],
            "lower_bound": self.lower_bound,
            "radius": self.radius,
            "margin": self.margin,
            "counter_samples": list(self.counter_samples),
            "notes": list(self.notes),
        }


def _split_of(E):
    if isinstance(E, VolIsoSplitEnergy):
        return E
    return getattr(E, "meta", {}).get("split")


def _split_compactness(E: VolIsoSplitEnergy, c: float) -> CompactnessReport:
    reg = E.growth or {}
    growth = [
        growth_check(E.hhat, "inf", label="hhat"),
        growth_check(E.f, "inf", label="f"),
        growth_check(E.f, "0", label="f"),
    ]
    for g, key in zip(growth, ("hhat_inf", "f_inf", "f_zero")):
        g.registered = reg.get(key)
    notes = []
    counter = [{"family": f"{g.label} as t -> {g.direction}", "t": g.counter_sample[0],
                "value": g.counter_sample[1]} for g in growth if not g.passed]

    t_up = np.logspace(0.0, 8.0, 8001)
    t_dn = np.logspace(-8.0, 0.0, 8001)
    with np.errstate(all="ignore"):
        h_up = np.asarray(E.hhat(t_up), dtype=float)
        f_up = np.asarray(E.f(t_up), dtype=float)
        f_dn = np.asarray(E.f(t_dn), dtype=float)
    d = float(np.nanmin(np.concatenate([h_up, f_up, f_dn])))
    if counter:
        return CompactnessReport(E.name, c, "split", growth, d, math.inf, 0.0, counter, notes)

    tau = c - d
    # radius: hhat, f > c - d beyond r, so |||F|||^2 = K det > r^2 forces W > c
    bad = (h_up <= tau) | (f_up <= tau)
    r = 1.0 if not bad.any() else float(t_up[int(np.flatnonzero(bad)[-1]) + 1])
    # margin: l2^2 = det / K < r'^2 forces det < r' or K > 1/r', and both give W > c
    bad_f = f_dn <= tau
    r_f = 1.0 if not bad_f.any() else float(t_dn[int(np.flatnonzero(bad_f)[0]) - 1])
    bad_h = h_up <= tau
    r_h = 1.0 if not bad_h.any() else float(t_up[int(np.flatnonzero(bad_h)[-1]) + 1])
    margin = min(1.0, r_f, 1.0 / r_h)
    notes.append(f"lower bound d = {d!r} sampled on [1e-8, 1e8]")
    return CompactnessReport(E.name, c, "split", growth, d, r, margin, [], notes)


_PROBES = (
    ("scaled identity (1/n) id, n -> inf", "boundary", lambda a: (a, a)),
    ("diag(1, t), t -> 0", "boundary", lambda a: (1.0, a)),
    ("diagonal ray diag(t, t), t -> inf", "unbounded", lambda a: (1.0 / a, 1.0 / a)),
    ("diag(t, 1), t -> inf", "unbounded", lambda a: (1.0 / a, 1.0)),
)


def _probe_compactness(E: OrderedSVEnergy, c: float) -> CompactnessReport:
    a = 10.0 ** (-np.arange(1, 13) / 2.0)
    counter = []
    radius, margin = math.inf, math.inf
    for name, kind, fam in _PROBES:
        l1, l2 = fam(a)
        l1, l2 = np.broadcast_arrays(np.asarray(l1, dtype=float), np.asarray(l2, dtype=float))
        hi, lo = np.maximum(l1, l2), np.minimum(l1, l2)
        with np.errstate(all="ignore"):
            w = np.asarray(E.value(hi, lo), dtype=float)
        inside = np.flatnonzero(w <= c)
        if inside.size:
            k = int(inside[-1])
            counter.append({"family": name, "kind": kind, "lambda1": float(hi[k]), "lambda2": float(lo[k]),
                            "value": float(w[k])})
            if kind == "boundary":
                margin = 0.0
    notes = ["energy has no volumetric-isochoric split; probe families only"]
    if E.growth:
        notes.append(f"registered growth flags: {dict(sorted(E.growth.items()))}")
    return CompactnessReport(E.name, c, "probe", [], None, radius, margin, counter, notes)


def compactness_check(E, c: float) -> CompactnessReport:
    """Compactness verdict for S_c.

    Split energies get the constructive bound: growth of hhat and f, a lower
    bound d, the radius r and the boundary margin r'.  Other energies are
    probed along sequences approaching det = 0 or infinity; any probe point
    with W <= c is a counter-sample.
    """
    c = float(c)
    S = _split_of(E)
    if S is not None:
        return _split_compactness(S, c)
    return _probe_compactness(as_ordered(E), c)


# --------------------------------------------------------------------------
# paths


def _rot_entries(x):
    c, s = np.cos(x), np.sin(x)
    return c, s, -s, c


def _mul(A, B):
    return (A[0] * B[0] + A[1] * B[2], A[0] * B[1] + A[1] * B[3],
            A[2] * B[0] + A[3] * B[2], A[2] * B[1] + A[3] * B[3])


def _diag_entries(x, y):
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    z = np.zeros_like(x)
    return x, z, z, y


@dataclass(frozen=True)
class Segment:
    """A curve piece s -> X(s) in GL+(2) over its own parameter range.

    ``reversed`` segments are traversed from the end of the range to the
    start; ``derivative`` (if known) is dW/ds in the segment's own parameter.
    """

    name: str
    params: dict
    s_range: tuple = (0.0, 1.0)
    reversed: bool = False
    curve: Callable = field(default=None, repr=False, compare=False)
    derivative: Optional[Callable] = field(default=None, repr=False, compare=False)

    def param(self, u):
        a, b = self.s_range
        u = np.asarray(u, dtype=float)
        return b - u * (b - a) if self.reversed else a + u * (b - a)

    def entries(self, u):
        return self.curve(self.param(u))

    def at(self, u: float) -> Mat2:
        return Mat2(*(float(x) for x in self.entries(u)))

    @property
    def start(self) -> Mat2:
        return self.at(0.0)

    @property
    def end(self) -> Mat2:
        return self.at(1.0)

    def flipped(self) -> "Segment":
        return replace(self, reversed=not self.reversed)

    def to_dict(self) -> dict:
        return {"name": self.name, "params": dict(self.params), "s_range": list(self.s_range),
                "reversed": self.reversed}


@dataclass
class PathCheck:
    valid: bool
    max_gap: float
    max_energy: float
    level: float
    samples: int
    start_error: float
    end_error: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _gap(A: Mat2, B: Mat2) -> float:
    return float(np.max(np.abs(A.as_array() - B.as_array())))


@dataclass
class SublevelPath:
    segments: list
    level: float
    start: Mat2
    end: Mat2
    meta: dict = field(default_factory=dict)

    def reversed_path(self) -> "SublevelPath":
        segs = [s.flipped() for s in reversed(self.segments)]
        meta = dict(self.meta, reversed=not self.meta.get("reversed", False))
        return SublevelPath(segs, self.level, self.end, self.start, meta)

    def sample(self, n: int = 200):
        """Per segment: (u, entries) with n samples including both ends."""
        u = np.linspace(0.0, 1.0, n)
        return [(u, seg.entries(u)) for seg in self.segments]

    def energies(self, E, n: int = 200) -> list:
        return [eval_entries(E, *ent) for _, ent in self.sample(n)]

    def check(self, E, n: int = 200, tol: float = PATH_TOL) -> PathCheck:
        gaps = [_gap(a.end, b.start) for a, b in zip(self.segments, self.segments[1:])]
        max_gap = max(gaps, default=0.0)
        ws = np.concatenate(self.energies(E, n))
        max_w = float(np.max(np.where(np.isnan(ws), np.inf, ws)))
        s_err = _gap(self.segments[0].start, self.start)
        e_err = _gap(self.segments[-1].end, self.end)
        valid = max(max_gap, s_err, e_err) <= 1e-10 and max_w <= self.level + tol
        return PathCheck(bool(valid), max_gap, max_w, self.level, int(ws.size), s_err, e_err)

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "start": list(self.start.as_tuple()),
            "end": list(self.end.as_tuple()),
            "segments": [s.to_dict() for s in self.segments],
            "meta": dict(self.meta),
        }


def _rotate_to_diag(F: Mat2, name: str) -> Segment:
    """X(s) = Q1^s F Q2^s, ending at diag(l1, l2)."""
    sv = svd_ordered(F)
    F_ent = tuple(np.float64(x) for x in F.as_tuple())
    q1, q2 = sv.q1_angle, sv.q2_angle

    def curve(s):
        return _mul(_mul(_rot_entries(s * q1), F_ent), _rot_entries(s * q2))

    return Segment(name, {"q1": q1, "q2": q2, "lambda1": sv.lambda1, "lambda2": sv.lambda2}, curve=curve)


def _rotate_from_diag(F: Mat2, name: str) -> Segment:
    """X(s) = (Q1^T)^s diag(l1, l2) (Q2^T)^s, ending at F."""
    sv = svd_ordered(F)
    D = _diag_entries(sv.lambda1, sv.lambda2)
    q1, q2 = sv.q1_angle, sv.q2_angle

    def curve(s):
        return _mul(_mul(_rot_entries(-s * q1), D), _rot_entries(-s * q2))

    return Segment(name, {"q1": q1, "q2": q2, "lambda1": sv.lambda1, "lambda2": sv.lambda2}, curve=curve)


def _require_in_level(E, F: Mat2, c: float, what: str) -> float:
    if not F.det() > 0:
        raise PreconditionError(f"{what} is not in GL+(2): det = {F.det()!r}")
    w = float(eval_entries(E, *F.as_tuple()))
    if not w <= c + PATH_TOL:
        raise PreconditionError(f"{what} is not in S_c: W = {w!r} > c = {c!r}")
    return w


def _verify_split_hypotheses(E: VolIsoSplitEnergy) -> None:
    t = np.logspace(0.0, 3.0, 600)
    h = np.asarray(E.hhat(t), dtype=float)
    drop = np.diff(h)
    if np.any(drop < -1e-12 * np.maximum(1.0, np.abs(h[1:]))):
        k = int(np.argmin(drop))
        raise PreconditionError(f"hhat is not nondecreasing on [1, inf): drops after t = {t[k]!r}")
    q = q_convexity_1d(E.f, np.logspace(-3.0, 3.0, 1200))
    if not q.passed:
        raise PreconditionError(f"f is not q-convex on the sampled range: witness {q.witness}")


def connect_path(E: VolIsoSplitEnergy, F: Mat2, Ft: Mat2, c: float,
                 verify_hypotheses: bool = True) -> SublevelPath:
    """Four-segment path from F to Ft inside S_c.

    X1 rotates F to diag(l1, l2); X2 moves along det = const to
    diag(mu1, mu2) with K(mu) = K(Ft); X3 scales conformally to
    diag(lt1, lt2); X4 rotates onto Ft.  When K(Ft) > K(F) the path is built
    from Ft to F and reversed (recorded in ``meta``).
    """
    if not isinstance(E, VolIsoSplitEnergy):
        raise DomainError("connect_path needs a volumetric-isochoric split energy")
    c = float(c)
    if verify_hypotheses:
        _verify_split_hypotheses(E)
    _require_in_level(E, F, c, "F")
    _require_in_level(E, Ft, c, "F~")
    a, b = svd_ordered(F), svd_ordered(Ft)
    if b.lambda1 / b.lambda2 > a.lambda1 / a.lambda2:
        path = connect_path(E, Ft, F, c, verify_hypotheses=False)
        out = path.reversed_path()
        out.meta["swapped"] = True
        return out

    l1, l2, t1, t2 = a.lambda1, a.lambda2, b.lambda1, b.lambda2
    scale = math.sqrt(l1 * l2) / math.sqrt(t1 * t2)
    mu1, mu2 = scale * t1, scale * t2
    lg = (math.log(l1), math.log(l2), math.log(mu1), math.log(mu2))

    def x2(s):
        return _diag_entries(np.exp((1.0 - s) * lg[0] + s * lg[2]), np.exp((1.0 - s) * lg[1] + s * lg[3]))

    def x3(s):
        k = np.power(1.0 / scale, s)
        return _diag_entries(k * mu1, k * mu2)

    segs = [
        _rotate_to_diag(F, "X1 rotation"),
        Segment("X2 det-constant", {"lambda1": l1, "lambda2": l2, "mu1": mu1, "mu2": mu2}, curve=x2),
        Segment("X3 K-constant", {"mu1": mu1, "mu2": mu2, "factor": 1.0 / scale}, curve=x3),
        _rotate_from_diag(Ft, "X4 rotation"),
    ]
    meta = {"construction": "split", "swapped": False, "reversed": False,
            "K_start": l1 / l2, "K_end": t1 / t2}
    return SublevelPath(segs, c, F, Ft, meta)


def aubert_connect_path(F: Mat2, Ft: Mat2, c: float) -> SublevelPath:
    """Path inside S_c for Aubert's energy.

    After rotating to diagonal form, with lt1 >= l1: X1(s) = diag(l1, s) for
    s in [l2, l1] (W decreasing), X2(s) = diag(s, s) for s in [l1, lt1]
    (W = -s^4/6 decreasing) and X3(s) = diag(lt1, lt1 - s) for
    s in [0, lt1 - lt2] (W increasing up to W(Ft)).
    """
    E = aubert()
    c = float(c)
    _require_in_level(E, F, c, "F")
    _require_in_level(E, Ft, c, "F~")
    a, b = svd_ordered(F), svd_ordered(Ft)
    if b.lambda1 < a.lambda1:
        out = aubert_connect_path(Ft, F, c).reversed_path()
        out.meta["swapped"] = True
        return out
    l1, l2, t1, t2 = a.lambda1, a.lambda2, b.lambda1, b.lambda2

    def d1(s):
        return 4.0 / 3.0 * s**3 - 2.0 * l1 * s**2 + l1**2 * s - 2.0 / 3.0 * l1**3

    def d2(s):
        return -2.0 / 3.0 * s**3

    def d3(s):
        return t1**3 / 3.0 + t1**2 * s - 2.0 * t1 * s**2 + 4.0 / 3.0 * s**3

    segs = [
        _rotate_to_diag(F, "rotation to diagonal"),
        Segment("X1 diag(l1, s)", {"lambda1": l1}, (l2, l1), curve=lambda s: _diag_entries(l1 + 0.0 * s, s),
                derivative=d1),
        Segment("X2 diag(s, s)", {}, (l1, t1), curve=lambda s: _diag_entries(s, s), derivative=d2),
        Segment("X3 diag(lt1, lt1 - s)", {"lambda1": t1}, (0.0, t1 - t2),
                curve=lambda s: _diag_entries(t1 + 0.0 * s, t1 - s), derivative=d3),
        _rotate_from_diag(Ft, "rotation from diagonal"),
    ]
    meta = {"construction": "aubert", "swapped": False, "reversed": False}
    return SublevelPath(segs, c, F, Ft, meta)


# --------------------------------------------------------------------------
# q-convexity


@dataclass
class QConvexityResult:
    passed: bool
    witness: Optional[tuple]
    excess: float
    samples: int

    def to_dict(self) -> dict:
        return {"passed": self.passed, "witness": None if self.witness is None else list(self.witness),
                "excess": self.excess, "samples": self.samples}


def q_convexity_1d(g: Callable, samples: Sequence[float], tol: float = 1e-12) -> QConvexityResult:
    """Check g(t) <= max(g(a), g(b)) for all sampled a <= t <= b.

    A violation at t needs a smaller value on each side, so comparing g(t)
    with the prefix minimum to its left and the suffix minimum to its right
    covers every triple in O(n).
    """
    t = np.sort(np.asarray(samples, dtype=float))
    with np.errstate(all="ignore"):
        v = np.asarray(g(t), dtype=float) * np.ones_like(t)
    if t.size < 3:
        return QConvexityResult(True, None, -math.inf, int(t.size))
    pre = np.minimum.accumulate(v)
    suf = np.minimum.accumulate(v[::-1])[::-1]
    left, right = pre[:-2], suf[2:]
    mid = v[1:-1]
    excess = mid - np.maximum(left, right)
    thresh = tol * np.maximum(1.0, np.abs(mid))
    k = int(np.argmax(excess - thresh))
    worst = float(excess[k])
    if excess[k] > thresh[k]:
        j = k + 1
        i = int(np.argmin(v[:j]))
        m = j + 1 + int(np.argmin(v[j + 1:]))
        return QConvexityResult(False, (float(t[i]), float(t[j]), float(t[m])), worst, int(t.size))
    return QConvexityResult(True, None, worst, int(t.size))


# --------------------------------------------------------------------------
# flood fill


@dataclass
class ConnectivityResult:
    count: int
    labels: np.ndarray = field(repr=False)
    mask: np.ndarray = field(repr=False)
    grid: DomainGrid = None
    level: float = math.nan

    def component_sizes(self) -> list:
        return [int(np.sum(self.labels == k)) for k in range(1, self.count + 1)]

    def to_dict(self) -> dict:
        g = self.grid
        return {"components": self.count, "level": self.level, "sizes": self.component_sizes(),
                "grid": {"u": [g.u_min, g.u_max, g.n_u], "v": [g.v_min, g.v_max, g.n_v]}}


def grid_connectivity(E, c: float, grid: Optional[DomainGrid] = None) -> ConnectivityResult:
    """Connected components of {W <= c} on an ordered log grid (4-neighbourhood)."""
    grid = DomainGrid() if grid is None else grid
    E = as_ordered(E)
    L1, L2, ordered = grid.mesh()
    with np.errstate(all="ignore"):
        W = np.asarray(E.value(np.maximum(L1, L2), np.minimum(L1, L2)), dtype=float)
    mask = ordered & np.isfinite(W) & (W <= c)
    labels, count = ndimage.label(mask)
    return ConnectivityResult(int(count), labels, mask, grid, float(c))
