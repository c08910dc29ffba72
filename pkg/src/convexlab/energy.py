"""Isotropic energy representations and conversions.

Two forms are supported:

* :class:`OrderedSVEnergy` -- ``W(F) = g(l1, l2)`` with ordered singular
  values ``l1 >= l2 > 0``;
* :class:`VolIsoSplitEnergy` -- ``W(F) = hhat(K(F)) + f(det F)`` with the
  linear distortion ``K = l1 / l2``.

Value callables are expected to be vectorised over numpy arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, SeamError
from .planar import Mat2, singular_values, svd_ordered

__all__ = [
    "ScalarFunction",
    "OrderedSVEnergy",
    "VolIsoSplitEnergy",
    "DomainGrid",
    "SEAM_TOL",
    "as_ordered",
    "eval_matrix",
    "eval_entries",
    "split_to_ordered",
    "unordered_h",
    "h_function",
    "ordered_partials",
    "second_derivative_1d",
    "first_derivative_1d",
    "validate_partials",
]

SEAM_TOL = 1e-9
FD1_REL = 1e-5
FD2_REL = 1e-4


def _fd_step(t, rel):
    return rel * max(1.0, abs(float(t)))


def first_derivative_1d(g: Callable, t: float, step: Optional[float] = None) -> float:
    d = _fd_step(t, FD1_REL) if step is None else step
    return float((g(t + d) - g(t - d)) / (2.0 * d))


def second_derivative_1d(g: Callable, t: float, step: Optional[float] = None,
                         domain=(0.0, math.inf)) -> float:
    """Central second difference (g(t+d) - 2 g(t) + g(t-d)) / d**2."""
    d = _fd_step(t, FD2_REL) if step is None else float(step)
    lo, hi = domain
    if not (t - d > lo and t + d < hi):
        raise DomainError(f"t={t!r} with step {d!r} leaves the domain ({lo}, {hi})")
    return float((g(t + d) - 2.0 * g(t) + g(t - d)) / (d * d))


@dataclass(frozen=True)
class ScalarFunction:
    """A real function of one variable with optional analytic derivatives.

    ``seams`` lists points where the function is not ``smoothness`` times
    differentiable; derivative-based checks skip a SEAM_TOL window there.
    """

    value: Callable
    d1: Optional[Callable] = None
    d2: Optional[Callable] = None
    smoothness: int = 2
    domain: tuple = (0.0, math.inf)
    seams: tuple = ()
    name: str = ""

    def __call__(self, t):
        return self.value(t)

    def derivative(self, t):
        if self.d1 is not None:
            return self.d1(t)
        if np.ndim(t):
            return np.array([first_derivative_1d(self.value, x) for x in np.ravel(t)]).reshape(np.shape(t))
        return first_derivative_1d(self.value, t)

    def second_derivative(self, t):
        if self.d2 is not None:
            return self.d2(t)
        if np.ndim(t):
            return np.array([second_derivative_1d(self.value, x, domain=self.domain)
                             for x in np.ravel(t)]).reshape(np.shape(t))
        return second_derivative_1d(self.value, t, domain=self.domain)

    def near_seam(self, t, tol: float = SEAM_TOL):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=bool)
        for s in self.seams:
            out |= np.abs(t - s) <= tol
        return out


@dataclass(frozen=True)
class OrderedSVEnergy:
    """Energy ``g(l1, l2)`` on the ordered cone ``l1 >= l2 > 0``.

    ``seam`` (if given) maps (l1, l2) to a signed distance from the locus
    where ``g`` fails to be differentiable.  ``matrix_value`` is an
    independent closed form in the matrix entries; when ``unrestricted`` it
    is valid on all of R^{2x2}, not only on GL+(2).
    """

    name: str
    value: Callable
    partials: Optional[Callable] = None
    smoothness: int = 2
    seam: Optional[Callable] = None
    seam_description: str = ""
    matrix_value: Optional[Callable] = None
    unrestricted: bool = False
    growth: Optional[dict] = None
    meta: dict = field(default_factory=dict, compare=False)

    def __call__(self, l1, l2):
        return self.value(l1, l2)

    def on_seam(self, l1, l2, tol: float = SEAM_TOL):
        if self.seam is None:
            return np.zeros(np.broadcast(l1, l2).shape, dtype=bool)
        return np.abs(self.seam(l1, l2)) <= tol


@dataclass(frozen=True)
class VolIsoSplitEnergy:
    """``W(F) = hhat(K(F)) + f(det F)``.

    ``h0`` / ``f0`` optionally register closed-form values of
    ``inf t^2 h''(t)`` and ``inf t^2 f''(t)``; ``growth`` optionally
    registers closed-form limit flags under the keys ``hhat_inf``,
    ``f_inf`` and ``f_zero``.
    """

    name: str
    hhat: ScalarFunction
    f: ScalarFunction
    h0: Optional[float] = None
    f0: Optional[float] = None
    growth: Optional[dict] = None

    def __call__(self, l1, l2):
        return self.hhat(l1 / l2) + self.f(l1 * l2)

    @property
    def smoothness(self) -> int:
        return min(self.hhat.smoothness, self.f.smoothness)

    def ordered(self) -> OrderedSVEnergy:
        return split_to_ordered(self)


def as_ordered(E) -> OrderedSVEnergy:
    if isinstance(E, VolIsoSplitEnergy):
        return split_to_ordered(E)
    return E


def split_to_ordered(E: VolIsoSplitEnergy) -> OrderedSVEnergy:
    hh, f = E.hhat, E.f

    def value(l1, l2):
        return hh(l1 / l2) + f(l1 * l2)

    partials = None
    if hh.d1 is not None and f.d1 is not None:
        def partials(l1, l2):
            dh = hh.d1(l1 / l2)
            df = f.d1(l1 * l2)
            return dh / l2 + df * l2, -dh * l1 / (l2 * l2) + df * l1

    seam = None
    if hh.seams:
        # kinks of hhat at t = s sit on the ray l1 = s * l2
        def seam(l1, l2):
            return np.min([np.abs(l1 / l2 - s) for s in hh.seams], axis=0)

    return OrderedSVEnergy(
        name=E.name,
        value=value,
        partials=partials,
        smoothness=E.smoothness,
        seam=seam,
        growth=E.growth,
        meta={"split": E},
    )


def eval_entries(E, a11, a12, a21, a22):
    """Vectorised W at matrices given entrywise; NaN where det <= 0."""
    E = as_ordered(E)
    a11, a12, a21, a22 = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (a11, a12, a21, a22)))
    det = a11 * a22 - a12 * a21
    l1, l2 = singular_values(a11, a12, a21, a22)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.asarray(E.value(l1, l2), dtype=float)
    return np.where(det > 0, w, np.nan)


def eval_matrix(E, F: Mat2) -> float:
    """W(F) = g(lambda_hat(F)) for det F > 0."""
    if not F.det() > 0:
        raise DomainError(f"energy {getattr(E, 'name', '?')} is defined on GL+(2); det F = {F.det()!r}")
    E = as_ordered(E)
    sv = svd_ordered(F)
    return float(E.value(sv.lambda1, sv.lambda2))


def unordered_h(E: VolIsoSplitEnergy, t):
    """h(t) = hhat(t) for t >= 1 and hhat(1/t) for t < 1."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(~(t_arr > 0)):
        raise DomainError(f"unordered_h requires t > 0, got {t!r}")
    r = np.where(t_arr >= 1.0, t_arr, 1.0 / t_arr)
    out = E.hhat(r)
    return float(out) if np.ndim(t) == 0 else out


def h_function(E: VolIsoSplitEnergy) -> ScalarFunction:
    """The reflected isochoric part h on (0, inf) with its derivatives.

    For t < 1: h'(t) = -hhat'(1/t)/t^2 and
    h''(t) = hhat''(1/t)/t^4 + 2 hhat'(1/t)/t^3.  h is C^1 at t = 1 only if
    hhat'(1) = 0, otherwise t = 1 is declared a seam.
    """
    hh = E.hhat

    def value(t):
        t = np.asarray(t, dtype=float)
        return hh(np.where(t >= 1.0, t, 1.0 / t))

    def d1(t):
        t = np.asarray(t, dtype=float)
        r = np.where(t >= 1.0, t, 1.0 / t)
        dh = hh.derivative(r)
        return np.where(t >= 1.0, dh, -dh / (t * t))

    def d2(t):
        t = np.asarray(t, dtype=float)
        r = np.where(t >= 1.0, t, 1.0 / t)
        dh = hh.derivative(r)
        ddh = hh.second_derivative(r)
        return np.where(t >= 1.0, ddh, ddh / t**4 + 2.0 * dh / t**3)

    seams = tuple(hh.seams) + tuple(1.0 / s for s in hh.seams if s > 1.0)
    if abs(float(hh.derivative(1.0))) > 1e-8:
        seams = seams + (1.0,)
    return ScalarFunction(value, d1, d2, smoothness=hh.smoothness,
                          domain=(0.0, math.inf), seams=tuple(sorted(set(seams))),
                          name=f"h[{E.name}]")


def _one_sided(E: OrderedSVEnergy, l1, l2):
    d1 = _fd_step(l1, FD1_REL)
    d2 = _fd_step(l2, FD1_REL)
    g0 = E.value(l1, l2)
    left = ((g0 - E.value(l1 - d1, l2)) / d1, (g0 - E.value(l1, l2 - d2)) / d2)
    right = ((E.value(l1 + d1, l2) - g0) / d1, (E.value(l1, l2 + d2) - g0) / d2)
    return tuple(map(float, left)), tuple(map(float, right))


def ordered_partials(E, l1: float, l2: float) -> tuple:
    """(dg/dl1, dg/dl2) at an ordered point; analytic when registered."""
    E = as_ordered(E)
    if not (l1 >= l2 > 0):
        raise DomainError(f"ordered_partials requires l1 >= l2 > 0, got ({l1!r}, {l2!r})")
    if bool(E.on_seam(l1, l2)):
        left, right = _one_sided(E, l1, l2)
        raise SeamError(f"({l1!r}, {l2!r}) lies on the seam of {E.name}: {E.seam_description}",
                        left=left, right=right)
    if E.partials is not None:
        p1, p2 = E.partials(l1, l2)
        return float(p1), float(p2)
    d1 = _fd_step(l1, FD1_REL)
    d2 = _fd_step(l2, FD1_REL)
    p1 = (E.value(l1 + d1, l2) - E.value(l1 - d1, l2)) / (2 * d1)
    if l1 - l2 > d2:
        p2 = (E.value(l1, l2 + d2) - E.value(l1, l2 - d2)) / (2 * d2)
    else:
        # stay inside the ordered cone next to the diagonal
        p2 = (E.value(l1, l2) - E.value(l1, l2 - d2)) / d2
    return float(p1), float(p2)


@dataclass(frozen=True)
class DomainGrid:
    """Rectangular grid in log coordinates u = ln l1, v = ln l2."""

    u_min: float = -3.0
    u_max: float = 3.0
    v_min: float = -3.0
    v_max: float = 3.0
    n_u: int = 121
    n_v: int = 121

    def __post_init__(self):
        if not (self.u_min < self.u_max and self.v_min < self.v_max):
            raise DomainError("DomainGrid bounds must satisfy min < max")
        if self.n_u < 2 or self.n_v < 2:
            raise DomainError("DomainGrid needs at least two nodes per axis")

    @classmethod
    def square(cls, lo: float, hi: float, n: int) -> "DomainGrid":
        return cls(lo, hi, lo, hi, n, n)

    def axes(self):
        return np.linspace(self.u_min, self.u_max, self.n_u), np.linspace(self.v_min, self.v_max, self.n_v)

    def mesh(self):
        """(l1, l2, ordered_mask) arrays of shape (n_u, n_v), indexed [i_u, i_v]."""
        u, v = self.axes()
        U, V = np.meshgrid(u, v, indexing="ij")
        return np.exp(U), np.exp(V), U >= V

    def points(self):
        """Ordered grid points (l1, l2) with l1 >= l2 > 0, flattened."""
        L1, L2, mask = self.mesh()
        return L1[mask], L2[mask]

    def refined(self) -> "DomainGrid":
        """Same bounds, doubled resolution (every old node is kept)."""
        return replace(self, n_u=2 * self.n_u - 1, n_v=2 * self.n_v - 1)


def validate_partials(E, grid: Optional[DomainGrid] = None, rtol: float = 1e-6) -> float:
    """Largest scaled mismatch between analytic and central-difference partials.

    Points within SEAM_TOL of a declared seam, or closer than a step to
    the diagonal, are skipped.  Raises if the mismatch exceeds ``rtol``.
    """
    E = as_ordered(E)
    if E.partials is None:
        return 0.0
    grid = grid or DomainGrid(-2.0, 2.0, -2.0, 2.0, 21, 21)
    l1, l2 = grid.points()
    d1 = FD1_REL * np.maximum(1.0, l1)
    d2 = FD1_REL * np.maximum(1.0, l2)
    # the stencil must not straddle a seam
    keep = (l1 - l2 > 2 * d2) & ~E.on_seam(l1, l2, tol=1e-3)
    l1, l2, d1, d2 = l1[keep], l2[keep], d1[keep], d2[keep]
    n1 = (E.value(l1 + d1, l2) - E.value(l1 - d1, l2)) / (2 * d1)
    n2 = (E.value(l1, l2 + d2) - E.value(l1, l2 - d2)) / (2 * d2)
    a1, a2 = E.partials(l1, l2)
    a1 = np.broadcast_to(a1, l1.shape)
    a2 = np.broadcast_to(a2, l1.shape)
    scale1 = np.maximum(np.abs(a1), 1.0)
    scale2 = np.maximum(np.abs(a2), 1.0)
    err = max(np.max(np.abs(a1 - n1) / scale1, initial=0.0), np.max(np.abs(a2 - n2) / scale2, initial=0.0))
    if err > rtol:
        raise DomainError(f"analytic partials of {E.name} disagree with finite differences: {err:.3e}")
    return float(err)
