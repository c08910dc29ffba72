"""Closed-form linear algebra for real 2x2 matrices.

Rotations use the convention

    rot(a) = [[cos a,  sin a],
              [-sin a, cos a]]

so that an ordered SVD reads ``rot(q1).T @ diag(l1, l2) @ rot(q2).T`` and
``rot(q1) @ F @ rot(q2)`` is diagonal.  All angles live in (-pi, pi].
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "Mat2",
    "OrderedSV",
    "RankOneDir",
    "normalize_angle",
    "rot",
    "svd_ordered",
    "singular_values",
    "linear_distortion",
    "rotation_angle",
    "rotation_power",
    "rank_one_matrix",
    "boundary_distance",
]

# relative size of the anti-conformal (or conformal) part below which the
# rotation factors are treated as non-unique
_DEGENERATE_RTOL = 1e-14


def normalize_angle(a: float) -> float:
    """Map an angle to (-pi, pi], sending -pi to pi."""
    a = math.remainder(float(a), 2.0 * math.pi)
    if a <= -math.pi:
        a += 2.0 * math.pi
    return a


@dataclass(frozen=True)
class Mat2:
    a11: float
    a12: float
    a21: float
    a22: float

    def __post_init__(self):
        for name in ("a11", "a12", "a21", "a22"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise DomainError(f"Mat2 entry {name} is not finite: {v!r}")
            object.__setattr__(self, name, v)

    @classmethod
    def from_array(cls, A) -> "Mat2":
        A = np.asarray(A, dtype=float)
        if A.shape != (2, 2):
            raise DomainError(f"expected a 2x2 array, got shape {A.shape}")
        return cls(A[0, 0], A[0, 1], A[1, 0], A[1, 1])

    @classmethod
    def from_string(cls, text: str) -> "Mat2":
        """Parse ``"a11,a12,a21,a22"`` (row-major)."""
        parts = [p for p in text.replace(" ", "").split(",") if p]
        if len(parts) != 4:
            raise DomainError(f"expected four comma-separated reals, got {text!r}")
        try:
            return cls(*(float(p) for p in parts))
        except ValueError as exc:
            raise DomainError(f"cannot parse matrix {text!r}: {exc}") from None

    @classmethod
    def identity(cls) -> "Mat2":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def diag(cls, x: float, y: float) -> "Mat2":
        return cls(x, 0.0, 0.0, y)

    @classmethod
    def rotation(cls, angle: float) -> "Mat2":
        c, s = math.cos(angle), math.sin(angle)
        return cls(c, s, -s, c)

    def as_array(self) -> np.ndarray:
        return np.array([[self.a11, self.a12], [self.a21, self.a22]])

    def as_tuple(self) -> tuple:
        return (self.a11, self.a12, self.a21, self.a22)

    @property
    def T(self) -> "Mat2":
        return Mat2(self.a11, self.a21, self.a12, self.a22)

    def det(self) -> float:
        return self.a11 * self.a22 - self.a12 * self.a21

    def frobenius(self) -> float:
        return math.sqrt(self.a11**2 + self.a12**2 + self.a21**2 + self.a22**2)

    def opnorm(self) -> float:
        """Operator (spectral) norm, i.e. the largest singular value."""
        return singular_values(*self.as_tuple())[0].item()

    def __matmul__(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.a11 * other.a11 + self.a12 * other.a21,
            self.a11 * other.a12 + self.a12 * other.a22,
            self.a21 * other.a11 + self.a22 * other.a21,
            self.a21 * other.a12 + self.a22 * other.a22,
        )

    def __add__(self, other: "Mat2") -> "Mat2":
        return Mat2(*(x + y for x, y in zip(self.as_tuple(), other.as_tuple())))

    def __sub__(self, other: "Mat2") -> "Mat2":
        return Mat2(*(x - y for x, y in zip(self.as_tuple(), other.as_tuple())))

    def __mul__(self, k: float) -> "Mat2":
        return Mat2(*(k * x for x in self.as_tuple()))

    __rmul__ = __mul__

    def __str__(self) -> str:
        return f"[[{self.a11:.6g}, {self.a12:.6g}], [{self.a21:.6g}, {self.a22:.6g}]]"


def rot(angle: float) -> Mat2:
    return Mat2.rotation(angle)


@dataclass(frozen=True)
class OrderedSV:
    """Ordered singular values plus the two rotation angles.

    ``det_sign`` is -1 for matrices with negative determinant, which cannot
    be brought to diag(l1, l2) with l2 >= 0 by proper rotations alone; the
    reconstruction then uses diag(l1, -l2).
    """

    lambda1: float
    lambda2: float
    q1_angle: float
    q2_angle: float
    det_sign: int = 1

    def diag(self) -> Mat2:
        return Mat2.diag(self.lambda1, self.det_sign * self.lambda2)

    def reconstruct(self) -> Mat2:
        return rot(self.q1_angle).T @ self.diag() @ rot(self.q2_angle).T


def singular_values(a11, a12, a21, a22):
    """Vectorised ordered singular values ``(l1, l2)`` with l1 >= l2 >= 0.

    Uses the split of F into its conformal part (E, H) and anti-conformal
    part (P, G); l1 = |c| + |a|, l2 = ||c| - |a||.
    """
    a11, a12, a21, a22 = (np.asarray(x, dtype=float) for x in (a11, a12, a21, a22))
    e = 0.5 * (a11 + a22)
    h = 0.5 * (a21 - a12)
    p = 0.5 * (a11 - a22)
    g = 0.5 * (a21 + a12)
    conf = np.hypot(e, h)
    anti = np.hypot(p, g)
    return conf + anti, np.abs(conf - anti)


def svd_ordered(F: Mat2) -> OrderedSV:
    e = 0.5 * (F.a11 + F.a22)
    h = 0.5 * (F.a21 - F.a12)
    p = 0.5 * (F.a11 - F.a22)
    g = 0.5 * (F.a21 + F.a12)
    conf = math.hypot(e, h)
    anti = math.hypot(p, g)
    l1 = conf + anti
    diff = conf - anti
    sign = 1 if diff >= 0 else -1
    l2 = abs(diff)
    if l1 == 0.0:
        return OrderedSV(0.0, 0.0, 0.0, 0.0, 1)

    # In the standard convention F = R(phi) diag(l1, diff) R(theta) with
    # phi = (a_c + a_a)/2 and theta = (a_c - a_a)/2; rot(x) = R(-x), hence
    # q1 = phi and q2 = theta.
    a_c = math.atan2(h, e)
    a_a = math.atan2(g, p)
    if anti <= _DEGENERATE_RTOL * l1:
        # scaled rotation: any split works, pin q2 = 0
        phi, theta = a_c, 0.0
    elif conf <= _DEGENERATE_RTOL * l1:
        # scaled reflection
        phi, theta = a_a, 0.0
    else:
        phi = 0.5 * (a_c + a_a)
        theta = 0.5 * (a_c - a_a)
    return OrderedSV(l1, l2, normalize_angle(phi), normalize_angle(theta), sign)


def _require_positive_det(F: Mat2, what: str) -> None:
    if not F.det() > 0.0:
        raise DomainError(f"{what} requires det F > 0, got det F = {F.det()!r}")


def linear_distortion(F: Mat2) -> float:
    """K(F) = |||F|||^2 / det F = l1 / l2 for det F > 0."""
    _require_positive_det(F, "linear_distortion")
    sv = svd_ordered(F)
    return sv.lambda1 / sv.lambda2


def rotation_angle(Q: Mat2, atol: float = 1e-10) -> float:
    """Angle of a proper rotation in the ``rot`` convention, in (-pi, pi]."""
    A = Q.as_array()
    if not (np.allclose(A.T @ A, np.eye(2), atol=atol) and abs(Q.det() - 1.0) <= atol):
        raise DomainError(f"not a rotation matrix: {Q}")
    return normalize_angle(math.atan2(Q.a12, Q.a11))


def rotation_power(Q: Mat2, s: float) -> Mat2:
    """Q**s via the principal logarithm: rotation by s * angle(Q)."""
    return rot(s * rotation_angle(Q))


@dataclass(frozen=True)
class RankOneDir:
    left_angle: float
    right_angle: float
    magnitude: float = 1.0

    def __post_init__(self):
        if not self.magnitude > 0:
            raise DomainError(f"rank-one magnitude must be positive, got {self.magnitude!r}")

    def vectors(self):
        a = (math.cos(self.left_angle), math.sin(self.left_angle))
        b = (math.cos(self.right_angle), math.sin(self.right_angle))
        return a, b


def rank_one_matrix(d: RankOneDir) -> Mat2:
    (a1, a2), (b1, b2) = d.vectors()
    m = d.magnitude
    return Mat2(m * a1 * b1, m * a1 * b2, m * a2 * b1, m * a2 * b2)


def boundary_distance(F: Mat2) -> float:
    """Operator-norm distance from F to the singular matrices (= l2)."""
    _require_positive_det(F, "boundary_distance")
    return svd_ordered(F).lambda2
