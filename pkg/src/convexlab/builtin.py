"""The concrete energies: W0, Aubert, the ADM family and Silhavy's energy."""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .energy import OrderedSVEnergy, ScalarFunction, VolIsoSplitEnergy, validate_partials
from .errors import DomainError

__all__ = [
    "w0",
    "aubert",
    "adm",
    "silhavy_energy",
    "frobenius_squared",
    "determinant_energy",
    "ADM_CONVEX",
    "ADM_POLYCONVEX",
    "ADM_RANK_ONE",
    "by_name",
]

ADM_CONVEX = 2.0 * math.sqrt(2.0) / 3.0
ADM_POLYCONVEX = 1.0
ADM_RANK_ONE = 2.0 / math.sqrt(3.0)


@lru_cache(maxsize=None)
def w0() -> VolIsoSplitEnergy:
    """hhat(t) = t - log t, f(t) = log t + 1/t."""
    hhat = ScalarFunction(
        value=lambda t: t - np.log(t),
        d1=lambda t: 1.0 - 1.0 / t,
        d2=lambda t: 1.0 / (t * t),
        smoothness=2,
        domain=(1.0, math.inf),
        name="t - log t",
    )
    f = ScalarFunction(
        value=lambda t: np.log(t) + 1.0 / t,
        d1=lambda t: 1.0 / t - 1.0 / (t * t),
        d2=lambda t: -1.0 / (t * t) + 2.0 / t**3,
        smoothness=2,
        name="log t + 1/t",
    )
    E = VolIsoSplitEnergy("w0", hhat, f, h0=1.0, f0=-1.0,
                          growth={"hhat_inf": True, "f_inf": True, "f_zero": True})
    validate_partials(E)
    return E


def _aubert_value(l1, l2):
    return (l1**4 + l2**4) / 3.0 + 0.5 * l1**2 * l2**2 - 2.0 / 3.0 * (l1**3 * l2 + l1 * l2**3)


def _aubert_partials(l1, l2):
    p1 = 4.0 / 3.0 * l1**3 + l1 * l2**2 - 2.0 * l1**2 * l2 - 2.0 / 3.0 * l2**3
    p2 = 4.0 / 3.0 * l2**3 + l1**2 * l2 - 2.0 * l1 * l2**2 - 2.0 / 3.0 * l1**3
    return p1, p2


def _aubert_matrix(a11, a12, a21, a22):
    n2 = a11**2 + a12**2 + a21**2 + a22**2
    d = a11 * a22 - a12 * a21
    return n2**2 / 3.0 - d**2 / 6.0 - 2.0 / 3.0 * d * n2


@lru_cache(maxsize=None)
def aubert() -> OrderedSVEnergy:
    E = OrderedSVEnergy(
        name="aubert",
        value=_aubert_value,
        partials=_aubert_partials,
        smoothness=2,
        matrix_value=_aubert_matrix,
        growth={"det_zero": False, "norm_inf": False},
    )
    validate_partials(E)
    return E


@lru_cache(maxsize=None)
def adm(gamma: float) -> OrderedSVEnergy:
    """(l1^2 + l2^2)^2 - 2 gamma (l1^2 + l2^2) l1 l2.

    ``matrix_value`` is the form |F|^2 (|F|^2 - 2 gamma det F) valid on all
    of R^{2x2}; ``value`` is its restriction to GL+(2).
    """
    gamma = float(gamma)
    if not math.isfinite(gamma):
        raise DomainError(f"ADM parameter must be finite, got {gamma!r}")

    def value(l1, l2):
        s = l1 * l1 + l2 * l2
        return s * s - 2.0 * gamma * s * l1 * l2

    def partials(l1, l2):
        s = l1 * l1 + l2 * l2
        p = l1 * l2
        return (4.0 * s * l1 - 2.0 * gamma * (2.0 * l1 * p + s * l2),
                4.0 * s * l2 - 2.0 * gamma * (2.0 * l2 * p + s * l1))

    def matrix_value(a11, a12, a21, a22):
        n2 = a11**2 + a12**2 + a21**2 + a22**2
        return n2 * (n2 - 2.0 * gamma * (a11 * a22 - a12 * a21))

    E = OrderedSVEnergy(
        name=f"adm:{gamma!r}",
        value=value,
        partials=partials,
        smoothness=2,
        matrix_value=matrix_value,
        unrestricted=True,
        growth={"det_zero": False, "norm_inf": True},
        meta={"gamma": gamma},
    )
    validate_partials(E)
    return E


def _silhavy_value(l1, l2):
    return np.where(l1 <= 1.0, l1 * l2, l1 + l2 - 1.0)


def _silhavy_partials(l1, l2):
    inner = l1 < 1.0
    return np.where(inner, l2, 1.0), np.where(inner, l1, 1.0)


@lru_cache(maxsize=None)
def silhavy_energy() -> OrderedSVEnergy:
    """l1 l2 for l1 <= 1, l1 + l2 - 1 for l1 >= 1; kink along l1 = 1."""
    E = OrderedSVEnergy(
        name="silhavy",
        value=_silhavy_value,
        partials=_silhavy_partials,
        smoothness=0,
        seam=lambda l1, l2: np.asarray(l1, dtype=float) - 1.0,
        seam_description="l1 = 1",
        growth={"det_zero": False, "norm_inf": True},
    )
    validate_partials(E)
    return E


@lru_cache(maxsize=None)
def frobenius_squared() -> OrderedSVEnergy:
    """l1^2 + l2^2 = |F|^2, convex on R^{2x2}."""
    return OrderedSVEnergy(
        name="frobenius2",
        value=lambda l1, l2: l1 * l1 + l2 * l2,
        partials=lambda l1, l2: (2.0 * l1, 2.0 * l2),
        matrix_value=lambda a11, a12, a21, a22: a11**2 + a12**2 + a21**2 + a22**2,
        unrestricted=True,
        growth={"det_zero": False, "norm_inf": True},
    )


@lru_cache(maxsize=None)
def determinant_energy() -> OrderedSVEnergy:
    """l1 l2 = det F, polyaffine."""
    return OrderedSVEnergy(
        name="det",
        value=lambda l1, l2: l1 * l2,
        partials=lambda l1, l2: (l2, l1),
        matrix_value=lambda a11, a12, a21, a22: a11 * a22 - a12 * a21,
        growth={"det_zero": False, "norm_inf": False},
    )


def by_name(name: str):
    """Resolve a CLI energy name: w0, aubert, adm:<gamma>, silhavy."""
    key = name.strip().lower()
    if key == "w0":
        return w0()
    if key == "aubert":
        return aubert()
    if key == "silhavy":
        return silhavy_energy()
    if key in ("frobenius2", "det"):
        return frobenius_squared() if key == "frobenius2" else determinant_energy()
    if key.startswith("adm:"):
        try:
            gamma = float(key[4:])
        except ValueError:
            raise DomainError(f"bad ADM parameter in {name!r}") from None
        return adm(gamma)
    raise DomainError(f"unknown energy {name!r} (expected w0, aubert, adm:<gamma>, silhavy)")
