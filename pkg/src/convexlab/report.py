"""Reports, the reproduction suite and contour sheets.

Numbers are written with the shortest decimal that round-trips
(``repr``); non-finite values become the strings "Infinity", "-Infinity"
and "NaN" in JSON, and "inf", "-inf", "nan" in CSV.
"""
from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Optional, Sequence

import jsonschema
import numpy as np

from .builtin import adm, aubert, w0
from .energy import DomainGrid, as_ordered
from .errors import ConvexLabError, DomainError
from .planar import Mat2
from .polyconvexity import c_interval, polyconvexity_falsify, required_c_bound
from .rank_one import convexity_scan, rank_one_scan, split_rank_one_criterion
from .sublevel import aubert_connect_path, compactness_check, connect_path, grid_connectivity

__all__ = [
    "SCHEMA_VERSION",
    "encode",
    "decode_number",
    "format_float",
    "CheckReport",
    "load_schema",
    "validate_report",
    "Check",
    "Item",
    "REPRODUCE_ITEMS",
    "reproduce_paper",
    "ContourSheet",
    "contour_sheet",
    "contour_svg",
    "thread_count",
]

SCHEMA_VERSION = 1


# --------------------------------------------------------------------------
# encoding


def encode(x):
    """Convert results to JSON-safe data (non-finite floats as strings)."""
    if hasattr(x, "to_dict"):
        return encode(x.to_dict())
    if isinstance(x, Mat2):
        return list(x.as_tuple())
    if isinstance(x, dict):
        return {str(k): encode(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [encode(v) for v in x]
    if isinstance(x, np.ndarray):
        return encode(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "NaN"
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        return x
    if x is None or isinstance(x, str):
        return x
    return str(x)


def decode_number(v) -> float:
    return {"NaN": math.nan, "Infinity": math.inf, "-Infinity": -math.inf}.get(v, v) if isinstance(v, str) \
        else float(v)


def format_float(x) -> str:
    """Shortest round-trip text for a double; inf/-inf/nan for the rest."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def load_schema() -> dict:
    text = resources.files("convexlab").joinpath("report_schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def validate_report(data: dict) -> None:
    jsonschema.validate(data, load_schema())


@dataclass
class CheckReport:
    kind: str
    verdict: str
    energy: Optional[str] = None
    resolution: dict = field(default_factory=dict)
    margins: dict = field(default_factory=dict)
    witnesses: list = field(default_factory=list)
    details: dict = field(default_factory=dict)
    items: Optional[list] = None
    wall_time: Optional[float] = None

    def to_dict(self) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "energy": self.energy,
            "verdict": self.verdict,
            "resolution": encode(self.resolution),
            "margins": encode(self.margins),
            "witnesses": encode(self.witnesses),
            "details": encode(self.details),
        }
        if self.items is not None:
            out["items"] = encode(self.items)
        if self.wall_time is not None:
            out["wall_time"] = encode(self.wall_time)
        return out

    def to_json(self) -> str:
        data = self.to_dict()
        validate_report(data)
        return json.dumps(data, indent=2, allow_nan=False) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "CheckReport":
        validate_report(data)
        return cls(
            kind=data["kind"],
            verdict=data["verdict"],
            energy=data.get("energy"),
            resolution=data.get("resolution", {}),
            margins=data.get("margins", {}),
            witnesses=data.get("witnesses", []),
            details=data.get("details", {}),
            items=data.get("items"),
            wall_time=data.get("wall_time"),
        )

    @classmethod
    def from_json(cls, text: str) -> "CheckReport":
        return cls.from_dict(json.loads(text))

    @property
    def exit_code(self) -> int:
        return 1 if self.verdict == "fail" else 0


# --------------------------------------------------------------------------
# reproduction suite


@dataclass
class Check:
    quantity: str
    expected: object
    computed: object
    tolerance: Optional[float]
    passed: bool

    def to_dict(self) -> dict:
        return {"quantity": self.quantity, "expected": self.expected, "computed": self.computed,
                "tolerance": self.tolerance, "passed": bool(self.passed)}


def _close(quantity, expected, computed, tol) -> Check:
    ok = math.isfinite(computed) and abs(computed - expected) <= tol
    return Check(quantity, expected, computed, tol, ok)


def _is(quantity, expected, computed) -> Check:
    return Check(quantity, expected, computed, None, computed == expected)


def _at_least(quantity, bound, computed) -> Check:
    return Check(quantity, f">= {bound!r}", computed, None, computed >= bound)


@dataclass
class Item:
    name: str
    checks: list
    details: dict = field(default_factory=dict)
    wall_time: Optional[float] = None

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        out = {"name": self.name, "passed": self.passed, "checks": [c.to_dict() for c in self.checks],
               "details": self.details}
        if self.wall_time is not None:
            out["wall_time"] = self.wall_time
        return out


E = math.e
C_LO_PAPER = -0.00247958
BOUND_PAPER = -0.00377147
GAP_PAPER = 0.0012919


def _item_infima(W0) -> Item:
    rep = split_rank_one_criterion(W0)
    return Item("infima", [
        _close("h0 = inf t^2 h''(t)", 1.0, rep.h0.value, 1e-6),
        _close("f0 = inf t^2 f''(t)", -1.0, rep.f0.value, 1e-6),
    ], {"h0": rep.h0, "f0": rep.f0})


def _item_rank_one(W0) -> Item:
    rep = split_rank_one_criterion(W0)
    c3 = rep.condition_iii
    lower, upper = c3.t < 1.0, c3.t > 1.0
    first = np.abs(c3.first)
    return Item("rank-one", [
        _is("condition i", True, rep.condition_i.passed),
        _is("condition ii", True, rep.condition_ii.passed),
        _is("condition iii", True, c3.passed),
        _is("condition iv", True, rep.condition_iv.passed),
        Check("max |iii first disjunct|, t < 1", 0.0, float(first[lower].max()), 1e-10,
              bool(first[lower].max() <= 1e-10)),
        Check("max |iii first disjunct|, t > 1", 0.0, float(first[upper].max()), 1e-10,
              bool(first[upper].max() <= 1e-10)),
        _at_least("worst margin of condition iv", -1e-9, rep.condition_iv.worst_margin),
    ], {"criterion": rep})


def _item_polyconvexity(W0) -> Item:
    gamma, nu = (E**4, E**3), (E, 1.0)
    iv = c_interval(W0, *gamma)
    bound, orient = required_c_bound(W0, gamma, nu)
    res = polyconvexity_falsify(W0, [gamma], [nu])
    c_lo_exact = -(1.0 + E**8) / E**14
    c_hi_exact = -(1.0 + E - 3.0 * E**8 + E**9) / (E**14 * (1.0 + E))
    bound_exact = (2.0 - 3.0 * E**3 - 2.0 * E**7 + E**9 - 4.0 * E**10) / (E**11 * (E**3 - 1.0) ** 2)
    return Item("polyconvexity", [
        _close("c_lo vs -0.00247958", C_LO_PAPER, iv.c_lo, 1e-8),
        _close("c_lo vs -(1+e^8)/e^14", c_lo_exact, iv.c_lo, 1e-12),
        _close("c_hi vs -(1+e-3e^8+e^9)/(e^14(1+e))", c_hi_exact, iv.c_hi, 1e-12),
        _close("required c bound vs -0.00377147", BOUND_PAPER, bound, 1e-8),
        _close("required c bound vs closed form", bound_exact, bound, 1e-12),
        _is("bound orientation", "<=", orient),
        _close("gap c_lo - bound", GAP_PAPER, iv.c_lo - bound, 1e-6),
        _is("falsified", True, res.falsified),
    ], {"interval": iv, "falsify": res})


def _item_adm(_W0) -> Item:
    checks = []
    details = {}
    for g, expect in ((1.1, False), (1.2, True)):
        r = rank_one_scan(adm(g))
        checks.append(_is(f"rank-one violation at gamma = {g}", expect, r.violation))
        details[f"rank_one_{g}"] = r
    for g, expect in ((0.94, False), (0.95, True)):
        r = convexity_scan(adm(g))
        checks.append(_is(f"convexity violation at gamma = {g}", expect, r.violation))
        details[f"convexity_{g}"] = r
    for g, expect in ((1.0, False), (1.1, True)):
        r = polyconvexity_falsify(adm(g))
        checks.append(_is(f"polyconvexity falsified at gamma = {g}", expect, r.falsified))
        details[f"polyconvexity_{g}"] = r
    return Item("adm-thresholds", checks, details)


def _item_aubert(_W0) -> Item:
    A = aubert()
    comp = compactness_check(A, 0.0)
    fams = [c["family"] for c in comp.counter_samples]
    conn = grid_connectivity(A, 0.0)
    F, Ft = Mat2.diag(1.0, 0.5), Mat2.diag(2.0, 1.0)
    path = aubert_connect_path(F, Ft, 1.0)
    chk = path.check(A)
    signs = {}
    for seg in path.segments:
        if seg.derivative is not None and seg.s_range[1] > seg.s_range[0]:
            s = np.linspace(seg.s_range[0], seg.s_range[1], 200)
            signs[seg.name] = (float(np.min(seg.derivative(s))), float(np.max(seg.derivative(s))))
    return Item("aubert", [
        _is("compactness verdict at c = 0", "fail", comp.verdict),
        _is("diagonal ray in S_0", True, any(f.startswith("diagonal ray") for f in fams)),
        _is("components of S_0 on the default grid", 1, conn.count),
        _is("connecting path valid", True, chk.valid),
        _is("dW/ds < 0 along X1", True, signs["X1 diag(l1, s)"][1] < 0),
        _is("dW/ds < 0 along X2", True, signs["X2 diag(s, s)"][1] < 0),
        _is("dW/ds >= 0 along X3", True, signs["X3 diag(lt1, lt1 - s)"][0] >= 0),
    ], {"compactness": comp, "connectivity": conn, "path": chk, "derivative_ranges": signs})


def _item_w0_sublevels(W0) -> Item:
    checks = []
    details = {}
    for c in (3.0, 5.0, 10.0):
        rep = compactness_check(W0, c)
        checks.append(_is(f"compactness at c = {c:g}", "pass", rep.verdict))
        checks.append(Check(f"margin r' > 0 at c = {c:g}", "> 0", rep.margin, None, rep.margin > 0))
        details[f"compactness_{c:g}"] = rep
    fine = DomainGrid().refined()
    for c in (2.1, 3.0, 5.0):
        for grid in (DomainGrid(), fine):
            n = grid_connectivity(W0, c, grid).count
            checks.append(_is(f"components at c = {c:g}, {grid.n_u}^2 grid", 1, n))
    F, Ft = Mat2.diag(4.0, 1.0), Mat2.diag(2.0, 1.0)
    c = max(float(W0(4.0, 1.0)), float(W0(2.0, 1.0)))
    chk = connect_path(W0, F, Ft, c).check(W0)
    checks.append(_is("connecting path diag(4,1) -> diag(2,1) valid", True, chk.valid))
    details["path"] = chk
    return Item("w0-sublevels", checks, details)


REPRODUCE_ITEMS = (
    ("infima", _item_infima),
    ("rank-one", _item_rank_one),
    ("polyconvexity", _item_polyconvexity),
    ("adm-thresholds", _item_adm),
    ("aubert", _item_aubert),
    ("w0-sublevels", _item_w0_sublevels),
)


def thread_count() -> int:
    raw = os.environ.get("CONVEXLAB_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise DomainError(f"CONVEXLAB_THREADS must be an integer, got {raw!r}") from None
    return max(1, n)


def _run_item(name: str, fn: Callable, W0, timing: bool) -> Item:
    t0 = time.perf_counter()
    try:
        item = fn(W0)
    except (ConvexLabError, ValueError, ArithmeticError) as exc:
        item = Item(name, [Check("completed", True, f"error: {exc}", None, False)])
    if timing:
        item.wall_time = time.perf_counter() - t0
    return item


def reproduce_paper(only: Optional[Sequence[str]] = None, w0_energy=None, timing: bool = False,
                    threads: Optional[int] = None) -> CheckReport:
    """Run the fixed reproduction suite; item order is fixed by the suite."""
    names = [n for n, _ in REPRODUCE_ITEMS]
    if only:
        unknown = sorted(set(only) - set(names))
        if unknown:
            raise DomainError(f"unknown item(s) {unknown}; choose from {names}")
    todo = [(n, fn) for n, fn in REPRODUCE_ITEMS if not only or n in only]
    W0 = w0() if w0_energy is None else w0_energy
    threads = thread_count() if threads is None else max(1, int(threads))
    t0 = time.perf_counter()
    if threads > 1 and len(todo) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            items = list(pool.map(lambda p: _run_item(p[0], p[1], W0, timing), todo))
    else:
        items = [_run_item(n, fn, W0, timing) for n, fn in todo]
    passed = all(i.passed for i in items)
    return CheckReport(
        kind="reproduce-paper",
        verdict="pass" if passed else "fail",
        energy=getattr(W0, "name", None),
        resolution={"items": [i.name for i in items]},
        details={"failed": [i.name for i in items if not i.passed]},
        items=items,
        wall_time=(time.perf_counter() - t0) if timing else None,
    )


# --------------------------------------------------------------------------
# contour sheets


@dataclass
class ContourSheet:
    """W(diag(l1, l2)) on a log grid, row-major over (l1, l2)."""

    lambda1: np.ndarray
    lambda2: np.ndarray
    values: np.ndarray
    levels: tuple = ()
    shape: tuple = (0, 0)

    def bands(self) -> np.ndarray:
        """Band index per node: number of levels strictly below W (-1 if W is not finite)."""
        lv = np.asarray(self.levels, dtype=float)
        b = np.searchsorted(lv, self.values, side="left")
        return np.where(np.isfinite(self.values), b, -1)

    def to_csv(self) -> str:
        head = "lambda1,lambda2,W" + (",band" if self.levels else "")
        rows = [head]
        bands = self.bands() if self.levels else None
        for k in range(self.values.size):
            row = f"{format_float(self.lambda1[k])},{format_float(self.lambda2[k])},{format_float(self.values[k])}"
            if bands is not None:
                row += f",{int(bands[k])}"
            rows.append(row)
        return "\n".join(rows) + "\n"

    @staticmethod
    def read_csv(text: str):
        """Parse CSV text back into (lambda1, lambda2, W) arrays."""
        lines = [ln for ln in text.splitlines() if ln.strip()]
        cols = list(zip(*(ln.split(",") for ln in lines[1:])))
        return tuple(np.array([float(x) for x in c]) for c in cols[:3])


def contour_sheet(E, grid: Optional[DomainGrid] = None, levels: Sequence[float] = ()) -> ContourSheet:
    grid = DomainGrid() if grid is None else grid
    O = as_ordered(E)
    L1, L2, _ = grid.mesh()
    with np.errstate(all="ignore"):
        W = np.asarray(O.value(np.maximum(L1, L2), np.minimum(L1, L2)), dtype=float)
    levels = tuple(sorted(float(x) for x in levels))
    return ContourSheet(L1.ravel(), L2.ravel(), W.ravel(), levels, W.shape)


def contour_svg(sheet: ContourSheet, cell: int = 4) -> str:
    """Filled level bands, darkest for the lowest band; axes are ln l1 (right) and ln l2 (up)."""
    n_u, n_v = sheet.shape
    levels = sheet.levels
    if not levels:
        finite = sheet.values[np.isfinite(sheet.values)]
        levels = tuple(np.linspace(finite.min(), finite.max(), 10)[1:-1]) if finite.size else (0.0,)
        sheet = ContourSheet(sheet.lambda1, sheet.lambda2, sheet.values, levels, sheet.shape)
    bands = sheet.bands().reshape(n_u, n_v)
    nb = len(levels) + 1

    def fill(b):
        if b < 0:
            return "#ffffff"
        g = int(round(30 + 210 * b / max(1, nb - 1)))
        return f"#{g:02x}{g:02x}{g:02x}"

    w, h = n_u * cell, n_v * cell
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
           f"<title>sublevel bands, levels {', '.join(format_float(x) for x in levels)}</title>"]
    for j in range(n_v):
        y = (n_v - 1 - j) * cell
        i = 0
        while i < n_u:
            b = bands[i, j]
            k = i
            while k + 1 < n_u and bands[k + 1, j] == b:
                k += 1
            out.append(f'<rect x="{i * cell}" y="{y}" width="{(k - i + 1) * cell}" height="{cell}" fill="{fill(b)}"/>')
            i = k + 1
    out.append("</svg>")
    return "\n".join(out) + "\n"
