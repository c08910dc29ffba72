"""Command-line front end.

Exit codes: 0 pass (or no violation found), 1 check failed, 2 usage or I/O
error, 3 domain error (bad matrix, energy outside its domain, parse error).

A config file (``--config PATH``) holds ``key = value`` lines with ``#``
comments; keys are the long option names with dashes or underscores
(``energy``, ``level``, ``levels``, ``format``, ...).  Command-line flags
override the file, which overrides the built-in defaults.
"""
from __future__ import annotations

import argparse
import re
import sys
from typing import Optional, Sequence

from . import builtin
from .energy import DomainGrid, VolIsoSplitEnergy, as_ordered, eval_matrix
from .errors import ConvexLabError, DomainError
from .expr import load_energy_file
from .planar import Mat2
from .polyconvexity import log_pair_grid, polyconvexity_falsify
from .rank_one import default_base_grid, default_direction_grid, rank_one_scan, split_rank_one_criterion
from .report import CheckReport, contour_sheet, contour_svg, reproduce_paper
from .sublevel import aubert_connect_path, compactness_check, connect_path, grid_connectivity

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _fmt(x) -> str:
    return f"{x:.6g}" if isinstance(x, float) else str(x)


def read_config(path: str) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected 'key = value'")
            key, val = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = val
    return out


def _bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"expected a boolean, got {text!r}")


def _floats(text: str) -> list:
    text = text.strip()
    if not text:
        return []
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _point(text: str) -> tuple:
    v = _floats(text)
    if len(v) != 2:
        raise argparse.ArgumentTypeError(f"expected 'x,y', got {text!r}")
    return max(v), min(v)


def _grid3(text: str) -> tuple:
    v = _floats(text)
    if len(v) != 3 or v[2] != int(v[2]) or v[2] < 2:
        raise argparse.ArgumentTypeError(f"expected 'lo,hi,n' with integer n >= 2, got {text!r}")
    return v[0], v[1], int(v[2])


def _matrix(text: str) -> Mat2:
    try:
        return Mat2.from_string(text)
    except (ValueError, ConvexLabError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="convexlab", description="Generalized-convexity checks for planar isotropic energies.")
    p.add_argument("--config", help="key = value defaults file")
    sub = p.add_subparsers(dest="command", required=True)

    def energy_args(sp):
        g = sp.add_argument_group("energy")
        g.add_argument("--energy", default=None, help="w0, aubert, adm:<gamma>, silhavy, frobenius2, det")
        g.add_argument("--energy-file", default=None, help="definition file with h = ... and f = ... lines")
        sp.add_argument("--json", default=None, metavar="PATH", help="write the JSON report ('-' for stdout)")

    sp = sub.add_parser("eval", help="evaluate W(F)")
    energy_args(sp)
    sp.add_argument("--matrix", type=_matrix, required=False, help="a11,a12,a21,a22")

    check = sub.add_parser("check", help="run a convexity check")
    csub = check.add_subparsers(dest="check", required=True)

    sp = csub.add_parser("rank-one", help="split criterion and/or rank-one line scan")
    energy_args(sp)
    sp.add_argument("--method", choices=("auto", "split", "scan", "both"), default="auto",
                    help="split criterion (split energies), rank-one line scan, or both")
    sp.add_argument("--grid", type=_grid3, default=None, metavar="LO,HI,N",
                    help="diagonal scan bases diag(e^u, e^v), u >= v on [LO, HI] (default -1.5,1.5,13)")
    sp.add_argument("--directions", type=int, default=24, help="angles per direction vector")

    sp = csub.add_parser("polyconvexity", help="grid falsification of the c-interval criterion")
    energy_args(sp)
    sp.add_argument("--gamma-grid", type=_grid3, default=None, metavar="LO,HI,N",
                    help="ordered pairs over [e^LO, e^HI]^2 with N log nodes")
    sp.add_argument("--nu-grid", type=_grid3, default=None, metavar="LO,HI,N")
    sp.add_argument("--gamma", type=_point, action="append", default=None, metavar="X,Y",
                    help="explicit gamma point (repeatable; replaces the grid)")
    sp.add_argument("--nu", type=_point, action="append", default=None, metavar="X,Y")

    sp = csub.add_parser("sublevel", help="compactness, connectivity and connecting paths of S_c")
    energy_args(sp)
    sp.add_argument("--level", type=float, default=None)
    sp.add_argument("--compactness", action="store_true", default=False)
    sp.add_argument("--connectivity", action="store_true", default=False)
    sp.add_argument("--path", type=_matrix, nargs=2, default=None, metavar=("F", "FT"))
    sp.add_argument("--grid", type=_grid3, default=None, metavar="LO,HI,N",
                    help="log grid for the flood fill (default -3,3,121)")

    sp = sub.add_parser("contour", help="W on diagonal matrices as CSV or SVG bands")
    energy_args(sp)
    sp.add_argument("--levels", type=_floats, default=[])
    sp.add_argument("--format", choices=("csv", "svg"), default="csv")
    sp.add_argument("--grid", type=_grid3, default=None, metavar="LO,HI,N")
    sp.add_argument("--output", "-o", default="-")

    sp = sub.add_parser("reproduce-paper", help="run the fixed reproduction suite")
    sp.add_argument("--only", type=lambda s: [x.strip() for x in s.split(",") if x.strip()], default=None)
    sp.add_argument("--w0", default=None, metavar="FILE", help="energy file replacing W0")
    sp.add_argument("--output", "-o", default="-")
    sp.add_argument("--timing", action="store_true", default=False, help="include wall-times (breaks byte-identity)")
    return p


def _subparser(parser, argv):
    """The innermost subparser selected by argv, for config defaults."""
    node = parser
    for tok in argv:
        acts = [a for a in node._actions if isinstance(a, argparse._SubParsersAction)]
        if acts and tok in acts[0].choices:
            node = acts[0].choices[tok]
    return node


def _apply_config(parser, argv, config: dict) -> None:
    target = _subparser(parser, argv)
    actions = {a.dest: a for a in target._actions}
    defaults = {}
    for key, val in config.items():
        if key not in actions or key in ("help", "json", "output"):
            raise UsageError(f"unknown config key {key!r}")
        act = actions[key]
        if isinstance(act, argparse._StoreTrueAction):
            defaults[key] = _bool(val)
        elif act.nargs not in (None, "?") or isinstance(act, argparse._AppendAction):
            raise UsageError(f"config key {key!r} cannot be set from a file")
        else:
            try:
                defaults[key] = act.type(val) if act.type else val
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise UsageError(f"config key {key!r}: {exc}") from None
            if act.choices is not None and defaults[key] not in act.choices:
                raise UsageError(f"config key {key!r}: {val!r} not in {sorted(act.choices)}")
    target.set_defaults(**defaults)


def _energy(args):
    if args.energy and args.energy_file:
        raise UsageError("give either --energy or --energy-file, not both")
    if args.energy_file:
        try:
            return load_energy_file(args.energy_file)
        except OSError as exc:
            raise UsageError(f"cannot read {args.energy_file}: {exc}") from None
    if not args.energy:
        raise UsageError("an energy is required (--energy or --energy-file)")
    return builtin.by_name(args.energy)


def _write(path: str, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from None


def _emit(report: CheckReport, args, lines: Sequence[str]) -> int:
    if getattr(args, "json", None) == "-":
        sys.stdout.write(report.to_json())
    else:
        for ln in lines:
            print(ln)
        if getattr(args, "json", None):
            _write(args.json, report.to_json())
    return report.exit_code


def cmd_eval(args) -> int:
    if args.matrix is None:
        raise UsageError("--matrix is required")
    E = _energy(args)
    value = float(eval_matrix(E, args.matrix))
    report = CheckReport("eval", "pass", E.name, margins={"W": value},
                         details={"matrix": args.matrix})
    _emit(report, args, [repr(value)])
    return EXIT_OK


def _criterion_part(E, lines, margins, details):
    if not isinstance(E, VolIsoSplitEnergy):
        raise DomainError(f"{E.name} has no volumetric-isochoric split; use --method scan")
    rep = split_rank_one_criterion(E)
    details["criterion"] = rep
    margins.update({"h0": rep.h0.value, "f0": rep.f0.value,
                    "condition_i": rep.condition_i.worst_margin, "condition_ii": rep.condition_ii.worst_margin,
                    "condition_iii": rep.condition_iii.worst_margin, "condition_iv": rep.condition_iv.worst_margin})
    lines.append(f"h0 = {_fmt(rep.h0.value)}, f0 = {_fmt(rep.f0.value)}")
    for c in (rep.condition_i, rep.condition_ii, rep.condition_iii, rep.condition_iv):
        lines.append(f"condition {c.name}: {'pass' if c.passed else 'FAIL'} (worst margin {_fmt(c.worst_margin)})")
    return ("pass" if rep.passed else "fail"), {"t_points": int(rep.condition_iv.t.size)}


def _scan_part(E, args, lines, margins, details, witnesses):
    bases = default_base_grid() if args.grid is None else default_base_grid(*args.grid)
    res = rank_one_scan(E, bases, default_direction_grid(args.directions))
    details["scan"] = res
    margins["min_second_difference"] = res.min_value
    lines.append(res.verdict)
    if res.witness is not None:
        witnesses.append(res.witness)
        w = res.witness
        lines.append(f"witness: F = {w.base}, directions at angles ({_fmt(w.direction.left_angle)}, "
                     f"{_fmt(w.direction.right_angle)}), second difference {_fmt(w.value)}")
    return ("fail" if res.violation else "no-violation-found"), {"scan": res.resolution,
                                                                 "evaluations": res.evaluations}


def cmd_rank_one(args) -> int:
    E = _energy(args)
    method = args.method
    if method == "auto":
        method = "split" if isinstance(E, VolIsoSplitEnergy) and E.smoothness >= 2 else "scan"
    witnesses, margins, details, resolution = [], {}, {}, {}
    lines = [f"energy: {E.name}"]
    verdicts = []
    if method in ("split", "both"):
        v, res = _criterion_part(E, lines, margins, details)
        verdicts.append(v)
        resolution.update(res)
    if method in ("scan", "both"):
        v, res = _scan_part(E, args, lines, margins, details, witnesses)
        verdicts.append(v)
        resolution.update(res)
    # a passing closed-form criterion certifies; a clean scan alone does not
    verdict = "fail" if "fail" in verdicts else ("pass" if "pass" in verdicts else "no-violation-found")
    lines.append(f"verdict: {verdict}")
    report = CheckReport("rank-one", verdict, E.name, resolution, margins, witnesses, details)
    return _emit(report, args, lines)


def _pairs(points, grid, strict):
    if points:
        return points
    if grid is None:
        return None
    return log_pair_grid(*grid, strict=strict)


def cmd_polyconvexity(args) -> int:
    E = _energy(args)
    gammas = _pairs(args.gamma, args.gamma_grid, strict=True)
    nus = _pairs(args.nu, args.nu_grid, strict=False)
    res = polyconvexity_falsify(E, gammas, nus)
    verdict = "fail" if res.falsified else "no-violation-found"
    lines = [f"energy: {E.name}", res.verdict]
    w = res.witness
    if w is not None:
        lines += [
            f"gamma = ({_fmt(w.gamma[0])}, {_fmt(w.gamma[1])}), nu = ({_fmt(w.nu[0])}, {_fmt(w.nu[1])})",
            f"c-interval [{_fmt(w.interval.c_lo)}, {_fmt(w.interval.c_hi)}], required c {w.orientation} "
            f"{_fmt(w.required_bound)}, margin {_fmt(w.margin)}",
        ]
    lines.append(f"verdict: {verdict}")
    report = CheckReport("polyconvexity", verdict, E.name,
                         {"gamma_points": res.gamma_points, "nu_points": res.nu_points, "skipped": res.skipped},
                         {"worst_margin": res.worst_margin}, [w] if w is not None else [], {"falsify": res})
    return _emit(report, args, lines)


def _combine(verdicts):
    if "fail" in verdicts:
        return "fail"
    for v in ("inconclusive", "no-violation-found"):
        if v in verdicts:
            return v
    return "pass"


def cmd_sublevel(args) -> int:
    E = _energy(args)
    if args.level is None:
        raise UsageError("--level is required")
    c = float(args.level)
    do_comp, do_conn = args.compactness, args.connectivity
    if not (do_comp or do_conn or args.path):
        do_comp = do_conn = True
    verdicts, details, margins, witnesses = [], {}, {}, []
    lines = [f"energy: {E.name}, level c = {_fmt(c)}"]
    if do_comp:
        rep = compactness_check(E, c)
        verdicts.append(rep.verdict)
        details["compactness"] = rep
        margins.update({"radius": rep.radius, "boundary_margin": rep.margin})
        witnesses += rep.counter_samples
        lines.append(f"compactness: {rep.verdict} (radius {_fmt(rep.radius)}, boundary margin {_fmt(rep.margin)})")
        for cs in rep.counter_samples:
            lines.append(f"  counter-sample along {cs['family']}")
    if do_conn:
        grid = DomainGrid() if args.grid is None else DomainGrid.square(*args.grid)
        conn = grid_connectivity(E, c, grid)
        verdicts.append("pass" if conn.count <= 1 else "fail")
        details["connectivity"] = conn
        lines.append(f"connectivity: {conn.count} component(s) on a {grid.n_u}x{grid.n_v} log grid")
    if args.path:
        F, Ft = args.path
        if isinstance(E, VolIsoSplitEnergy):
            path = connect_path(E, F, Ft, c)
        elif as_ordered(E).name == "aubert":
            path = aubert_connect_path(F, Ft, c)
        else:
            raise DomainError(f"no path construction for {E.name}")
        chk = path.check(E)
        verdicts.append("pass" if chk.valid else "fail")
        details["path"] = {"path": path, "check": chk}
        lines.append(f"path: {'valid' if chk.valid else 'INVALID'} ({len(path.segments)} segments, "
                     f"max W {_fmt(chk.max_energy)})")
    verdict = _combine(verdicts)
    lines.append(f"verdict: {verdict}")
    report = CheckReport("sublevel", verdict, E.name, {"level": c}, margins, witnesses, details)
    return _emit(report, args, lines)


def cmd_contour(args) -> int:
    E = _energy(args)
    grid = DomainGrid() if args.grid is None else DomainGrid.square(*args.grid)
    sheet = contour_sheet(E, grid, args.levels)
    _write(args.output, sheet.to_csv() if args.format == "csv" else contour_svg(sheet))
    return EXIT_OK


def cmd_reproduce(args) -> int:
    w0 = None
    if args.w0:
        try:
            w0 = load_energy_file(args.w0)
        except OSError as exc:
            raise UsageError(f"cannot read {args.w0}: {exc}") from None
    report = reproduce_paper(only=args.only, w0_energy=w0, timing=args.timing)
    _write(args.output, report.to_json())
    for item in report.items:
        bad = [c for c in item.checks if not c.passed]
        print(f"{'pass' if not bad else 'FAIL'}  {item.name}", file=sys.stderr)
        for c in bad:
            print(f"      {c.quantity}: expected {c.expected!r}, computed {c.computed!r}", file=sys.stderr)
    return report.exit_code


_VALUE_OPTIONS = {"--matrix", "--level", "--levels", "--grid", "--gamma-grid", "--nu-grid", "--gamma", "--nu"}


def _join_negative_values(argv: list) -> list:
    """Rewrite ``--grid -3,3,121`` as ``--grid=-3,3,121``; argparse would read the value as an option."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_OPTIONS and i + 1 < len(argv) and re.match(r"-[\d.]", argv[i + 1]):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        if tok == "--path":
            # two values, so the '=' form is unavailable; a leading space makes
            # argparse read them as values, and the matrix parser drops it
            vals = [(" " + v if re.match(r"-[\d.]", v) else v) for v in argv[i + 1:i + 3]]
            out.extend([tok] + vals)
            i += 1 + len(vals)
            continue
        out.append(tok)
        i += 1
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = _join_negative_values(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    try:
        cfg_path = _config_path(argv)
        if cfg_path:
            try:
                config = read_config(cfg_path)
            except OSError as exc:
                raise UsageError(f"cannot read config {cfg_path}: {exc}") from None
            _apply_config(parser, argv, config)
    except UsageError as exc:
        print(f"convexlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    handlers = {"eval": cmd_eval, "contour": cmd_contour, "reproduce-paper": cmd_reproduce}
    if args.command == "check":
        handler = {"rank-one": cmd_rank_one, "polyconvexity": cmd_polyconvexity, "sublevel": cmd_sublevel}[args.check]
    else:
        handler = handlers[args.command]
    try:
        return handler(args)
    except UsageError as exc:
        print(f"convexlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConvexLabError, ValueError) as exc:
        print(f"convexlab: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


def _config_path(argv) -> Optional[str]:
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


if __name__ == "__main__":
    sys.exit(main())
