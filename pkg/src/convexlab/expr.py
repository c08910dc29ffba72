"""Energy definition files.

A definition file gives the isochoric part ``h`` (as a function of the
distortion ``t >= 1``) and the volumetric part ``f`` (as a function of the
determinant ``t > 0``)::

    # W0
    name = w0-from-file
    h = t - log(t)
    f = log(t) + 1/t

Grammar (``^`` and ``**`` are right-associative, binding tighter than unary
minus)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("+" | "-") unary | power
    power  := atom (("^" | "**") unary)?
    atom   := NUMBER | "t" | "e" | "pi"
            | ("log" | "exp") "(" expr ")"
            | "pow" "(" expr "," expr ")"
            | "(" expr ")"

Derivatives are taken symbolically, so file-defined energies carry analytic
first and second derivatives like the built-in ones.
"""
from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass

import numpy as np

from .energy import ScalarFunction, VolIsoSplitEnergy
from .errors import ParseError

__all__ = ["Node", "parse_expression", "differentiate", "compile_node", "load_energy_file", "parse_energy_text"]

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*/^(),·−]))"
)
_FUNCS = {"log", "exp", "pow"}
_CONSTS = {"e": math.e, "pi": math.pi}


@dataclass(frozen=True)
class Node:
    op: str
    args: tuple = ()
    value: float = 0.0

    def __str__(self):
        if self.op == "num":
            return repr(self.value)
        if self.op == "var":
            return "t"
        if self.op in ("log", "exp", "neg"):
            return f"{'-' if self.op == 'neg' else self.op}({self.args[0]})"
        sym = {"add": "+", "sub": "-", "mul": "*", "div": "/", "pow": "^"}[self.op]
        return f"({self.args[0]} {sym} {self.args[1]})"


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            start = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError("unexpected character", start, text[start])
        kind = m.lastgroup
        tok = m.group(kind)
        tok = {"·": "*", "−": "-"}.get(tok, tok)
        tokens.append((kind, tok, m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, expected=None):
        kind, tok, pos = self.tokens[self.i]
        if expected is not None and tok != expected:
            raise ParseError(f"expected {expected!r}", pos, tok or "<end>")
        self.i += 1
        return kind, tok, pos

    def parse(self) -> Node:
        node = self.expr()
        kind, tok, pos = self.peek()
        if kind != "end":
            raise ParseError("unexpected trailing input", pos, tok)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            _, op, _ = self.take()
            node = Node("add" if op == "+" else "sub", (node, self.term()))
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek()[1] in ("*", "/"):
            _, op, _ = self.take()
            node = Node("mul" if op == "*" else "div", (node, self.unary()))
        return node

    def unary(self) -> Node:
        if self.peek()[1] in ("+", "-"):
            _, op, _ = self.take()
            inner = self.unary()
            return inner if op == "+" else Node("neg", (inner,))
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek()[1] in ("^", "**"):
            self.take()
            return Node("pow", (base, self.unary()))
        return base

    def atom(self) -> Node:
        kind, tok, pos = self.take()
        if kind == "num":
            return Node("num", value=float(tok))
        if kind == "name":
            if tok == "t":
                return Node("var")
            if tok in _CONSTS:
                return Node("num", value=_CONSTS[tok])
            if tok in _FUNCS:
                self.take("(")
                a = self.expr()
                if tok == "pow":
                    self.take(",")
                    b = self.expr()
                    self.take(")")
                    return Node("pow", (a, b))
                self.take(")")
                return Node(tok, (a,))
            raise ParseError("unknown name", pos, tok)
        if tok == "(":
            node = self.expr()
            self.take(")")
            return node
        raise ParseError("unexpected token", pos, tok or "<end>")


def parse_expression(text: str) -> Node:
    return _Parser(text).parse()


def _num(x) -> Node:
    return Node("num", value=float(x))


def _is(node: Node, x: float) -> bool:
    return node.op == "num" and node.value == x


def _add(a, b):
    if _is(a, 0):
        return b
    if _is(b, 0):
        return a
    if a.op == "num" and b.op == "num":
        return _num(a.value + b.value)
    return Node("add", (a, b))


def _sub(a, b):
    if _is(b, 0):
        return a
    if a.op == "num" and b.op == "num":
        return _num(a.value - b.value)
    if _is(a, 0):
        return _neg(b)
    return Node("sub", (a, b))


def _mul(a, b):
    if _is(a, 0) or _is(b, 0):
        return _num(0)
    if _is(a, 1):
        return b
    if _is(b, 1):
        return a
    if a.op == "num" and b.op == "num":
        return _num(a.value * b.value)
    return Node("mul", (a, b))


def _div(a, b):
    if _is(a, 0):
        return _num(0)
    if _is(b, 1):
        return a
    return Node("div", (a, b))


def _neg(a):
    if a.op == "num":
        return _num(-a.value)
    if a.op == "neg":
        return a.args[0]
    return Node("neg", (a,))


def _pow(a, b):
    if _is(b, 1):
        return a
    if _is(b, 0):
        return _num(1)
    return Node("pow", (a, b))


def _const(node: Node) -> bool:
    if node.op == "var":
        return False
    return all(_const(a) for a in node.args)


def differentiate(node: Node) -> Node:
    """Symbolic d/dt."""
    op, args = node.op, node.args
    if op == "num":
        return _num(0)
    if op == "var":
        return _num(1)
    if op == "neg":
        return _neg(differentiate(args[0]))
    if op in ("add", "sub"):
        da, db = differentiate(args[0]), differentiate(args[1])
        return _add(da, db) if op == "add" else _sub(da, db)
    if op == "mul":
        a, b = args
        return _add(_mul(differentiate(a), b), _mul(a, differentiate(b)))
    if op == "div":
        a, b = args
        return _div(_sub(_mul(differentiate(a), b), _mul(a, differentiate(b))), _pow(b, _num(2)))
    if op == "log":
        return _div(differentiate(args[0]), args[0])
    if op == "exp":
        return _mul(node, differentiate(args[0]))
    if op == "pow":
        a, b = args
        if _const(b):
            return _mul(_mul(b, _pow(a, _sub(b, _num(1)))), differentiate(a))
        # a^b (b' log a + b a'/a)
        return _mul(node, _add(_mul(differentiate(b), Node("log", (a,))),
                               _div(_mul(b, differentiate(a)), a)))
    raise ValueError(f"cannot differentiate node {op!r}")


def compile_node(node: Node):
    """Turn an expression tree into a vectorised callable t -> value."""
    op, args = node.op, node.args
    if op == "num":
        v = node.value
        return lambda t: np.full(np.shape(t), v) if np.ndim(t) else v
    if op == "var":
        return lambda t: t
    fs = [compile_node(a) for a in args]
    if op == "neg":
        return lambda t: -fs[0](t)
    if op == "add":
        return lambda t: fs[0](t) + fs[1](t)
    if op == "sub":
        return lambda t: fs[0](t) - fs[1](t)
    if op == "mul":
        return lambda t: fs[0](t) * fs[1](t)
    if op == "div":
        return lambda t: fs[0](t) / fs[1](t)
    if op == "pow":
        return lambda t: np.power(fs[0](t), fs[1](t))
    if op == "log":
        return lambda t: np.log(fs[0](t))
    if op == "exp":
        return lambda t: np.exp(fs[0](t))
    raise ValueError(f"cannot compile node {op!r}")


def _scalar_function(node: Node, domain, name: str) -> ScalarFunction:
    d1 = differentiate(node)
    d2 = differentiate(d1)
    return ScalarFunction(compile_node(node), compile_node(d1), compile_node(d2),
                          smoothness=2, domain=domain, name=name)


def parse_energy_text(text: str, default_name: str = "file") -> VolIsoSplitEnergy:
    """Parse the contents of an energy definition file."""
    parts = {}
    name = default_name
    offset = 0
    for raw in text.splitlines(keepends=True):
        line = raw.split("#", 1)[0]
        if line.strip():
            if "=" not in line:
                col = len(line) - len(line.lstrip())
                raise ParseError("expected 'key = expression'", offset + col, line.strip())
            key, rhs = line.split("=", 1)
            key = key.strip()
            rhs_offset = offset + line.index("=") + 1
            if key == "name":
                name = rhs.strip()
            elif key in ("h", "hhat", "f"):
                try:
                    parts["h" if key != "f" else "f"] = (parse_expression(rhs), rhs.strip())
                except ParseError as exc:
                    raise ParseError(str(exc).split(" at position")[0], rhs_offset + exc.position,
                                     exc.token) from None
            else:
                raise ParseError("unknown key", offset + (len(line) - len(line.lstrip())), key)
        offset += len(raw)
    missing = {"h", "f"} - parts.keys()
    if missing:
        raise ParseError(f"missing definition(s) {sorted(missing)}", len(text), "<end>")
    hhat = _scalar_function(parts["h"][0], (1.0, math.inf), parts["h"][1])
    f = _scalar_function(parts["f"][0], (0.0, math.inf), parts["f"][1])
    return VolIsoSplitEnergy(name, hhat, f)


def load_energy_file(path) -> VolIsoSplitEnergy:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_energy_text(text, default_name=os.path.splitext(os.path.basename(str(path)))[0])
