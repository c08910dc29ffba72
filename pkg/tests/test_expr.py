import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from convexlab import ParseError, load_energy_file, parse_energy_text, split_rank_one_criterion, w0
from convexlab.expr import compile_node, differentiate, parse_expression

W0_TEXT = """# W0
name = w0-from-file
h = t - log(t)
f = log(t) + 1/t
"""


def ev(text, t):
    return float(compile_node(parse_expression(text))(t))


def test_precedence_and_associativity():
    assert ev("2^3^2", 1.0) == 512.0
    assert ev("2**3**2", 1.0) == 512.0
    assert ev("-t^2", 3.0) == -9.0
    assert ev("1 - 2 - 3", 0.0) == -4.0
    assert ev("8 / 4 / 2", 0.0) == 1.0
    assert ev("2 * (t + 1)", 2.0) == 6.0
    assert ev("pow(t, 3) + exp(0) + e - e + pi - pi", 2.0) == pytest.approx(9.0)
    assert ev("1.5e1 + .5", 0.0) == 15.5


def test_unicode_operators():
    assert ev("2·t − 1", 3.0) == 5.0


@pytest.mark.parametrize("text,pos,token", [
    ("t +", 3, "<end>"),
    ("t $ 1", 2, "$"),
    ("log t", 4, "t"),
    ("(t", 2, "<end>"),
    ("sin(t)", 0, "sin"),
])
def test_parse_errors_report_position(text, pos, token):
    with pytest.raises(ParseError) as info:
        parse_expression(text)
    assert info.value.position == pos
    assert info.value.token == token
    assert f"position {pos}" in str(info.value)


def test_energy_file_matches_builtin(tmp_path):
    p = tmp_path / "w0.energy"
    p.write_text(W0_TEXT)
    E = load_energy_file(p)
    assert E.name == "w0-from-file"
    t = np.logspace(-3, 3, 50)
    tk = t[t >= 1]
    assert np.allclose(E.hhat(tk), w0().hhat(tk), rtol=1e-14)
    assert np.allclose(E.f(t), w0().f(t), rtol=1e-14)
    assert np.allclose(E.f.d1(t), w0().f.d1(t), rtol=1e-12)
    assert np.allclose(E.f.d2(t), w0().f.d2(t), rtol=1e-12)
    assert np.allclose(E.hhat.d2(tk), w0().hhat.d2(tk), rtol=1e-12)
    assert split_rank_one_criterion(E).passed


def test_energy_file_default_name(tmp_path):
    p = tmp_path / "mine.txt"
    p.write_text("h = t\nf = t + 1/t\n")
    assert load_energy_file(p).name == "mine"


def test_energy_file_errors():
    with pytest.raises(ParseError) as info:
        parse_energy_text("h = t\n")
    assert "missing" in str(info.value)
    with pytest.raises(ParseError) as info:
        parse_energy_text("h = t\ng = t\nf = t\n")
    assert info.value.token == "g" and info.value.position == 6
    with pytest.raises(ParseError) as info:
        parse_energy_text("h = t\nf = t +* 2\n")
    assert info.value.position == 13 and info.value.token == "*"
    with pytest.raises(ParseError):
        parse_energy_text("h t\nf = t\n")


coeff = st.integers(-5, 5)


@given(st.lists(coeff, min_size=1, max_size=5), st.floats(0.5, 3.0))
def test_symbolic_derivative_of_polynomials(cs, t):
    text = " + ".join(f"({c})*t^{k}" for k, c in enumerate(cs))
    node = parse_expression(text)
    d1 = compile_node(differentiate(node))
    d2 = compile_node(differentiate(differentiate(node)))
    exact1 = sum(k * c * t ** (k - 1) for k, c in enumerate(cs) if k)
    exact2 = sum(k * (k - 1) * c * t ** (k - 2) for k, c in enumerate(cs) if k > 1)
    assert float(d1(t)) == pytest.approx(exact1, rel=1e-12, abs=1e-12)
    assert float(d2(t)) == pytest.approx(exact2, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("text", ["log(t) * exp(t / 3)", "pow(t, t)", "1 / (1 + t^2)", "t^0.5 - log(1 + t)"])
def test_symbolic_derivative_matches_central_differences(text):
    node = parse_expression(text)
    g = compile_node(node)
    d1 = compile_node(differentiate(node))
    for t in (0.3, 1.0, 2.7):
        h = 1e-6 * t
        assert float(d1(t)) == pytest.approx((g(t + h) - g(t - h)) / (2 * h), rel=1e-7, abs=1e-8)
        assert math.isfinite(float(d1(t)))
