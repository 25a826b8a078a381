import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ergmax import NotSmooth, Observable, ParseError, parse_observable, to_text


def test_cosine_family_exact_bounds():
    obs = Observable.cosine(0.25)
    assert obs.kind == "cosine"
    assert abs(obs.value(0.25) - 1.0) < 1e-15
    assert abs(obs.value(0.75) + 1.0) < 1e-15
    assert obs.lip_bound == 2 * np.pi
    assert obs.sup_bound == 1.0
    # the printed form parses back to the same values
    back = parse_observable(obs.text)
    xs = np.linspace(0, 1, 37, endpoint=False)
    assert np.allclose(obs.values(xs), back.values(xs), atol=1e-12)


@given(st.floats(0, 1, exclude_max=True, allow_nan=False))
def test_text_roundtrip_is_exact_on_trees(theta):
    obs = parse_observable(f"cos(2*pi*(x-{theta!r}))")
    assert to_text(obs.tree) == obs.text
    back = parse_observable(obs.text)
    assert back.tree == obs.tree


@given(st.sampled_from([
    "x^2-x+0.25", "cos(2*pi*x)*sin(2*pi*x)", "-(x-0.5)^2",
    "exp(cos(2*pi*x))/2", "1/(2+cos(2*pi*x))", "0.5*x+abs(x-0.25)",
]))
def test_text_roundtrip_general(text):
    tree = parse_observable(text).tree
    assert parse_observable(to_text(tree)).tree == tree


def test_expression_observable_values_and_bounds():
    obs = parse_observable("cos(2*pi*x)+0.3*cos(4*pi*x)")
    assert obs.kind == "expr"
    xs = np.linspace(0, 1, 101)
    want = np.cos(2 * np.pi * xs) + 0.3 * np.cos(4 * np.pi * xs)
    assert np.allclose(obs.values(xs), want, atol=1e-12)
    # sampled bounds must cover the true sup 1.3 and true Lip
    true_lip = float(np.max(np.abs(
        2 * np.pi * np.sin(2 * np.pi * xs) + 1.2 * np.pi * np.sin(4 * np.pi * xs))))
    assert 1.3 <= obs.sup_bound <= 1.3 * 1.1
    assert obs.lip_bound >= true_lip


def test_constant_expression():
    obs = parse_observable("0.75")
    assert obs.lip_bound == 0.0
    assert np.all(obs.values(np.linspace(0, 1, 9)) == 0.75)


def test_parse_errors_carry_position():
    with pytest.raises(ParseError) as ei:
        parse_observable("cos(2*pi*x")
    assert "position" in str(ei.value)
    with pytest.raises(ParseError):
        parse_observable("cos(2*pi*x) + ")
    with pytest.raises(ParseError):
        parse_observable("sin(x) @ 2")
    with pytest.raises(ParseError):
        parse_observable("foo(x)")
    with pytest.raises(ParseError):
        parse_observable("x^y")


def test_smoothness_report():
    from ergmax import smoothness_report

    rep = smoothness_report(parse_observable("cos(2*pi*x)"), 2)
    assert abs(rep.values[0] - 2 * np.pi) < 0.01
    assert abs(rep.values[1] - 4 * np.pi ** 2) < 1.0
    assert rep.certified == [True, False]
    with pytest.raises(NotSmooth) as ei:
        smoothness_report(parse_observable("abs(x-0.5)"), 1)
    assert ei.value.lip_bound > 0.9


def test_periodic_warning():
    # expressions with a seam at 0 are flagged, not rejected
    assert parse_observable("x").periodic_warning
    assert not parse_observable("cos(2*pi*x)").periodic_warning
