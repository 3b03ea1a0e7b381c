import math

import numpy as np
import pytest

from finslerlab import DegenerateValue, DomainError
from finslerlab.jets import (
    JetContext,
    constant,
    extract_partial,
    get_context,
    jet_arith,
    jet_cos,
    jet_exp,
    jet_func,
    jet_ln,
    jet_pow,
    jet_sin,
    jet_sqrt,
    lift_variable,
)
from fdtools import fd_partial, rel_err


def test_lift_variable_basic():
    ctx = get_context(2, 2)
    j = lift_variable(ctx, 0, 3.0)
    assert extract_partial(j, (0, 0)) == 3.0
    assert extract_partial(j, (1, 0)) == 1.0
    assert extract_partial(j, (0, 1)) == 0.0
    assert extract_partial(j, (2, 0)) == 0.0
    assert extract_partial(j, (1, 1)) == 0.0


def test_lift_then_square():
    ctx = get_context(2, 2)
    x0 = lift_variable(ctx, 0, 3.0)
    sq = x0 * x0
    assert extract_partial(sq, (0, 0)) == 9.0
    assert extract_partial(sq, (1, 0)) == 6.0
    assert extract_partial(sq, (2, 0)) == 2.0


def test_lift_order_one():
    ctx = get_context(1, 1)
    j = lift_variable(ctx, 0, 0.0)
    assert j.value == 0.0
    assert extract_partial(j, (1,)) == 1.0


def test_lift_index_out_of_range():
    ctx = get_context(2, 2)
    with pytest.raises(IndexError):
        lift_variable(ctx, 2, 1.0)


def test_polynomial_partials():
    ctx = get_context(2, 3)
    x0 = lift_variable(ctx, 0, 3.0)
    x1 = lift_variable(ctx, 1, 2.0)
    p = x0 * x0 * x1
    # d2/dx0^2 (x0^2 x1) = 2 x1 = 4 at x1=2
    assert extract_partial(p, (2, 0)) == pytest.approx(4.0)
    assert extract_partial(p, (2, 1)) == pytest.approx(2.0)
    assert extract_partial(p, (0, 0)) == pytest.approx(18.0)


def test_reciprocal_series():
    ctx = get_context(1, 2)
    x = lift_variable(ctx, 0, 0.0)
    inv = 1.0 / (1.0 + x)
    assert extract_partial(inv, (0,)) == pytest.approx(1.0)
    assert extract_partial(inv, (1,)) == pytest.approx(-1.0)
    assert extract_partial(inv, (2,)) == pytest.approx(2.0)


def test_division_by_zero_value():
    ctx = get_context(1, 2)
    x = lift_variable(ctx, 0, 0.0)
    with pytest.raises(DegenerateValue):
        (1.0 + x) / x


def test_context_mismatch():
    a = lift_variable(get_context(1, 2), 0, 1.0)
    b = lift_variable(get_context(2, 2), 0, 1.0)
    with pytest.raises(ValueError):
        a + b


def test_sqrt_derivatives():
    ctx = get_context(1, 2)
    x = lift_variable(ctx, 0, 4.0)
    r = jet_sqrt(x)
    assert extract_partial(r, (0,)) == pytest.approx(2.0)
    assert extract_partial(r, (1,)) == pytest.approx(0.25)
    assert extract_partial(r, (2,)) == pytest.approx(-1.0 / 32.0)


def test_pow_real_matches_repeated_multiplication():
    ctx = get_context(2, 4)
    x0 = lift_variable(ctx, 0, 0.3)
    x1 = lift_variable(ctx, 1, -0.1)
    s = 0.5 * x0 + 0.25 * x1 * x0
    base = 1.0 + s
    via_pow = jet_pow(base, 2.0)
    via_mul = base * base
    np.testing.assert_allclose(via_pow.c, via_mul.c, atol=1e-14)


def test_ln_domain_error():
    ctx = get_context(1, 2)
    x = lift_variable(ctx, 0, 0.0)
    with pytest.raises(DomainError):
        jet_ln(x)
    with pytest.raises(DomainError):
        jet_sqrt(constant(ctx, -1.0))
    with pytest.raises(DomainError):
        jet_pow(constant(ctx, -0.5), 0.5)


def test_extract_errors():
    ctx = get_context(2, 4)
    j = lift_variable(ctx, 0, 1.0)
    with pytest.raises(ValueError):
        extract_partial(j, (5, 0))
    with pytest.raises(ValueError):
        extract_partial(j, (1,))


def test_integer_power_negative_base():
    ctx = get_context(1, 3)
    x = lift_variable(ctx, 0, -2.0)
    cube = x ** 3
    assert extract_partial(cube, (0,)) == pytest.approx(-8.0)
    assert extract_partial(cube, (1,)) == pytest.approx(12.0)
    assert extract_partial(cube, (2,)) == pytest.approx(-12.0)
    inv2 = x ** (-2)
    assert extract_partial(inv2, (0,)) == pytest.approx(0.25)
    assert extract_partial(inv2, (1,)) == pytest.approx(0.25)


def _sample_expression(xs):
    """A composed scalar expression exercising every supported function."""
    x, y, z = xs
    return (math.sqrt(2.0 + x * x + y) * math.exp(0.3 * z - 0.1 * x * y)
            + math.sin(x + 2.0 * y) * math.cos(z)
            + (1.4 + x) ** 1.7
            + math.log(2.5 + y + 0.2 * z * z) / (3.0 + x + y * z))


def _sample_expression_jet(ctx, point):
    x = lift_variable(ctx, 0, point[0])
    y = lift_variable(ctx, 1, point[1])
    z = lift_variable(ctx, 2, point[2])
    return (jet_sqrt(2.0 + x * x + y) * jet_exp(0.3 * z - 0.1 * x * y)
            + jet_sin(x + 2.0 * y) * jet_cos(z)
            + jet_pow(1.4 + x, 1.7)
            + jet_ln(2.5 + y + 0.2 * z * z) / (3.0 + x + y * z))


def test_partials_match_finite_differences():
    ctx = get_context(3, 4)
    rng = np.random.default_rng(20240817)
    for _ in range(100):
        point = rng.uniform(-0.4, 0.4, size=3)
        jet = _sample_expression_jet(ctx, point)
        for mono in ctx.monomials:
            order = sum(mono)
            if order <= 2:
                want = fd_partial(_sample_expression, point, mono, step=1e-4)
                tol = 1e-5
            else:
                want = fd_partial(_sample_expression, point, mono)
                tol = 1e-5
            got = extract_partial(jet, mono)
            assert rel_err(got, want) < tol, (mono, got, want)


def test_mul_commutative_associative():
    ctx = get_context(2, 4)
    rng = np.random.default_rng(7)
    for _ in range(50):
        a = ctx_random(ctx, rng)
        b = ctx_random(ctx, rng)
        c = ctx_random(ctx, rng)
        np.testing.assert_allclose((a * b).c, (b * a).c, atol=1e-13)
        np.testing.assert_allclose(((a * b) * c).c, (a * (b * c)).c, atol=1e-13)


def ctx_random(ctx, rng):
    from finslerlab.jets import Jet
    return Jet(ctx, rng.uniform(-1.0, 1.0, size=ctx.ncoef))


def test_chain_rule_analytic():
    ctx = get_context(1, 4)
    x = lift_variable(ctx, 0, 0.7)
    np.testing.assert_allclose(jet_exp(jet_ln(1.0 + x)).c, (1.0 + x).c,
                               atol=1e-13)
    s2c2 = jet_sin(x) * jet_sin(x) + jet_cos(x) * jet_cos(x)
    np.testing.assert_allclose(s2c2.c, constant(ctx, 1.0).c, atol=1e-13)
    np.testing.assert_allclose(jet_sqrt(x * x).c, x.c, atol=1e-13)


def test_dispatchers():
    ctx = get_context(1, 2)
    x = lift_variable(ctx, 0, 2.0)
    assert jet_arith("add", x, x).value == 4.0
    assert jet_arith("neg", x).value == -2.0
    assert jet_func("sqrt", x).value == pytest.approx(math.sqrt(2.0))
    assert jet_func("pow_real", x, r=1.5).value == pytest.approx(2.0 ** 1.5)
    with pytest.raises(ValueError):
        jet_func("tan", x)
    with pytest.raises(ValueError):
        jet_arith("mod", x, x)


def test_context_validation():
    with pytest.raises(ValueError):
        JetContext(0, 2)
    with pytest.raises(ValueError):
        JetContext(2, 5)
    with pytest.raises(ValueError):
        JetContext(17, 2)


def test_coefficient_count():
    ctx = JetContext(3, 4)
    assert ctx.ncoef == math.comb(3 + 4, 4)
    ctx2 = JetContext(2, 2)
    assert ctx2.ncoef == 6
