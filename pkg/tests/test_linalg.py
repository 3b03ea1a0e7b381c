import numpy as np
import pytest

from finslerlab import SingularMetric
from finslerlab.jets import extract_partial, get_context, lift_variable
from finslerlab.linalg import det, invert, is_positive_definite, solve


def test_invert_matches_numpy():
    rng = np.random.default_rng(11)
    for n in (2, 3, 5):
        for _ in range(20):
            m = rng.uniform(-1, 1, size=(n, n))
            a = m @ m.T + n * np.eye(n)
            inv = np.array(invert(a.tolist()))
            np.testing.assert_allclose(inv, np.linalg.inv(a),
                                       rtol=1e-10, atol=1e-12)
            assert det(a.tolist()) == pytest.approx(np.linalg.det(a), rel=1e-10)


def test_singular_raises():
    with pytest.raises(SingularMetric):
        invert([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(SingularMetric):
        invert([[0.0, 0.0], [0.0, 0.0]])


def test_solve_columns():
    a = [[2.0, 1.0], [1.0, 3.0]]
    cols = solve(a, [[5.0, 10.0]])
    x = cols[0]
    assert x[0] == pytest.approx(1.0)
    assert x[1] == pytest.approx(3.0)


def test_jet_matrix_inverse():
    ctx = get_context(1, 3)
    x = lift_variable(ctx, 0, 0.4)
    a = [[1.0 + x * x, 0.3 * x], [0.3 * x, 2.0 - x]]
    inv = invert(a)
    for i in range(2):
        for j in range(2):
            entry = sum(a[i][k] * inv[k][j] for k in range(2))
            want = 1.0 if i == j else 0.0
            for mono in ctx.monomials:
                got = extract_partial(entry, mono)
                expect = want if sum(mono) == 0 else 0.0
                assert got == pytest.approx(expect, abs=1e-12)


def test_positive_definite():
    assert is_positive_definite([[2.0, 0.5], [0.5, 1.0]])
    assert not is_positive_definite([[1.0, 2.0], [2.0, 1.0]])
    assert not is_positive_definite([[-1.0, 0.0], [0.0, -2.0]])
    assert not is_positive_definite([[0.0, 0.0], [0.0, 0.0]])
