import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vortlab.errors import DomainError, GridMismatchError, InvalidFieldError
from vortlab.fields import GridSpec, ScalarField, VectorField, check_same_grid, linf_norm, lp_norm


def test_grid_geometry():
    g = GridSpec(8)
    assert g.h == pytest.approx(2 * math.pi / 8)
    assert g.cell_volume == pytest.approx((2 * math.pi / 8) ** 3)
    assert g.coords()[3] == pytest.approx(3 * g.h)
    x, y, z = g.mesh()
    assert x[2, 0, 0] == pytest.approx(2 * g.h) and y[0, 2, 0] == pytest.approx(2 * g.h)


@pytest.mark.parametrize("n,l", [(3, 1.0), (8, 0.0), (8, -1.0), (8, math.inf), (4.5, 1.0)])
def test_grid_rejects_bad_parameters(n, l):
    with pytest.raises(DomainError):
        GridSpec(n, l)


def test_fields_are_immutable_copies():
    g = GridSpec(4)
    raw = np.zeros(g.shape)
    f = ScalarField(g, raw)
    raw[0, 0, 0] = 5.0
    assert f.values[0, 0, 0] == 0.0
    with pytest.raises(ValueError):
        f.values[0, 0, 0] = 1.0


def test_flat_scalar_is_row_major():
    g = GridSpec(4)
    f = ScalarField(g, np.arange(64.0))
    assert f.values[1, 2, 3] == (1 * 4 + 2) * 4 + 3


def test_invalid_fields():
    g = GridSpec(4)
    with pytest.raises(InvalidFieldError):
        ScalarField(g, np.zeros(10))
    bad = np.zeros(g.shape)
    bad[1, 1, 1] = np.nan
    with pytest.raises(InvalidFieldError):
        ScalarField(g, bad)
    with pytest.raises(InvalidFieldError):
        VectorField(g, np.zeros((2,) + g.shape))


def test_grid_mismatch():
    a, b = VectorField.zeros(GridSpec(4)), VectorField.zeros(GridSpec(8))
    with pytest.raises(GridMismatchError):
        check_same_grid(a, b)
    with pytest.raises(GridMismatchError):
        a + b


def test_lp_norm_constant():
    g = GridSpec(8)
    assert lp_norm(ScalarField(g, np.ones(g.shape)), 2) == pytest.approx((2 * math.pi) ** 1.5, rel=1e-14)
    assert (2 * math.pi) ** 1.5 == pytest.approx(15.749, abs=1e-3)


def test_lp_norm_zero_and_errors():
    g = GridSpec(8)
    z = ScalarField(g, np.zeros(g.shape))
    for r in (0.5, 1, 2, 7):
        assert lp_norm(z, r) == 0.0
    for r in (0, -1, math.inf):
        with pytest.raises(DomainError):
            lp_norm(z, r)


def test_lp_norm_sine():
    g = GridSpec(16)
    x, _, _ = g.mesh()
    val = lp_norm(ScalarField(g, np.sin(x)), 2)
    assert val == pytest.approx(math.sqrt(4 * math.pi**3), rel=1e-13)
    assert val == pytest.approx(11.137, abs=1e-3)


def test_lp_norm_vector_uses_euclidean_magnitude():
    g = GridSpec(4)
    data = np.zeros((3,) + g.shape)
    data[0], data[1] = 3.0, 4.0
    assert lp_norm(VectorField(g, data), 1) == pytest.approx(5.0 * g.volume)


def test_linf():
    g = GridSpec(8)
    assert linf_norm(ScalarField(g, np.full(g.shape, 3.0))) == 3.0
    assert linf_norm(ScalarField(g, np.zeros(g.shape))) == 0.0
    x, _, _ = g.mesh()
    assert linf_norm(ScalarField(g, np.sin(x))) == pytest.approx(1.0, abs=1e-15)


def test_lp_norm_large_exponent_does_not_overflow():
    g = GridSpec(4)
    f = ScalarField(g, np.full(g.shape, 1e10))
    assert lp_norm(f, 50) == pytest.approx(1e10 * g.volume ** (1 / 50), rel=1e-12)


fields_4 = st.integers(0, 2**32 - 1).map(lambda s: np.random.default_rng(s).standard_normal((4, 4, 4)))


@settings(max_examples=40, deadline=None)
@given(fields_4, st.floats(-1e3, 1e3).filter(lambda c: abs(c) > 1e-6), st.floats(0.3, 8))
def test_lp_norm_homogeneous(vals, c, r):
    g = GridSpec(4)
    a = lp_norm(ScalarField(g, vals * c), r)
    b = abs(c) * lp_norm(ScalarField(g, vals), r)
    assert a == pytest.approx(b, rel=1e-13)


@settings(max_examples=40, deadline=None)
@given(fields_4, st.floats(0.5, 6), st.floats(0.5, 6))
def test_lp_norm_discrete_holder_embedding(vals, r1, r2):
    r1, r2 = min(r1, r2), max(r1, r2)
    g = GridSpec(4)
    f = ScalarField(g, vals)
    assert lp_norm(f, r1) <= g.volume ** (1 / r1 - 1 / r2) * lp_norm(f, r2) * (1 + 1e-12)
