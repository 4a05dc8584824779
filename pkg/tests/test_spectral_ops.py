import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vortlab import kernels
from vortlab import spectral_ops as so
from vortlab import synthetic as sy
from vortlab.errors import DomainError
from vortlab.fields import GridSpec, ScalarField, SpectralField, VectorField
from vortlab.lattice import cubic_epstein_zeta, upper_gamma
from vortlab.solver import abc_field

G16 = GridSpec(16)


def rel(a, b):
    return np.abs(a - b).max() / max(np.abs(b).max(), 1e-300)


def vec(*comps):
    return VectorField(G16, np.stack(comps))


def test_levi_civita():
    e = so.LEVI_CIVITA
    assert e[0, 1, 2] == 1
    assert np.array_equal(e, -e.transpose(1, 0, 2))
    assert np.array_equal(e, -e.transpose(0, 2, 1))
    assert np.array_equal(e, -e.transpose(2, 1, 0))


def test_curl_examples():
    x, y, z = G16.mesh()
    zero = np.zeros(G16.shape)
    assert np.abs(so.curl(vec(zero + 1, zero + 2, zero - 3)).data).max() < 1e-14
    w = so.curl(vec(zero, zero, np.sin(x)))
    assert rel(w.data, np.stack([zero, -np.cos(x), zero])) < 1e-13


def test_curl_sign_convention():
    # curl of (0, 0, sin x) is (d_y sin x, -d_x sin x, 0) = (0, -cos x, 0); the
    # Beltrami field below is the independent check of orientation
    u = abc_field(G16, 1.0, 0.7, 0.3)
    assert rel(so.curl(u).data, u.data) < 1e-13


def test_curl_matches_levi_civita_contraction():
    u = sy.band_limited_vector(G16, 3, 4)
    grad = so.velocity_gradient(u)  # d_k u_l
    w = np.einsum("jkl,kl...->j...", so.LEVI_CIVITA, grad)
    assert rel(so.curl(u).data, w) < 1e-13


def test_divergence_and_gradient_examples():
    x, _, _ = G16.mesh()
    zero = np.zeros(G16.shape)
    assert rel(so.divergence(vec(np.sin(x), zero, zero)).values, np.cos(x)) < 1e-13
    assert np.abs(so.gradient(ScalarField(G16, zero + 4.0)).data).max() < 1e-14


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([8, 12, 16]))
def test_vector_identities(seed, n):
    g = GridSpec(n)
    kmax = n // 2 - 1
    v = sy.band_limited_vector(g, kmax, seed)
    f = sy.band_limited_scalar(g, kmax, seed + 1)
    w = so.curl(v)
    assert np.abs(so.divergence(w).values).max() <= 1e-12 * np.abs(w.data).max()
    assert np.abs(so.curl(so.gradient(f)).data).max() <= 1e-12 * np.abs(so.gradient(f).data).max()


def test_leray_projection():
    x, _, _ = G16.mesh()
    zero = np.zeros(G16.shape)
    assert np.abs(so.leray_project(vec(np.cos(x), zero, zero)).data).max() < 1e-14
    v = sy.band_limited_vector(G16, 5, 1)
    p = so.leray_project(v)
    assert np.abs(so.divergence(p).values).max() <= 1e-12 * np.abs(p.data).max()
    assert rel(so.leray_project(p).data, p.data) < 1e-13
    ph = so.leray_project(so.to_spectral(v))
    assert isinstance(ph, SpectralField)
    assert rel(so.to_physical(ph).data, p.data) < 1e-13


def test_biot_savart_examples():
    u = abc_field(G16)
    assert rel(so.biot_savart(u).data, u.data) < 1e-13
    assert np.abs(so.biot_savart(VectorField.zeros(G16)).data).max() == 0.0
    w = so.leray_project(sy.band_limited_vector(G16, 5, 2))
    ub = so.biot_savart(w)
    assert np.abs(so.divergence(ub).values).max() <= 1e-11 * np.abs(ub.data).max()
    resid = -so.laplacian(ub).data - so.curl(w).data
    assert np.abs(resid).max() <= 1e-11 * np.abs(so.curl(w).data).max()


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000))
def test_biot_savart_inverts_curl(seed):
    u = sy.band_limited_velocity(G16, 5, seed)
    w = so.curl(u)
    assert rel(so.curl(so.biot_savart(w)).data, w.data) < 1e-11
    assert rel(so.biot_savart(w).data, u.data) < 1e-11


def test_dealias():
    n = G16.n
    x, y, z = G16.mesh()
    zero = np.zeros(G16.shape)
    low = vec(np.sin(5 * x), np.cos(2 * y + 3 * z), zero)
    assert rel(so.to_physical(so.dealias(so.to_spectral(low))).data, low.data) < 1e-14
    high = vec(np.cos(6 * x), zero, zero)
    assert np.abs(so.to_physical(so.dealias(so.to_spectral(high))).data).max() < 1e-14
    v = so.to_spectral(sy.band_limited_vector(G16, n // 2 - 1, 3))
    assert so.spectral_energy(so.dealias(v).modes, G16) <= so.spectral_energy(v.modes, G16)


def test_spectral_energy_matches_quadrature():
    v = sy.band_limited_vector(G16, 7, 5)
    direct = 0.5 * np.sum(v.data**2) * G16.cell_volume
    assert so.spectral_energy(so.forward(v), G16) == pytest.approx(direct, rel=1e-13)


# --------------------------------------------------------------------------
# Riesz potential


def test_riesz_beta_domain():
    f = ScalarField(G16, np.ones(G16.shape))
    for beta in (0.0, 3.0, -1.0):
        with pytest.raises(DomainError):
            so.riesz_potential(f, beta)


def test_riesz_zero_and_constant():
    zero = ScalarField(G16, np.zeros(G16.shape))
    for backend in (so.MULTIPLIER, so.RieszBackend()):
        assert np.abs(so.riesz_potential(zero, 0.5, backend).values).max() == 0.0
    one = ScalarField(G16, np.ones(G16.shape))
    assert np.abs(so.riesz_potential(one, 0.5, so.MULTIPLIER).values).max() < 1e-13


def test_riesz_negative_entries_warn(caplog):
    f = ScalarField(G16, -np.ones(G16.shape))
    with caplog.at_level("WARNING"):
        out = so.riesz_potential(f, 0.5, so.RieszBackend())
    assert "negative" in caplog.text
    ref = so.riesz_potential(ScalarField(G16, np.ones(G16.shape)), 0.5, so.RieszBackend())
    assert np.array_equal(out.values, ref.values)


def test_riesz_single_cell_impulse():
    g = GridSpec(8)
    f = np.zeros(g.shape)
    f[0, 0, 0] = 1.0 / g.cell_volume
    out = so.riesz_potential(ScalarField(g, f), 0.5, so.RieszBackend("direct-sum", images=0)).values
    for idx in [(2, 0, 0), (1, 1, 0), (1, 2, 3), (3, 3, 3), (6, 5, 7), (2, 2, 1)]:
        d = [min(i, g.n - i) * g.h for i in idx]
        assert out[idx] == pytest.approx(math.hypot(*d) ** -2.5, rel=1e-13)


def test_riesz_table_matches_literal_double_sum():
    g = GridSpec(6)
    rng = np.random.default_rng(0)
    f = rng.random(g.shape)
    table = so.riesz_table(g, 0.5, 1)
    literal = kernels.direct_sum_loop_numpy(f, np.asarray(table))
    fast = so.riesz_potential(ScalarField(g, f), 0.5, so.RieszBackend("direct-sum", 1)).values
    assert rel(fast, literal) < 1e-13


def test_riesz_symbol_constant_against_quadrature():
    # 3D transform of a radial function: (4 pi / k) int f(r) r sin(kr) dr
    from scipy import integrate

    for beta in (0.5, 1.0, 1.5):
        k = 1.3
        near, _ = integrate.quad(lambda r: r ** (beta - 2) * math.sin(k * r), 0, 1, limit=200)
        far, _ = integrate.quad(lambda r: r ** (beta - 2), 1, np.inf, weight="sin", wvar=k)
        val = near + far
        assert 4 * math.pi / k * val == pytest.approx(so.riesz_symbol_constant(beta) * k**-beta, rel=1e-8)
    assert so.riesz_symbol_constant(2.0) == pytest.approx(4 * math.pi)  # Coulomb kernel


@pytest.mark.parametrize("seed", range(3))
def test_riesz_backends_agree_and_improve_with_images(seed):
    mag = ScalarField(G16, sy.band_limited_vector(G16, 2, seed).magnitude())
    d = [so.riesz_backend_discrepancy(mag, 0.5, images) for images in (1, 2, 3)]
    assert d[1] <= 1e-2
    assert d[2] <= d[0]


def test_riesz_ball_self_term_is_coarser():
    mag = ScalarField(G16, sy.band_limited_vector(G16, 2, 0).magnitude())
    assert so.riesz_backend_discrepancy(mag, 0.5, 2, "ball") > so.riesz_backend_discrepancy(mag, 0.5, 2)


pos_fields = st.integers(0, 2**32 - 1).map(lambda s: np.random.default_rng(s).random((8, 8, 8)))


@settings(max_examples=25, deadline=None)
@given(pos_fields, pos_fields, st.floats(0.1, 2.9), st.floats(0.0, 3.0))
def test_riesz_linear_and_monotone(a, b, beta, c):
    g = GridSpec(8)
    backend = so.RieszBackend("direct-sum", 1)
    ia = so.riesz_potential(ScalarField(g, a), beta, backend).values
    ib = so.riesz_potential(ScalarField(g, b), beta, backend).values
    isum = so.riesz_potential(ScalarField(g, a + c * b), beta, backend).values
    assert rel(isum, ia + c * ib) < 1e-12
    assert np.all(isum >= ia - 1e-12 * np.abs(ia).max())


# --------------------------------------------------------------------------
# lattice zeta


@pytest.mark.parametrize(
    "s,value",
    [(1.0, -2.8372974794806), (2.0, -8.91363291758515), (0.0, -1.0)],
)
def test_cubic_epstein_zeta_known_values(s, value):
    # Z(1) is (minus) the Madelung-type constant of the simple cubic lattice
    assert cubic_epstein_zeta(s) == pytest.approx(value, rel=1e-11)


def test_cubic_epstein_zeta_matches_direct_sum_in_convergent_range():
    s, big = 4.5, 60
    r = np.arange(-big, big + 1)
    q = (r[:, None, None] ** 2 + r[None, :, None] ** 2 + r[None, None, :] ** 2).astype(float)
    q = q[(q > 0) & (q <= big**2)]
    partial = np.sum(q ** (-s / 2))
    tail = 4 * math.pi * big ** (3 - s) / (s - 3)  # remainder outside the ball
    assert cubic_epstein_zeta(s) == pytest.approx(partial + tail, rel=1e-5)


def test_zeta_domain():
    for s in (3.0, 5.0, -2.0):
        with pytest.raises(DomainError):
            cubic_epstein_zeta(s)


def test_upper_gamma_negative_order_recurrence():
    from scipy import integrate

    a, x = -0.25, 0.7
    ref = integrate.quad(lambda t: t ** (a - 1) * math.exp(-t), x, np.inf)[0]
    assert float(upper_gamma(a, x)) == pytest.approx(ref, rel=1e-10)
