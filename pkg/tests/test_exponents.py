import itertools
import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vortlab import exponents as ex
from vortlab.errors import DomainError

INF = ex.INF
HALF = F(1, 2)


def test_parsing():
    assert ex.as_exponent("3/2") == F(3, 2)
    assert ex.as_exponent("inf") == INF and ex.as_exponent(INF) == INF
    assert ex.as_exponent(2) == F(2)
    for bad in (1.5, "1.5", "2e3", "x", True, None):
        with pytest.raises(DomainError):
            ex.as_exponent(bad)
    assert ex.reciprocal(INF) == 0
    with pytest.raises(DomainError):
        ex.reciprocal(0)


def test_scaling_index_examples():
    assert ex.scaling_index(INF, 3) == 1
    assert ex.scaling_index(2, 6) == F(3, 2)
    assert ex.scaling_index(4, 6) == 1
    with pytest.raises(DomainError):
        ex.scaling_index(0, 3)


@pytest.mark.parametrize("r,q", [(2, 6), (F(3, 2), 3), (F(6, 5), 2)])
def test_sobolev_q_of_r(r, q):
    assert ex.sobolev_q_of_r(r) == q


def test_sobolev_q_of_r_domain():
    for r in (1, 3, INF):
        with pytest.raises(DomainError):
            ex.sobolev_q_of_r(r)


@pytest.mark.parametrize(
    "s,r,label", [(INF, F(3, 2), ex.STRONG), (INF, 2, ex.STRONG), (2, 2, ex.NOT_IMPLIED), (2, 3, ex.STRONG)]
)
def test_strong_by_vorticity(s, r, label):
    assert ex.strong_by_vorticity(s, r) == label


@pytest.mark.parametrize(
    "r_hat,beta,q_prime", [(2, HALF, F(3, 2)), (2, 0, 2), (F(3, 2), HALF, 2)]
)
def test_q_prime_of(r_hat, beta, q_prime):
    assert ex.q_prime_of(r_hat, beta) == q_prime


@pytest.mark.parametrize("r_hat,beta,q", [(2, HALF, 3), (F(7, 4), 0, F(7, 4)), (F(3, 2), HALF, 2)])
def test_riesz_q_of(r_hat, beta, q):
    # 1/q = 2/3 - 1/6 = 1/2 at (3/2, 1/2)
    assert ex.riesz_q_of(r_hat, beta) == q


def test_riesz_q_of_endpoint_and_overflow():
    assert ex.riesz_q_of(3, 1) == INF
    with pytest.raises(DomainError):
        ex.riesz_q_of(2, 2)


def test_interpolation_examples():
    r = F(2)
    nat = ex.natural_weights()
    qr, r_hat = ex.interpolation_exponents(r, nat)
    assert qr == 3 and qr / r == F(3, 2)
    assert r_hat == 2
    pure = ex.InterpolationWeights.from_free(1, 0, 1, 0)
    for r in (F(5, 4), F(3, 2), F(2)):
        assert ex.interpolation_exponents(r, pure) == (r, r)


def test_weights_validation():
    with pytest.raises(DomainError):
        ex.InterpolationWeights.from_free(F(3, 4), F(1, 2), 0, 0)
    with pytest.raises(DomainError):
        ex.InterpolationWeights(HALF, HALF, HALF, 1, 0, 0)
    with pytest.raises(DomainError):
        ex.InterpolationWeights.from_free(0.5, 0, 0, 1)


def test_beta_of_examples():
    nat = ex.natural_weights()
    assert ex.beta_of(2, nat) == HALF
    # A = alpha' + 2 alpha = 1 and T = theta' + 2 theta = 1/2 violates closure
    off = ex.InterpolationWeights.from_free(HALF, 0, 0, HALF)
    assert not ex.is_closed(2, off)
    assert ex.beta_of(2, off) == 0
    assert ex.beta_by_chain(2, off) == 0


def test_hilbertian_tuple():
    tup = ex.exponent_tuple(2, ex.natural_weights())
    assert tup.as_tuple() == (2, HALF, 2, 3, F(3, 2))
    assert tup.consistent
    # the same tuple by chaining the single relations
    qr, r_hat = ex.interpolation_exponents(2, ex.natural_weights())
    beta = ex.beta_of(2, ex.natural_weights())
    assert (2, beta, r_hat, ex.riesz_q_of(r_hat, beta), ex.q_prime_of(r_hat, beta)) == (2, HALF, 2, 3, F(3, 2))
    assert ex.q_prime_of(r_hat, beta) * 2 == qr


@pytest.mark.parametrize("beta,r", [(HALF, 2), (1, F(3, 2)), (0, 3)])
def test_critical_r_of_beta(beta, r):
    assert ex.critical_r_of_beta(beta) == r


# --------------------------------------------------------------------------
# closure set


def test_closure_set_contains_natural_point():
    fs = ex.closure_feasible_set(2)
    w = fs.weights(HALF, 0)
    assert w.free == (HALF, 0, 0, 1)
    assert w == ex.natural_weights() and w in fs


def test_closure_set_domain():
    for r in (1, F(5, 2), INF):
        with pytest.raises(DomainError):
            ex.closure_feasible_set(r)


def test_closure_set_vertices():
    fs = ex.closure_feasible_set(2)
    assert fs.vertices() == [(0, HALF), (HALF, 0), (HALF, HALF)]
    assert ex.closure_feasible_set(F(3, 2)).vertices() == [
        (0, HALF),
        (0, F(2, 3)),
        (F(1, 3), F(2, 3)),
        (HALF, 0),
        (HALF, HALF),
    ]


def closure_pairs_brute_force(r, bound):
    """Every (alpha, theta, alpha', theta') with denominators <= bound
    meeting box, simplex and closure constraints."""
    grid = ex.farey(bound)
    out = set()
    for a, t, ap, tp in itertools.product(grid, repeat=4):
        if a + t > 1 or ap + tp > 1:
            continue
        if tp + t * r == 1 and ap + a * r == r / 2:
            out.add((a, t, ap, tp))
    return out


def closure_pairs_by_solving(r, bound):
    grid = ex.farey(bound)
    members = set(grid)
    out = set()
    for a, t in itertools.product(grid, repeat=2):
        ap, tp = r / 2 - a * r, 1 - t * r
        if ap in members and tp in members and a + t <= 1 and ap + tp <= 1:
            out.add((a, t, ap, tp))
    return out


def test_closure_enumeration_matches_four_way_brute_force():
    r = F(3, 2)
    assert closure_pairs_brute_force(r, 8) == closure_pairs_by_solving(r, 8)


def test_closure_set_matches_rational_grid_scan():
    r = F(3, 2)
    fs = ex.closure_feasible_set(r)
    oracle = closure_pairs_by_solving(r, 24)
    assert len(oracle) > 50
    for a, t, ap, tp in oracle:
        assert fs._inside(a, t)
        assert fs.weights(a, t).free == (a, t, ap, tp)
    # and the polygon has no grid point the oracle misses
    for a, t in itertools.product(ex.farey(24), repeat=2):
        if fs._inside(a, t):
            ap, tp = r / 2 - a * r, 1 - t * r
            if ap.denominator <= 24 and tp.denominator <= 24:
                assert (a, t, ap, tp) in oracle
    count, _, _ = ex._closed_scan(r, ex.farey(24), 24)
    assert count == len(oracle)


def test_sampler_output_lies_in_rational_scan():
    r = F(3, 2)
    fs = ex.closure_feasible_set(r)
    oracle = closure_pairs_by_solving(r, 24)
    samples = fs.sample(200, seed=3, resolution=24)
    on_grid = [w for w in samples if all(v.denominator <= 24 for v in w.free)]
    assert len(on_grid) > 50
    assert all(w.free in oracle for w in on_grid)
    assert all(w in fs for w in samples)
    assert fs.sample(20, seed=3) == fs.sample(20, seed=3)


R_GRID = [F(p, q) for q in range(1, 9) for p in range(q + 1, 2 * q + 1)]


def test_chain_consistency_over_sampler():
    count = 0
    for i in range(1000):
        r = R_GRID[i % len(R_GRID)]
        (w,) = ex.closure_feasible_set(r).sample(1, seed=i)
        assert w in ex.closure_feasible_set(r)
        assert ex.beta_of(r, w) == HALF
        assert ex.beta_by_chain(r, w) == HALF
        tup = ex.exponent_tuple(r, w)
        assert tup.consistent and tup.beta == HALF
        count += 1
    assert count == 1000


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(R_GRID), st.fractions(0, 1), st.fractions(0, 1), st.fractions(0, 1), st.fractions(0, 1))
def test_beta_routes_agree_off_closure(r, a, t, ap, tp):
    if a + t > 1 or ap + tp > 1:
        return
    w = ex.InterpolationWeights.from_free(a, t, ap, tp)
    assert ex.beta_of(r, w) == ex.beta_by_chain(r, w)
    assert (ex.beta_of(r, w) == HALF) or not ex.is_closed(r, w)


# --------------------------------------------------------------------------
# scan


def test_scan_closed_set_is_one_half():
    rep = ex.feasibility_scan([F(5, 4), F(3, 2), F(7, 4), F(2)], 12)
    assert rep.attainable_closed == frozenset({HALF})
    assert all(row.n_closed > 0 and row.chain_betas == {HALF} for row in rep.rows)
    assert ex.format_scan(rep).splitlines()[-1] == "attainable beta under scaling constraints: {1/2}"


def test_scan_empty_grid():
    rep = ex.feasibility_scan([], 12)
    assert rep.rows == () and rep.attainable_closed == frozenset()


def test_open_scan_spans_zero_and_half():
    (row,) = ex.feasibility_scan([F(2)], 6).rows
    assert row.open_beta_min < 0 < HALF < row.open_beta_max
    assert row.open_contains == {F(0): True, HALF: True}


def test_open_scan_matches_fraction_enumeration():
    r, bound = F(3, 2), 4
    grid = ex.farey(bound)
    pairs = [(a, t) for a in grid for t in grid if a + t <= 1]
    betas = {
        ex.beta_of(r, ex.InterpolationWeights.from_free(a, t, ap, tp)) for (a, t) in pairs for (ap, tp) in pairs
    }
    n_all, lo, hi, cnt, contains = ex._open_scan(r, grid, [HALF, F(1, 7)])
    assert n_all == len(pairs) ** 2
    assert (lo, hi, cnt) == (min(betas), max(betas), len(betas))
    assert contains == {HALF: HALF in betas, F(1, 7): F(1, 7) in betas}


# --------------------------------------------------------------------------
# regions


@pytest.mark.parametrize(
    "s,q,label",
    [(INF, 3, ex.STRONG), (2, 6, ex.WEAK_KNOWN), (4, 6, ex.STRONG), (4, 4, ex.TARGET), (2, 4, ex.UNKNOWN)],
)
def test_classify_open_problem(s, q, label):
    assert ex.classify_open_problem(s, q) == label


@pytest.mark.parametrize(
    "s,r,label",
    [(INF, F(3, 2), ex.STRONG), (2, 2, ex.WEAK_KNOWN), (2, 3, ex.STRONG), (2, F(5, 2), ex.TARGET), (2, F(3, 2), ex.UNKNOWN)],
)
def test_vorticity_region(s, r, label):
    assert ex.vorticity_region(s, r) == label


RANK = {ex.STRONG: 0, ex.TARGET: 1, ex.WEAK_KNOWN: 2, ex.UNKNOWN: 3}
exps = st.one_of(st.fractions(F(1, 4), 40), st.just(INF))


@settings(max_examples=300, deadline=None)
@given(exps, exps, exps, exps)
def test_classification_monotone(s1, s2, q1, q2):
    lo_s, hi_s = sorted((s1, s2))
    lo_q, hi_q = sorted((q1, q2))
    assert RANK[ex.classify_open_problem(hi_s, hi_q)] <= RANK[ex.classify_open_problem(lo_s, lo_q)]
    assert RANK[ex.vorticity_region(hi_s, hi_q)] <= RANK[ex.vorticity_region(lo_s, lo_q)]


def test_core_refuses_floats():
    with pytest.raises(DomainError):
        ex.scaling_index(2.0, 6)
    with pytest.raises(DomainError):
        ex.beta_of(1.5, ex.natural_weights())
    assert isinstance(ex.beta_of(2, ex.natural_weights()), F)
    assert not any(isinstance(v, float) for v in ex.exponent_tuple(F(3, 2), ex.natural_weights()).as_tuple())


def test_format():
    assert ex.format_exponent(INF) == "inf"
    assert ex.format_set({F(1, 2), F(0)}) == "{0, 1/2}"
    assert math.isinf(ex.as_exponent("∞"))


@settings(max_examples=200, deadline=None)
@given(exps, st.fractions(F(101, 100), F(299, 100)))
def test_paired_regions_shift_index_by_one(s, r):
    vort, q, vel = ex.paired_regions(s, r)
    assert q == ex.sobolev_q_of_r(r)
    assert ex.scaling_index(s, q) == 2 * ex.reciprocal(s) + 3 * ex.reciprocal(r) - 1
    assert vort == vel


def test_cli_classify_prints_both_classes(capsys):
    from vortlab.cli import main

    assert main(["exponents", "classify", "2", "2", "--vorticity"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].endswith("weak-known") and "L^6" in out[1] and out[1].endswith("weak-known")
