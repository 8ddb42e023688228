import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resonant import (
    ProbVec,
    ResourceTheory,
    asymptotic_rate,
    entropy_variance,
    fidelity,
    gibbs_qubit,
    gibbs_state,
    irreversibility_parameter,
    relative_entropy,
    relative_entropy_variance,
    shannon_entropy,
)
from resonant.exceptions import DegenerateTarget, DomainError, SupportError

from conftest import S3, S4_INITIALS, S4_TARGET, random_gibbs, random_simplex


def simplex(min_dim=2, max_dim=5):
    return st.lists(
        st.floats(min_value=1e-3, max_value=1.0), min_size=min_dim, max_size=max_dim
    ).map(lambda w: np.asarray(w) / np.sum(w))


# -- construction ---------------------------------------------------------------


def test_probvec_normalises_and_freezes():
    p = ProbVec([0.2, 0.3, 0.5 + 1e-9], [2.0, 1.0, 1.0])
    assert p.probs.sum() == pytest.approx(1.0, abs=1e-15)
    np.testing.assert_allclose(p.gibbs, [0.5, 0.25, 0.25])
    with pytest.raises(ValueError):
        p.probs[0] = 1.0


@pytest.mark.parametrize(
    "probs, gibbs",
    [
        ([], None),
        ([0.5, 0.6], None),
        ([1.2, -0.2], None),
        ([0.5, np.nan], None),
        ([0.5, 0.5], [1.0, 0.0]),
        ([0.5, 0.5], [1.0, 1.0, 1.0]),
    ],
)
def test_probvec_rejects_bad_input(probs, gibbs):
    with pytest.raises(ValueError):
        ProbVec(probs, gibbs)


def test_kron_multiplies_references():
    a = ProbVec([0.5, 0.5], [0.75, 0.25])
    b = ProbVec([1.0, 0.0])
    k = a.kron(b)
    np.testing.assert_allclose(k.probs, [0.5, 0.0, 0.5, 0.0])
    np.testing.assert_allclose(k.gibbs, [0.375, 0.375, 0.125, 0.125])


def test_theory_coerce():
    assert ResourceTheory.coerce("Thermodynamic") is ResourceTheory.THERMODYNAMIC
    with pytest.raises(DomainError):
        ResourceTheory.coerce("magic")


# -- entropies ------------------------------------------------------------------


def test_entropy_examples():
    assert shannon_entropy(S3["p1"]) == pytest.approx(1.0, abs=1e-3)
    assert shannon_entropy([1, 0, 0]) == 0.0
    assert shannon_entropy(S4_INITIALS[0]) == pytest.approx(0.8, abs=1e-3)
    assert shannon_entropy(np.full(3, 1 / 3)) == pytest.approx(math.log(3), abs=1e-14)


def test_entropy_variance_examples():
    assert entropy_variance(S3["p1"]) == pytest.approx(0.1529, abs=1e-3)
    assert entropy_variance(S3["p2"]) == pytest.approx(0.1977, abs=1e-3)
    for d in (1, 2, 7):
        assert entropy_variance(np.full(d, 1.0 / d)) == pytest.approx(0.0, abs=1e-15)


def test_entropy_variance_zero_only_on_flat_support():
    # exhaustive small rationals with denominator 6
    for counts in itertools.product(range(7), repeat=3):
        if sum(counts) != 6:
            continue
        p = np.array(counts) / 6.0
        nz = p[p > 0]
        flat = np.allclose(nz, nz[0])
        v = entropy_variance(p)
        assert v >= 0
        assert (v < 1e-12) == flat


def test_relative_entropy_examples():
    gh = gibbs_qubit(10.0, 1.0)
    assert relative_entropy([1.0, 0.0], gh.probs) == pytest.approx(0.6444, abs=1e-4)
    assert relative_entropy([0.9, 0.1], [0.5, 0.5]) == pytest.approx(0.3681, abs=1e-4)
    assert relative_entropy(gh.probs, gh.probs) == 0.0


def test_relative_entropy_support_error():
    with pytest.raises(SupportError):
        relative_entropy([0.5, 0.5], [1.0, 0.0])


def test_relative_entropy_variance_examples():
    gh = gibbs_qubit(10.0).probs
    assert relative_entropy_variance(gh, gh) == pytest.approx(0.0, abs=1e-15)
    assert relative_entropy_variance([0.0, 1.0], gh) == pytest.approx(0.0, abs=1e-15)
    gc = gibbs_qubit(1.0).probs
    lr = np.log(gc) - np.log(gh)
    brute = sum(gc[i] * (lr[i] - gc @ lr) ** 2 for i in range(2))
    v = relative_entropy_variance(gc, gh)
    assert v > 0
    assert v == pytest.approx(brute, rel=1e-12)
    # vanishes as T_c approaches T_h
    vals = [relative_entropy_variance(gibbs_qubit(t).probs, gh) for t in (9.0, 9.9, 9.99, 9.999)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-10


def test_rates_and_nu_examples():
    for p in S4_INITIALS:
        assert asymptotic_rate(p, S4_TARGET) == pytest.approx(0.8, abs=1e-3)
    assert asymptotic_rate(S3["p1"], S3["p1"]) == 1.0
    u3, u2 = np.full(3, 1 / 3), np.full(2, 0.5)
    assert asymptotic_rate(u3, u2) == pytest.approx(math.log(3) / math.log(2), abs=1e-12)
    assert irreversibility_parameter(S3["p1"], S3["q"]) == pytest.approx(0.8843, abs=2e-3)
    assert irreversibility_parameter(S3["p2"], S3["q"]) == pytest.approx(1.1434, abs=2e-3)
    assert irreversibility_parameter(S3["q"], S3["q"]) == 1.0


def test_degenerate_targets():
    with pytest.raises(DegenerateTarget):
        asymptotic_rate([0.5, 0.5], [1.0, 0.0])
    with pytest.raises(DegenerateTarget):
        irreversibility_parameter([0.6, 0.4], [0.5, 0.5])
    with pytest.raises(DomainError):
        asymptotic_rate([0.5, 0.5], [0.9, 0.1], ResourceTheory.THERMODYNAMIC)


def test_fidelity_examples():
    assert fidelity([0.3, 0.7], [0.3, 0.7]) == pytest.approx(1.0, abs=1e-15)
    assert fidelity([1, 0], [0, 1]) == 0.0
    assert fidelity([0.5, 0.5], [1, 0]) == pytest.approx(0.5, abs=1e-15)
    assert fidelity([0.5, 0.5], [0.5, 0.5, 0.0]) == pytest.approx(1.0, abs=1e-15)


def test_gibbs_qubit():
    np.testing.assert_allclose(gibbs_qubit(10, 1).probs, [0.52498, 0.47502], atol=1e-5)
    np.testing.assert_allclose(gibbs_qubit(3, 0).probs, [0.5, 0.5])
    np.testing.assert_allclose(gibbs_qubit(0.01, 1).probs, [1.0, 0.0], atol=1e-12)
    with pytest.raises(DomainError):
        gibbs_qubit(0.0)
    np.testing.assert_allclose(gibbs_state([0, 1], 10).probs, gibbs_qubit(10).probs, rtol=1e-15)
    np.testing.assert_allclose(gibbs_state([0, 1, 5], np.inf).probs, np.full(3, 1 / 3))


# -- properties -----------------------------------------------------------------


def test_relative_entropy_nonnegative_random(rng):
    for _ in range(1000):
        d = int(rng.integers(2, 6))
        p, g = random_simplex(rng, d, zeros=True), random_gibbs(rng, d)
        assert relative_entropy(p, g) >= 0
        assert relative_entropy(g, g) <= 1e-10
        assert relative_entropy(p, g) > 1e-10 or np.allclose(p, g, atol=1e-4)


@settings(max_examples=200, deadline=None)
@given(simplex(), simplex())
def test_rate_and_nu_reciprocal(p, q):
    if len(p) != len(q):
        q = np.resize(q, len(p))
        q = q / q.sum()
    try:
        r = asymptotic_rate(p, q) * asymptotic_rate(q, p)
        nu = irreversibility_parameter(p, q) * irreversibility_parameter(q, p)
    except DegenerateTarget:
        return
    assert r == pytest.approx(1.0, abs=1e-10)
    assert nu == pytest.approx(1.0, abs=1e-10)


@settings(max_examples=200, deadline=None)
@given(simplex(), st.randoms(use_true_random=False))
def test_fidelity_symmetric_and_permutation_invariant(p, rnd):
    q = np.array(p[::-1])
    perm = list(range(len(p)))
    rnd.shuffle(perm)
    f = fidelity(p, q)
    assert f == pytest.approx(fidelity(q, p), abs=1e-15)
    assert f == pytest.approx(fidelity(p[perm], q[perm]), abs=1e-14)
    assert 0.0 <= f <= 1.0
    assert fidelity(p, p) == pytest.approx(1.0, abs=1e-14)
    if not np.allclose(p, q, atol=1e-6):
        assert f < 1.0


@settings(max_examples=200, deadline=None)
@given(simplex())
def test_uniform_reference_identities(p):
    u = np.full(len(p), 1.0 / len(p))
    assert relative_entropy(p, u) == pytest.approx(math.log(len(p)) - shannon_entropy(p), abs=1e-10)
    assert relative_entropy_variance(p, u) == pytest.approx(entropy_variance(p), abs=1e-10)


def test_thermo_content_uses_attached_gibbs():
    g = gibbs_qubit(10).probs
    p = ProbVec(gibbs_qubit(1).probs, g)
    q = ProbVec(gibbs_qubit(2).probs, g)
    th = ResourceTheory.THERMODYNAMIC
    assert asymptotic_rate(p, q, th) == pytest.approx(
        relative_entropy(p.probs, g) / relative_entropy(q.probs, g), rel=1e-14
    )
