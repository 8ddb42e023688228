import math

import numpy as np
import pytest

from resonant import (
    ProbVec,
    entropy_variance,
    from_probvec,
    gibbs_qubit,
    iid_power,
    mixed_power,
    product,
    relative_entropy,
    shannon_entropy,
)
from resonant.atoms import _canonical, composition_count, compositions, log1mexp
from resonant.exceptions import DomainError, OverflowGuard

from conftest import S3, random_gibbs, random_simplex


def same_atoms(a, b, tol=1e-12):
    if len(a) != len(b):
        return False
    for x, y in ((a.log_p, b.log_p), (a.log_g, b.log_g), (a.log_mult, b.log_mult)):
        fin = np.isfinite(x)
        if not np.array_equal(fin, np.isfinite(y)):
            return False
        if not np.allclose(x[fin], y[fin], atol=tol, rtol=0):
            return False
    return True


def test_log1mexp():
    a = np.array([-1e-20, -1e-5, -0.5, -1.0, -50.0])
    with np.errstate(divide="ignore"):
        ref = np.where(a > -1, np.log(-np.expm1(a)), np.log1p(-np.exp(a)))
    np.testing.assert_allclose(log1mexp(a), ref, rtol=1e-14)
    assert log1mexp(0.0) == -np.inf


def test_compositions():
    c = compositions(4, 3)
    assert len(c) == composition_count(4, 3) == 15
    assert np.all(c.sum(axis=1) == 4)
    assert len({tuple(r) for r in c}) == 15


def test_fair_coin_square_merges_to_one_atom():
    d = iid_power([0.5, 0.5], 2)
    assert len(d) == 1
    assert d.log_p[0] == pytest.approx(math.log(0.25))
    assert math.exp(d.log_mult[0]) == pytest.approx(4.0)


def test_single_copy_is_identity():
    p = [0.5, 0.3, 0.2]
    d = iid_power(p, 1)
    assert sorted(np.exp(d.log_p)) == pytest.approx(sorted(p))
    np.testing.assert_allclose(d.log_mult, 0.0)
    assert same_atoms(d, from_probvec(p))


def test_qutrit_thirty_copies_has_496_atoms():
    d = iid_power(S3["p1"], 30)
    assert len(d) == math.comb(32, 2) == 496
    assert d.total_probability() == pytest.approx(1.0, abs=1e-12)


def test_product_with_point_mass_shifts_gibbs():
    g = gibbs_qubit(10).probs
    x = iid_power(ProbVec([0.7, 0.3], g), 5)
    pm = iid_power(ProbVec([1.0, 0.0], [0.6, 0.4]), 1)
    px = product(x, pm)
    s = px.supported
    assert s.sum() == len(x)
    np.testing.assert_allclose(px.log_p[s], x.log_p, atol=1e-14)
    np.testing.assert_allclose(px.log_g[s], x.log_g + math.log(0.6), atol=1e-14)


def test_product_atom_count_bound():
    a = iid_power(S3["p1"], 30)
    b = iid_power(S3["p2"], 30)
    assert len(product(a, b)) <= 496 * 496
    with pytest.raises(OverflowGuard):
        product(a, b, cap=1000)
    with pytest.raises(OverflowGuard):
        iid_power(S3["p1"], 30, cap=100)


def test_mixed_power_limits():
    p1, p2 = S3["p1"], S3["p2"]
    assert same_atoms(mixed_power(p1, p2, 10, 0.0), iid_power(p2, 10))
    assert same_atoms(mixed_power(p1, p2, 10, 1.0), iid_power(p1, 10))
    for lam in (0.3, 0.5, 0.7):
        assert same_atoms(mixed_power(p1, p1, 10, lam), iid_power(p1, 10), tol=1e-10)
    with pytest.raises(DomainError):
        mixed_power(p1, p2, 10, 1.5)


def test_battery_support_restriction():
    # a point-mass battery leaves n + 1 atoms plus the null atom
    gh = gibbs_qubit(10).probs
    ref = np.kron(gh, [0.6, 0.4])
    p = ProbVec(np.kron(gibbs_qubit(1).probs, [1.0, 0.0]), ref)
    d = iid_power(p, 200)
    assert d.supported.sum() == 201
    assert (~d.supported).sum() == 1
    assert d.total_gibbs() == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("n", [1, 3, 6])
def test_additivity_against_expansion(rng, n):
    for _ in range(5):
        d = int(rng.integers(2, 4))
        p = ProbVec(random_simplex(rng, d), random_gibbs(rng, d))
        atoms = iid_power(p, n)
        full = atoms.to_probvec()
        assert full.dim == d**n
        assert shannon_entropy(full) == pytest.approx(n * shannon_entropy(p), abs=1e-8)
        assert entropy_variance(full) == pytest.approx(n * entropy_variance(p), abs=1e-8)
        assert relative_entropy(full) == pytest.approx(n * relative_entropy(p), abs=1e-8)
        assert atoms.entropy() == pytest.approx(n * shannon_entropy(p), abs=1e-8)
        assert atoms.relative_entropy() == pytest.approx(n * relative_entropy(p), abs=1e-8)


def test_merge_idempotent_and_mass_preserving(rng):
    for _ in range(20):
        d = int(rng.integers(2, 5))
        p = ProbVec(random_simplex(rng, d, zeros=True), random_gibbs(rng, d))
        a = iid_power(p, int(rng.integers(1, 8)))
        again = _canonical(a.log_p, a.log_g, a.log_mult, uniform=a.uniform, log_dim=a.log_dim, meta=a.meta)
        assert same_atoms(a, again)
        assert a.total_probability() == pytest.approx(1.0, rel=1e-9)
        assert a.total_gibbs() == pytest.approx(1.0, rel=1e-9)


def test_canonical_order_by_ratio(rng):
    p = ProbVec(random_simplex(rng, 3), random_gibbs(rng, 3))
    a = iid_power(p, 7)
    r = (a.log_p - a.log_g)[a.supported]
    assert np.all(np.diff(r) <= 1e-12)
    assert not a.supported[:-1].any() or a.supported[: a.supported.sum()].all()


def test_rebase_pads_with_zeros():
    a = iid_power([0.6, 0.4], 1)
    b = a.rebase(math.log(4))
    assert b.supported.sum() == 2
    assert math.exp(b.log_g[~b.supported][0]) == pytest.approx(0.5)
    with pytest.raises(DomainError):
        b.rebase(math.log(2))


def test_zero_copies_and_negative():
    assert iid_power([0.3, 0.7], 0).total_probability() == pytest.approx(1.0)
    with pytest.raises(DomainError):
        iid_power([0.3, 0.7], -1)
