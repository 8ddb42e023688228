import itertools
import math

import numpy as np
import pytest
from scipy.optimize import linprog

from resonant import (
    ProbVec,
    ResourceTheory,
    gibbs_qubit,
    iid_power,
    lorenz_curve,
    majorizes,
    max_rate,
    optimal_final_state,
    optimality_gap,
    oracle_optimal_fidelity,
)
from resonant.exceptions import DomainError, NoFeasibleRate
from resonant.majorization import _edmonds_vertex_fn, _pool
from resonant.resonance import HeatEngineFamily

from conftest import S3, S4_INITIALS, S4_TARGET, random_gibbs, random_simplex

TH = ResourceTheory.THERMODYNAMIC
ENT = ResourceTheory.ENTANGLEMENT
D2_FIDELITY = (math.sqrt(0.54) + math.sqrt(0.04)) ** 2


def random_pair(rng, theory, uniform=False):
    d = int(rng.integers(2, 5))
    p, q = random_simplex(rng, d, zeros=True), random_simplex(rng, d, zeros=True)
    if theory is TH:
        g = np.full(d, 1.0 / d) if uniform else random_gibbs(rng, d)
        return ProbVec(p, g), ProbVec(q, g)
    return ProbVec(p), ProbVec(q)


# -- Lorenz curves --------------------------------------------------------------


def test_lorenz_point_mass():
    c = lorenz_curve(iid_power([1.0, 0.0], 1))
    np.testing.assert_allclose(c.points, [(0, 0), (0.5, 1), (1, 1)])


def test_lorenz_diagonals():
    for d in (iid_power(np.full(4, 0.25), 3), iid_power(ProbVec([0.3, 0.7], [0.3, 0.7]), 5)):
        c = lorenz_curve(d)
        np.testing.assert_allclose(c.x, c.y, atol=1e-12)


def test_lorenz_log_eval_matches_interp(rng):
    p = ProbVec(random_simplex(rng, 3), random_gibbs(rng, 3))
    c = lorenz_curve(iid_power(p, 8))
    xs = np.linspace(1e-6, 1, 200)
    np.testing.assert_allclose(np.exp(c.log_eval(np.log(xs))), c(xs), atol=1e-12)
    assert np.all(np.diff(c.slopes) <= 1e-12)


# -- majorizes ------------------------------------------------------------------


def test_majorizes_examples(rng):
    assert majorizes([1.0, 0.0, 0.0], random_simplex(rng, 3))
    assert majorizes([0.6, 0.4], [0.6, 0.4])
    assert not majorizes([0.6, 0.4], [0.9, 0.1])
    g = random_gibbs(rng, 3)
    assert majorizes(ProbVec(random_simplex(rng, 3), g), ProbVec(g, g), TH)
    # zero padding in the plain setting
    assert majorizes([0.9, 0.1], [0.5, 0.3, 0.2])


def test_order_laws_on_random_triples(rng):
    hits = 0
    for _ in range(500):
        d = int(rng.integers(2, 5))
        g = random_gibbs(rng, d)
        a, b, c = (iid_power(ProbVec(random_simplex(rng, d, zeros=True), g), 1) for _ in range(3))
        assert majorizes(a, a, TH)
        if majorizes(a, b, TH) and majorizes(b, c, TH):
            hits += 1
            assert majorizes(a, c, TH)
    # chains built by mixing towards the Gibbs state always satisfy the premises
    for _ in range(100):
        d = int(rng.integers(2, 5))
        g = random_gibbs(rng, d)
        p = random_simplex(rng, d)
        s, t = sorted(rng.random(2))
        a, b, c = (ProbVec((1 - w) * g + w * p, g) for w in (1.0, t, s))
        assert majorizes(a, b, TH) and majorizes(b, c, TH) and majorizes(a, c, TH)
    assert hits > 0


# -- optimal_final_state ----------------------------------------------------------


def test_two_level_example():
    res = optimal_final_state(ProbVec([0.6, 0.4], [0.5, 0.5]), ProbVec([0.9, 0.1], [0.5, 0.5]), TH)
    assert not res.feasible_exact
    assert res.fidelity == pytest.approx(D2_FIDELITY, abs=1e-12)
    assert res.infidelity == pytest.approx(0.1261, abs=1e-4)
    np.testing.assert_allclose(np.sort(res.final.to_probvec().probs), [0.4, 0.6], atol=1e-12)
    # same numbers in the reverse (entanglement) direction
    res = optimal_final_state([0.9, 0.1], [0.6, 0.4], ENT)
    assert res.fidelity == pytest.approx(D2_FIDELITY, abs=1e-12)
    assert optimal_final_state([0.6, 0.4], [0.9, 0.1], ENT).feasible_exact


@pytest.mark.parametrize("n", [1, 10, 100])
@pytest.mark.parametrize("theory", [TH, ENT])
def test_self_conversion_exact(n, theory):
    p = ProbVec(S3["p1"], [0.5, 0.3, 0.2]) if theory is TH else ProbVec(S3["p1"])
    res = optimal_final_state(iid_power(p, n), iid_power(p, n), theory)
    assert res.infidelity == 0.0
    assert res.feasible_exact


@pytest.mark.parametrize("theory", [TH, ENT])
def test_oracle_equivalence(rng, theory):
    for k in range(40):
        p, q = random_pair(rng, theory, uniform=k % 2 == 0)
        res = optimal_final_state(p, q, theory)
        _, f_oracle = oracle_optimal_fidelity(p, q, theory)
        assert abs(res.fidelity - f_oracle) <= 1e-6
        init, fin = (p, res.final) if theory is TH else (res.final, p)
        assert majorizes(init, fin, theory, tol=1e-9)


def test_oracle_examples():
    _, f = oracle_optimal_fidelity(ProbVec([0.6, 0.4], [0.5, 0.5]), ProbVec([0.9, 0.1], [0.5, 0.5]))
    assert f == pytest.approx(D2_FIDELITY, abs=1e-6)
    _, f = oracle_optimal_fidelity(ProbVec([0.9, 0.1], [0.5, 0.5]), ProbVec([0.6, 0.4], [0.5, 0.5]))
    assert f == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(DomainError):
        oracle_optimal_fidelity(np.full(7, 1 / 7), np.full(7, 1 / 7))


def test_exact_feasibility_iff(rng):
    for _ in range(200):
        theory = TH if rng.random() < 0.5 else ENT
        p, q = random_pair(rng, theory)
        res = optimal_final_state(p, q, theory)
        feasible = majorizes(p, q, theory) if theory is TH else majorizes(q, p, theory)
        assert feasible == (res.infidelity <= 1e-9)


def test_monotone_in_initial(rng):
    for _ in range(30):
        d = int(rng.integers(2, 5))
        g = random_gibbs(rng, d)
        p, q = random_simplex(rng, d), ProbVec(random_simplex(rng, d), g)
        fids = [
            optimal_final_state(ProbVec((1 - t) * g + t * p, g), q, TH).fidelity
            for t in np.linspace(0, 1, 6)
        ]
        assert all(b >= a - 1e-12 for a, b in zip(fids, fids[1:]))


def test_large_n_heat_engine_certified():
    fam = HeatEngineFamily(10.0, 1.0, 0.95)
    p, q, _ = fam.states(1.0, 2.0)
    a, b = iid_power(p, 200), iid_power(q, 200)
    res = optimal_final_state(a, b, TH)
    assert 0 < res.infidelity < 1
    assert res.final.total_probability() == pytest.approx(1.0, abs=1e-9)
    assert abs(optimality_gap(a, b)) < 1e-10
    assert majorizes(a, res.final, TH)


def test_optimality_gap_small(rng):
    for _ in range(30):
        p, q = random_pair(rng, TH)
        gap = optimality_gap(p, q)
        assert abs(gap) < 1e-9


def test_edmonds_vertex_matches_linprog(rng):
    for _ in range(30):
        d = int(rng.integers(2, 5))
        p, g = random_simplex(rng, d), random_gibbs(rng, d)
        c = rng.normal(size=d)
        vertex = _edmonds_vertex_fn(p, g)
        curve = lorenz_curve(iid_power(ProbVec(p, g), 1))
        rows, caps = [], []
        for r in range(1, d):
            for sub in itertools.combinations(range(d), r):
                row = np.zeros(d)
                row[list(sub)] = 1.0
                rows.append(row)
                caps.append(float(curve(g[list(sub)].sum())))
        lp = linprog(-c, A_ub=rows, b_ub=caps, A_eq=[np.ones(d)], b_eq=[1.0], bounds=[(0, None)] * d)
        assert lp.status == 0
        assert c @ vertex(c) == pytest.approx(-lp.fun, abs=1e-9)


def test_pool_hull():
    sizes, bx, by, lam = _pool(np.array([1.0, 1.0, 1.0]), np.array([2.0, 0.0, 1.0]))
    assert sizes.tolist() == [3]
    assert lam.tolist() == [1.0]
    sizes, _, _, lam = _pool(np.array([1.0, 1.0]), np.array([0.5, 1.5]))
    assert sizes.tolist() == [1, 1]


# -- rates ------------------------------------------------------------------------


def test_max_rate_self_conversion():
    for n in (3, 10):
        m, r = max_rate(S3["p1"], S3["p1"], n, 0.01)
        assert m >= n and r >= 1.0


def test_max_rate_below_asymptote():
    for p in S4_INITIALS:
        m, r = max_rate(p, S4_TARGET, 20, 0.01)
        assert 0 < r < 0.8


def test_max_rate_errors():
    u = [0.5, 0.5]
    with pytest.raises(NoFeasibleRate):
        max_rate(ProbVec([0.6, 0.4], u), ProbVec([1 - 1e-9, 1e-9], u), 5, 0.01)
    with pytest.raises(DomainError):
        max_rate(S3["p1"], S3["q"], 5, 1.5)
    with pytest.raises(DomainError):
        max_rate(S3["p1"], [1.0, 0.0, 0.0], 5, 0.01)


def test_thermo_gibbs_needed():
    gh = gibbs_qubit(10).probs
    m, r = max_rate(ProbVec([0.9, 0.1], gh), ProbVec([0.8, 0.2], gh), 10, 0.05)
    assert m >= 10
