"""Lorenz curves, (thermo-)majorization and optimal approximate conversions.

Two conversion directions are supported, selected by the resource theory:

* thermodynamic (also noisy operations when the reference is uniform): the
  final state must be thermo-majorized by the initial one;
* entanglement / coherence: the final state must majorize the initial one
  (pure-state LOCC and incoherent operations).

In both cases the fidelity-optimal final state is built from a convex hull in
the plane (cumulative target mass, cumulative constraint mass); the hull
slopes are the factors by which blocks of target atoms are rescaled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp

from .atoms import AtomDist, _canonical, _close, align, iid_power, log1mexp
from .dist import ProbVec, ResourceTheory, as_probvec, asymptotic_rate
from .exceptions import ConvergenceError, DomainError, IterationLimit, NoFeasibleRate

#: a Lorenz-curve deficit up to this much still counts as dominated
DOMINATION_TOL = 1e-9
#: allowed disagreement between constructed and re-evaluated fidelity
VERIFY_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class LorenzCurve:
    """Concave piecewise-linear curve of cumulative probability vs Gibbs mass.

    Breakpoints are stored in log space (``log_x[0] == -inf`` is the origin)
    together with the log Gibbs mass and log probability of every segment,
    so the curve can be evaluated accurately at exponentially small ``x``.
    """

    log_x: np.ndarray
    log_y: np.ndarray
    seg_log_dx: np.ndarray
    seg_log_dy: np.ndarray

    @property
    def x(self) -> np.ndarray:
        return np.exp(self.log_x)

    @property
    def y(self) -> np.ndarray:
        return np.exp(self.log_y)

    @property
    def points(self):
        return list(zip(self.x.tolist(), self.y.tolist()))

    @property
    def slopes(self) -> np.ndarray:
        return np.exp(self.seg_log_dy - self.seg_log_dx)

    def __len__(self):
        return self.log_x.size

    def __call__(self, x):
        return np.interp(x, self.x, self.y)

    def log_eval(self, log_x):
        """Log of the curve at ``exp(log_x)``, accurate for tiny arguments."""
        lx = np.atleast_1d(np.asarray(log_x, dtype=float))
        nseg = self.seg_log_dx.size
        i = np.clip(np.searchsorted(self.log_x, lx, side="right") - 1, 0, nseg - 1)
        base_lx = self.log_x[i]
        with np.errstate(invalid="ignore", divide="ignore"):
            gap = np.where(np.isfinite(base_lx), base_lx - lx, -np.inf)
            delta = lx + log1mexp(np.minimum(gap, 0.0))
            out = np.logaddexp(self.log_y[i], delta + self.seg_log_dy[i] - self.seg_log_dx[i])
        out = np.minimum(out, 0.0)
        out[lx >= 0.0] = 0.0
        out[lx == -np.inf] = -np.inf
        return out


def lorenz_curve(d: AtomDist) -> LorenzCurve:
    """Lorenz curve of an atom distribution against its own Gibbs weights."""
    ratio = d.log_p - d.log_g
    order = np.lexsort((-d.log_p, -ratio))
    ratio = ratio[order]
    lm = d.log_mass[order]
    lg = d.log_gibbs_mass[order]

    if ratio.size > 1:
        fin = np.isfinite(ratio)
        same = np.zeros(ratio.size - 1, dtype=bool)
        both = fin[1:] & fin[:-1]
        same[both] = _close(ratio[1:][both], ratio[:-1][both])
        same |= ~fin[1:] & ~fin[:-1]
        starts = np.concatenate(([0], np.flatnonzero(~same) + 1))
        lm = np.logaddexp.reduceat(lm, starts)
        lg = np.logaddexp.reduceat(lg, starts)

    lg = lg - logsumexp(lg)
    total_p = logsumexp(lm)
    lm = lm - total_p
    log_x = np.concatenate(([-np.inf], np.logaddexp.accumulate(lg)))
    log_y = np.concatenate(([-np.inf], np.logaddexp.accumulate(lm)))
    log_x[-1] = 0.0
    log_y[-1] = 0.0
    return LorenzCurve(log_x, np.minimum(log_y, 0.0), lg, lm)


def _coerce_atoms(d) -> AtomDist:
    if isinstance(d, AtomDist):
        return d
    return iid_power(as_probvec(d), 1)


def _align_for(a: AtomDist, b: AtomDist, theory):
    if theory is not None and ResourceTheory.coerce(theory).uses_gibbs:
        return a, b
    return align(a, b)


def majorizes(a, b, theory=None, tol: float = DOMINATION_TOL) -> bool:
    """True iff the Lorenz curve of ``a`` lies on or above that of ``b``.

    Uniform references of different sizes are zero padded unless ``theory``
    is thermodynamic, in which case the normalised curves are compared as-is.
    """
    a, b = _align_for(_coerce_atoms(a), _coerce_atoms(b), theory)
    ca, cb = lorenz_curve(a), lorenz_curve(b)
    lxs = np.union1d(ca.log_x, cb.log_x)
    lxs = lxs[np.isfinite(lxs)]
    deficit = np.exp(cb.log_eval(lxs)) - np.exp(ca.log_eval(lxs))
    return bool(np.all(deficit <= tol))


@dataclass(frozen=True, eq=False)
class ConversionResult:
    """Outcome of one optimal approximate conversion.

    ``support_mass`` is the probability the final state puts on the target's
    support; for a target that is a point mass on some factor (a charged
    battery, say) ``1 - support_mass`` is the infidelity of that marginal.
    """

    final: AtomDist
    fidelity: float
    infidelity: float
    feasible_exact: bool
    support_mass: float = 1.0
    diagnostics: dict = field(default_factory=dict)


def _pool(dx, dy, increasing=True):
    """Pool adjacent blocks until their slopes ``dy/dx`` are monotone.

    Working on increments rather than cumulative points keeps full relative
    precision for blocks of tiny mass near the end of a curve.  Returns the
    block sizes (number of pooled increments) and the pooled ``dx`` and
    ``dy``; the pooled slopes trace the lower (``increasing``) or upper
    convex hull of the cumulative points.
    """
    sizes, bx, by = [], [], []
    for cx, cy in zip(dx.tolist(), dy.tolist()):
        size = 1
        while bx:
            cross = by[-1] * cx - cy * bx[-1]
            if (cross >= 0) if increasing else (cross <= 0):
                size += sizes.pop()
                cx += bx.pop()
                cy += by.pop()
            else:
                break
        sizes.append(size)
        bx.append(cx)
        by.append(cy)
    bx, by = np.array(bx), np.array(by)
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = np.where(bx > 0, by / bx, 0.0)
    return np.array(sizes), bx, by, np.maximum(lam, 0.0)


def _infidelity(dq, dc, lam):
    """``1 - (sum dq sqrt(lam))^2`` without cancellation near zero."""
    root = np.sqrt(lam)
    one_minus_s = np.sum((dq - dc) / (1.0 + root)) + (1.0 - np.sum(dq))
    s = 1.0 - one_minus_s
    return float(min(max(one_minus_s * (1.0 + s), 0.0), 1.0))



def _pieces(log_q, log_x, log_g, log_mult):
    return {
        "log_q": np.asarray(log_q, dtype=float),
        "log_x": np.asarray(log_x, dtype=float),
        "log_g": np.asarray(log_g, dtype=float),
        "log_mult": np.asarray(log_mult, dtype=float),
    }


def _thermo_solve(initial: AtomDist, target: AtomDist):
    """Final state thermo-majorized by ``initial`` closest to ``target``.

    Walking the target atoms in Lorenz order, the achievable cumulative mass
    is capped by the initial curve at the same Gibbs mass.  The best
    cumulative profile under those caps is the lower convex hull of the
    points (target mass, cap); every hull segment rescales its target atoms
    by its slope.  Mass the caps leave over goes off the target support.
    """
    curve = lorenz_curve(initial)
    s = target.supported
    ratio = (target.log_p - target.log_g)[s]
    order = np.lexsort((-target.log_p[s], -ratio))
    t_lp = target.log_p[s][order]
    t_lg = target.log_g[s][order]
    t_lm = target.log_mult[s][order]

    log_total_g = logsumexp(target.log_gibbs_mass)
    log_X = np.logaddexp.accumulate(t_lg + t_lm) - log_total_g
    mass = np.exp(t_lp + t_lm)
    mass = mass / mass.sum()
    P = np.concatenate(([0.0], np.maximum.accumulate(np.exp(curve.log_eval(log_X)))))

    sizes, dq, dc, lam = _pool(mass, np.diff(P), increasing=True)
    atom_lam = np.repeat(lam, sizes)
    support_mass = float(P[-1])

    with np.errstate(divide="ignore"):
        new_lp = t_lp + np.log(atom_lam)
    pieces = [(t_lp, new_lp, t_lg, t_lm)]
    leftover = 1.0 - support_mass
    if not s.all() and leftover > 0:
        lump = float(logsumexp(target.log_gibbs_mass[~s]))
        if target.uniform:
            # spread evenly over the individual outcomes off the target support
            log_n0 = lump + target.log_dim
            pieces.append(([-np.inf], [math.log(leftover) - log_n0], [-target.log_dim], [log_n0]))
        else:
            pieces.append(([-np.inf], [math.log(leftover)], [lump], [0.0]))
    pieces = _pieces(*(np.concatenate(col) for col in zip(*pieces)))
    return pieces, _infidelity(dq, dc, lam), support_mass, lam


def _entangle_solve(initial: AtomDist, target: AtomDist):
    """Final state majorizing ``initial`` closest to ``target``.

    In descending order the final state's cumulative mass must stay above
    the initial Lorenz curve, so the optimal profile is the upper concave
    hull of (target cumulative, initial cumulative) sampled at the union of
    both curves' breakpoints.  Target atoms straddling a hull vertex are
    split there.
    """
    ci, ct = lorenz_curve(initial), lorenz_curve(target)
    s = target.supported
    log_support = float(logsumexp(target.log_gibbs_mass[s]) - logsumexp(target.log_gibbs_mass))
    log_support = min(log_support, 0.0)
    cut = np.concatenate((ci.log_x, ct.log_x))
    cut = np.sort(cut[np.isfinite(cut) & (cut < log_support)])
    cut = np.append(cut, log_support)
    keep = np.concatenate((~_close(cut[1:], cut[:-1]), [True]))
    cut = cut[keep]

    # piece k covers Gibbs mass [cut[k-1], cut[k]] inside one segment of each curve
    log_u = np.concatenate(([-np.inf], cut))
    with np.errstate(invalid="ignore", divide="ignore"):
        gap = np.where(np.isfinite(log_u[:-1]), log_u[:-1] - log_u[1:], -np.inf)
        log_du = log_u[1:] + log1mexp(np.minimum(gap, 0.0))
        mid = log_u[1:] + np.log1p(np.exp(gap)) - math.log(2.0)
    seg = np.clip(np.searchsorted(ct.log_x, mid, side="left") - 1, 0, ct.seg_log_dx.size - 1)
    log_dim = target.log_dim
    piece_lq = (ct.seg_log_dy - ct.seg_log_dx)[seg] - log_dim
    dq = np.exp(piece_lq + log_du + log_dim)
    dq = dq / dq.sum()
    iseg = np.searchsorted(ci.log_x, mid, side="left") - 1
    inside = (iseg >= 0) & (iseg < ci.seg_log_dx.size)
    dp = np.zeros(cut.size)
    with np.errstate(invalid="ignore"):
        dp[inside] = np.exp((ci.seg_log_dy - ci.seg_log_dx)[iseg[inside]] + log_du[inside])
    dp[-1] += max(1.0 - dp.sum(), 0.0)
    dp = dp / dp.sum()

    sizes, dq, dc, lam = _pool(dq, dp, increasing=False)
    piece_lam = np.repeat(lam, sizes)
    with np.errstate(divide="ignore"):
        new_lp = piece_lq + np.log(piece_lam)
    pieces = _pieces(piece_lq, new_lp, np.full(cut.size, -log_dim), log_du + log_dim)
    return pieces, _infidelity(dq, dc, lam), 1.0, lam


def _pieces_fidelity(pieces) -> float:
    lq, lx, lm = pieces["log_q"], pieces["log_x"], pieces["log_mult"]
    ok = np.isfinite(lq) & np.isfinite(lx)
    return float(np.sum(np.exp(lm[ok] + 0.5 * (lq[ok] + lx[ok]))) ** 2)


def _feasible(initial, final, theory) -> bool:
    if theory.uses_gibbs:
        return majorizes(initial, final, theory)
    return majorizes(final, initial, theory)


def optimal_final_state(initial, target, theory=ResourceTheory.THERMODYNAMIC, verify=True):
    """Fidelity-optimal reachable approximation of ``target`` from ``initial``.

    Parameters
    ----------
    initial, target : AtomDist or ProbVec
        Distributions over a common reference (Gibbs weights, or uniform).
    theory : ResourceTheory
        Thermodynamic: the final state is thermo-majorized by ``initial``.
        Entanglement or coherence: the final state majorizes ``initial``.
    verify : bool
        Re-evaluate the fidelity piece by piece and re-check feasibility of
        the returned state; disagreement raises ``ConvergenceError``.

    Returns
    -------
    ConversionResult
    """
    theory = ResourceTheory.coerce(theory)
    initial, target = _align_for(_coerce_atoms(initial), _coerce_atoms(target), theory)
    if _feasible(initial, target, theory):
        return ConversionResult(target, 1.0, 0.0, True, 1.0, {"blocks": 0})

    solve = _thermo_solve if theory.uses_gibbs else _entangle_solve
    pieces, eps, support_mass, lam = solve(initial, target)
    final = _canonical(
        pieces["log_x"],
        pieces["log_g"],
        pieces["log_mult"],
        uniform=target.uniform,
        log_dim=target.log_dim,
        meta=target.meta,
        null=None if target.uniform else _off_support_lump(target, pieces),
    )
    fid = 1.0 - eps
    if verify:
        direct = _pieces_fidelity(pieces)
        if abs(direct - fid) > VERIFY_TOL:
            raise ConvergenceError(
                f"hull fidelity {fid!r} disagrees with direct evaluation {direct!r}"
            )
        if not _feasible(initial, final, theory):
            raise ConvergenceError("constructed final state violates the majorization constraint")
    diagnostics = {"blocks": int(lam.size), "min_scale": float(lam.min()), "max_scale": float(lam.max())}
    return ConversionResult(final, fid, eps, False, support_mass, diagnostics)


def _off_support_lump(target: AtomDist, pieces):
    """Gibbs mass off the target support not already covered by a piece."""
    s = target.supported
    if s.all() or np.any(~np.isfinite(pieces["log_q"])):
        return None
    return float(logsumexp(target.log_gibbs_mass[~s]))


def optimality_gap(initial, target) -> float:
    """Frank-Wolfe duality gap of the constructed thermodynamic optimum.

    The objective is ``sum_i sqrt(q_i x_i)`` over states thermo-majorized by
    ``initial``.  Its gradient is constant on every piece of the solution,
    so the linear subproblem is solved exactly at atom level by Edmonds'
    greedy rule, which makes this a certificate usable at any ``n``.  A gap
    at round-off level proves optimality.
    """
    initial, target = _coerce_atoms(initial), _coerce_atoms(target)
    if _feasible(initial, target, ResourceTheory.THERMODYNAMIC):
        return 0.0
    pieces = _thermo_solve(initial, target)[0]
    lq, lx, lg, lm = pieces["log_q"], pieces["log_x"], pieces["log_g"], pieces["log_mult"]
    with np.errstate(invalid="ignore"):
        lc = np.where(np.isfinite(lq), 0.5 * (lq - lx), -np.inf)
    order = np.argsort(-lc, kind="stable")
    # zero-gradient Gibbs mass off the target support sorts last and adds nothing
    log_G = np.logaddexp.accumulate((lg + lm)[order]) - logsumexp(target.log_gibbs_mass)
    cum = np.exp(lorenz_curve(initial).log_eval(log_G))
    v = np.diff(np.concatenate(([0.0], np.maximum.accumulate(cum))))
    x = np.exp(lx[order] + lm[order])
    c = np.exp(lc[order])
    if np.any(np.isinf(c) & (v > 0)):
        return math.inf
    live = np.isfinite(c) & (c > 0)
    return float(0.5 * np.sum(c[live] * (v[live] - x[live])))


# -- independent oracle ------------------------------------------------------


def _explicit_pair(initial, target, theory):
    p = as_probvec(initial)
    q = as_probvec(target)
    if theory.uses_gibbs:
        if p.dim != q.dim:
            raise DomainError("thermodynamic oracle needs equal dimensions")
        g = p.reference if p.gibbs is not None else q.reference
        if q.gibbs is not None and not np.allclose(q.gibbs, g, rtol=0, atol=1e-12):
            raise DomainError("initial and target use different Gibbs weights")
        return p.probs.copy(), q.probs.copy(), g.copy()
    d = max(p.dim, q.dim)
    pp = np.pad(p.probs, (0, d - p.dim))
    qq = np.pad(q.probs, (0, d - q.dim))
    return pp, qq, np.full(d, 1.0 / d)


def _edmonds_vertex_fn(p, g):
    """Linear maximisation over states thermo-majorized by ``p``.

    The feasible set is the base polytope of ``S -> L_p(g(S))``; Edmonds'
    greedy rule (coordinates by decreasing objective weight) is exact.
    """
    with np.errstate(divide="ignore"):
        ratio = np.where(p > 0, p / g, 0.0)
    order = np.argsort(-ratio, kind="stable")
    xs = np.concatenate(([0.0], np.cumsum(g[order])))
    ys = np.concatenate(([0.0], np.cumsum(p[order])))
    xs[-1] = ys[-1] = 1.0

    def vertex(c):
        o = np.argsort(-c, kind="stable")
        vals = np.interp(np.cumsum(g[o]), xs, ys)
        out = np.empty_like(p)
        out[o] = np.diff(np.concatenate(([0.0], vals)))
        return out

    return vertex


def _chain_vertex_fn(p, q):
    """Linear maximisation over the chain relaxation of ``{x : x majorizes p}``.

    With positions ordered by increasing target weight, the mass on the
    ``k`` lowest positions may not exceed the ``k`` smallest entries of
    ``p``.  These nested capacities form a polymatroid, so greedy filling in
    order of decreasing objective weight is exact.
    """
    rank = np.empty(q.size, dtype=int)
    rank[np.argsort(q, kind="stable")] = np.arange(q.size)
    caps = np.cumsum(np.sort(p))
    caps[-1] = 1.0

    def vertex(c):
        resid = caps.copy()
        out = np.zeros_like(p)
        for i in np.argsort(-c, kind="stable"):
            amt = max(resid[rank[i]:].min(), 0.0)
            out[i] = amt
            resid[rank[i]:] -= amt
        return out

    return vertex


def oracle_optimal_fidelity(
    initial, target, theory=ResourceTheory.THERMODYNAMIC, tol=1e-10, max_iter=10**6
):
    """Brute-force optimal fidelity by pairwise conditional gradient.

    Maximises ``sum_i sqrt(q_i x_i)`` over the convex feasible set using
    pairwise Frank-Wolfe steps with exact line search; the linear
    subproblems are solved by greedy allocation.  Stops when the duality gap
    drops below ``tol``.  Intended for explicit distributions of dimension at
    most six.

    Returns
    -------
    (ProbVec, float)
        The optimal final distribution and its fidelity with the target.
    """
    theory = ResourceTheory.coerce(theory)
    p, q, g = _explicit_pair(initial, target, theory)
    d = p.size
    if d > 6:
        raise DomainError("oracle is limited to dimension 6")
    vertex = _edmonds_vertex_fn(p, g) if theory.uses_gibbs else _chain_vertex_fn(p, q)
    sq = np.sqrt(q)
    live = q > 0

    def grad(x):
        out = np.zeros(d)
        out[live] = 0.5 * sq[live] / np.sqrt(np.maximum(x[live], 1e-300))
        return out

    def slope(x, direction, t):
        y = x + t * direction
        m = live & (direction != 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.sum(0.5 * sq[m] * direction[m] / np.sqrt(np.maximum(y[m], 0.0)))
        return val if np.isfinite(val) else -1e300

    active = {}
    for i in range(d):
        c = np.zeros(d)
        c[i] = 1.0
        v = vertex(c)
        active.setdefault(v.tobytes(), [v, 0.0])[1] += 1.0 / d
    x = sum(w * v for v, w in active.values())

    for it in range(max_iter):
        gr = grad(x)
        s = vertex(gr)
        gap = float(gr @ (s - x))
        if gap < tol:
            break
        key_v, (v, w_v) = min(active.items(), key=lambda kv: float(gr @ kv[1][0]))
        direction = s - v
        t_max = w_v
        if slope(x, direction, t_max) >= 0:
            t = t_max
        else:
            t = brentq(lambda t: slope(x, direction, t), 0.0, t_max, xtol=1e-16, rtol=1e-15)
        active.setdefault(s.tobytes(), [s, 0.0])[1] += t
        active[key_v][1] -= t
        if active[key_v][1] <= 1e-18:
            del active[key_v]
        x = x + t * direction
        if it % 500 == 499:
            x = sum(w * v for v, w in active.values())
    else:
        raise IterationLimit(f"oracle did not converge in {max_iter} steps (gap {gap:.3g})")

    x = np.clip(x, 0.0, None)
    x = x / x.sum()
    fid = float(np.sum(np.sqrt(q * x)) ** 2)
    return ProbVec(x), min(fid, 1.0)


# -- rates ----------------------------------------------------------------------


def _default_theory(p: ProbVec, q: ProbVec):
    if p.gibbs is not None or q.gibbs is not None:
        return ResourceTheory.THERMODYNAMIC
    return ResourceTheory.ENTANGLEMENT


def max_rate(initial_base, target_base, n: int, epsilon: float, theory=None, cap=None):
    """Largest number of target copies reachable from ``n`` initial copies.

    Returns ``(m, m / n)`` where ``m`` is the largest copy count whose optimal
    infidelity is below ``epsilon``.  Infidelity is assumed non-decreasing in
    ``m``; the bisection records every evaluation and falls back to a linear
    scan if the record contradicts that.
    """
    p = as_probvec(initial_base)
    q = as_probvec(target_base)
    theory = _default_theory(p, q) if theory is None else ResourceTheory.coerce(theory)
    if not 0.0 < epsilon < 1.0:
        raise DomainError("epsilon must lie in (0, 1)")
    r_inf = asymptotic_rate(p, q, theory)
    kwargs = {} if cap is None else {"cap": cap}
    init = iid_power(p, n, **kwargs)
    record = {}

    def infid(m):
        if m not in record:
            target = iid_power(q, m, **kwargs)
            record[m] = optimal_final_state(init, target, theory).infidelity
        return record[m]

    def ok(m):
        return infid(m) < epsilon

    if not ok(1):
        raise NoFeasibleRate(f"even one target copy has infidelity {record[1]:.3g}")

    lo, hi = 1, max(2, math.ceil(1.5 * r_inf * n))
    seed = min(max(round(r_inf * n), 1), hi)
    if ok(seed):
        lo = seed
    else:
        hi = seed
    while ok(hi):
        lo, hi = hi, 2 * hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            lo = mid
        else:
            hi = mid

    ms = sorted(record)
    vals = [record[m] for m in ms]
    if any(a > b + 1e-12 for a, b in zip(vals, vals[1:])):
        lo = max(m for m in range(1, max(ms) + 1) if ok(m))
    return lo, lo / n
