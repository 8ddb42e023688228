"""Exact, compact representation of tensor powers via type classes.

An ``AtomDist`` groups the outcomes of ``p^{(x)n}`` into atoms: sets of
outcomes sharing one probability and one Gibbs weight.  Each atom stores
per-outcome ``log_p`` and ``log_g`` plus ``log_mult``, the log of the number
of outcomes it covers, so everything stays finite for ``n`` in the hundreds.

Outcomes of probability zero are never enumerated.  Their combined Gibbs mass
is kept in a single trailing *null atom* (``log_p = -inf``, ``log_mult = 0``,
``log_g`` = log of the total mass), which is all a Lorenz curve needs to know
about them.
"""

from __future__ import annotations

import math
from collections import namedtuple
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

from .dist import ProbVec, as_probvec
from .exceptions import DomainError, OverflowGuard

#: default cap on the number of atoms an enumeration may produce
DEFAULT_ATOM_CAP = 10**7
#: relative tolerance used to merge atoms with numerically equal logs
MERGE_TOL = 1e-12
#: a supported share of the uniform reference this close to one is all of it
NULL_TOL = 1e-12

Atom = namedtuple("Atom", "log_p log_g log_mult")


def log1mexp(a):
    """``log(1 - exp(a))`` for ``a <= 0``, accurate near both ends."""
    a = np.asarray(a, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(
            a > -math.log(2), np.log(-np.expm1(np.minimum(a, 0.0))), np.log1p(-np.exp(a))
        )
    return out


def _close(a, b):
    return np.abs(a - b) <= MERGE_TOL * np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))


@dataclass(frozen=True, eq=False)
class AtomDist:
    """Type-class representation of a (product of) i.i.d. distribution(s).

    Parameters
    ----------
    log_p, log_g, log_mult : ndarray
        Per-atom log probability of one outcome, log Gibbs weight of one
        outcome and log of the number of outcomes in the atom.
    uniform : bool
        True when the Gibbs weights are the uniform distribution, i.e. the
        plain (not thermo-) majorization setting.
    log_dim : float
        Log of the total number of outcomes; only meaningful if ``uniform``.
    meta : tuple
        ``(dimension, copies)`` pairs of the factors, for bookkeeping.

    Instances built through the module functions are canonical: equal atoms
    merged, atoms ordered by ``log_p - log_g`` descending, null atom last.
    """

    log_p: np.ndarray
    log_g: np.ndarray
    log_mult: np.ndarray
    uniform: bool = False
    log_dim: float = float("nan")
    meta: tuple = field(default=())

    def __post_init__(self):
        for name in ("log_p", "log_g", "log_mult"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def __len__(self):
        return self.log_p.size

    def __iter__(self):
        for row in zip(self.log_p, self.log_g, self.log_mult):
            yield Atom(*map(float, row))

    def __repr__(self):
        kind = "uniform" if self.uniform else "gibbs"
        return f"AtomDist({len(self)} atoms, {kind}, meta={self.meta})"

    @property
    def atoms(self):
        return list(self)

    @property
    def supported(self) -> np.ndarray:
        """Mask of atoms with non-zero probability."""
        return np.isfinite(self.log_p)

    @property
    def log_mass(self) -> np.ndarray:
        """Log of the total probability carried by each atom."""
        with np.errstate(invalid="ignore"):
            return np.where(self.supported, self.log_p + self.log_mult, -np.inf)

    @property
    def log_gibbs_mass(self) -> np.ndarray:
        return self.log_g + self.log_mult

    def total_probability(self) -> float:
        return float(np.exp(logsumexp(self.log_mass)))

    def total_gibbs(self) -> float:
        return float(np.exp(logsumexp(self.log_gibbs_mass)))

    def entropy(self) -> float:
        s = self.supported
        return float(-np.sum(np.exp(self.log_mass[s]) * self.log_p[s]))

    def relative_entropy(self) -> float:
        s = self.supported
        return float(np.sum(np.exp(self.log_mass[s]) * (self.log_p[s] - self.log_g[s])))

    def to_probvec(self, max_outcomes: int = 2**16) -> ProbVec:
        """Expand into an explicit distribution (small instances only).

        The null atom becomes a single zero-probability outcome carrying its
        whole Gibbs mass, which leaves every majorization quantity intact.
        """
        mult = np.rint(np.exp(self.log_mult)).astype(np.int64)
        mult[~self.supported] = 1
        if mult.sum() > max_outcomes:
            raise OverflowGuard(f"expansion would have {mult.sum()} outcomes")
        probs = np.repeat(np.exp(self.log_p), mult)
        gibbs = np.repeat(np.exp(self.log_g), mult)
        return ProbVec(probs, None if self.uniform and self.supported.all() else gibbs)

    def rebase(self, log_dim: float) -> "AtomDist":
        """Re-embed a uniform-reference distribution into ``exp(log_dim)`` outcomes.

        This is zero padding: appending sharp free states changes nothing but
        the size of the uniform reference.
        """
        if not self.uniform:
            raise DomainError("only uniform-reference distributions can be rebased")
        if log_dim < self.log_dim - 1e-9:
            raise DomainError("cannot rebase onto a smaller outcome space")
        s = self.supported
        return _canonical(
            self.log_p[s],
            np.full(s.sum(), -log_dim),
            self.log_mult[s],
            uniform=True,
            log_dim=log_dim,
            meta=self.meta,
        )


def _null_lump(log_supported_gibbs: float) -> float:
    """Log Gibbs mass outside the support given the log mass inside it."""
    return float(log1mexp(min(log_supported_gibbs, 0.0)))


def _canonical(log_p, log_g, log_mult, *, uniform, log_dim=float("nan"), meta=(), null=None):
    """Merge equal atoms, order by ratio and attach the null atom.

    ``null`` is the log Gibbs mass of the zero-probability region; any
    ``-inf`` probability atoms passed in are added to it.  For uniform
    references it is always recomputed from the outcome count.
    """
    log_p = np.asarray(log_p, dtype=float)
    log_g = np.asarray(log_g, dtype=float)
    log_mult = np.asarray(log_mult, dtype=float)

    zero = ~np.isfinite(log_p)
    if zero.any():
        lumped = float(logsumexp(log_g[zero] + log_mult[zero]))
        null = lumped if null is None else float(np.logaddexp(null, lumped))
    log_p, log_g, log_mult = log_p[~zero], log_g[~zero], log_mult[~zero]

    if log_p.size > 1:
        order = np.lexsort((log_g, log_p))
        log_p, log_g, log_mult = log_p[order], log_g[order], log_mult[order]
        new_group = ~(_close(log_p[1:], log_p[:-1]) & _close(log_g[1:], log_g[:-1]))
        starts = np.concatenate(([0], np.flatnonzero(new_group) + 1))
        if starts.size < log_p.size:
            log_mult = np.logaddexp.reduceat(log_mult, starts)
            log_p, log_g = log_p[starts], log_g[starts]

    ratio = log_p - log_g
    order = np.lexsort((-log_p, -ratio))
    log_p, log_g, log_mult = log_p[order], log_g[order], log_mult[order]

    if uniform and np.isfinite(log_dim):
        log_supp = float(logsumexp(log_mult)) - log_dim
        null = None if log_supp > -NULL_TOL else _null_lump(log_supp)
    if null is not None and np.isfinite(null):
        log_p = np.append(log_p, -np.inf)
        log_g = np.append(log_g, null)
        log_mult = np.append(log_mult, 0.0)
    return AtomDist(log_p, log_g, log_mult, uniform=uniform, log_dim=log_dim, meta=tuple(meta))


def compositions(n: int, k: int) -> np.ndarray:
    """All length-``k`` non-negative integer vectors summing to ``n``."""
    if k == 1:
        return np.array([[n]], dtype=np.int64)
    blocks = []
    for first in range(n, -1, -1):
        rest = compositions(n - first, k - 1)
        blocks.append(np.column_stack([np.full(len(rest), first, dtype=np.int64), rest]))
    return np.vstack(blocks)


def composition_count(n: int, k: int) -> int:
    return math.comb(n + k - 1, k - 1)


def _classes(base: ProbVec):
    """Group supported outcomes sharing (p, g); return class logs and sizes."""
    ref = base.reference
    keys = {}
    for p_i, g_i in zip(base.probs, ref):
        if p_i > 0:
            keys[(p_i, g_i)] = keys.get((p_i, g_i), 0) + 1
    items = sorted(keys.items(), key=lambda kv: (-kv[0][0], -kv[0][1]))
    lp = np.log([k[0] for k, _ in items])
    lg = np.log([k[1] for k, _ in items])
    sizes = np.array([c for _, c in items], dtype=float)
    return lp, lg, sizes


def iid_power(base, n: int, cap: int = DEFAULT_ATOM_CAP) -> AtomDist:
    """Type-class form of ``base`` tensored ``n`` times.

    One atom per composition of ``n`` over the distinct supported outcomes of
    ``base``; outcomes with ``p_i = 0`` are never enumerated.
    """
    base = as_probvec(base)
    n = int(n)
    if n < 0:
        raise DomainError("number of copies must be non-negative")
    uniform = base.gibbs is None
    log_dim = n * math.log(base.dim)
    if n == 0:
        return AtomDist([0.0], [0.0], [0.0], uniform=uniform, log_dim=0.0, meta=())

    lp, lg, sizes = _classes(base)
    k = lp.size
    count = composition_count(n, k)
    if count > cap:
        raise OverflowGuard(f"{count} type classes exceed the cap of {cap}")
    comps = compositions(n, k)
    log_mult = gammaln(n + 1) - gammaln(comps + 1).sum(axis=1) + comps @ np.log(sizes)
    log_p = comps @ lp
    log_g = np.full(len(comps), -log_dim) if uniform else comps @ lg

    null = None
    if np.any(base.probs == 0):
        null = _null_lump(n * float(logsumexp(lg, b=sizes)))
    return _canonical(
        log_p,
        log_g,
        log_mult,
        uniform=uniform,
        log_dim=log_dim,
        meta=((base.dim, n),),
        null=null,
    )


def from_probvec(p) -> AtomDist:
    """Single-copy atoms, one per distinct supported outcome."""
    return iid_power(p, 1)


def product(a: AtomDist, b: AtomDist, cap: int = DEFAULT_ATOM_CAP) -> AtomDist:
    """Tensor product of two atom distributions."""
    if len(a) * len(b) > cap:
        raise OverflowGuard(f"{len(a) * len(b)} atom pairs exceed the cap of {cap}")
    # a uniform factor paired with a Gibbs one just keeps its explicit weights
    uniform = a.uniform and b.uniform
    log_p = np.add.outer(a.log_p, b.log_p).ravel()
    log_g = np.add.outer(a.log_g, b.log_g).ravel()
    log_mult = np.add.outer(a.log_mult, b.log_mult).ravel()
    return _canonical(
        log_p,
        log_g,
        log_mult,
        uniform=uniform,
        log_dim=a.log_dim + b.log_dim if uniform else float("nan"),
        meta=a.meta + b.meta,
    )


def mixed_power(base1, base2, n: int, lam: float, cap: int = DEFAULT_ATOM_CAP) -> AtomDist:
    """``base1`` on ``round(lam * n)`` copies tensored with ``base2`` on the rest.

    Rounding is to nearest with ties to even.
    """
    if not 0.0 <= lam <= 1.0:
        raise DomainError("mixing factor must lie in [0, 1]")
    k = round(lam * n)
    if k == 0:
        return iid_power(base2, n, cap)
    if k == n:
        return iid_power(base1, n, cap)
    return product(iid_power(base1, k, cap), iid_power(base2, n - k, cap), cap)


def align(a: AtomDist, b: AtomDist):
    """Put two distributions on a common reference.

    Uniform references are padded to the larger outcome space; Gibbs
    references are assumed to be already commensurate.
    """
    if a.uniform and b.uniform:
        log_dim = max(a.log_dim, b.log_dim)
        a = a if a.log_dim == log_dim else a.rebase(log_dim)
        b = b if b.log_dim == log_dim else b.rebase(log_dim)
        return a, b
    return a, b
