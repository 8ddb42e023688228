"""Probability vectors and the entropic functionals used throughout the package.

All logarithms are natural, so entropies come out in nats and variances in
nats squared.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import DegenerateTarget, DomainError, SupportError

#: entries more negative than this are rejected, less negative ones clamped
NEGATIVE_TOL = 1e-15
#: accepted deviation of the raw input sum from one before renormalising
SUM_TOL = 1e-6


class ResourceTheory(enum.Enum):
    ENTANGLEMENT = "entanglement"
    COHERENCE = "coherence"
    THERMODYNAMIC = "thermodynamic"

    @property
    def uses_gibbs(self) -> bool:
        return self is ResourceTheory.THERMODYNAMIC

    @classmethod
    def coerce(cls, value) -> "ResourceTheory":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise DomainError(f"unknown resource theory {value!r}") from None


def _clean(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float).ravel()
    if arr.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    if np.any(arr < -NEGATIVE_TOL):
        raise ValueError(f"{name} has negative entries")
    return np.clip(arr, 0.0, None)


@dataclass(frozen=True, eq=False)
class ProbVec:
    """A finite probability distribution, optionally paired with Gibbs weights.

    ``probs`` is renormalised on construction (the raw sum must already be
    within ``SUM_TOL`` of one).  ``gibbs`` may be given up to scale, as in
    ``exp(-beta * E)``, and is always normalised.  Both arrays are read-only.
    """

    probs: np.ndarray
    gibbs: Optional[np.ndarray] = None

    def __post_init__(self):
        probs = _clean(self.probs, "probs")
        total = probs.sum()
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"probs sum to {float(total)!r}, not 1")
        probs = probs / total
        probs.flags.writeable = False
        object.__setattr__(self, "probs", probs)

        if self.gibbs is not None:
            gibbs = _clean(self.gibbs, "gibbs")
            if gibbs.shape != probs.shape:
                raise ValueError("gibbs and probs differ in length")
            if np.any(gibbs <= 0):
                raise ValueError("gibbs weights must be strictly positive")
            gibbs = gibbs / gibbs.sum()
            gibbs.flags.writeable = False
            object.__setattr__(self, "gibbs", gibbs)

    def __len__(self):
        return self.probs.size

    def __repr__(self):
        if self.gibbs is None:
            return f"ProbVec({self.probs.tolist()})"
        return f"ProbVec({self.probs.tolist()}, gibbs={self.gibbs.tolist()})"

    def __eq__(self, other):
        if not isinstance(other, ProbVec):
            return NotImplemented
        same_gibbs = (self.gibbs is None and other.gibbs is None) or (
            self.gibbs is not None
            and other.gibbs is not None
            and np.array_equal(self.gibbs, other.gibbs)
        )
        return np.array_equal(self.probs, other.probs) and same_gibbs

    __hash__ = None

    @property
    def dim(self) -> int:
        return self.probs.size

    @property
    def reference(self) -> np.ndarray:
        """Gibbs weights, or the uniform distribution when none were given."""
        if self.gibbs is None:
            return np.full(self.dim, 1.0 / self.dim)
        return self.gibbs

    def with_gibbs(self, gibbs) -> "ProbVec":
        return ProbVec(self.probs, gibbs)

    def kron(self, other: "ProbVec") -> "ProbVec":
        """Tensor product; Gibbs weights multiply when both factors carry them."""
        gibbs = None
        if self.gibbs is not None or other.gibbs is not None:
            gibbs = np.kron(self.reference, other.reference)
        return ProbVec(np.kron(self.probs, other.probs), gibbs)


def as_probvec(p, gibbs=None) -> ProbVec:
    if isinstance(p, ProbVec):
        return p if gibbs is None else p.with_gibbs(gibbs)
    return ProbVec(p, gibbs)


def _xlogx_terms(p: np.ndarray) -> np.ndarray:
    out = np.zeros_like(p)
    pos = p > 0
    out[pos] = p[pos] * np.log(p[pos])
    return out


def shannon_entropy(p) -> float:
    p = as_probvec(p).probs
    return float(-_xlogx_terms(p).sum())


def entropy_variance(p) -> float:
    """Variance of the surprisal ``-ln p_i`` under ``p``."""
    p = as_probvec(p).probs
    pos = p > 0
    h = shannon_entropy(p)
    return float(np.sum(p[pos] * (np.log(p[pos]) + h) ** 2))


def _log_ratios(p, g):
    p = as_probvec(p)
    if g is None:
        ref = p.reference
    else:
        ref = g.probs if isinstance(g, ProbVec) else _clean(g, "reference")
        ref = ref / ref.sum()
    if ref.shape != p.probs.shape:
        raise DomainError("distribution and reference differ in dimension")
    pos = p.probs > 0
    if np.any(ref[pos] <= 0):
        raise SupportError("distribution has mass outside the reference support")
    return p.probs[pos], np.log(p.probs[pos]) - np.log(ref[pos])


def relative_entropy(p, g=None) -> float:
    """``D(p||g)``; ``g`` defaults to the Gibbs weights carried by ``p``."""
    w, lr = _log_ratios(p, g)
    return float(max(np.sum(w * lr), 0.0))


def relative_entropy_variance(p, g=None) -> float:
    w, lr = _log_ratios(p, g)
    d = np.sum(w * lr)
    return float(np.sum(w * (lr - d) ** 2))


def resource_content(p, theory, gibbs=None) -> float:
    """Asymptotic resource value: ``H`` or ``D(.||gamma)`` depending on theory."""
    theory = ResourceTheory.coerce(theory)
    p = as_probvec(p, gibbs)
    if theory.uses_gibbs:
        if p.gibbs is None:
            raise DomainError("thermodynamic theory needs Gibbs weights")
        return relative_entropy(p)
    return shannon_entropy(p)


def resource_variance(p, theory, gibbs=None) -> float:
    theory = ResourceTheory.coerce(theory)
    p = as_probvec(p, gibbs)
    if theory.uses_gibbs:
        if p.gibbs is None:
            raise DomainError("thermodynamic theory needs Gibbs weights")
        return relative_entropy_variance(p)
    return entropy_variance(p)


def asymptotic_rate(p, q, theory=ResourceTheory.ENTANGLEMENT) -> float:
    """Ratio of resource contents of initial ``p`` and target ``q``."""
    num = resource_content(p, theory)
    den = resource_content(q, theory)
    if den <= 0:
        raise DegenerateTarget("target is a free state")
    return num / den


def fluctuation_ratio(p, theory, gibbs=None) -> float:
    """``V/H`` (or ``V(.||gamma)/D(.||gamma)``): relative resource fluctuations."""
    h = resource_content(p, theory, gibbs)
    if h <= 0:
        raise DegenerateTarget("state is free; fluctuation ratio undefined")
    return resource_variance(p, theory, gibbs) / h


def irreversibility_parameter(p, q, theory=ResourceTheory.ENTANGLEMENT) -> float:
    """Irreversibility parameter nu; resonance is ``nu == 1``."""
    den = fluctuation_ratio(q, theory)
    if den <= 0:
        raise DegenerateTarget("target has vanishing resource fluctuations")
    return fluctuation_ratio(p, theory) / den


def fidelity(p, q) -> float:
    """Squared Bhattacharyya overlap; the shorter vector is zero-padded."""
    a = p.probs if isinstance(p, ProbVec) else _clean(p, "p")
    b = q.probs if isinstance(q, ProbVec) else _clean(q, "q")
    n = max(a.size, b.size)
    a = np.pad(a, (0, n - a.size))
    b = np.pad(b, (0, n - b.size))
    return float(min(np.sum(np.sqrt(a * b)) ** 2, 1.0))


def infidelity(p, q) -> float:
    return 1.0 - fidelity(p, q)


def gibbs_qubit(T: float, gap: float = 1.0) -> ProbVec:
    """Thermal qubit ``[1, exp(-gap/T)] / Z`` with ``k_B = 1``."""
    if not T > 0:
        raise DomainError("temperature must be positive")
    if gap < 0:
        raise DomainError("gap must be non-negative")
    b = np.exp(-gap / T)
    probs = np.array([1.0, b]) / (1.0 + b)
    return ProbVec(probs)


def gibbs_state(energies, T: float) -> ProbVec:
    """Gibbs distribution of an arbitrary spectrum; ``T = inf`` gives uniform."""
    e = np.asarray(energies, dtype=float)
    if not T > 0:
        raise DomainError("temperature must be positive")
    w = np.exp(-(e - e.min()) / T)
    w = w / w.sum()
    return ProbVec(w)
