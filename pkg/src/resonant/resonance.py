"""Resonance analysis: the resonant mixing factor and nu = 1 contours."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial
from typing import Optional

import numpy as np

from .dist import (
    ProbVec,
    ResourceTheory,
    as_probvec,
    gibbs_qubit,
    irreversibility_parameter,
    relative_entropy,
    resource_content,
    resource_variance,
)
from .exceptions import DegenerateTarget, DomainError
from .grid import INVALID, Masked, SweepGrid, run_grid


@dataclass(frozen=True)
class ResonanceQuery:
    """Two initial species ``p1``, ``p2`` and a target ``q``.

    For the thermodynamic theory every distribution needs Gibbs weights,
    either attached to it or supplied once through ``gibbs``.
    """

    p1: ProbVec
    p2: ProbVec
    q: ProbVec
    theory: ResourceTheory = ResourceTheory.ENTANGLEMENT
    gibbs: Optional[ProbVec] = None

    def __post_init__(self):
        theory = ResourceTheory.coerce(self.theory)
        object.__setattr__(self, "theory", theory)
        g = None
        if self.gibbs is not None:
            g = self.gibbs.probs if isinstance(self.gibbs, ProbVec) else self.gibbs
        for name in ("p1", "p2", "q"):
            object.__setattr__(self, name, as_probvec(getattr(self, name), g))

    def stats(self):
        """``((H1, V1), (H2, V2), (Hq, Vq))`` in the query's theory."""
        return tuple(
            (resource_content(d, self.theory), resource_variance(d, self.theory))
            for d in (self.p1, self.p2, self.q)
        )


def _target_ratio(hq, vq):
    if not hq > 0:
        raise DegenerateTarget("target carries no resource")
    c = vq / hq
    if not c > 0:
        raise DegenerateTarget("target has no resource fluctuations")
    return c


def resonant_lambda(rq: ResonanceQuery, tol: float = 1e-12) -> Optional[float]:
    """Mixing factor making ``p1^(lam n) x p2^((1-lam) n)`` resonant with ``q``.

    Uses additivity of the content and variance over independent copies,
    so the mixture has ``V/H = (lam V1 + (1-lam) V2) / (lam H1 + (1-lam) H2)``.
    Returns ``None`` when no ``lam`` in [0, 1] matches the target's ratio and
    0.5 when every ``lam`` does.
    """
    (h1, v1), (h2, v2), (hq, vq) = rq.stats()
    c = _target_ratio(hq, vq)
    num = c * h2 - v2
    den = (v1 - v2) - c * (h1 - h2)
    scale = max(abs(v1), abs(v2), abs(c * h1), abs(c * h2), 1e-300)
    if abs(den) <= tol * scale:
        return 0.5 if abs(num) <= tol * scale else None
    lam = num / den
    if -tol <= lam <= 1 + tol:
        return float(min(max(lam, 0.0), 1.0))
    return None


def mixture_nu(rq: ResonanceQuery, lam: float) -> float:
    """Irreversibility parameter of the ``lam``-mixture against ``q``."""
    (h1, v1), (h2, v2), (hq, vq) = rq.stats()
    c = _target_ratio(hq, vq)
    h = lam * h1 + (1 - lam) * h2
    if not h > 0:
        raise DegenerateTarget("mixture carries no resource")
    return (lam * v1 + (1 - lam) * v2) / h / c


# -- state families -----------------------------------------------------------


@dataclass(frozen=True)
class HeatEngineFamily:
    """Working-body qubits plus a qubit battery against a hot bath.

    Grid coordinate pairs ``(a, b)`` name the initial and final working-body
    temperatures, either directly (``axis="temperature"``) or as
    ``gap / T`` (``axis="inverse_temperature"``).  For each pair the initial
    state is ``gamma_c x [1, 0]`` and the target ``gamma_c' x [0, 1]``, both
    against ``gamma_h x gamma_battery`` where the battery gap is
    ``fraction * W_C``.
    """

    T_h: float = 10.0
    gap: float = 1.0
    fraction: float = 0.95
    axis: str = "temperature"

    def __post_init__(self):
        if not self.T_h > 0:
            raise DomainError("hot temperature must be positive")
        if self.axis not in ("temperature", "inverse_temperature"):
            raise DomainError(f"unknown axis kind {self.axis!r}")
        if not 0.0 <= self.fraction:
            raise DomainError("work fraction must be non-negative")

    def temperature(self, value: float) -> float:
        if self.axis == "temperature":
            return float(value)
        if not value > 0:
            raise DomainError("inverse temperature must be positive")
        return self.gap / float(value)

    def carnot_work(self, T_c: float, T_cp: float) -> float:
        """``W_C = T_h [D(gamma_c||gamma_h) - D(gamma_c'||gamma_h)]``."""
        gh = gibbs_qubit(self.T_h, self.gap)
        d_c = relative_entropy(gibbs_qubit(T_c, self.gap), gh)
        d_cp = relative_entropy(gibbs_qubit(T_cp, self.gap), gh)
        return self.T_h * (d_c - d_cp)

    def states(self, T_c: float, T_cp: float, fraction: Optional[float] = None):
        """``(initial, target, W_C)`` for temperatures ``T_c``, ``T_cp``."""
        x = self.fraction if fraction is None else fraction
        w_c = self.carnot_work(T_c, T_cp)
        gh = gibbs_qubit(self.T_h, self.gap).probs
        gb = np.array([1.0, math.exp(-x * w_c / self.T_h)])
        ref = np.kron(gh, gb / gb.sum())
        p = ProbVec(np.kron(gibbs_qubit(T_c, self.gap).probs, [1.0, 0.0]), ref)
        q = ProbVec(np.kron(gibbs_qubit(T_cp, self.gap).probs, [0.0, 1.0]), ref)
        return p, q, w_c

    def valid(self, T_c: float, T_cp: float) -> bool:
        return 0 < T_c < T_cp < self.T_h and self.carnot_work(T_c, T_cp) > 0

    def __call__(self, a, b):
        T_c, T_cp = self.temperature(a), self.temperature(b)
        if not self.valid(T_c, T_cp):
            return Masked(INVALID)
        p, q, _ = self.states(T_c, T_cp)
        return p, q


def _nu_cell(family, theory, a, b):
    pair = family(a, b)
    if isinstance(pair, Masked):
        return pair
    return irreversibility_parameter(pair[0], pair[1], theory)


def nu_grid(theory, family, rows, cols, *, row_name="row", col_name="col", jobs=1) -> SweepGrid:
    """Grid of irreversibility parameters over a two-parameter state family.

    ``family(row_value, col_value)`` returns an ``(initial, target)`` pair or
    a ``Masked`` marker.  The ``nu = 1`` crossings are stored under
    ``meta["nu_contour"]``.
    """
    theory = ResourceTheory.coerce(theory)
    grid = run_grid(
        partial(_nu_cell, family, theory),
        rows,
        cols,
        quantity="nu",
        row_name=row_name,
        col_name=col_name,
        jobs=jobs,
    )
    grid.meta["nu_contour"] = contour_crossings(grid, 1.0)
    return grid


nu_contour = nu_grid


def contour_crossings(grid: SweepGrid, level: float = 1.0):
    """Row-wise crossings of ``level`` by linear interpolation between cells.

    Returns a list of ``[row_index, col_position, row_value, col_value]``
    where ``col_position`` is a fractional column index.  Only pairs of
    adjacent computed cells are used.
    """
    out = []
    cols = np.asarray(grid.col_values, dtype=float)
    idx = np.arange(cols.size, dtype=float)
    for i, row in enumerate(grid.values):
        s = row - level
        for j in range(s.size - 1):
            a, b = s[j], s[j + 1]
            if not (np.isfinite(a) and np.isfinite(b)):
                continue
            if a == 0.0 and (j == 0 or not np.isfinite(s[j - 1]) or s[j - 1] != 0.0):
                pos = float(j)
            elif a * b < 0:
                pos = j + a / (a - b)
            elif b == 0.0 and j + 1 == s.size - 1:
                pos = float(j + 1)
            else:
                continue
            out.append([i, float(pos), grid.row_values[i], float(np.interp(pos, idx, cols))])
    return out
