"""Parameter sweeps for the heat-engine, mixing and fixed-error rate experiments.

Every sweep returns a :class:`~resonant.grid.SweepGrid`.  Cells are
independent, evaluated by :func:`~resonant.grid.run_grid` and assembled in
grid order, so results do not depend on the number of worker processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Sequence, Union

import numpy as np

from .atoms import DEFAULT_ATOM_CAP, iid_power, mixed_power
from .dist import ResourceTheory, as_probvec
from .exceptions import DomainError, NoFeasibleRate
from .grid import INVALID, Masked, SweepGrid, run_grid
from .majorization import max_rate, optimal_final_state
from .resonance import HeatEngineFamily, nu_grid

#: tolerance for deciding that ``lam * n`` is an integer
INTEGER_TOL = 1e-9


@dataclass(frozen=True)
class FixedWork:
    """Extract ``fraction * W_C`` per qubit and record the optimal infidelity."""

    fraction: float = 0.95


@dataclass(frozen=True)
class FixedError:
    """Record the largest work fraction whose optimal infidelity is below ``threshold``.

    The fraction is searched down from 1 on a grid of ``step`` and the first
    passing bracket is refined by bisection to ``tol``.
    """

    threshold: float = 1e-3
    step: float = 0.005
    tol: float = 1e-4


def default_axis(num: int = 60, start: float = 0.5, stop: float = 5.0) -> list:
    return np.linspace(start, stop, num).tolist()


@dataclass(frozen=True)
class HeatEngineSpec:
    """Settings of a heat-engine sweep.

    Rows are the initial working-body temperature, columns the final one;
    with ``axis="inverse_temperature"`` the axis values are ``gap / T``.
    ``battery_marginal`` records the infidelity of the battery alone instead
    of the full joint state.
    """

    n: int = 200
    T_h: float = 10.0
    gap: float = 1.0
    T_c_axis: Sequence[float] = field(default_factory=default_axis)
    T_cp_axis: Sequence[float] = field(default_factory=default_axis)
    mode: Union[FixedWork, FixedError] = field(default_factory=FixedWork)
    axis: str = "temperature"
    battery_marginal: bool = False
    cap: int = DEFAULT_ATOM_CAP

    def __post_init__(self):
        if int(self.n) < 1:
            raise DomainError("n must be a positive integer")
        if not isinstance(self.mode, (FixedWork, FixedError)):
            raise DomainError("mode must be FixedWork or FixedError")
        if isinstance(self.mode, FixedError) and not 0 < self.mode.threshold < 1:
            raise DomainError("error threshold must lie in (0, 1)")
        object.__setattr__(self, "T_c_axis", tuple(float(v) for v in self.T_c_axis))
        object.__setattr__(self, "T_cp_axis", tuple(float(v) for v in self.T_cp_axis))

    def family(self, fraction=None) -> HeatEngineFamily:
        if fraction is None:
            fraction = self.mode.fraction if isinstance(self.mode, FixedWork) else 1.0
        return HeatEngineFamily(self.T_h, self.gap, fraction, self.axis)


def engine_infidelity(spec: HeatEngineSpec, T_c: float, T_cp: float, fraction: float) -> float:
    """Optimal infidelity of the engine conversion at one work fraction."""
    fam = spec.family(fraction)
    p, q, _ = fam.states(T_c, T_cp)
    res = optimal_final_state(
        iid_power(p, spec.n, spec.cap), iid_power(q, spec.n, spec.cap), ResourceTheory.THERMODYNAMIC
    )
    return 1.0 - res.support_mass if spec.battery_marginal else res.infidelity


def max_work_fraction(spec: HeatEngineSpec, T_c: float, T_cp: float) -> float:
    """Largest fraction of ``W_C`` extractable with infidelity below the threshold.

    The coarse grid ``1, 1 - step, ...`` is searched from the top by
    galloping, which finds the same first passing point as a linear scan
    when infidelity grows with the fraction.  If the evaluations show
    otherwise, the search is redone as a plain linear scan.
    """
    mode = spec.mode
    record = {}

    def infid(x):
        x = round(x, 12)
        if x not in record:
            record[x] = engine_infidelity(spec, T_c, T_cp, x)
        return record[x]

    def ok(x):
        return infid(x) < mode.threshold

    steps = int(round(1.0 / mode.step))
    grid_x = [1.0 - k * mode.step for k in range(steps)] + [0.0]
    last = len(grid_x) - 1

    def monotone():
        vals = [record[x] for x in sorted(record)]
        return not any(a > b + 1e-12 for a, b in zip(vals, vals[1:]))

    def refine(k):
        lo, hi = grid_x[k], grid_x[k - 1]
        while hi - lo > mode.tol:
            mid = 0.5 * (lo + hi)
            if ok(mid):
                lo = mid
            else:
                hi = mid
        return lo

    if ok(grid_x[0]):
        return 1.0
    prev, jump = 0, 1
    while True:
        k = min(prev + jump, last)
        if ok(grid_x[k]):
            break
        if k == last:
            k = None
            break
        prev, jump = k, 2 * jump
    if k is not None:
        while k - prev > 1:
            mid = (prev + k) // 2
            if ok(grid_x[mid]):
                k = mid
            else:
                prev = mid
        x = refine(k)
        if monotone():
            return x

    # fall back to the linear scan of the coarse grid and of the bracket
    k = next((j for j in range(last + 1) if ok(grid_x[j])), None)
    if k is None:
        return 0.0
    if k == 0:
        return 1.0
    top = grid_x[k - 1]
    count = int(math.ceil((top - grid_x[k]) / mode.tol))
    for j in range(count + 1):
        x = top - j * mode.tol
        if ok(x):
            return x
    return grid_x[k]


def _engine_cell(spec: HeatEngineSpec, a, b):
    fam = spec.family()
    T_c, T_cp = fam.temperature(a), fam.temperature(b)
    if not fam.valid(T_c, T_cp):
        return Masked(INVALID)
    if isinstance(spec.mode, FixedWork):
        return engine_infidelity(spec, T_c, T_cp, spec.mode.fraction)
    return max_work_fraction(spec, T_c, T_cp)


def heat_engine_sweep(spec: HeatEngineSpec, jobs: int = 1, with_contour: bool = True) -> SweepGrid:
    """Infidelity (fixed work) or work fraction (fixed error) over the grid."""
    names = ("T_c", "T_cp") if spec.axis == "temperature" else ("beta_c", "beta_cp")
    quantity = "infidelity" if isinstance(spec.mode, FixedWork) else "work_fraction"
    grid = run_grid(
        partial(_engine_cell, spec),
        spec.T_c_axis,
        spec.T_cp_axis,
        quantity=quantity,
        row_name=names[0],
        col_name=names[1],
        jobs=jobs,
        meta={"experiment": "heat-engine", "theory": "thermodynamic", "n": int(spec.n)},
    )
    if with_contour:
        nu = nu_grid(
            ResourceTheory.THERMODYNAMIC, spec.family(), spec.T_c_axis, spec.T_cp_axis, jobs=1
        )
        grid.meta["nu_contour"] = nu.meta["nu_contour"]
    return grid


# -- mixing and rate sweeps ---------------------------------------------------


def _lambda_cell(p1, p2, q, theory, cap, n, lam):
    n = int(n)
    if abs(lam * n - round(lam * n)) > INTEGER_TOL:
        return Masked(INVALID)
    initial = mixed_power(p1, p2, n, lam, cap)
    return optimal_final_state(initial, iid_power(q, n, cap), theory).infidelity


def lambda_sweep(
    p1,
    p2,
    q,
    n_list: Sequence[int],
    lambda_grid: Sequence[float],
    theory=ResourceTheory.ENTANGLEMENT,
    jobs: int = 1,
    cap: int = DEFAULT_ATOM_CAP,
) -> SweepGrid:
    """Infidelity of ``p1^(lam n) x p2^((1-lam) n) -> q^n`` per ``(n, lam)``.

    Cells where ``lam * n`` is not an integer are masked as invalid.
    """
    theory = ResourceTheory.coerce(theory)
    p1, p2, q = as_probvec(p1), as_probvec(p2), as_probvec(q)
    if not len(n_list) or not len(lambda_grid):
        raise DomainError("empty sweep axis")
    return run_grid(
        partial(_lambda_cell, p1, p2, q, theory, cap),
        [int(n) for n in n_list],
        [float(v) for v in lambda_grid],
        quantity="infidelity",
        row_name="n",
        col_name="lambda",
        jobs=jobs,
        meta={"experiment": "lambda-sweep", "theory": theory.value},
    )


def _rate_cell(initials, q, epsilon, theory, cap, k, n):
    try:
        return max_rate(initials[int(k)], q, int(n), epsilon, theory, cap)[1]
    except NoFeasibleRate:
        return 0.0


def rate_sweep(
    initials: Sequence,
    q,
    n_list: Sequence[int],
    epsilon: float,
    theory=ResourceTheory.ENTANGLEMENT,
    labels: Sequence[str] | None = None,
    jobs: int = 1,
    cap: int = DEFAULT_ATOM_CAP,
) -> SweepGrid:
    """Optimal rate ``m / n`` at infidelity below ``epsilon``, per initial state and ``n``.

    A cell where not even one target copy can be made records rate 0.
    """
    theory = ResourceTheory.coerce(theory)
    initials = tuple(as_probvec(p) for p in initials)
    q = as_probvec(q)
    if not initials or not len(n_list):
        raise DomainError("empty sweep axis")
    labels = [str(v) for v in labels] if labels is not None else [f"state{k + 1}" for k in range(len(initials))]
    if len(labels) != len(initials):
        raise DomainError("one label per initial state expected")
    grid = run_grid(
        partial(_rate_cell, initials, q, float(epsilon), theory, cap),
        list(range(len(initials))),
        [int(n) for n in n_list],
        quantity="rate",
        row_name="initial",
        col_name="n",
        jobs=jobs,
        meta={"experiment": "rate-sweep", "theory": theory.value, "epsilon": float(epsilon)},
    )
    grid.row_values = labels
    return grid
