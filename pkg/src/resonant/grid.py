"""Rectangular result grids and a deterministic parallel cell runner."""

from __future__ import annotations

import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .exceptions import ConvergenceError, DomainError, NoFeasibleRate

NA = "NA"

# mask reason codes
INVALID = "invalid-cell"
DOMAIN = "domain-error"
CONVERGENCE = "convergence-error"
NO_RATE = "no-feasible-rate"
INTERRUPTED = "interrupted"


class Masked:
    """Returned by a cell function to mask its cell with a reason code."""

    __slots__ = ("reason",)

    def __init__(self, reason: str):
        self.reason = reason

    def __repr__(self):
        return f"Masked({self.reason!r})"


def _axis_values(values):
    out = []
    for v in values:
        if isinstance(v, (str, np.str_)):
            out.append(str(v))
        elif isinstance(v, (int, np.integer)) and not isinstance(v, bool):
            out.append(int(v))
        else:
            out.append(float(v))
    return out


@dataclass(eq=False)
class SweepGrid:
    """Matrix of scalar results indexed by a row axis and a column axis.

    ``values`` holds NaN for masked cells and ``reasons`` the matching mask
    reason code (an empty string for computed cells).  Axis values are
    floats, or strings for categorical axes.
    """

    quantity: str
    row_name: str
    row_values: list
    col_name: str
    col_values: list
    values: np.ndarray
    reasons: np.ndarray = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.row_values = _axis_values(self.row_values)
        self.col_values = _axis_values(self.col_values)
        self.values = np.array(self.values, dtype=float).reshape(self.shape)
        if self.reasons is None:
            self.reasons = np.where(np.isnan(self.values), INVALID, "")
        self.reasons = np.array(self.reasons, dtype=object).reshape(self.shape)
        self.values[self.reasons != ""] = np.nan

    @property
    def shape(self):
        return (len(self.row_values), len(self.col_values))

    @property
    def mask(self) -> np.ndarray:
        return self.reasons != ""

    def masked_fraction(self, exclude=(INVALID,)) -> float:
        """Share of cells masked for a reason not listed in ``exclude``."""
        if self.values.size == 0:
            return 0.0
        bad = self.mask & ~np.isin(self.reasons, list(exclude))
        return float(bad.mean())

    def __eq__(self, other):
        if not isinstance(other, SweepGrid):
            return NotImplemented
        return (
            self.to_dict() == other.to_dict()
            and np.array_equal(self.values, other.values, equal_nan=True)
        )

    __hash__ = None

    # -- serialization ---------------------------------------------------------

    def to_csv(self) -> str:
        """Header row of column values, then one line per row value."""
        buf = io.StringIO()
        head = [f"{self.row_name}\\{self.col_name}"] + [_fmt(v) for v in self.col_values]
        buf.write(",".join(head) + "\n")
        for r, row in zip(self.row_values, self.values):
            cells = [NA if math.isnan(v) else repr(float(v)) for v in row]
            buf.write(",".join([_fmt(r)] + cells) + "\n")
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "quantity": self.quantity,
            "row_axis": {"name": self.row_name, "values": list(self.row_values)},
            "col_axis": {"name": self.col_name, "values": list(self.col_values)},
            "values": [None if math.isnan(v) else float(v) for v in self.values.ravel()],
            "mask": [r if r else None for r in self.reasons.ravel()],
            "meta": self.meta,
        }

    def to_json(self, indent=None) -> str:
        return json.dumps(self.to_dict(), indent=indent, allow_nan=False)

    @classmethod
    def from_dict(cls, d: dict) -> "SweepGrid":
        rows, cols = d["row_axis"]["values"], d["col_axis"]["values"]
        shape = (len(rows), len(cols))
        values = np.array([np.nan if v is None else v for v in d["values"]], dtype=float)
        reasons = np.array([r or "" for r in d["mask"]], dtype=object)
        return cls(
            d["quantity"],
            d["row_axis"]["name"],
            rows,
            d["col_axis"]["name"],
            cols,
            values.reshape(shape),
            reasons.reshape(shape),
            d.get("meta", {}),
        )

    @classmethod
    def from_json(cls, text: str) -> "SweepGrid":
        return cls.from_dict(json.loads(text))


def _fmt(v) -> str:
    if isinstance(v, (str, int)):
        return str(v)
    return repr(float(v))


# -- runner -------------------------------------------------------------------


def default_jobs() -> int:
    try:
        return max(len(os.sched_getaffinity(0)), 1)
    except AttributeError:  # pragma: no cover - non-Linux
        return os.cpu_count() or 1


def _safe_call(task):
    fn, args = task
    try:
        out = fn(*args)
    except NoFeasibleRate:
        return NO_RATE
    except DomainError:
        return DOMAIN
    except ConvergenceError:
        return CONVERGENCE
    if isinstance(out, Masked):
        return out.reason
    return float(out)


def run_cells(fn: Callable, cells: Sequence[tuple], jobs: int = 1, chunksize: int = 1):
    """Evaluate ``fn(*cell)`` for every cell, in order, possibly in parallel.

    Returns ``(values, reasons, interrupted)``.  Exceptions from the domain
    hierarchy mask their cell; a ``KeyboardInterrupt`` masks every cell not
    yet finished as ``interrupted`` instead of discarding the results so far.
    ``fn`` must be a picklable module-level callable when ``jobs > 1``.
    """
    tasks = [(fn, tuple(c)) for c in cells]
    results = []
    interrupted = False
    try:
        if jobs <= 1 or len(tasks) <= 1:
            for t in tasks:
                results.append(_safe_call(t))
        else:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                try:
                    for out in pool.map(_safe_call, tasks, chunksize=chunksize):
                        results.append(out)
                except KeyboardInterrupt:
                    pool.shutdown(wait=False, cancel_futures=True)
                    raise
    except KeyboardInterrupt:
        interrupted = True
    results += [INTERRUPTED] * (len(tasks) - len(results))

    values = np.full(len(tasks), np.nan)
    reasons = np.full(len(tasks), "", dtype=object)
    for k, out in enumerate(results):
        if isinstance(out, str):
            reasons[k] = out
        else:
            values[k] = out
    return values, reasons, interrupted


def run_grid(
    fn: Callable,
    rows: Sequence,
    cols: Sequence,
    *,
    quantity: str,
    row_name: str,
    col_name: str,
    jobs: int = 1,
    meta: dict | None = None,
) -> SweepGrid:
    """Evaluate ``fn(row_value, col_value)`` over the outer product of axes."""
    cells = [(r, c) for r in rows for c in cols]
    chunk = max(1, len(cells) // (8 * max(jobs, 1)))
    values, reasons, interrupted = run_cells(fn, cells, jobs, chunksize=chunk)
    shape = (len(rows), len(cols))
    meta = dict(meta or {})
    if interrupted:
        meta["interrupted"] = True
    return SweepGrid(
        quantity, row_name, rows, col_name, cols, values.reshape(shape), reasons.reshape(shape), meta
    )
