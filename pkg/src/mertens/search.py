"""Locate regions where the zero sum dips below a threshold.

The scan runs over the absolute lattice ``step * Z`` (not a range-relative
grid), so candidate abscissae are reproducible bit for bit whatever range
they were found in.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from decimal import Decimal
from pathlib import Path
from typing import Callable, Iterable, TextIO

import numpy as np

from .errors import CoverageError, ParameterError
from .zeros import ZeroSet
from .zerosum import GridSpec, iter_sigma_grid, sigma_point

DEFAULT_THRESHOLD = -0.95
# Sub-threshold points at most this many steps apart always belong to the same run.
MERGE_GAP = 2
# Runs closer than this (in y) form one region and yield one candidate.  Near a
# deep minimum sigma_T crosses the threshold many times within ~1e-3, while
# distinct regions below y = 2500 are more than 10 apart.
REGION_GAP = 0.1


@dataclass(frozen=True)
class Candidate:
    """Minimum of one sub-threshold region: location, value, height, run extent."""

    y: Decimal
    sigma: float
    T: float
    width: float

    def __post_init__(self):
        if self.width < 0:
            raise ParameterError("candidate width must be nonnegative")


class _Run:
    """A region; ``run`` is the 2-step run holding the minimizer."""

    __slots__ = ("first", "last", "best", "best_val", "sub_first", "run")

    def __init__(self, i: int, v: float):
        self.first = self.last = self.best = self.sub_first = i
        self.best_val = v
        self.run = (i, i)

    def add(self, i: int, v: float):
        if i - self.last > MERGE_GAP:
            self.sub_first = i
        self.last = i
        if v < self.best_val:
            self.best, self.best_val = i, v
        if self.sub_first <= self.best:
            self.run = (self.sub_first, i)


def _runs(blocks: Iterable[tuple[int, np.ndarray]], threshold: float, gap: int = MERGE_GAP) -> list[_Run]:
    runs: list[_Run] = []
    cur: _Run | None = None
    for start, vals in blocks:
        idx = np.flatnonzero(vals < threshold)
        for j in idx.tolist():
            i, v = start + j, float(vals[j])
            if cur is not None and i - cur.last <= max(gap, MERGE_GAP):
                cur.add(i, v)
            else:
                cur = _Run(i, v)
                runs.append(cur)
    return runs


def _grid_point(grid: GridSpec, i: int) -> Decimal:
    return Decimal(str(grid.y0)) + Decimal(str(grid.dy)) * i


def scan(
    zs: ZeroSet,
    T: float,
    y_range: tuple[float, float],
    step="1e-7",
    threshold: float = DEFAULT_THRESHOLD,
    mode: str = "fast",
    threads: int = 1,
    progress: Callable[[int, int], None] | None = None,
    region: float = REGION_GAP,
) -> list[Candidate]:
    """Regions of lattice points with sigma_T < threshold, one candidate per region.

    Sub-threshold points join the same region when they are at most
    ``max(MERGE_GAP steps, region)`` apart; ``region=0`` keeps every run of
    the bare 2-step rule separate.  Each candidate sits at the region's
    minimizing grid point, its sigma re-evaluated there by direct summation,
    and ``width`` is the extent of the 2-step run containing that point.
    """
    y_lo, y_hi = y_range
    if not (1.0 <= float(y_lo) <= float(y_hi)):
        raise ParameterError(f"scan range must satisfy 1 <= y_lo <= y_hi, got [{y_lo}, {y_hi}]")
    if not float(step) > 0:
        raise ParameterError("scan step must be positive")
    if T > zs.height:
        raise CoverageError(f"height T = {T:g} exceeds the loaded zeros (complete to {zs.height:g})")
    if not region >= 0:
        raise ParameterError("region gap must be nonnegative")
    grid = GridSpec.lattice(y_lo, y_hi, step)
    gap = max(MERGE_GAP, int(Decimal(repr(float(region))) / Decimal(str(step))))

    def blocks():
        for s, vals in iter_sigma_grid(zs, T, grid, mode, threads):
            if progress is not None:
                progress(s + vals.size, grid.n)
            yield s, vals

    out = []
    for r in _runs(blocks(), threshold, gap):
        y = _grid_point(grid, r.best)
        sigma = sigma_point(zs, T, str(y))
        out.append(Candidate(y, sigma, float(T), (r.run[1] - r.run[0]) * float(grid.dy)))
    return out


def refine(cand: Candidate, zs: ZeroSet, T2: float, step2="1e-9", level: float = -1.0, mode: str = "fast") -> Candidate:
    """Rescan around a candidate with more zeros and a finer step.

    The window is ``y +- 10 width`` (at least 1e-5 wide).  The result holds the
    new minimizer, its sigma (re-evaluated by direct summation) and the extent
    of the run below ``level`` that contains it (0 if the minimum stays above
    ``level``).
    """
    if not T2 > cand.T:
        raise ParameterError(f"refinement height {T2:g} must exceed the candidate's {cand.T:g}")
    if T2 > zs.height:
        raise CoverageError(f"height T = {T2:g} exceeds the loaded zeros (complete to {zs.height:g})")
    half = Decimal(repr(max(10 * cand.width, 0.5e-5)))
    lo, hi = cand.y - half, cand.y + half
    grid = GridSpec.lattice(lo, hi, step2)
    vals = np.empty(grid.n)
    for s, v in iter_sigma_grid(zs, T2, grid, mode):
        vals[s : s + v.size] = v
    i = int(np.argmin(vals))
    width = 0.0
    if vals[i] < level:
        below = vals < level
        a = i
        while a > 0 and below[a - 1]:
            a -= 1
        b = i
        while b < grid.n - 1 and below[b + 1]:
            b += 1
        width = (b - a) * float(grid.dy)
    y = _grid_point(grid, i)
    return Candidate(y, sigma_point(zs, T2, str(y)), float(T2), width)


def write_candidates_csv(out: TextIO | str | Path, cands: Iterable[Candidate]) -> None:
    """CSV ``y,sigma,T,width``; floats at 17 significant digits, y as exact decimal."""
    rows = [("y", "sigma", "T", "width")]
    rows += [(str(c.y), f"{c.sigma:.17g}", f"{c.T:.17g}", f"{c.width:.17g}") for c in cands]
    if isinstance(out, (str, Path)):
        with open(out, "w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(rows)
    else:
        csv.writer(out, lineterminator="\n").writerows(rows)


def read_candidates_csv(path: str | Path) -> list[Candidate]:
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        return [Candidate(Decimal(r["y"]), float(r["sigma"]), float(r["T"]), float(r["width"])) for r in rd]
