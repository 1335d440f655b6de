"""
Parameter scans over the steady states: continuation in one coupling
(bifurcation diagrams), region maps in the (g, U) plane, and bisection
locators for the transitions between them.

Every scan evaluates independent parameter points, optionally in a process
pool; results are assembled in input order, so they do not depend on the
number of workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import semiclassical as sc
from .core import BRANCH_SIGNS, BranchLabel, FixedPoint, ModelParams
from .errors import ConvergenceError, DomainError, JCDimerError

__all__ = [
    "Branch",
    "PhaseDiagram",
    "REGION_BITS",
    "CONTROLS",
    "bifurcation_scan",
    "phase_diagram",
    "decode_mask",
    "locate_stability_change",
    "locate_existence_boundary",
]

CONTROLS = {"g": "g_scaled", "U": "u_scaled"}

REGION_BITS = {"Gs": 1, "FP-F": 2, "PST": 4, "FP-pi": 8, "ST1": 16, "FP-AF": 32, "ST2": 64,
               "ST_u": 128}

CLASSES = {"ferro": ((1, -1), (1, 1)), "antiferro": ((-1, 1), (-1, -1))}


def _map(func: Callable, items: Sequence, jobs: int) -> list:
    if jobs <= 1 or len(items) < 2:
        return [func(item) for item in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, items))


def _at(params: ModelParams, control: str, value: float) -> ModelParams:
    if control not in CONTROLS:
        raise DomainError(f"control must be one of {sorted(CONTROLS)}")
    return params.with_(**{CONTROLS[control]: float(value)})


@dataclass
class Branch:
    """One continuous family of steady states along a control parameter."""

    label: BranchLabel
    control: str
    points: list = field(default_factory=list)
    mirrored: bool = False
    terminated: bool = False

    def values(self) -> np.ndarray:
        return np.array([c for c, _ in self.points])

    def rows(self) -> list:
        """(control, f, Z_p, stable) per point; mirrored branches report 1/f and -Z_p."""
        out = []
        for c, fp in self.points:
            f, zp = fp.f, fp.photon_imbalance
            if self.mirrored:
                f, zp = (math.inf if f == 0 else 1.0 / f), -zp
            out.append((c, f, zp, fp.stable))
        return out


class _SteadyStatesAt:
    """Picklable worker: steady states of one class at one control value."""

    def __init__(self, params, control, xi1, xi2):
        self.params, self.control, self.xi1, self.xi2 = params, control, xi1, xi2

    def __call__(self, value):
        return sc.steady_states(_at(self.params, self.control, value), self.xi1, self.xi2)


def bifurcation_scan(params: ModelParams, xi1: int, xi2: int, control: str,
                     values: Sequence[float], mirror: bool = False, jobs: int = 1,
                     max_jump: float | None = None) -> list:
    """Continue all steady states of class (xi1, xi2) along ``control``.

    At each value the exact steady states are located and attached to the
    open branch with the same name and the nearest f (with ``max_jump`` set,
    a larger jump in f opens a new branch instead).  A branch that finds no partner at
    the next value is closed with ``terminated = True``; this is how folds
    and the end of a family show up.  With ``mirror`` each branch is also
    emitted in its f -> 1/f image.
    """
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        raise DomainError("a scan needs at least two control values")
    if np.any(np.diff(values) <= 0) and np.any(np.diff(values) >= 0):
        raise DomainError("control values must be strictly monotone")
    states = _map(_SteadyStatesAt(params, control, xi1, xi2), list(values), jobs)
    open_branches: list[Branch] = []
    done: list[Branch] = []
    for value, fps in zip(values, states):
        still_open = []
        unmatched = list(fps)
        for br in open_branches:
            last = br.points[-1][1]
            cands = [fp for fp in unmatched if fp.branch.name == br.label.name
                     and (max_jump is None or abs(fp.f - last.f) <= max_jump)]
            if not cands:
                br.terminated = True
                done.append(br)
                continue
            best = min(cands, key=lambda fp: abs(fp.f - last.f))
            unmatched.remove(best)
            br.points.append((float(value), best))
            still_open.append(br)
        for fp in unmatched:
            still_open.append(Branch(fp.branch, control, [(float(value), fp)]))
        open_branches = still_open
    branches = done + open_branches
    branches.sort(key=lambda b: (b.points[0][0], -b.points[0][1].f))
    if mirror:
        branches += [Branch(b.label, control, list(b.points), mirrored=True,
                            terminated=b.terminated) for b in branches
                     if not b.label.is_symmetric]
    return branches


@dataclass(frozen=True, eq=False)
class PhaseDiagram:
    """Region map over a (g, U) grid.

    ``masks[i, j]`` is the bitwise OR of :data:`REGION_BITS` for the stable
    steady states at ``(g[j], U[i])``.  Cells below ``g_min_cutoff`` are
    ``excluded``; cells where some steady-state solve failed are flagged
    ``unresolved`` (their mask holds what was found).
    """

    g: np.ndarray
    u: np.ndarray
    cls: str
    masks: np.ndarray
    excluded: np.ndarray
    unresolved: np.ndarray
    g_min_cutoff: float

    def contains(self, name: str) -> np.ndarray:
        return (self.masks & REGION_BITS[name]) != 0

    def rows(self) -> list:
        """(g, U, mask, excluded, unresolved) with g varying fastest."""
        out = []
        for i, u in enumerate(self.u):
            for j, g in enumerate(self.g):
                out.append((g, u, int(self.masks[i, j]), bool(self.excluded[i, j]),
                            bool(self.unresolved[i, j])))
        return out


def decode_mask(mask: int) -> list:
    return [name for name, bit in REGION_BITS.items() if mask & bit]


class _CellWorker:
    def __init__(self, params, cls):
        self.params, self.cls = params, cls

    def __call__(self, gu):
        g, u = gu
        p = self.params.with_(g_scaled=g, u_scaled=u)
        mask, failed = 0, False
        for xi1, xi2 in CLASSES[self.cls]:
            errors: list = []
            try:
                fps = sc.steady_states(p, xi1, xi2, errors=errors)
            except JCDimerError:
                failed = True
                continue
            failed = failed or bool(errors)
            for fp in fps:
                if fp.stable:
                    mask |= REGION_BITS[fp.branch.name]
        return mask, failed


def phase_diagram(params: ModelParams, g_values: Sequence[float], u_values: Sequence[float],
                  cls: str = "ferro", g_min_cutoff: float = 0.25, jobs: int = 1) -> PhaseDiagram:
    """Stable steady states of the ``"ferro"`` (xi1 = +1) or ``"antiferro"`` (xi1 = -1) class."""
    if cls not in CLASSES:
        raise DomainError("cls must be 'ferro' or 'antiferro'")
    g_values = np.asarray(g_values, dtype=float)
    u_values = np.asarray(u_values, dtype=float)
    if g_values.size < 8 or u_values.size < 8:
        raise DomainError("phase diagrams need at least 8 points per axis")
    shape = (u_values.size, g_values.size)
    masks = np.zeros(shape, dtype=np.int64)
    excluded = np.zeros(shape, dtype=bool)
    unresolved = np.zeros(shape, dtype=bool)
    cells = []
    for i, u in enumerate(u_values):
        for j, g in enumerate(g_values):
            if g < g_min_cutoff:
                excluded[i, j] = True
            else:
                cells.append((i, j))
    results = _map(_CellWorker(params, cls), [(g_values[j], u_values[i]) for i, j in cells], jobs)
    for (i, j), (mask, failed) in zip(cells, results):
        masks[i, j] = mask
        unresolved[i, j] = failed
    return PhaseDiagram(g_values, u_values, cls, masks, excluded, unresolved, g_min_cutoff)


def _bisect_predicate(pred: Callable[[float], bool], lo: float, hi: float, tol: float) -> float:
    p_lo, p_hi = pred(lo), pred(hi)
    if p_lo == p_hi:
        raise ConvergenceError(f"no transition between {lo} and {hi}", float("nan"))
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pred(mid) == p_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def locate_stability_change(params: ModelParams, name: str, control: str, lo: float,
                            hi: float, tol: float = 1e-6) -> float:
    """Control value where the named steady state changes its stability.

    The state must exist on the whole interval; a missing state counts as
    unstable.
    """
    def stable(value):
        try:
            return sc.find_fixed_point(_at(params, control, value), name).stable
        except ConvergenceError:
            return False
    return _bisect_predicate(stable, lo, hi, tol)


def locate_existence_boundary(params: ModelParams, name: str, control: str, lo: float,
                              hi: float, tol: float = 1e-6, stable_only: bool = False) -> float:
    """Control value where the named steady state appears or disappears (e.g. a fold)."""
    label = BranchLabel.from_name(name)
    xi1, xi2 = BRANCH_SIGNS[label.name]

    def exists(value):
        fps = sc.steady_states(_at(params, control, value), xi1, xi2,
                               with_stability=stable_only)
        return any(fp.branch.name == label.name and (fp.stable or not stable_only)
                   for fp in fps)
    return _bisect_predicate(exists, lo, hi, tol)
