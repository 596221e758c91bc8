"""Locating the couplings that maximise the detection probability.

Bounds and returned locations are in user units (``/2pi``).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.optimize import minimize

from .model import (
    BareParams,
    CavityParams,
    DegenerateDenominator,
    DetectionReport,
    GOptUndefined,
    MatchingReport,
    detection,
    matching_report,
    optimal_g,
)
from .sweep import evaluate_points, point_params

INV_PHI = (math.sqrt(5) - 1) / 2

FREE_PARAMETERS = ("V", "g", "h", "Gamma_1")
DEFAULT_BOUNDS = {"V": (0.0, 1.2), "g": (0.0, 0.6), "h": (0.0, 1.0), "Gamma_1": (0.0, 1.0)}

GRID_POINTS = 41
SIMPLEX_XATOL = 1e-10
SIMPLEX_FATOL = 1e-14
SIMPLEX_MAXITER = 500


@dataclass(frozen=True)
class OptimizationProblem:
    flavor: str
    free_parameters: tuple[str, ...]
    bounds: Mapping[str, tuple[float, float]]
    fixed: BareParams

    def __post_init__(self):
        if self.flavor not in ("bare", "cavity"):
            raise ValueError(f"flavor must be bare or cavity, got {self.flavor!r}")
        if not self.free_parameters:
            raise ValueError("at least one free parameter is required")
        for name in self.free_parameters:
            if name not in FREE_PARAMETERS:
                raise ValueError(f"cannot optimise over {name!r}; choose from {FREE_PARAMETERS}")
            if self.flavor == "bare" and name in ("V", "g"):
                raise ValueError(f"{name} is not a bare-detector parameter")
            lo, hi = self.bounds[name]
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
                raise ValueError(f"bounds for {name} must be finite with lower < upper")
            if lo < 0:
                raise ValueError(f"{name} must be non-negative")
        if {"h", "Gamma_1"} <= set(self.free_parameters):
            raise ValueError("h and Gamma_1 describe the same coupling; free only one")
        if (self.flavor == "cavity") != isinstance(self.fixed, CavityParams):
            raise ValueError("fixed parameters do not match the flavor")

    @classmethod
    def cavity(cls, fixed: CavityParams, free=("V", "g"), bounds=None):
        b = {k: DEFAULT_BOUNDS[k] for k in free}
        b.update(bounds or {})
        return cls("cavity", tuple(free), b, fixed)


@dataclass
class Optimum:
    location: dict[str, float]
    eta_max: float
    iterations: int
    evaluations: int
    converged: bool
    reason: str
    report: DetectionReport = field(repr=False)
    params: BareParams = field(repr=False)
    matching: MatchingReport | None = None

    @property
    def interior(self) -> bool:
        return self.reason == "interior"


class _Tracker:
    """Wraps the objective and remembers the best probe ever evaluated."""

    def __init__(self, base: BareParams, names: Sequence[str]):
        self.base = base
        self.names = tuple(names)
        self.best_x: tuple[float, ...] | None = None
        self.best: DetectionReport | None = None
        self.calls = 0

    def __call__(self, x) -> float:
        self.calls += 1
        x = tuple(float(v) for v in x)
        try:
            rep = detection(point_params(self.base, self.names, x))
        except (DegenerateDenominator, ValueError):
            return -math.inf
        self.offer(x, rep)
        return rep.eta

    def offer(self, x, rep: DetectionReport | None) -> None:
        if rep is not None and (self.best is None or rep.eta > self.best.eta):
            self.best, self.best_x = rep, tuple(x)


def golden_section_max(f: Callable[[float], float], a: float, b: float, tol: float = 1e-10, max_iter: int = 500):
    """Maximise a unimodal ``f`` on ``[a, b]``.

    Returns ``(x, f(x), iterations)`` with the bracket shrunk below ``tol``.
    """
    if b - a <= tol:
        x = 0.5 * (a + b)
        return x, f(x), 0
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    it = 0
    while b - a > tol and it < max_iter:
        it += 1
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x), it


def _reason(loc: Mapping[str, float], bounds: Mapping[str, tuple[float, float]]) -> str:
    for name, x in loc.items():
        lo, hi = bounds[name]
        if lo == hi:
            return "pinned"
        tol = 1e-7 * (hi - lo)
        if x - lo <= tol or hi - x <= tol:
            return "on-bound"
    return "interior"


def optimize_bare(gamma_q: float, delta: float = 0.0, bounds: tuple[float, float] | None = None, tol: float = 1e-10) -> Optimum:
    """Maximise the bare-detector DP over ``Gamma_1``.

    ``gamma_q``, ``delta`` and ``bounds`` (on ``Gamma_1``) are ``/2pi``
    values.  The DP is unimodal in ``Gamma_1`` with its peak at
    ``sqrt(delta^2 + gamma_q^2)``, so a golden-section search suffices.
    """
    if bounds is None:
        bounds = (0.0, 10.0 * (abs(delta) + gamma_q) + 1.0)
    lo, hi = bounds
    if not lo <= hi or lo < 0:
        raise ValueError(f"invalid Gamma_1 bounds {bounds}")
    base = BareParams.from_user(gamma_q=gamma_q, delta=delta, h=0.0)
    track = _Tracker(base, ("Gamma_1",))
    f = lambda x: track((x,))
    x, _, it = golden_section_max(f, lo, hi, tol)
    if lo < hi:
        f(lo)
        f(hi)
    if track.best is None:
        raise DegenerateDenominator("bare denominator", 0j, 0.0)
    loc = {"Gamma_1": track.best_x[0]}
    reason = _reason(loc, {"Gamma_1": (lo, hi)})
    return Optimum(
        location=loc,
        eta_max=track.best.eta,
        iterations=it,
        evaluations=track.calls,
        converged=reason != "on-bound",
        reason=reason,
        report=track.best,
        params=point_params(base, ("Gamma_1",), track.best_x),
    )


def seed_from_matching(V_range: tuple[float, float], fixed: CavityParams, count: int = GRID_POINTS) -> list[CavityParams]:
    """Candidates ``(h=0, V, g_opt(V))`` for ``V`` on a coarse grid.

    ``V_range`` is in ``/2pi`` units; points where the optimal ``g`` is
    undefined are skipped, so the list may be empty.
    """
    out = []
    for V in np.linspace(V_range[0], V_range[1], count):
        p = point_params(fixed, ("h", "V"), (0.0, float(V)))
        try:
            g = optimal_g(p.gamma_q, p.gamma_c, p.Gamma_2)
        except GOptUndefined:
            continue
        out.append(replace(p, g=g))
    return out


def _ordered(names: Sequence[str]) -> tuple[str, ...]:
    # Lexicographic grid order doubles as the tie-break: smallest V, then g.
    return tuple(sorted(names, key=FREE_PARAMETERS.index))


def _refine(track: _Tracker, x0, bounds, step) -> tuple[int, bool]:
    lo = np.array([bounds[n][0] for n in track.names])
    hi = np.array([bounds[n][1] for n in track.names])
    x0 = np.asarray(x0, dtype=float)
    simplex = [x0.copy()]
    for i, s in enumerate(step):
        v = x0.copy()
        v[i] = v[i] + s if v[i] + s <= hi[i] else v[i] - s
        simplex.append(v)
    res = minimize(
        lambda x: -track(x),
        x0,
        method="Nelder-Mead",
        bounds=list(zip(lo, hi)),
        options=dict(initial_simplex=np.array(simplex), xatol=SIMPLEX_XATOL,
                     fatol=SIMPLEX_FATOL, maxiter=SIMPLEX_MAXITER),
    )
    return int(res.nit), bool(res.success)


def optimize_cavity(problem: OptimizationProblem, grid_points: int = GRID_POINTS, workers: int | None = 1) -> Optimum:
    """Grid scan over the free parameters, then simplex refinement.

    When ``V`` and ``g`` are both free and ``h`` is zero or free, the
    matching-condition seeds are also evaluated and refined if one of them
    beats the grid.
    """
    names = _ordered(problem.free_parameters)
    bounds = {n: tuple(problem.bounds[n]) for n in names}
    base = problem.fixed
    track = _Tracker(base, names)

    axes = [np.linspace(*bounds[n], grid_points) for n in names]
    coords = [tuple(float(v) for v in c) for c in itertools.product(*axes)]
    for c, rep in zip(coords, evaluate_points(base, names, coords, workers=workers)):
        track.offer(c, rep)
    track.calls += len(coords)
    if track.best is None:
        raise DegenerateDenominator("every grid point", 0j, 0.0)
    grid_best_eta = track.best.eta
    starts = [track.best_x]

    h_free_or_zero = "h" in names or base.h == 0.0
    if problem.flavor == "cavity" and {"V", "g"} <= set(names) and h_free_or_zero:
        seed_best = None
        for p in seed_from_matching(bounds["V"], base, grid_points):
            x = tuple(_user_coord(p, n) for n in names)
            if not all(bounds[n][0] <= v <= bounds[n][1] for n, v in zip(names, x)):
                continue
            eta = track(x)
            if seed_best is None or eta > seed_best[0]:
                seed_best = (eta, x)
        if seed_best is not None and seed_best[0] > grid_best_eta:
            starts.append(seed_best[1])

    step = [(bounds[n][1] - bounds[n][0]) / (grid_points - 1) for n in names]
    iterations, converged = 0, True
    for x0 in starts:
        nit, ok = _refine(track, x0, bounds, step)
        iterations += nit
        converged = converged and ok

    loc = dict(zip(names, track.best_x))
    reason = _reason(loc, bounds)
    params = point_params(base, names, track.best_x)
    return Optimum(
        location=loc,
        eta_max=track.best.eta,
        iterations=iterations,
        evaluations=track.calls,
        converged=converged,
        reason=reason,
        report=track.best,
        params=params,
        matching=matching_report(params) if isinstance(params, CavityParams) else None,
    )


def _user_coord(p: BareParams, name: str) -> float:
    if name == "Gamma_1":
        return p.Gamma_1 / (2 * math.pi)
    return getattr(p, name) / (2 * math.pi)
