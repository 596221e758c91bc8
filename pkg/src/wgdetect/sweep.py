"""Parameter grids over the detection probability.

Axis values are in user units (``/2pi`` MHz, or ``/2pi`` for ``Gamma_1``).
Each cell is computed independently from the base parameters, so serial and
parallel evaluation give identical grids.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Sequence

import numpy as np

from . import __version__
from .model import (
    TWO_PI,
    BareParams,
    CavityParams,
    DegenerateDenominator,
    DetectionReport,
    GOptUndefined,
    detection,
    optimal_g,
)

BARE_AXES = ("gamma_q", "h", "delta", "Gamma_1")
CAVITY_AXES = BARE_AXES + ("V", "g", "delta_c")

OK = "ok"
DEGENERATE = "degenerate"


class InvalidAxis(ValueError):
    pass


@dataclass(frozen=True)
class AxisSpec:
    parameter: str
    start: float
    stop: float
    count: int
    scale: str = "linear"

    def __post_init__(self):
        if self.parameter not in CAVITY_AXES:
            raise InvalidAxis(f"unknown sweep parameter {self.parameter!r}; expected one of {CAVITY_AXES}")
        if self.scale != "linear":
            raise InvalidAxis(f"only linear axes are supported, got {self.scale!r}")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise InvalidAxis("axis bounds must be finite")
        if not self.start < self.stop:
            raise InvalidAxis(f"axis {self.parameter}: start must be < stop")
        if int(self.count) != self.count or self.count < 2:
            raise InvalidAxis(f"axis {self.parameter}: count must be an integer >= 2")

    @classmethod
    def parse(cls, text: str) -> "AxisSpec":
        """Parse ``param:start:stop:count``."""
        parts = text.split(":")
        if len(parts) != 4:
            raise InvalidAxis(f"axis must look like param:start:stop:count, got {text!r}")
        name, start, stop, count = parts
        try:
            return cls(name, float(start), float(stop), int(count))
        except ValueError as exc:
            if isinstance(exc, InvalidAxis):
                raise
            raise InvalidAxis(f"bad axis {text!r}: {exc}") from None

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)

    def to_dict(self) -> dict:
        return {"parameter": self.parameter, "start": self.start, "stop": self.stop,
                "count": self.count, "scale": self.scale}


def set_user_param(p: BareParams, name: str, value: float) -> BareParams:
    """Return ``p`` with one parameter replaced by a ``/2pi`` user value."""
    if name == "Gamma_1":
        if value < 0:
            raise ValueError("Gamma_1 must be >= 0")
        return p.with_Gamma_1(TWO_PI * value)
    return replace(p, **{name: TWO_PI * value})


def matched_g(p: CavityParams) -> CavityParams:
    """Set ``g`` to the transmission-zeroing value for the current ``V``.

    Below the threshold ``Gamma_2 < gamma_c`` no such ``g`` exists and ``g``
    is set to zero, which is where the matched curve ends continuously.
    """
    try:
        g = optimal_g(p.gamma_q, p.gamma_c, p.Gamma_2)
    except GOptUndefined:
        g = 0.0
    return replace(p, g=g)


@dataclass
class SweepResult:
    axes: tuple[AxisSpec, ...]
    base: BareParams
    cells: list[DetectionReport | None]
    coords: list[tuple[float, ...]]
    status: list[str]
    g_mode: str = "fixed"
    provenance: dict = field(default_factory=dict)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.count for a in self.axes)

    def eta_array(self, fill: float = np.nan) -> np.ndarray:
        """``eta`` reshaped to the grid; degenerate cells get ``fill``."""
        vals = [fill if c is None else c.eta for c in self.cells]
        return np.array(vals).reshape(self.shape)

    def best(self) -> tuple[int, DetectionReport]:
        """Index and report of the highest-eta cell (first one on ties)."""
        best_i, best_c = -1, None
        for i, c in enumerate(self.cells):
            if c is not None and (best_c is None or c.eta > best_c.eta):
                best_i, best_c = i, c
        if best_c is None:
            raise ValueError("sweep has no valid cells")
        return best_i, best_c

    @property
    def n_degenerate(self) -> int:
        return self.status.count(DEGENERATE)


def point_params(base: BareParams, names: Sequence[str], coord: Sequence[float], g_mode: str = "fixed") -> BareParams:
    p = base
    for name, val in zip(names, coord):
        p = set_user_param(p, name, val)
    if g_mode == "matched":
        p = matched_g(p)
    return p


def _evaluate(base, names, coords, g_mode):
    out = []
    for coord in coords:
        try:
            out.append(detection(point_params(base, names, coord, g_mode)))
        except DegenerateDenominator:
            out.append(None)
    return out


def evaluate_points(
    base: BareParams,
    names: Sequence[str],
    coords: Sequence[tuple[float, ...]],
    *,
    workers: int | None = 1,
    g_mode: str = "fixed",
) -> list[DetectionReport | None]:
    """Detection reports at each coordinate tuple, in input order.

    Degenerate points come back as ``None``.
    """
    names = tuple(names)
    coords = list(coords)
    if workers is None:
        workers = os.cpu_count() or 1
    if workers <= 1 or len(coords) < 2 * workers:
        return _evaluate(base, names, coords, g_mode)
    chunk = math.ceil(len(coords) / workers)
    parts = [coords[i : i + chunk] for i in range(0, len(coords), chunk)]
    cells = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_evaluate, base, names, part, g_mode) for part in parts]
        for f in futures:
            cells.extend(f.result())
    return cells


def _check_axes(base: BareParams, axes: Sequence[AxisSpec]) -> None:
    if not 1 <= len(axes) <= 2:
        raise InvalidAxis("sweeps take one or two axes")
    allowed = CAVITY_AXES if isinstance(base, CavityParams) else BARE_AXES
    names = [a.parameter for a in axes]
    for n in names:
        if n not in allowed:
            raise InvalidAxis(f"parameter {n!r} does not apply to a bare detector")
    if len(set(names)) != len(names):
        raise InvalidAxis("axes must name distinct parameters")
    if {"h", "Gamma_1"} <= set(names):
        raise InvalidAxis("h and Gamma_1 cannot both be swept")


def sweep(
    base: BareParams,
    axes: Sequence[AxisSpec],
    *,
    workers: int | None = 1,
    g_mode: str = "fixed",
) -> SweepResult:
    """Evaluate the detection report on a row-major grid.

    ``workers`` > 1 splits the grid into contiguous chunks evaluated in a
    process pool; ``None`` uses ``os.cpu_count()``.  ``g_mode="matched"``
    (cavity only) replaces ``g`` in every cell by :func:`matched_g`.
    """
    axes = tuple(axes)
    _check_axes(base, axes)
    if g_mode not in ("fixed", "matched"):
        raise ValueError(f"g_mode must be 'fixed' or 'matched', got {g_mode!r}")
    if g_mode == "matched":
        if not isinstance(base, CavityParams):
            raise InvalidAxis("matched g requires cavity parameters")
        if "g" in [a.parameter for a in axes]:
            raise InvalidAxis("g cannot be swept when it is matched")

    grids = [a.values() for a in axes]
    coords = [tuple(float(x) for x in c) for c in _product(grids)]

    cells = evaluate_points(base, [a.parameter for a in axes], coords, workers=workers, g_mode=g_mode)

    status = [DEGENERATE if c is None else OK for c in cells]
    provenance = {
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "version": __version__,
        "base_user": base.user_values(),
        "base_angular": base.angular_values(),
        "flavor": "cavity" if isinstance(base, CavityParams) else "bare",
        "g_mode": g_mode,
    }
    return SweepResult(axes, base, cells, coords, status, g_mode, provenance)


def _product(grids):
    if len(grids) == 1:
        return [(x,) for x in grids[0]]
    return [(x, y) for x in grids[0] for y in grids[1]]


def line_scan_fig6(base: CavityParams, v_axis: AxisSpec, *, g_mode: str = "matched", workers: int | None = 1) -> SweepResult:
    """Detection budget versus waveguide-cavity coupling with no direct atom coupling.

    By default ``g`` follows the transmission-zeroing design value at each
    ``V``; pass ``g_mode="fixed"`` to hold ``base.g`` instead.
    """
    if not isinstance(base, CavityParams):
        raise InvalidAxis("the V line scan needs cavity parameters")
    if base.h != 0:
        raise ValueError("the V line scan is defined for h = 0")
    if v_axis.parameter != "V":
        raise InvalidAxis(f"line scan axis must be V, got {v_axis.parameter!r}")
    return sweep(base, [v_axis], g_mode=g_mode, workers=workers)


# Figure presets: base parameters in user units, default axes and g handling.
FIGURES = {
    2: dict(
        flavor="bare",
        base=dict(gamma_q=0.16, h=0.0, delta=0.0),
        axes=[AxisSpec("gamma_q", 0.01, 1.0, 201), AxisSpec("h", 0.0, 1.5, 201)],
    ),
    3: dict(
        flavor="bare",
        base=dict(gamma_q=0.16, h=0.0, delta=0.0),
        axes=[AxisSpec("delta", -2.0, 2.0, 201), AxisSpec("Gamma_1", 0.0, 0.8, 201)],
    ),
    4: dict(
        flavor="cavity",
        base=dict(gamma_q=0.16, gamma_c=0.76, g=0.29, h=0.0, V=0.0),
        axes=[AxisSpec("h", 0.0, 1.0, 201), AxisSpec("V", 0.0, 1.2, 201)],
    ),
    5: dict(
        flavor="cavity",
        base=dict(gamma_q=0.16, gamma_c=0.76, h=0.0, V=0.0, g=0.0),
        axes=[AxisSpec("V", 0.0, 1.2, 201), AxisSpec("g", 0.0, 0.6, 201)],
    ),
    6: dict(
        flavor="cavity",
        base=dict(gamma_q=0.16, gamma_c=0.76, h=0.0, V=0.0, g=0.0),
        axes=[AxisSpec("V", 0.0, 1.2, 2001)],
        g_mode="matched",
    ),
}


def figure_base(number: int, **overrides) -> BareParams:
    preset = FIGURES[number]
    user = {**preset["base"], **overrides}
    cls = CavityParams if preset["flavor"] == "cavity" else BareParams
    return cls.from_user(**user)


def figure_sweep(number: int, axes: Sequence[AxisSpec] | None = None, *, workers: int | None = 1, **overrides) -> SweepResult:
    """Regenerate the data grid behind one of the figures 2-6."""
    if number not in FIGURES:
        raise KeyError(f"no figure preset {number}; choose from {sorted(FIGURES)}")
    preset = FIGURES[number]
    base = figure_base(number, **overrides)
    axes = list(axes) if axes else preset["axes"]
    if number == 6:
        return line_scan_fig6(base, axes[0], g_mode=preset["g_mode"], workers=workers)
    res = sweep(base, axes, workers=workers)
    res.provenance["figure"] = number
    return res
