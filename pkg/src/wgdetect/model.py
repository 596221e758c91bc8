"""Closed-form scattering of a single waveguide photon by a two-level detector.

Two configurations are covered:

* a bare two-level atom point-coupled to the waveguide, and
* the same atom inside a ring resonator with two degenerate
  counter-propagating whispering-gallery modes ``a`` and ``b``.

All rates, frequencies and couplings are stored in angular units
(rad * MHz).  Values are usually quoted as ``x / 2pi`` MHz; use
the ``from_user`` constructors to ingest them.  Only detunings enter the
stationary solutions, so the parameter classes store ``delta = w - Omega``
and ``delta_c = w - w_c`` directly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Literal

TWO_PI = 2.0 * math.pi

# A denominator is treated as zero below this fraction of its term scale.
DEGENERACY_RTOL = 1e-14


class DegenerateDenominator(ZeroDivisionError):
    """A closed-form denominator vanished (relative to the size of its terms)."""

    def __init__(self, factor: str, value: complex, scale: float):
        self.factor = factor
        self.value = value
        self.scale = scale
        super().__init__(f"denominator {factor} = {value!r} is zero relative to scale {scale:.3g}")


class GOptUndefined(ValueError):
    """Optimal atom-cavity coupling requested where Gamma_2 < gamma_c."""


def to_angular(value: float) -> float:
    """Convert a ``/2pi`` user value to angular units."""
    return TWO_PI * value


def to_user(value: float) -> float:
    return value / TWO_PI


@dataclass(frozen=True, kw_only=True)
class BareParams:
    """Bare detector parameters in angular units.

    ``h`` is the real, non-negative atom-waveguide coupling; ``v_g`` is the
    group velocity, conventionally 1.
    """

    gamma_q: float
    h: float
    delta: float = 0.0
    v_g: float = 1.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not math.isfinite(v):
                raise ValueError(f"{f.name} must be finite, got {v!r}")
        if self.gamma_q < 0:
            raise ValueError(f"gamma_q must be >= 0, got {self.gamma_q}")
        if self.h < 0:
            raise ValueError(f"h must be >= 0, got {self.h}")
        if self.v_g <= 0:
            raise ValueError(f"v_g must be > 0, got {self.v_g}")

    @property
    def Gamma_1(self) -> float:
        return self.h * self.h / self.v_g

    @classmethod
    def from_user(cls, **user):
        """Build from ``/2pi`` MHz values.

        ``Gamma_1`` may be given instead of ``h``; ``v_g`` is taken as-is.
        """
        v_g = user.pop("v_g", 1.0)
        kwargs = {k: to_angular(v) for k, v in user.items()}
        if "Gamma_1" in kwargs:
            if "h" in kwargs:
                raise ValueError("give either h or Gamma_1, not both")
            Gamma_1 = kwargs.pop("Gamma_1")
            if Gamma_1 < 0:
                raise ValueError(f"Gamma_1 must be >= 0, got {Gamma_1}")
            kwargs["h"] = math.sqrt(Gamma_1 * v_g)
        return cls(v_g=v_g, **kwargs)

    @classmethod
    def from_frequencies(cls, *, omega: float, Omega: float, **kw):
        """Build from absolute photon/atom frequencies (angular units)."""
        return cls(delta=omega - Omega, **kw)

    def with_Gamma_1(self, Gamma_1: float):
        return replace(self, h=math.sqrt(Gamma_1 * self.v_g))

    def user_values(self) -> dict[str, float]:
        out = {f.name: to_user(getattr(self, f.name)) for f in fields(self) if f.name != "v_g"}
        out["v_g"] = self.v_g
        return out

    def angular_values(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True, kw_only=True)
class CavityParams(BareParams):
    """Detector inside a two-mode ring cavity (angular units).

    ``V`` couples the waveguide to each cavity mode and ``g`` couples the
    atom to each mode; both are real and non-negative.
    """

    gamma_c: float
    V: float
    g: float
    delta_c: float = 0.0

    def __post_init__(self):
        super().__post_init__()
        for name in ("gamma_c", "V", "g"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")

    @property
    def Gamma_2(self) -> float:
        return self.V * self.V / (2.0 * self.v_g)

    @classmethod
    def from_frequencies(cls, *, omega: float, Omega: float, omega_c: float, **kw):
        return cls(delta=omega - Omega, delta_c=omega - omega_c, **kw)


@dataclass(frozen=True)
class ScatterSolution:
    t: complex
    r: complex
    e_q: complex
    e_a: complex = 0j
    e_b: complex = 0j
    flavor: Literal["bare", "cavity"] = "bare"

    LABELS = ("t", "r", "e_q", "e_a", "e_b")

    def as_tuple(self) -> tuple[complex, ...]:
        if self.flavor == "bare":
            return (self.t, self.r, self.e_q)
        return (self.t, self.r, self.e_q, self.e_a, self.e_b)

    def labels(self) -> tuple[str, ...]:
        return self.LABELS[: len(self.as_tuple())]


@dataclass(frozen=True)
class DetectionReport:
    """Detection probability and the squared amplitudes behind it.

    ``p_*`` are raw squared moduli.  ``eta`` is ``p_q`` over the sum of all of
    them, so the same normalisation applied to the other channels gives the
    outcome budget returned by :meth:`shares`.
    """

    eta: float
    p_t: float
    p_r: float
    p_q: float
    p_a: float
    p_b: float
    conversion: float
    solution: ScatterSolution = field(repr=False)

    @classmethod
    def from_solution(cls, sol: ScatterSolution) -> "DetectionReport":
        p_t, p_r, p_q = abs(sol.t) ** 2, abs(sol.r) ** 2, abs(sol.e_q) ** 2
        p_a, p_b = abs(sol.e_a) ** 2, abs(sol.e_b) ** 2
        total = p_t + p_r + p_q + p_a + p_b
        return cls(
            eta=p_q / total,
            p_t=p_t,
            p_r=p_r,
            p_q=p_q,
            p_a=p_a,
            p_b=p_b,
            conversion=1.0 - p_t - p_r,
            solution=sol,
        )

    @property
    def total(self) -> float:
        return self.p_t + self.p_r + self.p_q + self.p_a + self.p_b

    def shares(self) -> dict[str, float]:
        """Each channel's fraction of ``total``; the ``q`` entry equals ``eta``."""
        tot = self.total
        return {
            "t": self.p_t / tot,
            "r": self.p_r / tot,
            "q": self.p_q / tot,
            "a": self.p_a / tot,
            "b": self.p_b / tot,
        }

    @property
    def conversion_share(self) -> float:
        """Normalised budget not left in the waveguide: ``1 - share_t - share_r``."""
        s = self.shares()
        return 1.0 - s["t"] - s["r"]


@dataclass(frozen=True)
class MatchingReport:
    phase_residual: float
    magnitude_residual: float
    magnitude_scale: float
    g_opt: float | None

    @property
    def g_opt_defined(self) -> bool:
        return self.g_opt is not None


def _check(factor: str, value: complex, scale: float) -> None:
    if abs(value) <= DEGENERACY_RTOL * scale:
        raise DegenerateDenominator(factor, value, scale)


def bare_amplitudes(p: BareParams) -> ScatterSolution:
    G1 = p.Gamma_1
    z = p.delta + 1j * p.gamma_q
    den = z + 1j * G1
    _check("delta + i(gamma_q + Gamma_1)", den, abs(p.delta) + p.gamma_q + G1)
    return ScatterSolution(t=z / den, r=-1j * G1 / den, e_q=p.h / den, flavor="bare")


def bare_dp(p: BareParams) -> DetectionReport:
    return DetectionReport.from_solution(bare_amplitudes(p))


def cavity_amplitudes(p: CavityParams) -> ScatterSolution:
    """Five stationary amplitudes of the atom-in-ring configuration.

    With ``v = v_g``, ``A = delta_c + i gamma_c``, ``B = delta + i gamma_q``,
    ``Lam = A h + g V`` and ``D = 2i(2g^2 - AB) + 2(A Gamma_1 + B Gamma_2)
    + 4hgV/v``::

        e_q = -2i Lam / D
        e_b = -(2ig + hV/v) Lam / ((A + i Gamma_2) D)
        e_a = (V D - (2ig + hV/v) Lam) / ((A + i Gamma_2) D)
        r   = -2 Lam^2 / (v (A + i Gamma_2) D)
        t   = ((A - i Gamma_2) D - 2 Lam^2 / v) / ((A + i Gamma_2) D)

    At ``v = 1`` these reduce to the usual unit-velocity forms; the ``v``
    placement follows from rescaling ``h, V`` by ``1/sqrt(v)``.
    """
    v = p.v_g
    h, V, g = p.h, p.V, p.g
    G1, G2 = p.Gamma_1, p.Gamma_2
    A = p.delta_c + 1j * p.gamma_c
    B = p.delta + 1j * p.gamma_q
    lam = A * h + g * V
    upsilon = 2.0 * g * g - A * B
    theta = A * G1 + B * G2
    hgV = h * g * V / v

    F = A + 1j * G2
    _check("A + i Gamma_2", F, abs(p.delta_c) + p.gamma_c + G2)
    D = 2j * upsilon + 2.0 * theta + 4.0 * hgV
    _check(
        "2i Upsilon + 2 Theta + 4hgV",
        D,
        4 * g * g + 2 * abs(A) * abs(B) + 2 * abs(A) * G1 + 2 * abs(B) * G2 + 4 * hgV,
    )

    FD = F * D
    _check("(A + i Gamma_2) D", FD, abs(F) * abs(D))
    mix = 2j * g + h * V / v
    return ScatterSolution(
        t=((A - 1j * G2) * D - 2.0 * lam * lam / v) / FD,
        r=-2.0 * lam * lam / (v * FD),
        e_q=-2j * lam / D,
        e_a=(V * D - mix * lam) / FD,
        e_b=-mix * lam / FD,
        flavor="cavity",
    )


def cavity_dp(p: CavityParams) -> DetectionReport:
    return DetectionReport.from_solution(cavity_amplitudes(p))


def amplitudes(p: BareParams) -> ScatterSolution:
    """Dispatch on parameter type."""
    if isinstance(p, CavityParams):
        return cavity_amplitudes(p)
    return bare_amplitudes(p)


def detection(p: BareParams) -> DetectionReport:
    return DetectionReport.from_solution(amplitudes(p))


def optimal_g(gamma_q: float, gamma_c: float, Gamma_2: float) -> float:
    """Atom-cavity coupling that zeroes transmission at resonance with h = 0.

    ``sqrt((Gamma_2^2 - gamma_c^2) gamma_q / (2 gamma_c))``; requires
    ``Gamma_2 >= gamma_c`` and ``gamma_c > 0``.
    """
    if gamma_c <= 0:
        raise GOptUndefined("gamma_c must be > 0")
    if Gamma_2 < gamma_c:
        raise GOptUndefined(f"Gamma_2 = {Gamma_2:.6g} < gamma_c = {gamma_c:.6g}")
    return math.sqrt((Gamma_2 * Gamma_2 - gamma_c * gamma_c) * gamma_q / (2.0 * gamma_c))


def matching_report(p: CavityParams) -> MatchingReport:
    """Phase and magnitude matching residuals plus the optimal ``g``.

    The magnitude residual is returned together with the sum of the
    magnitudes of its terms so callers can judge "zero" relative to scale.
    """
    G1, G2 = p.Gamma_1, p.Gamma_2
    gq, gc, g, h, V = p.gamma_q, p.gamma_c, p.g, p.h, p.V
    phase = G2 * V * g * h
    bracket = 2 * g * g + gq * (gc + G2) + gc * G1
    magnitude = (gc - G2) * bracket + g * g * V * V - h * h * gc * gc
    scale = abs(gc - G2) * bracket + g * g * V * V + h * h * gc * gc
    try:
        g_opt = optimal_g(gq, gc, G2)
    except GOptUndefined:
        g_opt = None
    return MatchingReport(phase, magnitude, scale, g_opt)
